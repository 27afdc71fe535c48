#pragma once

#include <cmath>

#include "core/error.hpp"

namespace qac {

// Uniform periodic grid on [0, box_length). Point j sits at j*dx; the
// reciprocal grid follows the standard FFT bin layout.
struct SpatialGrid {
  int n_points = 0;
  double box_length = 0.0;
  double dx = 0.0;

  static SpatialGrid make(int n_points, double box_length) {
    if (n_points < 2 || (n_points & (n_points - 1)) != 0)
      throw invalid_argument_error("grid size must be a power of two >= 2");
    if (!(box_length > 0.0)) throw invalid_argument_error("box length must be positive");
    return {n_points, box_length, box_length / n_points};
  }

  double x(int j) const { return j * dx; }

  // Wave number (rad/nm) of FFT bin j: non-negative for j < n/2, negative
  // branch above.
  double k(int j) const {
    const int m = j < n_points / 2 ? j : j - n_points;
    return 2.0 * M_PI * m / box_length;
  }

  double k_max() const { return M_PI / dx; }

  // Minimal-image displacement, mapped into (-box/2, box/2].
  double wrap_displacement(double d) const {
    d = std::remainder(d, box_length);
    if (d <= -0.5 * box_length) d += box_length;
    return d;
  }

  // Map a coordinate into [0, box).
  double wrap_position(double x) const {
    double w = std::fmod(x, box_length);
    if (w < 0.0) w += box_length;
    return w;
  }
};

}  // namespace qac
