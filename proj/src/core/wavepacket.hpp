#pragma once

#include <complex>
#include <vector>

#include "core/config.hpp"
#include "core/grid.hpp"

namespace qac {

// Discretized electron state on the periodic grid; normalized so that
// sum |psi_j|^2 dx = 1.
struct WavepacketState {
  SpatialGrid grid;
  std::vector<std::complex<double>> psi;
  double time_ps = 0.0;

  double norm() const;
};

// Gaussian packet exp(-(x - x0)^2 / (4 sigma0^2) + i k0 x) built with
// minimal-image displacements and normalized on the grid.
WavepacketState init_gaussian(const SimulationConfig& cfg);
WavepacketState init_gaussian(const SpatialGrid& grid, double sigma0, double k0, double x0);

// First two moments of |psi|^2 on the ring. The centre is the circular
// mean (argument of the first circular moment), mapped to [0, box); the
// variance is the second central moment taken with minimal-image
// displacements about that centre. `resultant` is the magnitude of the
// first circular moment; values near zero mean the centre is undefined.
struct CircularMoments {
  double center = 0.0;
  double variance = 0.0;
  double resultant = 0.0;
};
CircularMoments circular_moments(const std::vector<double>& density_times_dx,
                                 const SpatialGrid& grid);
CircularMoments circular_moments(const WavepacketState& state);

}  // namespace qac
