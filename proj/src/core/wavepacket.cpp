#include "core/wavepacket.hpp"

#include <cmath>

#include "core/error.hpp"

namespace qac {

double WavepacketState::norm() const {
  double acc = 0.0;
  for (const auto& a : psi) acc += std::norm(a);
  return acc * grid.dx;
}

WavepacketState init_gaussian(const SimulationConfig& cfg) {
  return init_gaussian(cfg.make_grid(), cfg.sigma0_nm, cfg.k0_per_nm, cfg.x0());
}

WavepacketState init_gaussian(const SpatialGrid& grid, double sigma0, double k0, double x0) {
  if (!(sigma0 > 0.0)) throw invalid_argument_error("packet width must be positive");
  WavepacketState state{grid, std::vector<std::complex<double>>(grid.n_points), 0.0};
  const double inv = 1.0 / (4.0 * sigma0 * sigma0);
  double norm2 = 0.0;
  for (int j = 0; j < grid.n_points; ++j) {
    const double d = grid.wrap_displacement(grid.x(j) - x0);
    const double env = std::exp(-d * d * inv);
    state.psi[j] = std::polar(env, k0 * grid.x(j));
    norm2 += env * env;
  }
  norm2 *= grid.dx;
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& a : state.psi) a *= scale;
  return state;
}

CircularMoments circular_moments(const std::vector<double>& density_times_dx,
                                 const SpatialGrid& grid) {
  const int n = grid.n_points;
  const double to_angle = 2.0 * M_PI / grid.box_length;
  double cs = 0.0, sn = 0.0, total = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w = density_times_dx[j];
    const double th = to_angle * grid.x(j);
    cs += w * std::cos(th);
    sn += w * std::sin(th);
    total += w;
  }
  CircularMoments m;
  if (!(total > 0.0)) return m;
  m.resultant = std::hypot(cs, sn) / total;
  double center = std::atan2(sn, cs) / to_angle;
  if (center < 0.0) center += grid.box_length;
  m.center = center;
  double var = 0.0;
  for (int j = 0; j < n; ++j) {
    const double d = grid.wrap_displacement(grid.x(j) - center);
    var += density_times_dx[j] * d * d;
  }
  m.variance = var / total;
  return m;
}

CircularMoments circular_moments(const WavepacketState& state) {
  std::vector<double> w(state.grid.n_points);
  for (int j = 0; j < state.grid.n_points; ++j)
    w[j] = std::norm(state.psi[j]) * state.grid.dx;
  return circular_moments(w, state.grid);
}

}  // namespace qac
