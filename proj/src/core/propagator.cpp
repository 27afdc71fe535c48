#include "core/propagator.hpp"

#include <cmath>

#include "core/constants.hpp"
#include "core/error.hpp"

namespace qac {

Propagator::Propagator(const SpatialGrid& grid, double mass_me, double dt_ps)
    : grid_(grid),
      mass_internal_(mass_me * kElectronMass),
      dt_(dt_ps),
      fft_(grid.n_points),
      scratch_(grid.n_points) {
  if (!(mass_me > 0.0)) throw invalid_argument_error("mass must be positive");
  if (!(dt_ps != 0.0)) throw invalid_argument_error("time step must be nonzero");
  rebuild_tables();
}

void Propagator::set_dt(double dt_ps) {
  if (!(dt_ps != 0.0)) throw invalid_argument_error("time step must be nonzero");
  dt_ = dt_ps;
  rebuild_tables();
}

void Propagator::rebuild_tables() {
  const int n = grid_.n_points;
  kinetic_phase_.resize(n);
  kinetic_meV_.resize(n);
  const double inv_n = 1.0 / n;
  for (int j = 0; j < n; ++j) {
    const double k = grid_.k(j);
    const double energy = kHbar * kHbar * k * k / (2.0 * mass_internal_);
    kinetic_meV_[j] = energy;
    kinetic_phase_[j] = std::polar(inv_n, -energy * dt_ / kHbar);
  }
}

void Propagator::step(WavepacketState& state, const std::vector<double>& potential_meV) {
  const int n = grid_.n_points;
  if (static_cast<int>(state.psi.size()) != n ||
      static_cast<int>(potential_meV.size()) != n)
    throw invalid_argument_error("state and potential must match the grid");

  const double half = -0.5 * dt_ / kHbar;
  for (int j = 0; j < n; ++j) state.psi[j] *= std::polar(1.0, half * potential_meV[j]);
  fft_.forward(state.psi.data(), scratch_.data());
  for (int j = 0; j < n; ++j) scratch_[j] *= kinetic_phase_[j];
  fft_.backward(scratch_.data(), state.psi.data());
  for (int j = 0; j < n; ++j) state.psi[j] *= std::polar(1.0, half * potential_meV[j]);
  state.time_ps += dt_;
}

double Propagator::kinetic_energy(const WavepacketState& state) {
  const int n = grid_.n_points;
  fft_.forward(state.psi.data(), scratch_.data());
  double acc = 0.0, norm2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w = std::norm(scratch_[j]);
    acc += kinetic_meV_[j] * w;
    norm2 += w;
  }
  return norm2 > 0.0 ? acc / norm2 : 0.0;
}

double Propagator::potential_energy(const WavepacketState& state,
                                    const std::vector<double>& potential_meV) {
  double acc = 0.0;
  for (std::size_t j = 0; j < state.psi.size(); ++j)
    acc += potential_meV[j] * std::norm(state.psi[j]);
  return acc * state.grid.dx;
}

}  // namespace qac
