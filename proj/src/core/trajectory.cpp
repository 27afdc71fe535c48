#include "core/trajectory.hpp"

#include <cmath>

#include "core/coherence.hpp"
#include "core/constants.hpp"
#include "core/propagator.hpp"
#include "core/wavepacket.hpp"

namespace qac {

namespace {

bool all_finite(const std::vector<std::complex<double>>& v) {
  for (const auto& a : v)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
  return true;
}

}  // namespace

TrajectoryRecord run_trajectory(const SimulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();

  TrajectoryRecord rec;
  rec.config = cfg;
  rec.config_hash = cfg.hash();
  rec.seed = seed;
  rec.dt_ps = cfg.resolve_dt();
  rec.n_steps = cfg.n_steps();

  const SpatialGrid grid = cfg.make_grid();
  const int n = grid.n_points;
  const double dt = rec.dt_ps;
  const int stride = cfg.snapshot_stride();

  PhononEnsemble ensemble = sample_thermal_ensemble(cfg, seed);
  WavepacketState state = init_gaussian(grid, cfg.sigma0_nm, cfg.k0_per_nm, cfg.x0());
  Propagator prop(grid, cfg.mass_me, dt);
  Fft analysis_fft(n);

  std::vector<double> potential(n, 0.0);
  std::vector<std::complex<double>> mode_scratch;
  std::vector<std::complex<double>> density_components;
  std::vector<double> density(n, 0.0);  // |psi|^2 dx per point

  if (cfg.freeze_potential)
    synthesize_potential(ensemble, grid, analysis_fft, mode_scratch, potential);

  // Phase table for the circular mean; fixed by the grid.
  std::vector<double> cos_tab(n), sin_tab(n);
  {
    const double to_angle = 2.0 * M_PI / grid.box_length;
    for (int j = 0; j < n; ++j) {
      cos_tab[j] = std::cos(to_angle * grid.x(j));
      sin_tab[j] = std::sin(to_angle * grid.x(j));
    }
  }

  rec.x_cm_nm.reserve(rec.n_steps + 1);
  rec.variance_nm2.reserve(rec.n_steps + 1);

  double unwrapped = 0.0;
  double prev_center = 0.0;
  bool have_center = false;

  // Center/variance/norm bookkeeping for the current state; returns false
  // when the state is numerically unusable.
  auto record_moments = [&]() -> bool {
    double cs = 0.0, sn = 0.0, total = 0.0;
    for (int j = 0; j < n; ++j) {
      const double w = std::norm(state.psi[j]) * grid.dx;
      density[j] = w;
      cs += w * cos_tab[j];
      sn += w * sin_tab[j];
      total += w;
    }
    if (!std::isfinite(total)) return false;
    const double drift = std::abs(total - 1.0);
    rec.norm_drift = std::max(rec.norm_drift, drift);
    if (drift > cfg.norm_tol) return false;

    const double resultant = std::hypot(cs, sn) / total;
    double center = prev_center;  // carried forward when indeterminate
    if (resultant < 1e-6) {
      ++rec.indeterminate_center_samples;
    } else {
      center = std::atan2(sn, cs) * grid.box_length / (2.0 * M_PI);
      if (center < 0.0) center += grid.box_length;
    }
    if (!have_center) {
      unwrapped = center;
      have_center = true;
    } else {
      unwrapped += grid.wrap_displacement(center - prev_center);
    }
    prev_center = center;

    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = grid.wrap_displacement(grid.x(j) - center);
      var += density[j] * d * d;
    }
    var /= total;

    rec.x_cm_nm.push_back(unwrapped);
    rec.variance_nm2.push_back(var);

    if (std::abs(unwrapped - rec.x_cm_nm.front()) > 0.5 * grid.box_length &&
        var > std::pow(grid.box_length / 8.0, 2))
      rec.wrap_invalid = true;
    return true;
  };

  auto record_coherence = [&]() {
    const CoherenceProfile profile =
        coherence_profile(state, cfg.support_epsilon, analysis_fft);
    const auto l_phi = coherence_length(profile);
    if (l_phi)
      rec.coherence.push_back({state.time_ps, *l_phi, *l_phi / cfg.sigma0_nm});
  };

  auto record_energy = [&]() {
    if (!cfg.freeze_potential)
      synthesize_potential(ensemble, grid, analysis_fft, mode_scratch, potential);
    const double e =
        prop.kinetic_energy(state) + Propagator::potential_energy(state, potential);
    rec.energy.push_back({state.time_ps, e});
    rec.energy_drift_meV =
        std::max(rec.energy_drift_meV, std::abs(e - rec.energy.front().energy_meV));
  };

  if (!record_moments()) {
    rec.failure = "initial state is not normalized";
    return rec;
  }
  record_coherence();
  record_energy();

  for (int i = 0; i < rec.n_steps; ++i) {
    if (!cfg.freeze_potential) {
      // Landscape frozen at the step midpoint: modes currently sit at t_i,
      // so sample them rotated forward by dt/2.
      synthesize_potential(ensemble, grid, analysis_fft, mode_scratch, potential,
                           0.5 * dt);
    }
    if (cfg.back_action)
      density_fourier_components(density, ensemble, analysis_fft, mode_scratch,
                                 density_components);

    prop.step(state, potential);

    if (!cfg.freeze_potential) {
      if (cfg.back_action)
        evolve_modes(ensemble, dt, density_components);
      else
        evolve_modes(ensemble, dt);
    }

    if (!record_moments()) {
      rec.failure = all_finite(state.psi)
                        ? "norm drift exceeded tolerance"
                        : "state became non-finite";
      return rec;
    }
    const int step = i + 1;
    if (step % stride == 0 || step == rec.n_steps) record_coherence();
    if (step % cfg.energy_stride == 0 || step == rec.n_steps) record_energy();
  }

  rec.completed = true;
  return rec;
}

}  // namespace qac
