#include "core/validate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <set>
#include <vector>

#include "core/coherence.hpp"
#include "core/config.hpp"
#include "core/constants.hpp"
#include "core/error.hpp"
#include "core/fft.hpp"
#include "core/grid.hpp"
#include "core/kinks.hpp"
#include "core/phonon.hpp"
#include "core/propagator.hpp"
#include "core/record_io.hpp"
#include "core/rng.hpp"
#include "core/sweep.hpp"
#include "core/transport.hpp"
#include "core/wavepacket.hpp"

namespace qac {
namespace {

std::string fmt_detail(const char* format, double measured, double bound) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, measured, bound);
  return buf;
}

// Small, fast config used by the dynamical checks.
SimulationConfig quick_config() {
  SimulationConfig cfg;
  cfg.cells = 64;
  cfg.t_total_ps = 0.25;
  cfg.snapshot_target = 20;
  return cfg;
}

void run_check(std::vector<CheckResult>& out, const std::string& name,
               const std::function<CheckResult()>& body) {
  CheckResult r;
  r.name = name;
  try {
    r = body();
    r.name = name;
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  out.push_back(std::move(r));
}

CheckResult bounded(double measured, double bound, const char* format) {
  CheckResult r;
  r.pass = measured <= bound;
  r.detail = fmt_detail(format, measured, bound);
  return r;
}

}  // namespace

std::vector<CheckResult> run_validation_suite() {
  std::vector<CheckResult> results;

  run_check(results, "constants: hbar^2/(2 m_e) consistency", [] {
    const double derived = kHbar * kHbar / (2.0 * kElectronMass);
    return bounded(std::abs(derived - kHbar2Over2Me), 1e-12,
                   "|derived - tabulated| = %.3g (bound %.3g)");
  });

  run_check(results, "rng: identical streams agree, distinct streams differ", [] {
    CounterRng a(stream_key(42, 7)), b(stream_key(42, 7)), c(stream_key(42, 8));
    bool same = true, distinct = false;
    for (int i = 0; i < 64; ++i) {
      const std::uint64_t ua = a.next_u64(), ub = b.next_u64(), uc = c.next_u64();
      same = same && ua == ub;
      distinct = distinct || ua != uc;
    }
    CheckResult r;
    r.pass = same && distinct;
    r.detail = same ? (distinct ? "64 draws agree; sibling stream diverges"
                                : "sibling stream repeated the sequence")
                    : "same-key streams diverged";
    return r;
  });

  run_check(results, "rng: uniform draws stay in [0,1)", [] {
    CounterRng rng(stream_key(9, 1));
    double lo = 1.0, hi = -1.0;
    for (int i = 0; i < 4096; ++i) {
      const double u = rng.next_double();
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
    CheckResult r;
    r.pass = lo >= 0.0 && hi < 1.0;
    r.detail = fmt_detail("range [%.3g, %.3g]", lo, hi);
    return r;
  });

  run_check(results, "grid: displacement wrap is minimal-image", [] {
    const SpatialGrid g = SpatialGrid::make(64, 64.0);
    double worst = 0.0;
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 64; ++j) {
        const double d = g.wrap_displacement(g.x(i) - g.x(j));
        worst = std::max(worst, std::abs(d) - 0.5 * g.box_length);
      }
    return bounded(worst, 1e-12, "max |wrapped| - box/2 = %.3g (bound %.3g)");
  });

  run_check(results, "fft: backward(forward(x)) = N x", [] {
    const int n = 128;
    Fft fft(n);
    CounterRng rng(stream_key(3, 3));
    std::vector<std::complex<double>> x(n), y;
    for (auto& v : x) v = {rng.next_normal(), rng.next_normal()};
    y = x;
    fft.forward(y);
    fft.backward(y);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(y[i] / double(n) - x[i]));
    return bounded(worst, 1e-12, "max roundtrip error = %.3g (bound %.3g)");
  });

  run_check(results, "dispersion: omega(0) = 0 and zone-edge value 2v/a", [] {
    const double v = 3.0, a = 1.0;
    const double edge = phonon_dispersion(M_PI / a, v, a);
    const double zero = phonon_dispersion(0.0, v, a);
    return bounded(std::abs(zero) + std::abs(edge - 2.0 * v / a), 1e-12,
                   "endpoint error = %.3g (bound %.3g)");
  });

  run_check(results, "coupling: antisymmetric in the mode index", [] {
    double worst = 0.0;
    for (int s = 1; s <= 15; ++s)
      worst = std::max(worst,
                       std::abs(phonon_coupling(s, 0.7, 64) + phonon_coupling(-s, 0.7, 64)));
    return bounded(worst, 1e-12, "max |g_s + g_-s| = %.3g (bound %.3g)");
  });

  run_check(results, "occupation: hbar omega = k_B T gives 1/(e-1)", [] {
    const double t = 25.0;
    const double omega = kBoltzmann * t / kHbar;
    const double expect = 1.0 / std::expm1(1.0);
    return bounded(std::abs(bose_occupation(omega, t) - expect), 1e-12,
                   "|N - 1/(e-1)| = %.3g (bound %.3g)");
  });

  run_check(results, "bath: same seed reproduces every amplitude", [] {
    const SimulationConfig cfg = quick_config();
    const PhononEnsemble a = sample_thermal_ensemble(cfg, 11);
    const PhononEnsemble b = sample_thermal_ensemble(cfg, 11);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.modes.size(); ++i)
      worst = std::max(worst, std::abs(a.modes[i].alpha - b.modes[i].alpha));
    return bounded(worst, 0.0, "max amplitude difference = %.3g (bound %.3g)");
  });

  run_check(results, "potential: spectral synthesis matches the direct sum", [] {
    const SimulationConfig cfg = quick_config();
    const SpatialGrid grid = SpatialGrid::make(cfg.resolve_grid_points(), cfg.box_length());
    const PhononEnsemble ens = sample_thermal_ensemble(cfg, 5);
    Fft fft(grid.n_points);
    std::vector<std::complex<double>> scratch;
    std::vector<double> v;
    synthesize_potential(ens, grid, fft, scratch, v, 0.0317);
    const std::vector<double> direct = synthesize_potential_direct(ens, grid, 0.0317);
    double worst = 0.0;
    for (int i = 0; i < grid.n_points; ++i) worst = std::max(worst, std::abs(v[i] - direct[i]));
    return bounded(worst, 1e-10, "max |spectral - direct| = %.3g (bound %.3g)");
  });

  run_check(results, "density: FFT Fourier components match the direct sum", [] {
    const SimulationConfig cfg = quick_config();
    const SpatialGrid grid = SpatialGrid::make(cfg.resolve_grid_points(), cfg.box_length());
    const PhononEnsemble ens = sample_thermal_ensemble(cfg, 6);
    const WavepacketState state = init_gaussian(grid, cfg.sigma0_nm, cfg.k0_per_nm, 20.0);
    std::vector<double> rho(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) rho[i] = std::norm(state.psi[i]) * grid.dx;
    Fft fft(grid.n_points);
    std::vector<std::complex<double>> scratch, out;
    density_fourier_components(rho, ens, fft, scratch, out);
    double worst = 0.0;
    for (std::size_t m = 0; m < ens.modes.size(); ++m)
      worst = std::max(worst,
                       std::abs(out[m] - density_fourier_direct(state.psi, grid, ens.modes[m].q)));
    return bounded(worst, 1e-10, "max component error = %.3g (bound %.3g)");
  });

  run_check(results, "propagator: norm preserved to machine precision", [] {
    const SimulationConfig cfg = quick_config();
    const SpatialGrid grid = SpatialGrid::make(cfg.resolve_grid_points(), cfg.box_length());
    WavepacketState state = init_gaussian(grid, cfg.sigma0_nm, cfg.k0_per_nm, 20.0);
    const PhononEnsemble ens = sample_thermal_ensemble(cfg, 7);
    const std::vector<double> v = synthesize_potential_direct(ens, grid);
    Propagator prop(grid, cfg.mass_me, cfg.resolve_dt());
    double worst = 0.0;
    for (int i = 0; i < 400; ++i) {
      prop.step(state, v);
      worst = std::max(worst, std::abs(state.norm() - 1.0));
    }
    return bounded(worst, 1e-12, "max |norm - 1| = %.3g (bound %.3g)");
  });

  run_check(results, "propagator: free-packet dispersion matches closed form", [] {
    SimulationConfig cfg = quick_config();
    cfg.temperature_K = 0.0;
    cfg.coupling_meV = 0.0;
    const SpatialGrid grid = SpatialGrid::make(cfg.resolve_grid_points(), cfg.box_length());
    WavepacketState state = init_gaussian(grid, cfg.sigma0_nm, cfg.k0_per_nm, 0.5 * cfg.box_length());
    const std::vector<double> zero(grid.n_points, 0.0);
    const double dt = cfg.resolve_dt();
    Propagator prop(grid, cfg.mass_me, dt);
    const int steps = 200;
    for (int i = 0; i < steps; ++i) prop.step(state, zero);
    const double t = steps * dt;
    const double s2 = cfg.sigma0_nm * cfg.sigma0_nm;
    const double spread = kHbar * t / (2.0 * cfg.mass_me * kElectronMass * s2);
    const double expect_var = s2 * (1.0 + spread * spread);
    const CircularMoments m = circular_moments(state);
    return bounded(std::abs(m.variance / expect_var - 1.0), 1e-8,
                   "relative variance error = %.3g (bound %.3g)");
  });

  run_check(results, "propagator: frozen potential steps reverse exactly", [] {
    const SimulationConfig cfg = quick_config();
    const SpatialGrid grid = SpatialGrid::make(cfg.resolve_grid_points(), cfg.box_length());
    const WavepacketState initial = init_gaussian(grid, cfg.sigma0_nm, cfg.k0_per_nm, 20.0);
    WavepacketState state = initial;
    const PhononEnsemble ens = sample_thermal_ensemble(cfg, 13);
    const std::vector<double> v = synthesize_potential_direct(ens, grid);
    const double dt = cfg.resolve_dt();
    Propagator prop(grid, cfg.mass_me, dt);
    for (int i = 0; i < 100; ++i) prop.step(state, v);
    prop.set_dt(-dt);
    for (int i = 0; i < 100; ++i) prop.step(state, v);
    double worst = 0.0;
    for (int i = 0; i < grid.n_points; ++i)
      worst = std::max(worst, std::abs(state.psi[i] - initial.psi[i]));
    return bounded(worst, 1e-10, "max |psi - psi0| after reversal = %.3g (bound %.3g)");
  });

  run_check(results, "detector: clean synthetic bumps are found exactly", [] {
    SyntheticSignalSpec spec;
    spec.noise_sigma = 0.0;
    const std::vector<double> signal = synthetic_signal(spec, 1);
    AccelerationSeries series{0.0, 1.0, signal};
    const auto peaks = detect_kinks(series, DetectorConfig{});
    CheckResult r;
    r.pass = peaks.size() == spec.bump_positions.size();
    r.detail =
        "accepted " + std::to_string(peaks.size()) + " of " +
        std::to_string(spec.bump_positions.size()) + " bumps";
    return r;
  });

  run_check(results, "detector: acceptance counts survive 1e3 rescaling", [] {
    SyntheticSignalSpec spec;
    std::vector<double> signal = synthetic_signal(spec, 17);
    AccelerationSeries series{0.0, 1.0, signal};
    const auto base = detect_kinks(series, DetectorConfig{});
    for (auto& v : series.values) v *= 1e3;
    const auto scaled = detect_kinks(series, DetectorConfig{});
    CheckResult r;
    r.pass = base.size() == scaled.size();
    r.detail = std::to_string(base.size()) + " -> " + std::to_string(scaled.size()) +
               " accepted peaks under x1000";
    return r;
  });

  run_check(results, "coherence: pure Gaussian profile is identically 1", [] {
    const SpatialGrid grid = SpatialGrid::make(256, 128.0);
    const WavepacketState state = init_gaussian(grid, 4.0, 0.5, 64.0);
    const CoherenceProfile prof = coherence_profile(state, 1e-8);
    double worst = 0.0;
    for (std::size_t d = 1; d < prof.values.size(); ++d)
      if (prof.values[d] > 0.0) worst = std::max(worst, std::abs(prof.values[d] - 1.0));
    return bounded(worst, 1e-9, "max |C - 1| on support = %.3g (bound %.3g)");
  });

  run_check(results, "coherence: FFT profile matches the direct sum", [] {
    const SpatialGrid grid = SpatialGrid::make(128, 64.0);
    WavepacketState state = init_gaussian(grid, 3.0, 0.7, 32.0);
    CounterRng rng(stream_key(21, 0));
    for (auto& c : state.psi) c *= std::polar(1.0, 2.0 * M_PI * rng.next_double());
    const CoherenceProfile fft_prof = coherence_profile(state, 1e-8);
    const CoherenceProfile direct = coherence_profile_direct(state, 1e-8);
    double worst = 0.0;
    for (std::size_t d = 0; d < fft_prof.values.size(); ++d)
      worst = std::max(worst, std::abs(fft_prof.values[d] - direct.values[d]));
    return bounded(worst, 1e-10, "max |fft - direct| = %.3g (bound %.3g)");
  });

  run_check(results, "transport: synthetic linear variance recovers D", [] {
    const double d_true = 7.25, c = 3.0;
    std::vector<double> t(200), var(200);
    for (int i = 0; i < 200; ++i) {
      t[i] = 0.05 * i;
      var[i] = 2.0 * d_true * t[i] + c;
    }
    const TransportSummary s = fit_diffusivity(t, var, 8.0, 0.5, 1);
    return bounded(std::abs(s.d_nm2_ps - d_true), 1e-9, "|D - true| = %.3g (bound %.3g)");
  });

  run_check(results, "transport: alpha = 1 reproduces the Planckian rate", [] {
    const double mass = 8.0, t_K = 55.0;
    const double d = kHbar / (mass * kElectronMass);  // alpha = 1 by construction
    const double rate = relaxation_rate(t_K, d, mass);
    const double expect = kBoltzmann * t_K / kHbar;
    return bounded(std::abs(rate / expect - 1.0), 1e-12,
                   "relative rate error = %.3g (bound %.3g)");
  });

  run_check(results, "sweep: derived seeds unique across a 4x4x4x8 lattice", [] {
    std::set<std::uint64_t> seen;
    int collisions = 0;
    for (int ti = 0; ti < 4; ++ti)
      for (int vi = 0; vi < 4; ++vi)
        for (int gi = 0; gi < 4; ++gi)
          for (int r = 0; r < 8; ++r)
            if (!seen.insert(derive_seed(977, ti, vi, gi, r)).second) ++collisions;
    CheckResult res;
    res.pass = collisions == 0;
    res.detail = std::to_string(collisions) + " collisions in 512 derived seeds";
    return res;
  });

  run_check(results, "records: JSON round-trip preserves every field", [] {
    SimulationConfig cfg = quick_config();
    cfg.t_total_ps = 0.02;
    TrajectoryRecord rec = run_trajectory(cfg, 31);
    const TrajectoryRecord back = record_from_json(record_to_json(rec));
    CheckResult r;
    r.pass = back.config_hash == rec.config_hash && back.seed == rec.seed &&
             back.x_cm_nm == rec.x_cm_nm && back.variance_nm2 == rec.variance_nm2 &&
             back.completed == rec.completed && back.n_steps == rec.n_steps;
    r.detail = r.pass ? "hash, seed, series, and flags identical"
                      : "round-trip changed the record";
    return r;
  });

  run_check(results, "trajectory: same (config, seed) bit-identical twice", [] {
    SimulationConfig cfg = quick_config();
    cfg.t_total_ps = 0.02;
    const TrajectoryRecord a = run_trajectory(cfg, 77);
    const TrajectoryRecord b = run_trajectory(cfg, 77);
    CheckResult r;
    r.pass = a.x_cm_nm == b.x_cm_nm && a.variance_nm2 == b.variance_nm2;
    r.detail = r.pass ? "center and variance series identical"
                      : "reruns diverged";
    return r;
  });

  return results;
}

}  // namespace qac
