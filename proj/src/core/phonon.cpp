#include "core/phonon.hpp"

#include <cmath>

#include "core/constants.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

namespace qac {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Largest mode index allowed by the cutoff q < q_debye and by the zone
// boundary |s| < L/2 (strict on both counts).
int max_mode_index(const SimulationConfig& cfg) {
  const double u = cfg.debye_k() * cfg.box_length() / kTwoPi;
  const int by_cutoff = static_cast<int>(std::ceil(u - 1e-9)) - 1;
  const int by_zone = (cfg.cells - 1) / 2;
  return std::min(by_cutoff, by_zone);
}

// Distinct non-negative stream index for a signed mode index.
std::uint64_t mode_stream(int s) {
  return s > 0 ? static_cast<std::uint64_t>(2 * s)
               : static_cast<std::uint64_t>(-2 * s) + 1;
}
}  // namespace

double phonon_dispersion(double q, double sound_speed, double lattice) {
  if (!(lattice > 0.0)) throw invalid_argument_error("lattice constant must be positive");
  if (sound_speed < 0.0) throw invalid_argument_error("sound speed must be non-negative");
  return (2.0 * sound_speed / lattice) * std::abs(std::sin(0.5 * q * lattice));
}

double phonon_coupling(int s, double coupling_scale, int cells) {
  if (s == 0 || 2 * std::abs(s) >= cells)
    throw invalid_argument_error("mode index must satisfy 0 < |s| < L/2");
  const double denom = (cells / M_PI) * std::abs(std::sin(M_PI * s / cells));
  return coupling_scale * s / std::sqrt(denom);
}

double bose_occupation(double omega, double temperature_K) {
  if (temperature_K < 0.0) throw invalid_argument_error("temperature must be non-negative");
  if (temperature_K == 0.0) return 0.0;
  if (!(omega > 0.0))
    throw numeric_error("thermal occupation diverges for a dispersionless mode");
  return 1.0 / std::expm1(kHbar * omega / (kBoltzmann * temperature_K));
}

double PhononEnsemble::total_occupation() const {
  double acc = 0.0;
  for (const auto& m : modes) acc += std::norm(m.alpha);
  return acc;
}

nlohmann::json PhononEnsemble::to_json() const {
  nlohmann::json mode_rows = nlohmann::json::array();
  for (const auto& m : modes) {
    mode_rows.push_back({{"s", m.s},
                         {"q_per_nm", m.q},
                         {"omega_per_ps", m.omega},
                         {"g_meV", m.g},
                         {"alpha_re", m.alpha.real()},
                         {"alpha_im", m.alpha.imag()}});
  }
  return {{"temperature_K", temperature_K},
          {"sound_speed_nm_per_ps", sound_speed_nm_per_ps},
          {"coupling_meV", coupling_meV},
          {"lattice_nm", lattice_nm},
          {"cells", cells},
          {"back_action", back_action},
          {"seed", seed},
          {"modes", std::move(mode_rows)}};
}

PhononEnsemble sample_thermal_ensemble(const SimulationConfig& cfg, std::uint64_t seed) {
  PhononEnsemble ens;
  ens.temperature_K = cfg.temperature_K;
  ens.sound_speed_nm_per_ps = cfg.sound_speed_nm_per_ps;
  ens.coupling_meV = cfg.coupling_meV;
  ens.lattice_nm = cfg.lattice_nm;
  ens.cells = cfg.cells;
  ens.back_action = cfg.back_action;
  ens.seed = seed;
  const int s_max = max_mode_index(cfg);
  if (s_max < 1) return ens;
  ens.modes.reserve(2 * s_max);
  for (int i = 0; i < 2 * s_max; ++i) {
    // Ordered -s_max..-1 then +1..+s_max.
    const int s = i < s_max ? i - s_max : i - s_max + 1;
    PhononMode m;
    m.s = s;
    m.q = kTwoPi * s / cfg.box_length();
    m.omega = phonon_dispersion(m.q, cfg.sound_speed_nm_per_ps, cfg.lattice_nm);
    m.g = phonon_coupling(s, cfg.coupling_meV, cfg.cells);
    const double occupation = bose_occupation(m.omega, cfg.temperature_K);
    if (occupation > 0.0) {
      CounterRng rng(stream_key(seed, mode_stream(s)));
      const double phase = rng.next_uniform(0.0, kTwoPi);
      m.alpha = std::polar(std::sqrt(occupation), phase);
    }
    ens.modes.push_back(m);
  }
  return ens;
}

void evolve_modes(PhononEnsemble& ens, double dt) {
  for (auto& m : ens.modes) m.alpha *= std::polar(1.0, -m.omega * dt);
}

void evolve_modes(PhononEnsemble& ens, double dt,
                  const std::vector<std::complex<double>>& density_fourier) {
  if (density_fourier.size() != ens.modes.size())
    throw invalid_argument_error("density components must match the mode list");
  const std::complex<double> kick_scale(0.0, -dt / kHbar);
  for (std::size_t i = 0; i < ens.modes.size(); ++i) {
    auto& m = ens.modes[i];
    m.alpha = m.alpha * std::polar(1.0, -m.omega * dt) + kick_scale * m.g * density_fourier[i];
  }
}

void synthesize_potential(const PhononEnsemble& ens, const SpatialGrid& grid, const Fft& fft,
                          std::vector<std::complex<double>>& scratch, std::vector<double>& out,
                          double phase_advance_ps) {
  const int n = grid.n_points;
  if (fft.size() != n) throw invalid_argument_error("fft size must match the grid");
  scratch.assign(n, {0.0, 0.0});
  out.assign(n, 0.0);
  for (const auto& m : ens.modes) {
    if (2 * std::abs(m.s) >= n)
      throw invalid_argument_error("grid too coarse to hold the mode spectrum");
    const std::complex<double> c =
        m.g * m.alpha * std::polar(1.0, -m.omega * phase_advance_ps);
    // 2 Re[c e^{i q x}] splits into c at bin s and conj(c) at bin -s; the
    // scattered spectrum is conjugate-symmetric, so the inverse transform
    // is real up to rounding.
    const int bin_pos = m.s >= 0 ? m.s : n + m.s;
    const int bin_neg = m.s >= 0 ? (n - m.s) % n : -m.s;
    scratch[bin_pos] += c;
    scratch[bin_neg] += std::conj(c);
  }
  fft.backward(scratch);
  for (int j = 0; j < n; ++j) out[j] = scratch[j].real();
}

std::vector<double> synthesize_potential_direct(const PhononEnsemble& ens,
                                                const SpatialGrid& grid,
                                                double phase_advance_ps) {
  std::vector<double> out(grid.n_points, 0.0);
  for (const auto& m : ens.modes) {
    const std::complex<double> c =
        m.g * m.alpha * std::polar(1.0, -m.omega * phase_advance_ps);
    for (int j = 0; j < grid.n_points; ++j) {
      const double arg = m.q * grid.x(j);
      out[j] += 2.0 * (c.real() * std::cos(arg) - c.imag() * std::sin(arg));
    }
  }
  return out;
}

void density_fourier_components(const std::vector<double>& density_times_dx,
                                const PhononEnsemble& ens, const Fft& fft,
                                std::vector<std::complex<double>>& scratch,
                                std::vector<std::complex<double>>& out) {
  const int n = fft.size();
  if (static_cast<int>(density_times_dx.size()) != n)
    throw invalid_argument_error("density length must match the fft size");
  scratch.assign(n, {0.0, 0.0});
  for (int j = 0; j < n; ++j) scratch[j] = density_times_dx[j];
  fft.forward(scratch);
  out.resize(ens.modes.size());
  for (std::size_t i = 0; i < ens.modes.size(); ++i) {
    const int s = ens.modes[i].s;
    out[i] = scratch[s >= 0 ? s : n + s];
  }
}

std::complex<double> density_fourier_direct(const std::vector<std::complex<double>>& psi,
                                            const SpatialGrid& grid, double q) {
  std::complex<double> acc;
  for (int j = 0; j < grid.n_points; ++j) {
    const double rho = std::norm(psi[j]);
    acc += rho * std::polar(1.0, -q * grid.x(j));
  }
  return acc * grid.dx;
}

}  // namespace qac
