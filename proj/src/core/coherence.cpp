#include "core/coherence.hpp"

#include <cmath>

#include "core/error.hpp"

namespace qac {

namespace {

// Support mask: both members of a pair must carry meaningful density.
std::vector<bool> support_mask(const WavepacketState& state, double support_epsilon) {
  const int n = state.grid.n_points;
  double peak = 0.0;
  for (const auto& a : state.psi) peak = std::max(peak, std::norm(a));
  const double cut = support_epsilon * peak;
  std::vector<bool> mask(n);
  for (int j = 0; j < n; ++j) mask[j] = std::norm(state.psi[j]) > cut;
  return mask;
}

}  // namespace

CoherenceProfile coherence_profile(const WavepacketState& state, double support_epsilon,
                                   const Fft& fft) {
  const int n = state.grid.n_points;
  if (fft.size() != n) throw invalid_argument_error("fft size must match the grid");
  const auto mask = support_mask(state, support_epsilon);

  // Unit-phase field on the support, zero elsewhere; indicator alongside.
  std::vector<std::complex<double>> u(n), chi(n);
  for (int j = 0; j < n; ++j) {
    if (mask[j]) {
      u[j] = state.psi[j] / std::abs(state.psi[j]);
      chi[j] = 1.0;
    }
  }

  // sum_x u*(x) u(x+d) = (1/N) IDFT[|DFT u|^2](d); same for pair counts.
  std::vector<std::complex<double>> spec(n);
  fft.forward(u.data(), spec.data());
  for (int j = 0; j < n; ++j) spec[j] = std::norm(spec[j]);
  fft.backward(spec.data(), u.data());  // u[d] = N * sum_x u*(x)u(x+d)

  fft.forward(chi.data(), spec.data());
  for (int j = 0; j < n; ++j) spec[j] = std::norm(spec[j]);
  fft.backward(spec.data(), chi.data());  // chi[d] = N * pair count at d

  CoherenceProfile profile;
  profile.dx_nm = state.grid.dx;
  profile.values.resize(n / 2 + 1, 0.0);
  const double inv_n = 1.0 / n;
  for (int d = 0; d <= n / 2; ++d) {
    const long long count = std::llround(chi[d].real() * inv_n);
    if (count > 0) {
      const double c = std::abs(u[d]) * inv_n / static_cast<double>(count);
      profile.values[d] = std::min(c, 1.0 + 1e-12);
    }
  }
  return profile;
}

CoherenceProfile coherence_profile(const WavepacketState& state, double support_epsilon) {
  Fft fft(state.grid.n_points);
  return coherence_profile(state, support_epsilon, fft);
}

CoherenceProfile coherence_profile_direct(const WavepacketState& state,
                                          double support_epsilon) {
  const int n = state.grid.n_points;
  const auto mask = support_mask(state, support_epsilon);
  std::vector<std::complex<double>> u(n);
  for (int j = 0; j < n; ++j)
    if (mask[j]) u[j] = state.psi[j] / std::abs(state.psi[j]);

  CoherenceProfile profile;
  profile.dx_nm = state.grid.dx;
  profile.values.resize(n / 2 + 1, 0.0);
  for (int d = 0; d <= n / 2; ++d) {
    std::complex<double> acc;
    long long count = 0;
    for (int j = 0; j < n; ++j) {
      const int j2 = (j + d) % n;
      if (mask[j] && mask[j2]) {
        acc += std::conj(u[j]) * u[j2];
        ++count;
      }
    }
    if (count > 0) profile.values[d] = std::abs(acc) / static_cast<double>(count);
  }
  return profile;
}

std::optional<double> coherence_length(const CoherenceProfile& profile) {
  double weight = 0.0, moment = 0.0;
  for (std::size_t d = 1; d < profile.values.size(); ++d) {
    weight += profile.values[d];
    moment += profile.values[d] * profile.separation(static_cast<int>(d));
  }
  if (!(weight > 0.0)) return std::nullopt;
  return moment / weight;
}

double plateau_ratio(const std::vector<double>& times, const std::vector<double>& ratios,
                     double t_total, double window_fraction, int min_samples) {
  if (times.size() != ratios.size())
    throw invalid_argument_error("times and ratios must have equal length");
  const double t_lo = (1.0 - window_fraction) * t_total;
  double acc = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= t_lo) {
      acc += ratios[i];
      ++count;
    }
  }
  if (count < min_samples)
    throw numeric_error("too few coherence samples in the plateau window");
  return acc / count;
}

}  // namespace qac
