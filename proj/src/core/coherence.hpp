#pragma once

#include <optional>
#include <vector>

#include "core/fft.hpp"
#include "core/wavepacket.hpp"

namespace qac {

// Averaged modulus of the normalized first-order coherence,
//   C(dx) = | < psi*(x) psi(x+dx) / sqrt(|psi(x)|^2 |psi(x+dx)|^2) >_x |,
// with the average running over admissible x: both densities above
// support_epsilon times the peak density (wrap-around pairs included).
// Separations run 0, dx, ..., box/2. Empty admissible set -> value 0.
struct CoherenceProfile {
  double dx_nm = 0.0;
  std::vector<double> values;  // index i is separation i * dx

  double separation(int i) const { return i * dx_nm; }
};

// For a pure state each g1 factor has unit modulus, so the profile is the
// magnitude of a mean of phasors: the FFT route autocorrelates the
// unit-phase field restricted to the support and divides by the pair count
// per separation. O(N log N), matches the direct definition exactly.
CoherenceProfile coherence_profile(const WavepacketState& state, double support_epsilon,
                                   const Fft& fft);
// Convenience overload constructing a transform internally.
CoherenceProfile coherence_profile(const WavepacketState& state, double support_epsilon);

// O(N^2) literal evaluation of the definition; reference for tests.
CoherenceProfile coherence_profile_direct(const WavepacketState& state,
                                          double support_epsilon);

// Separation-weighted mean over (0, box/2]:
//   L_phi = sum C(dx) dx_sep / sum C(dx), zero-separation bin excluded.
// All-zero profile -> nullopt.
std::optional<double> coherence_length(const CoherenceProfile& profile);

// Mean of `ratio` over samples with t >= (1 - window_fraction) * t_total.
// Requires at least min_samples samples in the window.
double plateau_ratio(const std::vector<double>& times, const std::vector<double>& ratios,
                     double t_total, double window_fraction, int min_samples);

}  // namespace qac
