#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/wavepacket.hpp"

namespace qac {

// Center-of-mass acceleration samples: value i is the central second
// difference of x_cm at time t0 + i*dt.
struct AccelerationSeries {
  double t0_ps = 0.0;
  double dt_ps = 0.0;
  std::vector<double> values;  // nm/ps^2

  double time(int i) const { return t0_ps + i * dt_ps; }
};

// a_i = (x_{i+2} - 2 x_{i+1} + x_i) / dt^2, aligned at t = (i+1) dt.
AccelerationSeries acceleration_series(const std::vector<double>& x_cm, double dt_ps);

// Detector measurement primitives, exposed so the acceptance predicates can
// be verified in isolation.

// Centered running median; windows are truncated (never padded) at the ends.
std::vector<double> running_median(const std::vector<double>& x, int window);

// Topographic prominence of y[p]: the drop to the lowest terrain between
// the peak and the nearest higher point on each side (series ends count as
// higher terrain). The bases record where those minima sit.
struct PeakShape {
  double prominence = 0.0;
  int left_base = 0;
  int right_base = 0;
};
PeakShape peak_prominence(const std::vector<double>& y, int p);

// Width of the peak at half its prominence, in fractional samples, linearly
// interpolated at the crossings and bounded by the bases.
double peak_width(const std::vector<double>& y, int p, const PeakShape& s);

struct AcceptedPeak {
  int index = 0;        // position in the acceleration series
  double time_ps = 0.0;
  double height_z = 0.0;
  double prominence_z = 0.0;
  double width_samples = 0.0;
  double width_ps = 0.0;
};

// Four-test acceptance on the median-smoothed |a|: height z-score,
// prominence z-score, width cap, and separation from already-accepted
// peaks, processed in decreasing height order (ties by smaller index).
// Background and scale are robust local statistics of the raw magnitude
// samples around each candidate: median of the lower half of a truncated
// neighborhood, MAD of that half scaled by 1.4826 (falling back to the
// mean absolute deviation, then to "any positive excess is infinitely
// significant" when the background is exactly flat). All window sizes are
// fractions of the series length. Returns accepted peaks in chronological
// order.
std::vector<AcceptedPeak> detect_kinks(const AccelerationSeries& a, const DetectorConfig& cfg);

// Root of the time-averaged squared acceleration.
double mean_squared_acceleration(const AccelerationSeries& a);

enum class RegimeLabel { adiabatic, diabatic };

inline const char* to_string(RegimeLabel label) {
  return label == RegimeLabel::adiabatic ? "adiabatic" : "diabatic";
}

struct RegimeResult {
  RegimeLabel label = RegimeLabel::diabatic;
  std::vector<AcceptedPeak> accepted_peaks;
  std::optional<double> tau_ps;  // first accepted peak time, adiabatic only
  double msa = 0.0;              // nm/ps^2
};

// Adiabatic iff at least cfg.min_peaks accepted.
RegimeResult classify(std::vector<AcceptedPeak> peaks, double msa, const DetectorConfig& cfg);

// Full chain on an acceleration series.
RegimeResult classify_acceleration(const AccelerationSeries& a, const DetectorConfig& cfg);

// Wrapped circular-mean position of |psi|^2 (see circular_moments); sets
// *indeterminate when the resultant falls below 1e-6.
double center_of_mass(const WavepacketState& state, bool* indeterminate = nullptr);

// ---------------------------------------------------------------------------
// Synthetic calibration corpus.

// Gaussian bumps on a noisy baseline, acceleration-like test signal.
struct SyntheticSignalSpec {
  int n = 4096;
  double noise_sigma = 1.0;             // 0 = clean baseline
  double bump_height = 100.0;           // in noise_sigma units (or absolute if clean)
  double bump_width_fraction = 0.002;   // Gaussian sigma as fraction of n
  std::vector<double> bump_positions = {0.15, 0.25, 0.45, 0.65, 0.85};  // fractions of n
};

std::vector<double> synthetic_signal(const SyntheticSignalSpec& spec, std::uint64_t seed);

struct CalibrationReport {
  DetectorConfig thresholds;
  SyntheticSignalSpec clean_spec;
  SyntheticSignalSpec noise_spec;
  int clean_trials = 0;
  int clean_exact_detections = 0;   // trials finding all bumps, nothing else
  double worst_position_error_samples = 0.0;
  int noise_trials = 0;
  int noise_trials_with_accepts = 0;
  double false_accept_rate = 0.0;   // fraction of noise trials with >= 1 peak
  bool scale_invariance_ok = false; // labels stable under a -> 1e3 a and a -> 1e-3 a
  bool decimation_ok = false;       // labels stable under 2x decimation
  bool passed = false;

  nlohmann::json to_json() const;
};

// Runs the clean-bump suite, the white-noise false-accept measurement, and
// the scale/decimation invariance checks over the whole corpus.
CalibrationReport calibrate_detector(const DetectorConfig& cfg, int noise_trials,
                                     std::uint64_t base_seed);

}  // namespace qac
