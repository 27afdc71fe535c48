#include "core/kinks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace qac {

namespace {

double median_of_sorted(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  const std::size_t n = hi - lo;
  const std::size_t mid = lo + n / 2;
  return n % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// Local maxima with plateau handling: a flat top yields its middle index.
std::vector<int> local_maxima(const std::vector<double>& y) {
  const int n = static_cast<int>(y.size());
  std::vector<int> out;
  int i = 1;
  while (i < n - 1) {
    if (y[i] > y[i - 1]) {
      int j = i;
      while (j + 1 < n && y[j + 1] == y[i]) ++j;
      if (j + 1 < n && y[j + 1] < y[i]) {
        out.push_back((i + j) / 2);
        i = j + 1;
        continue;
      }
      i = j + 1;
      continue;
    }
    ++i;
  }
  return out;
}

struct BackgroundStats {
  double background = 0.0;
  double scale = 0.0;  // 0 = degenerate flat background
};

// Robust background under a candidate: sort a truncated neighborhood, take
// the lower half, use its median as background and 1.4826*MAD (fallback:
// mean absolute deviation) as the noise scale.
BackgroundStats local_background(const std::vector<double>& y, int center, int window) {
  const int n = static_cast<int>(y.size());
  const int half = window / 2;
  const int lo = std::max(0, center - half);
  const int hi = std::min(n, center + half + 1);
  std::vector<double> buf(y.begin() + lo, y.begin() + hi);
  std::sort(buf.begin(), buf.end());
  const std::size_t m = std::max<std::size_t>(1, buf.size() / 2);

  BackgroundStats st;
  st.background = median_of_sorted(buf, 0, m);
  std::vector<double> dev(m);
  for (std::size_t i = 0; i < m; ++i) dev[i] = std::abs(buf[i] - st.background);
  std::sort(dev.begin(), dev.end());
  st.scale = 1.4826 * median_of_sorted(dev, 0, m);
  if (st.scale == 0.0) {
    double acc = 0.0;
    for (double d : dev) acc += d;
    st.scale = acc / static_cast<double>(m);
  }
  return st;
}

double z_score(double excess, double scale) {
  if (scale > 0.0) return excess / scale;
  // Degenerate flat background: any positive excess is infinitely
  // significant, anything else is not a peak.
  return excess > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

std::vector<double> running_median(const std::vector<double>& x, int window) {
  const int n = static_cast<int>(x.size());
  const int half = window / 2;
  std::vector<double> out(n);
  std::vector<double> buf;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n, i + half + 1);
    buf.assign(x.begin() + lo, x.begin() + hi);
    std::sort(buf.begin(), buf.end());
    out[i] = median_of_sorted(buf, 0, buf.size());
  }
  return out;
}

// Topographic prominence: lowest points between the peak and the nearest
// higher terrain on each side (series ends act as higher terrain).
PeakShape peak_prominence(const std::vector<double>& y, int p) {
  const int n = static_cast<int>(y.size());
  PeakShape s;
  double left_min = y[p];
  s.left_base = p;
  for (int i = p - 1; i >= 0 && y[i] <= y[p]; --i) {
    if (y[i] < left_min) {
      left_min = y[i];
      s.left_base = i;
    }
  }
  double right_min = y[p];
  s.right_base = p;
  for (int i = p + 1; i < n && y[i] <= y[p]; ++i) {
    if (y[i] < right_min) {
      right_min = y[i];
      s.right_base = i;
    }
  }
  s.prominence = y[p] - std::max(left_min, right_min);
  return s;
}

// Width of the peak at half its prominence, in (fractional) samples,
// linearly interpolated at the crossings and bounded by the bases.
double peak_width(const std::vector<double>& y, int p, const PeakShape& s) {
  const double level = y[p] - 0.5 * s.prominence;
  int i = p;
  while (i > s.left_base && y[i] > level) --i;
  double left = i;
  if (y[i] < level) left = i + (level - y[i]) / (y[i + 1] - y[i]);
  int j = p;
  while (j < s.right_base && y[j] > level) ++j;
  double right = j;
  if (y[j] < level) right = j - (level - y[j]) / (y[j - 1] - y[j]);
  return right - left;
}

AccelerationSeries acceleration_series(const std::vector<double>& x_cm, double dt_ps) {
  if (x_cm.size() < 3) throw invalid_argument_error("need at least 3 position samples");
  if (!(dt_ps > 0.0)) throw invalid_argument_error("dt must be positive");
  AccelerationSeries a;
  a.t0_ps = dt_ps;
  a.dt_ps = dt_ps;
  a.values.resize(x_cm.size() - 2);
  const double inv = 1.0 / (dt_ps * dt_ps);
  for (std::size_t i = 0; i + 2 < x_cm.size(); ++i)
    a.values[i] = (x_cm[i + 2] - 2.0 * x_cm[i + 1] + x_cm[i]) * inv;
  return a;
}

std::vector<AcceptedPeak> detect_kinks(const AccelerationSeries& a, const DetectorConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(a.values.size());
  if (n < 16) throw invalid_argument_error("acceleration series too short to classify");

  int med_win = std::max(5, static_cast<int>(std::lround(cfg.median_window_fraction * n)));
  if (med_win % 2 == 0) ++med_win;
  const int bg_win = std::max(5, static_cast<int>(std::lround(cfg.background_fraction * n)));
  const double width_cap = cfg.width_cap_fraction * n;
  const double min_sep = cfg.min_separation_fraction * n;

  std::vector<double> mag(n);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(a.values[i]))
      throw numeric_error("acceleration series contains non-finite values");
    mag[i] = std::abs(a.values[i]);
  }
  const std::vector<double> smooth = running_median(mag, med_win);

  std::vector<int> candidates = local_maxima(smooth);
  // Decreasing height, ties by earlier index.
  std::sort(candidates.begin(), candidates.end(), [&](int l, int r) {
    if (smooth[l] != smooth[r]) return smooth[l] > smooth[r];
    return l < r;
  });

  std::vector<AcceptedPeak> accepted;
  for (int c : candidates) {
    // Background and noise scale come from the raw magnitudes: the median
    // filter suppresses exactly the fluctuations the z-scores normalize
    // against, so measuring them on the smoothed trace would understate the
    // noise by roughly the square root of the window and admit noise peaks.
    const BackgroundStats bg = local_background(mag, c, bg_win);
    const double height_z = z_score(smooth[c] - bg.background, bg.scale);
    if (height_z < cfg.height_z) continue;
    const PeakShape shape = peak_prominence(smooth, c);
    const double prom_z = z_score(shape.prominence, bg.scale);
    if (prom_z < cfg.prominence_z) continue;
    const double width = peak_width(smooth, c, shape);
    if (width > width_cap) continue;
    bool separated = true;
    for (const auto& p : accepted) {
      if (std::abs(c - p.index) < min_sep) {
        separated = false;
        break;
      }
    }
    if (!separated) continue;
    accepted.push_back(
        {c, a.time(c), height_z, prom_z, width, width * a.dt_ps});
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const AcceptedPeak& l, const AcceptedPeak& r) { return l.index < r.index; });
  return accepted;
}

double mean_squared_acceleration(const AccelerationSeries& a) {
  if (a.values.empty()) throw invalid_argument_error("empty acceleration series");
  double acc = 0.0;
  for (double v : a.values) acc += v * v;
  return std::sqrt(acc / static_cast<double>(a.values.size()));
}

RegimeResult classify(std::vector<AcceptedPeak> peaks, double msa, const DetectorConfig& cfg) {
  RegimeResult r;
  r.accepted_peaks = std::move(peaks);
  r.msa = msa;
  if (static_cast<int>(r.accepted_peaks.size()) >= cfg.min_peaks) {
    r.label = RegimeLabel::adiabatic;
    r.tau_ps = r.accepted_peaks.front().time_ps;
  }
  return r;
}

RegimeResult classify_acceleration(const AccelerationSeries& a, const DetectorConfig& cfg) {
  return classify(detect_kinks(a, cfg), mean_squared_acceleration(a), cfg);
}

double center_of_mass(const WavepacketState& state, bool* indeterminate) {
  const CircularMoments m = circular_moments(state);
  if (indeterminate) *indeterminate = m.resultant < 1e-6;
  return m.center;
}

std::vector<double> synthetic_signal(const SyntheticSignalSpec& spec, std::uint64_t seed) {
  if (spec.n < 16) throw invalid_argument_error("synthetic signal too short");
  std::vector<double> out(spec.n, 0.0);
  if (spec.noise_sigma > 0.0) {
    CounterRng rng(stream_key(seed, 0));
    for (auto& v : out) v = spec.noise_sigma * rng.next_normal();
  }
  const double height =
      spec.noise_sigma > 0.0 ? spec.bump_height * spec.noise_sigma : spec.bump_height;
  const double sigma = spec.bump_width_fraction * spec.n;
  for (double pos : spec.bump_positions) {
    const double center = pos * spec.n;
    const int lo = std::max(0, static_cast<int>(center - 8.0 * sigma));
    const int hi = std::min(spec.n, static_cast<int>(center + 8.0 * sigma) + 1);
    for (int i = lo; i < hi; ++i) {
      const double d = (i - center) / sigma;
      out[i] += height * std::exp(-0.5 * d * d);
    }
  }
  return out;
}

namespace {

std::vector<int> labels_for_corpus(const std::vector<std::vector<double>>& corpus,
                                   const DetectorConfig& cfg, double scale, int decimate) {
  std::vector<int> labels;
  labels.reserve(corpus.size());
  for (const auto& sig : corpus) {
    AccelerationSeries a;
    a.dt_ps = 1e-3 * decimate;
    a.t0_ps = a.dt_ps;
    for (std::size_t i = 0; i < sig.size(); i += decimate) a.values.push_back(scale * sig[i]);
    labels.push_back(static_cast<int>(detect_kinks(a, cfg).size()));
  }
  return labels;
}

}  // namespace

CalibrationReport calibrate_detector(const DetectorConfig& cfg, int noise_trials,
                                     std::uint64_t base_seed) {
  cfg.validate();
  if (noise_trials < 1) throw invalid_argument_error("need at least one noise trial");

  CalibrationReport rep;
  rep.thresholds = cfg;
  rep.clean_spec = SyntheticSignalSpec{};
  rep.clean_spec.noise_sigma = 1.0;
  rep.noise_spec = SyntheticSignalSpec{};
  rep.noise_spec.bump_positions.clear();

  std::vector<std::vector<double>> corpus;

  // Clean suite: noisy baseline plus five tall narrow bumps.
  rep.clean_trials = 20;
  rep.clean_exact_detections = 0;
  const double sigma_samples = rep.clean_spec.bump_width_fraction * rep.clean_spec.n;
  for (int trial = 0; trial < rep.clean_trials; ++trial) {
    const auto sig = synthetic_signal(rep.clean_spec, stream_key(base_seed, 1000 + trial));
    corpus.push_back(sig);
    AccelerationSeries a{1e-3, 1e-3, sig};
    const auto peaks = detect_kinks(a, cfg);
    bool exact = peaks.size() == rep.clean_spec.bump_positions.size();
    if (exact) {
      for (std::size_t b = 0; b < peaks.size(); ++b) {
        const double want = rep.clean_spec.bump_positions[b] * rep.clean_spec.n;
        const double err = std::abs(peaks[b].index - want);
        rep.worst_position_error_samples = std::max(rep.worst_position_error_samples, err);
        if (err > 3.0 * sigma_samples) exact = false;
      }
    }
    if (exact) ++rep.clean_exact_detections;
  }

  // White-noise false accepts.
  rep.noise_trials = noise_trials;
  for (int trial = 0; trial < noise_trials; ++trial) {
    const auto sig = synthetic_signal(rep.noise_spec, stream_key(base_seed, 2000 + trial));
    corpus.push_back(sig);
    AccelerationSeries a{1e-3, 1e-3, sig};
    if (!detect_kinks(a, cfg).empty()) ++rep.noise_trials_with_accepts;
  }
  rep.false_accept_rate =
      static_cast<double>(rep.noise_trials_with_accepts) / rep.noise_trials;

  // Invariance over the full corpus: amplitude rescaling must preserve
  // accepted-peak counts exactly; 2x time decimation (a new window layout)
  // must preserve the adiabatic/diabatic labels.
  const auto base_counts = labels_for_corpus(corpus, cfg, 1.0, 1);
  rep.scale_invariance_ok = labels_for_corpus(corpus, cfg, 1e3, 1) == base_counts &&
                            labels_for_corpus(corpus, cfg, 1e-3, 1) == base_counts;
  const auto decimated_counts = labels_for_corpus(corpus, cfg, 1.0, 2);
  rep.decimation_ok = true;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if ((base_counts[i] >= cfg.min_peaks) != (decimated_counts[i] >= cfg.min_peaks))
      rep.decimation_ok = false;
  }

  rep.passed = rep.clean_exact_detections == rep.clean_trials &&
               rep.false_accept_rate <= 0.05 && rep.scale_invariance_ok && rep.decimation_ok;
  return rep;
}

nlohmann::json CalibrationReport::to_json() const {
  nlohmann::json j{
      {"clean_trials", clean_trials},
      {"clean_exact_detections", clean_exact_detections},
      {"worst_position_error_samples", worst_position_error_samples},
      {"noise_trials", noise_trials},
      {"noise_trials_with_accepts", noise_trials_with_accepts},
      {"false_accept_rate", false_accept_rate},
      {"scale_invariance_ok", scale_invariance_ok},
      {"decimation_ok", decimation_ok},
      {"passed", passed},
      {"clean_bump_positions", clean_spec.bump_positions},
      {"clean_bump_height_sigma", clean_spec.bump_height},
      {"clean_bump_width_fraction", clean_spec.bump_width_fraction},
      {"signal_length", clean_spec.n},
  };
  j.update(thresholds.to_json());
  return j;
}

}  // namespace qac
