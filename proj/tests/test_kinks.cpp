#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/kinks.hpp"
#include "core/rng.hpp"
#include "core/wavepacket.hpp"

using namespace qac;

namespace {

void add_bump(std::vector<double>& y, double center, double sigma, double height) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = (static_cast<double>(i) - center) / sigma;
    y[i] += height * std::exp(-0.5 * d * d);
  }
}

AccelerationSeries as_series(std::vector<double> values, double dt = 1e-3) {
  return AccelerationSeries{dt, dt, std::move(values)};
}

}  // namespace

TEST_CASE("acceleration series: exact on quadratics, zero on lines") {
  const double dt = 2e-3, A = 3.7;
  std::vector<double> x(50);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = i * dt;
    x[i] = 0.5 * A * t * t + 1.3 * t + 0.2;
  }
  const AccelerationSeries a = acceleration_series(x, dt);
  REQUIRE(a.values.size() == x.size() - 2);
  CHECK(a.t0_ps == dt);
  CHECK(a.dt_ps == dt);
  for (double v : a.values) CHECK(v == doctest::Approx(A).epsilon(1e-9));

  for (auto& v : x) v = 42.0;
  for (double v : acceleration_series(x, dt).values) CHECK(v == 0.0);

  CHECK_THROWS_AS(acceleration_series({1.0, 2.0}, dt), Error);
  CHECK_THROWS_AS(acceleration_series({1.0, 2.0, 3.0}, 0.0), Error);
}

TEST_CASE("acceleration series: sine response matches the discrete ratio") {
  // Second difference of sin(wt) is exactly -w^2 R sin(wt) with
  // R = (2 - 2cos(w dt)) / (w dt)^2; at w dt = 0.1 the ratio R was
  // evaluated independently to 0.99916694439484678.
  const double dt = 1e-3, w = 100.0;  // w dt = 0.1
  const double R = 0.99916694439484678;
  const int n = 10001;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::sin(w * i * dt);
  const AccelerationSeries a = acceleration_series(x, dt);
  double amax = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    amax = std::max(amax, std::abs(a.values[i]));
    CHECK(a.values[i] ==
          doctest::Approx(-w * w * R * std::sin(w * a.time(static_cast<int>(i))))
              .epsilon(1e-9)
              .scale(w * w));
  }
  CHECK(amax / (w * w) == doctest::Approx(R).epsilon(1e-3));
}

TEST_CASE("msa: zero, constant, and whole-period sine anchors") {
  CHECK(mean_squared_acceleration(as_series(std::vector<double>(64, 0.0))) == 0.0);
  CHECK(mean_squared_acceleration(as_series(std::vector<double>(64, -2.5))) == 2.5);
  std::vector<double> sine(1000);  // exactly 10 periods of 100 samples
  for (int i = 0; i < 1000; ++i) sine[i] = std::sin(2.0 * M_PI * i / 100.0);
  CHECK(mean_squared_acceleration(as_series(std::move(sine))) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK_THROWS_AS(mean_squared_acceleration(as_series({})), Error);
}

TEST_CASE("running median: brute-force oracle and monotone fixed point") {
  CounterRng rng(stream_key(31, 0));
  std::vector<double> x(101);
  for (auto& v : x) v = rng.next_normal();
  for (int window : {5, 21}) {
    const std::vector<double> out = running_median(x, window);
    const int half = window / 2;
    for (int i = 0; i < 101; ++i) {
      std::vector<double> buf(x.begin() + std::max(0, i - half),
                              x.begin() + std::min<int>(101, i + half + 1));
      std::sort(buf.begin(), buf.end());
      const std::size_t m = buf.size();
      const double want = m % 2 ? buf[m / 2] : 0.5 * (buf[m / 2 - 1] + buf[m / 2]);
      CHECK(out[i] == want);
    }
  }
  std::sort(x.begin(), x.end());  // monotone input: interior medians are the input
  const std::vector<double> out = running_median(x, 9);
  for (int i = 4; i < 97; ++i) CHECK(out[i] == x[i]);
}

TEST_CASE("peak prominence: hand-worked terrain") {
  const std::vector<double> y = {0.0, 5.0, 2.0, 8.0, 1.0, 9.0, 0.0};
  const PeakShape inner = peak_prominence(y, 3);
  CHECK(inner.prominence == 7.0);  // capped by the valley at y=1 before the higher 9
  CHECK(inner.left_base == 0);
  CHECK(inner.right_base == 4);
  const PeakShape global = peak_prominence(y, 5);
  CHECK(global.prominence == 9.0);  // drops to the lowest terrain on both sides
  CHECK(global.left_base == 0);
  CHECK(global.right_base == 6);
  const PeakShape minor = peak_prominence(y, 1);
  CHECK(minor.prominence == 3.0);  // valley at 2 before the higher 8
}

TEST_CASE("peak width: half-prominence crossing of a triangle") {
  // Triangle 0,1,2,3,4,3,2,1,0: prominence 4, half level 2, crossings at
  // exactly one sample of height 2 on each side -> width 4.
  std::vector<double> y = {0, 1, 2, 3, 4, 3, 2, 1, 0};
  const PeakShape s = peak_prominence(y, 4);
  CHECK(s.prominence == 4.0);
  CHECK(peak_width(y, 4, s) == doctest::Approx(4.0));
}

TEST_CASE("detector: five clean bumps are accepted exactly, tau is the first") {
  SyntheticSignalSpec spec;
  spec.noise_sigma = 0.0;  // flat zero baseline
  const std::vector<double> sig = synthetic_signal(spec, 1);
  const AccelerationSeries a = as_series(sig, 5e-4);
  const DetectorConfig cfg;
  const std::vector<AcceptedPeak> peaks = detect_kinks(a, cfg);
  REQUIRE(peaks.size() == 5);
  for (std::size_t b = 0; b < peaks.size(); ++b) {
    CHECK(std::abs(peaks[b].index - spec.bump_positions[b] * spec.n) <
          3.0 * spec.bump_width_fraction * spec.n);
    // Near-flat background: the z-scores dwarf the thresholds.
    CHECK(peaks[b].height_z >= 10.0 * cfg.height_z);
    CHECK(peaks[b].prominence_z >= 10.0 * cfg.prominence_z);
    CHECK(peaks[b].width_samples <= cfg.width_cap_fraction * a.values.size());
    CHECK(peaks[b].time_ps == doctest::Approx(a.time(peaks[b].index)));
  }
  const RegimeResult r = classify_acceleration(a, cfg);
  CHECK(r.label == RegimeLabel::adiabatic);
  REQUIRE(r.tau_ps.has_value());
  CHECK(*r.tau_ps == peaks.front().time_ps);
}

TEST_CASE("detector: exactly flat background makes any excess significant") {
  // A triangular spike on exact zeros: the lower half of every background
  // window is identically zero, so MAD and the mean-absolute-deviation
  // fallback both vanish and the degenerate infinite-z path engages.
  const int n = 4096;
  std::vector<double> y(n, 0.0);
  const int c = n / 2;
  for (int d = -10; d <= 10; ++d) y[c + d] = 10.0 - std::abs(d);
  const std::vector<AcceptedPeak> peaks = detect_kinks(as_series(y), DetectorConfig{});
  REQUIRE(peaks.size() == 1);
  CHECK(std::isinf(peaks[0].height_z));
  CHECK(std::isinf(peaks[0].prominence_z));
  CHECK(std::abs(peaks[0].index - c) <= 11);
}

TEST_CASE("detector: noisy bumps pass all four predicates explicitly") {
  SyntheticSignalSpec spec;  // unit noise, 100-sigma bumps
  const DetectorConfig cfg;
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    const AccelerationSeries a = as_series(synthetic_signal(spec, seed));
    const std::vector<AcceptedPeak> peaks = detect_kinks(a, cfg);
    REQUIRE(peaks.size() == 5);
    const double n = static_cast<double>(a.values.size());
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      CHECK(peaks[i].height_z >= cfg.height_z);
      CHECK(peaks[i].prominence_z >= cfg.prominence_z);
      CHECK(peaks[i].width_samples <= cfg.width_cap_fraction * n);
      for (std::size_t j = 0; j < i; ++j)
        CHECK(std::abs(peaks[i].index - peaks[j].index) >=
              cfg.min_separation_fraction * n);
    }
  }
}

TEST_CASE("detector: separation is enforced against every accepted peak") {
  // A (tallest) at 0.300N, B at 0.70N, C at 0.304N: C clears B by far but
  // sits within the 0.005N exclusion radius of A, so C must be rejected
  // even though A is not the most recently accepted peak.
  const int n = 4096;
  DetectorConfig cfg;
  cfg.median_window_fraction = 1e-4;  // floor -> 5-sample window
  std::vector<double> y(n, 0.0);
  add_bump(y, 0.300 * n, 4.0, 100.0);
  add_bump(y, 0.700 * n, 4.0, 90.0);
  add_bump(y, 0.304 * n, 4.0, 80.0);
  const std::vector<AcceptedPeak> peaks = detect_kinks(as_series(y), cfg);
  REQUIRE(peaks.size() == 2);
  CHECK(std::abs(peaks[0].index - 0.300 * n) < 8.0);
  CHECK(std::abs(peaks[1].index - 0.700 * n) < 8.0);

  // Moved clear of A's radius, the third bump is accepted again.
  std::vector<double> y2(n, 0.0);
  add_bump(y2, 0.300 * n, 4.0, 100.0);
  add_bump(y2, 0.700 * n, 4.0, 90.0);
  add_bump(y2, 0.308 * n, 4.0, 80.0);
  CHECK(detect_kinks(as_series(y2), cfg).size() == 3);
}

TEST_CASE("detector: wide humps fail the width cap") {
  const int n = 4096;
  const DetectorConfig cfg;
  std::vector<double> wide(n, 0.0);
  add_bump(wide, 0.5 * n, 0.02 * n, 50.0);  // half-prominence width ~ 0.047N
  CHECK(detect_kinks(as_series(wide), cfg).empty());
  std::vector<double> narrow(n, 0.0);
  add_bump(narrow, 0.5 * n, 0.002 * n, 50.0);  // ~ 0.0047N, passes
  CHECK(detect_kinks(as_series(narrow), cfg).size() == 1);
}

TEST_CASE("detector: labels survive amplitude rescaling and 2x decimation") {
  SyntheticSignalSpec spec;
  const DetectorConfig cfg;
  const std::vector<double> sig = synthetic_signal(spec, 21);
  const std::size_t base = detect_kinks(as_series(sig), cfg).size();
  for (double kappa : {1e-3, 1e3}) {
    std::vector<double> scaled(sig.size());
    for (std::size_t i = 0; i < sig.size(); ++i) scaled[i] = kappa * sig[i];
    CHECK(detect_kinks(as_series(scaled), cfg).size() == base);
  }
  std::vector<double> thin;
  for (std::size_t i = 0; i < sig.size(); i += 2) thin.push_back(sig[i]);
  const std::size_t dec = detect_kinks(as_series(std::move(thin), 2e-3), cfg).size();
  CHECK((dec >= static_cast<std::size_t>(cfg.min_peaks)) ==
        (base >= static_cast<std::size_t>(cfg.min_peaks)));
}

TEST_CASE("detector: deterministic, guards short and non-finite input") {
  SyntheticSignalSpec spec;
  const DetectorConfig cfg;
  const std::vector<double> sig = synthetic_signal(spec, 5);
  const auto first = detect_kinks(as_series(sig), cfg);
  const auto second = detect_kinks(as_series(sig), cfg);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].index == second[i].index);
    CHECK(first[i].height_z == second[i].height_z);
  }
  CHECK_THROWS_AS(detect_kinks(as_series(std::vector<double>(8, 0.0)), cfg), Error);
  std::vector<double> bad(64, 0.0);
  bad[10] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(detect_kinks(as_series(std::move(bad)), cfg), Error);
}

TEST_CASE("classification rule: three accepted peaks make adiabatic") {
  const DetectorConfig cfg;
  auto peak_at = [](double t) {
    AcceptedPeak p;
    p.index = static_cast<int>(t * 1000);
    p.time_ps = t;
    return p;
  };
  const RegimeResult three =
      classify({peak_at(0.1), peak_at(0.3), peak_at(0.5)}, 1.0, cfg);
  CHECK(three.label == RegimeLabel::adiabatic);
  REQUIRE(three.tau_ps.has_value());
  CHECK(*three.tau_ps == 0.1);
  const RegimeResult two = classify({peak_at(0.1), peak_at(0.3)}, 1.0, cfg);
  CHECK(two.label == RegimeLabel::diabatic);
  CHECK(!two.tau_ps.has_value());
  const RegimeResult none = classify({}, 0.0, cfg);
  CHECK(none.label == RegimeLabel::diabatic);
  CHECK(!none.tau_ps.has_value());
}

TEST_CASE("center of mass: anchor, translation equivariance, antipodal warning") {
  const SpatialGrid grid = SpatialGrid::make(512, 128.0);
  const double x0 = 30.0;
  WavepacketState state = init_gaussian(grid, 3.0, 0.0, x0);
  bool indeterminate = true;
  CHECK(std::abs(center_of_mass(state, &indeterminate) - x0) < grid.dx / 100.0);
  CHECK(!indeterminate);

  // Rotating an arbitrary density by m cells shifts the centre by exactly
  // m dx on the circle.
  CounterRng rng(stream_key(3, 3));
  std::vector<double> density(grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) {
    const double d = grid.wrap_displacement(grid.x(j) - 50.0);
    density[j] = std::exp(-d * d / 40.0) * (1.0 + 0.2 * rng.next_double());
  }
  const double base = circular_moments(density, grid).center;
  const int shift = 37;
  std::vector<double> rotated(grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) rotated[(j + shift) % grid.n_points] = density[j];
  const double moved = circular_moments(rotated, grid).center;
  CHECK(grid.wrap_displacement(moved - base) == doctest::Approx(shift * grid.dx).epsilon(1e-9));

  // Antipodal equal masses cancel the first circular moment.
  WavepacketState twin = init_gaussian(grid, 3.0, 0.0, x0);
  const WavepacketState other = init_gaussian(grid, 3.0, 0.0, x0 + 64.0);
  for (int j = 0; j < grid.n_points; ++j)
    twin.psi[j] = (twin.psi[j] + other.psi[j]) / std::sqrt(2.0);
  center_of_mass(twin, &indeterminate);
  CHECK(indeterminate);
}

TEST_CASE("calibration harness: clean suite, invariances, coherent report") {
  const CalibrationReport rep = calibrate_detector(DetectorConfig{}, 20, 99);
  CHECK(rep.clean_trials == 20);
  CHECK(rep.clean_exact_detections == rep.clean_trials);
  CHECK(rep.worst_position_error_samples <
        3.0 * rep.clean_spec.bump_width_fraction * rep.clean_spec.n);
  CHECK(rep.noise_trials == 20);
  CHECK(rep.false_accept_rate ==
        static_cast<double>(rep.noise_trials_with_accepts) / rep.noise_trials);
  CHECK(rep.scale_invariance_ok);
  CHECK(rep.decimation_ok);
  const nlohmann::json j = rep.to_json();
  CHECK(j.at("clean_trials") == 20);
  CHECK(j.at("detector_height_z") == 6.0);
  CHECK_THROWS_AS(calibrate_detector(DetectorConfig{}, 0, 1), Error);
}
