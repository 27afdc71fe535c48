#include <cmath>
#include <vector>

#include "doctest.h"

#include "core/constants.hpp"
#include "core/error.hpp"
#include "core/transport.hpp"

using namespace qac;

namespace {

// k_B / hbar in 1/(ps K); frozen from the unit constants by hand.
constexpr double kBOverHbar = 0.13092033913490883897;

std::vector<double> time_axis(int samples, double t_end) {
  std::vector<double> t(samples);
  for (int i = 0; i < samples; ++i) t[i] = t_end * i / (samples - 1);
  return t;
}

}  // namespace

TEST_CASE("transport: least-squares lines recover exact coefficients") {
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};

  SUBCASE("free-intercept fit") {
    std::vector<double> y;
    for (double xi : x) y.push_back(3.0 * xi - 2.0);
    const LinearFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(-2.0).epsilon(1e-13));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("through-origin fit") {
    std::vector<double> y;
    for (double xi : x) y.push_back(4.0 * xi);
    const LinearFit f = fit_line_through_origin(x, y);
    CHECK(f.slope == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(f.intercept == 0.0);
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("degenerate abscissa and size errors") {
    CHECK_THROWS_AS(fit_line({1.0, 1.0, 1.0}, {0.0, 1.0, 2.0}), Error);
    CHECK_THROWS_AS(fit_line({1.0}, {2.0}), Error);
    CHECK_THROWS_AS(fit_line({1.0, 2.0}, {2.0}), Error);
    CHECK_THROWS_AS(fit_line_through_origin({0.0, 0.0}, {1.0, 2.0}), Error);
    CHECK_THROWS_AS(fit_line_through_origin({}, {}), Error);
  }
}

TEST_CASE("transport: diffusivity fit recovers a synthetic linear MSD exactly") {
  const std::vector<double> t = time_axis(101, 10.0);
  std::vector<double> var;
  for (double ti : t) var.push_back(2.0 * 0.7 * ti + 3.0);

  const TransportSummary s = fit_diffusivity(t, var, 8.0, 0.5, 5);
  CHECK(std::abs(s.d_nm2_ps - 0.7) < 1e-6 * 0.7);
  CHECK(s.fit_r2 > 1.0 - 1e-10);
  CHECK(s.seeds_used == 5);
  CHECK_FALSE(s.clamped);
  CHECK_FALSE(s.nonlinearity_warning);
  // Trailing-half window of a 10 ps span.
  CHECK(s.t_lo_ps >= 5.0);
  CHECK(s.t_lo_ps < 5.0 + 0.11);
  CHECK(s.t_hi_ps == doctest::Approx(10.0).epsilon(1e-12));

  SUBCASE("summary serializes under the frozen keys") {
    const nlohmann::json j = s.to_json();
    CHECK(j.at("d_nm2_ps").get<double>() == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(j.contains("alpha"));
    CHECK(j.contains("planckian"));
    CHECK(j.at("fit_window_t_lo_ps").get<double>() == doctest::Approx(s.t_lo_ps));
    CHECK(j.at("fit_window_t_hi_ps").get<double>() == doctest::Approx(s.t_hi_ps));
    CHECK(j.contains("fit_r2"));
    CHECK(j.at("seeds_used").get<int>() == 5);
    CHECK(j.at("clamped").get<bool>() == false);
    CHECK(j.at("nonlinearity_warning").get<bool>() == false);
  }
}

TEST_CASE("transport: shrinking variance clamps to zero and flags the fit") {
  const std::vector<double> t = time_axis(64, 8.0);
  std::vector<double> var;
  for (double ti : t) var.push_back(50.0 - 2.0 * ti);

  const TransportSummary s = fit_diffusivity(t, var, 8.0, 0.5, 3);
  CHECK(s.d_nm2_ps == 0.0);
  CHECK(s.clamped);
  CHECK(s.alpha == 0.0);
  CHECK_FALSE(s.planckian);
}

TEST_CASE("transport: ballistic growth raises the nonlinearity warning") {
  const std::vector<double> t = time_axis(64, 8.0);
  std::vector<double> var;
  for (double ti : t) var.push_back(1.5 * ti * ti);

  const TransportSummary s = fit_diffusivity(t, var, 8.0, 0.5, 1);
  CHECK(s.nonlinearity_warning);
  CHECK(s.d_nm2_ps > 0.0);
}

TEST_CASE("transport: window with fewer than 8 samples is refused") {
  const std::vector<double> t = time_axis(10, 10.0);  // 5 samples land in [5, 10]
  const std::vector<double> var(10, 1.0);
  CHECK_THROWS_AS(fit_diffusivity(t, var, 8.0, 0.5, 1), Error);

  SUBCASE("mismatched series and bad fractions are invalid") {
    CHECK_THROWS_AS(fit_diffusivity({0.0, 1.0}, {1.0}, 8.0, 0.5, 1), Error);
    CHECK_THROWS_AS(fit_diffusivity(t, var, 8.0, 0.0, 1), Error);
    CHECK_THROWS_AS(fit_diffusivity(t, var, 8.0, 1.5, 1), Error);
  }
}

TEST_CASE("transport: Planckian window honors its endpoints exactly") {
  CHECK(planckian_window(0.5));
  CHECK(planckian_window(2.0));
  CHECK(planckian_window(1.0));
  CHECK_FALSE(planckian_window(0.49999999));
  CHECK_FALSE(planckian_window(2.00000001));

  // alpha = D m / hbar crossing the window boundary via D.
  const double mass_me = 8.0;
  const double d_half = 0.5 * kHbar / (mass_me * kElectronMass);
  CHECK(dimensionless_diffusivity(d_half, mass_me) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(planckian_window(dimensionless_diffusivity(d_half, mass_me)));
  CHECK_FALSE(planckian_window(dimensionless_diffusivity(d_half * 0.98, mass_me)));
}

TEST_CASE("transport: alpha = 1 reproduces the Planckian rate k_B T / hbar") {
  const double mass_me = 8.0;
  const double d_alpha1 = kHbar / (mass_me * kElectronMass);
  REQUIRE(dimensionless_diffusivity(d_alpha1, mass_me) == doctest::Approx(1.0).epsilon(1e-14));

  for (double T : {5.0, 40.0, 73.0, 120.0}) {
    const double rate = relaxation_rate(T, d_alpha1, mass_me);
    CHECK(std::abs(rate - kBOverHbar * T) <= 1e-10 * kBOverHbar * T);
  }

  SUBCASE("zero temperature gives zero rate") {
    CHECK(relaxation_rate(0.0, d_alpha1, mass_me) == 0.0);
  }

  SUBCASE("non-positive diffusivity is undefined") {
    CHECK_THROWS_AS(relaxation_rate(10.0, 0.0, mass_me), Error);
    CHECK_THROWS_AS(relaxation_rate(10.0, -1.0, mass_me), Error);
  }

  SUBCASE("negative temperature is invalid") {
    CHECK_THROWS_AS(relaxation_rate(-1.0, d_alpha1, mass_me), Error);
  }
}

TEST_CASE("transport: resistivity slope algebra") {
  // rho(T) slope = m k_B / (alpha n e^2 hbar); doubling alpha halves it.
  const double s1 = resistivity_slope(1.0, 1.0, 1.0, 8.0);
  const double s2 = resistivity_slope(2.0, 1.0, 1.0, 8.0);
  CHECK(s1 == doctest::Approx(2.0 * s2).epsilon(1e-14));
  CHECK(s1 == doctest::Approx(8.0 * kElectronMass * kBoltzmann / kHbar).epsilon(1e-14));
  CHECK_THROWS_AS(resistivity_slope(0.0, 1.0, 1.0, 8.0), Error);
  CHECK_THROWS_AS(resistivity_slope(1.0, 0.0, 1.0, 8.0), Error);
  CHECK_THROWS_AS(resistivity_slope(1.0, 1.0, 0.0, 8.0), Error);
}

TEST_CASE("transport: rate-vs-temperature series and its fits") {
  const double mass_me = 8.0;
  const double d_alpha1 = kHbar / (mass_me * kElectronMass);
  const std::vector<double> temps = {10.0, 20.0, 30.0, 40.0, 50.0, 60.0};

  SUBCASE("constant alpha = 1 dataset fits the Planckian line exactly") {
    const std::vector<double> ds(temps.size(), d_alpha1);
    const RateSeries series = rate_vs_temperature(temps, ds, mass_me);
    CHECK(series.valid_points == 6);
    REQUIRE(series.through_origin.has_value());
    REQUIRE(series.free_intercept.has_value());
    CHECK(std::abs(series.through_origin->slope - kBOverHbar) <= 1e-10 * kBOverHbar);
    CHECK(series.through_origin->r2 > 1.0 - 1e-10);
    CHECK(std::abs(series.free_intercept->intercept) < 1e-10);
    for (const RatePoint& p : series.points) {
      CHECK(p.valid);
      CHECK(p.alpha == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("doubling D halves the rate slope") {
    const std::vector<double> ds(temps.size(), 2.0 * d_alpha1);
    const RateSeries series = rate_vs_temperature(temps, ds, mass_me);
    REQUIRE(series.through_origin.has_value());
    CHECK(std::abs(series.through_origin->slope - 0.5 * kBOverHbar) <=
          1e-10 * kBOverHbar);
  }

  SUBCASE("points without positive D are carried but not fitted") {
    const std::vector<double> ds = {d_alpha1, 0.0, d_alpha1, -0.5, d_alpha1, 0.0};
    const RateSeries series = rate_vs_temperature(temps, ds, mass_me);
    CHECK(series.valid_points == 3);
    CHECK_FALSE(series.through_origin.has_value());
    CHECK_FALSE(series.free_intercept.has_value());
    REQUIRE(series.points.size() == 6);
    CHECK(series.points[0].valid);
    CHECK_FALSE(series.points[1].valid);
    CHECK(series.points[1].rate_per_ps == 0.0);
    CHECK_FALSE(series.points[3].valid);
  }

  SUBCASE("length mismatch is invalid") {
    CHECK_THROWS_AS(rate_vs_temperature(temps, {1.0}, mass_me), Error);
  }
}
