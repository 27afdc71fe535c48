#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

namespace qac {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares y = slope*x + intercept. r2 = 1 - SSres/SStot,
// clamped into [0, 1]; a constant y gives r2 = 1 only for an exact fit.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// y = slope*x, r2 computed against the mean-free total sum of squares.
LinearFit fit_line_through_origin(const std::vector<double>& x, const std::vector<double>& y);

// Diffusivity from a seed-averaged variance curve: OLS of
// sigma^2(t) = 2 D t + c over the trailing fit_fraction of the time span.
// A negative slope clamps D to zero and flags the fit. The nonlinearity
// warning fires when adding a t^2 term shrinks the residual variance by at
// least 50% (ballistic rather than diffusive growth).
struct TransportSummary {
  double d_nm2_ps = 0.0;
  double alpha = 0.0;       // D m / hbar
  bool planckian = false;   // 0.5 <= alpha <= 2.0, endpoints included
  double t_lo_ps = 0.0;
  double t_hi_ps = 0.0;
  double fit_r2 = 0.0;
  int seeds_used = 0;
  bool clamped = false;
  bool nonlinearity_warning = false;

  nlohmann::json to_json() const;
};

TransportSummary fit_diffusivity(const std::vector<double>& t_ps,
                                 const std::vector<double>& variance_nm2, double mass_me,
                                 double fit_fraction, int seeds_used);

double dimensionless_diffusivity(double d_nm2_ps, double mass_me);  // alpha = D m / hbar
bool planckian_window(double alpha);

// Einstein relation: 1/tau_tr = k_B T / (m D). D must be positive.
double relaxation_rate(double temperature_K, double d_nm2_ps, double mass_me);

// Slope of the T-linear resistivity: m k_B / (alpha n e^2 hbar). Carrier
// density and charge are pass-through scalars in the caller's units.
double resistivity_slope(double alpha, double carrier_density, double charge, double mass_me);

// Rate-vs-temperature series at fixed v: relaxation rates from per-point
// diffusivities, with through-origin and free-intercept fits over the
// valid points (those with D > 0). Fits require >= 4 valid points.
struct RatePoint {
  double temperature_K = 0.0;
  double d_nm2_ps = 0.0;
  double alpha = 0.0;
  double rate_per_ps = 0.0;
  bool valid = false;
};

struct RateSeries {
  std::vector<RatePoint> points;
  int valid_points = 0;
  std::optional<LinearFit> through_origin;
  std::optional<LinearFit> free_intercept;
};

RateSeries rate_vs_temperature(const std::vector<double>& temperatures_K,
                               const std::vector<double>& diffusivities_nm2_ps,
                               double mass_me);

}  // namespace qac
