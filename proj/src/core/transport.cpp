#include "core/transport.hpp"

#include <algorithm>
#include <cmath>

#include "core/constants.hpp"
#include "core/error.hpp"

namespace qac {

namespace {

double residual_ss(const std::vector<double>& x, const std::vector<double>& y,
                   double slope, double intercept) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (slope * x[i] + intercept);
    acc += r * r;
  }
  return acc;
}

double total_ss(const std::vector<double>& y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double acc = 0.0;
  for (double v : y) acc += (v - mean) * (v - mean);
  return acc;
}

double r2_from(double ss_res, double ss_tot) {
  if (ss_tot <= 0.0) return ss_res <= 0.0 ? 1.0 : 0.0;
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

// Least squares for y = a t^2 + b t + c via normal equations.
double quadratic_residual_ss(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double s0 = static_cast<double>(n), s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  double b0 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = x[i], t2 = t * t;
    s1 += t;
    s2 += t2;
    s3 += t2 * t;
    s4 += t2 * t2;
    b0 += y[i];
    b1 += y[i] * t;
    b2 += y[i] * t2;
  }
  // Solve the 3x3 system [s4 s3 s2; s3 s2 s1; s2 s1 s0] [a b c] = [b2 b1 b0].
  const double det = s4 * (s2 * s0 - s1 * s1) - s3 * (s3 * s0 - s1 * s2) +
                     s2 * (s3 * s1 - s2 * s2);
  if (det == 0.0) return total_ss(y);
  const double a = (b2 * (s2 * s0 - s1 * s1) - s3 * (b1 * s0 - b0 * s1) +
                    s2 * (b1 * s1 - b0 * s2)) /
                   det;
  const double b = (s4 * (b1 * s0 - b0 * s1) - b2 * (s3 * s0 - s2 * s1) +
                    s2 * (s3 * b0 - s2 * b1)) /
                   det;
  const double c = (s4 * (s2 * b0 - s1 * b1) - s3 * (s3 * b0 - s2 * b1) +
                    b2 * (s3 * s1 - s2 * s2)) /
                   det;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (a * x[i] * x[i] + b * x[i] + c);
    acc += r * r;
  }
  return acc;
}

}  // namespace

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw invalid_argument_error("need at least two points to fit a line");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) throw numeric_error("degenerate abscissa in linear fit");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy * sxx - sx * sxy) / det;
  f.r2 = r2_from(residual_ss(x, y, f.slope, f.intercept), total_ss(y));
  return f;
}

LinearFit fit_line_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty())
    throw invalid_argument_error("need at least one point for a through-origin fit");
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  if (sxx == 0.0) throw numeric_error("degenerate abscissa in through-origin fit");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = 0.0;
  f.r2 = r2_from(residual_ss(x, y, f.slope, 0.0), total_ss(y));
  return f;
}

TransportSummary fit_diffusivity(const std::vector<double>& t_ps,
                                 const std::vector<double>& variance_nm2, double mass_me,
                                 double fit_fraction, int seeds_used) {
  if (t_ps.size() != variance_nm2.size())
    throw invalid_argument_error("time and variance series must match");
  if (!(fit_fraction > 0.0 && fit_fraction <= 1.0))
    throw invalid_argument_error("fit fraction must lie in (0, 1]");
  if (t_ps.empty()) throw invalid_argument_error("empty variance series");

  const double t_end = t_ps.back();
  const double t_lo = t_end * (1.0 - fit_fraction);
  std::vector<double> xs, ys;
  xs.reserve(t_ps.size());
  ys.reserve(t_ps.size());
  for (std::size_t i = 0; i < t_ps.size(); ++i) {
    if (t_ps[i] >= t_lo) {
      xs.push_back(t_ps[i]);
      ys.push_back(variance_nm2[i]);
    }
  }
  if (xs.size() < 8) throw numeric_error("fewer than 8 samples in the diffusivity window");

  const LinearFit line = fit_line(xs, ys);
  TransportSummary s;
  s.t_lo_ps = xs.front();
  s.t_hi_ps = xs.back();
  s.fit_r2 = line.r2;
  s.seeds_used = seeds_used;
  if (line.slope < 0.0) {
    s.d_nm2_ps = 0.0;
    s.clamped = true;
  } else {
    s.d_nm2_ps = 0.5 * line.slope;
  }
  s.alpha = dimensionless_diffusivity(s.d_nm2_ps, mass_me);
  s.planckian = planckian_window(s.alpha);

  const double ss_lin = residual_ss(xs, ys, line.slope, line.intercept);
  const double ss_quad = quadratic_residual_ss(xs, ys);
  s.nonlinearity_warning = ss_quad <= 0.5 * ss_lin && ss_lin > 0.0;
  return s;
}

double dimensionless_diffusivity(double d_nm2_ps, double mass_me) {
  return d_nm2_ps * mass_me * kElectronMass / kHbar;
}

bool planckian_window(double alpha) { return alpha >= 0.5 && alpha <= 2.0; }

double relaxation_rate(double temperature_K, double d_nm2_ps, double mass_me) {
  if (temperature_K < 0.0) throw invalid_argument_error("temperature must be non-negative");
  if (!(d_nm2_ps > 0.0))
    throw numeric_error("relaxation rate undefined for non-positive diffusivity");
  return kBoltzmann * temperature_K / (mass_me * kElectronMass * d_nm2_ps);
}

double resistivity_slope(double alpha, double carrier_density, double charge, double mass_me) {
  if (!(alpha > 0.0)) throw invalid_argument_error("alpha must be positive");
  if (!(carrier_density > 0.0)) throw invalid_argument_error("carrier density must be positive");
  if (charge == 0.0) throw invalid_argument_error("charge must be nonzero");
  return mass_me * kElectronMass * kBoltzmann /
         (alpha * carrier_density * charge * charge * kHbar);
}

RateSeries rate_vs_temperature(const std::vector<double>& temperatures_K,
                               const std::vector<double>& diffusivities_nm2_ps,
                               double mass_me) {
  if (temperatures_K.size() != diffusivities_nm2_ps.size())
    throw invalid_argument_error("temperature and diffusivity lists must match");
  RateSeries series;
  std::vector<double> ts, rates;
  for (std::size_t i = 0; i < temperatures_K.size(); ++i) {
    RatePoint p;
    p.temperature_K = temperatures_K[i];
    p.d_nm2_ps = diffusivities_nm2_ps[i];
    p.alpha = dimensionless_diffusivity(p.d_nm2_ps, mass_me);
    if (p.d_nm2_ps > 0.0) {
      p.rate_per_ps = relaxation_rate(p.temperature_K, p.d_nm2_ps, mass_me);
      p.valid = true;
      ts.push_back(p.temperature_K);
      rates.push_back(p.rate_per_ps);
    }
    series.points.push_back(p);
  }
  series.valid_points = static_cast<int>(ts.size());
  if (series.valid_points >= 4) {
    series.through_origin = fit_line_through_origin(ts, rates);
    series.free_intercept = fit_line(ts, rates);
  }
  return series;
}

nlohmann::json TransportSummary::to_json() const {
  return {{"d_nm2_ps", d_nm2_ps},
          {"alpha", alpha},
          {"planckian", planckian},
          {"fit_window_t_lo_ps", t_lo_ps},
          {"fit_window_t_hi_ps", t_hi_ps},
          {"fit_r2", fit_r2},
          {"seeds_used", seeds_used},
          {"clamped", clamped},
          {"nonlinearity_warning", nonlinearity_warning}};
}

}  // namespace qac
