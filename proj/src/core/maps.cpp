#include "core/maps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "core/coherence.hpp"
#include "core/error.hpp"
#include "core/record_io.hpp"

namespace qac {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Shortest round-trippable decimal; keeps aggregate tables bit-identical
// across worker counts and reruns.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

template <class... Parts>
void row(std::string& out, const Parts&... parts) {
  bool first = true;
  ((out += (first ? (first = false, "") : ","), out += parts), ...);
  out += '\n';
}

}  // namespace

RunSummary summarize_record(const TrajectoryRecord& rec, const DetectorConfig* detector_override) {
  RunSummary out;
  out.completed = rec.completed;
  out.wrap_invalid = rec.wrap_invalid;
  if (!rec.completed) return out;

  const DetectorConfig& det = detector_override ? *detector_override : rec.config.detector;
  out.regime = classify_acceleration(acceleration_series(rec.x_cm_nm, rec.dt_ps), det);

  std::vector<double> t, ratio;
  t.reserve(rec.coherence.size());
  ratio.reserve(rec.coherence.size());
  for (const auto& p : rec.coherence) {
    t.push_back(p.t_ps);
    ratio.push_back(p.ratio);
  }
  try {
    out.plateau_ratio = plateau_ratio(t, ratio, rec.config.t_total_ps,
                                      rec.config.plateau_fraction, rec.config.plateau_min_samples);
  } catch (const Error&) {
    out.plateau_ratio = std::nullopt;
  }

  std::vector<double> tv(rec.variance_nm2.size());
  for (std::size_t i = 0; i < tv.size(); ++i) tv[i] = static_cast<double>(i) * rec.dt_ps;
  try {
    out.transport = fit_diffusivity(tv, rec.variance_nm2, rec.config.mass_me,
                                    rec.config.fit_fraction, 1);
  } catch (const Error&) {
    out.transport = std::nullopt;
  }
  return out;
}

const MapCell& MapTables::cell(int ti, int vi, int gi) const {
  const int nv = static_cast<int>(plan.sound_speeds_nm_per_ps.size());
  const int ng = static_cast<int>(plan.couplings_meV.size());
  const int nt = static_cast<int>(plan.temperatures_K.size());
  if (ti < 0 || ti >= nt || vi < 0 || vi >= nv || gi < 0 || gi >= ng)
    throw invalid_argument_error("map cell index out of range");
  return cells[static_cast<std::size_t>((ti * nv + vi) * ng + gi)];
}

MapTables aggregate_dataset(const std::string& dataset_dir,
                            const DetectorConfig* detector_override) {
  const fs::path root(dataset_dir);
  const fs::path manifest_path = root / "manifest.json";
  if (!fs::exists(manifest_path))
    throw io_error("no manifest.json in '" + dataset_dir + "'");
  const json manifest = read_json_file(manifest_path.string());
  if (!manifest.is_object() || manifest.value("kind", "") != "sweep_dataset")
    throw schema_error("'" + manifest_path.string() + "' is not a sweep dataset manifest");
  if (manifest.value("schema_version", "") != schema_version())
    throw schema_error("unsupported dataset schema version");
  if (!manifest.contains("plan") || !manifest.contains("cells"))
    throw schema_error("dataset manifest is missing plan or cells");

  MapTables tables;
  tables.plan = SweepPlan::from_json(manifest.at("plan"));
  const int nt = static_cast<int>(tables.plan.temperatures_K.size());
  const int nv = static_cast<int>(tables.plan.sound_speeds_nm_per_ps.size());
  const int ng = static_cast<int>(tables.plan.couplings_meV.size());
  const json& cell_table = manifest.at("cells");
  if (!cell_table.is_array() || static_cast<int>(cell_table.size()) != nt * nv * ng)
    throw schema_error("dataset manifest cell table does not match the plan axes");

  tables.cells.resize(cell_table.size());
  for (const json& entry : cell_table) {
    MapCell cell;
    cell.ti = entry.at("ti").get<int>();
    cell.vi = entry.at("vi").get<int>();
    cell.gi = entry.at("gi").get<int>();
    if (cell.ti < 0 || cell.ti >= nt || cell.vi < 0 || cell.vi >= nv || cell.gi < 0 ||
        cell.gi >= ng)
      throw schema_error("dataset manifest cell index out of range");
    cell.temperature_K = entry.at("temperature_K").get<double>();
    cell.sound_speed_nm_per_ps = entry.at("sound_speed_nm_per_ps").get<double>();
    cell.coupling_meV = entry.at("coupling_meV").get<double>();
    const std::string expected_hash = entry.at("config_hash").get<std::string>();
    const json& runs = entry.at("runs");
    cell.runs_expected = static_cast<int>(runs.size());

    int adiabatic = 0;
    double peak_sum = 0.0, msa_sum = 0.0, tau_sum = 0.0, ratio_sum = 0.0;
    int tau_count = 0, ratio_count = 0;
    std::vector<double> variance_sum;
    int variance_runs = 0;
    double dt_ps = 0.0;
    double mass_me = 0.0, fit_fraction = 0.0;

    for (const json& run : runs) {
      TrajectoryRecord rec;
      try {
        rec = load_record((root / run.at("file").get<std::string>()).string());
      } catch (const Error&) {
        continue;  // missing or unreadable: the cell just stays incomplete
      }
      if (rec.config_hash != expected_hash || rec.seed != run.at("seed").get<std::uint64_t>())
        continue;
      ++cell.runs_loaded;
      cell.any_wrap_invalid = cell.any_wrap_invalid || rec.wrap_invalid;
      const RunSummary s = summarize_record(rec, detector_override);
      if (!s.completed) continue;
      ++cell.runs_completed;
      if (s.regime.label == RegimeLabel::adiabatic) {
        ++adiabatic;
        if (s.regime.tau_ps) {
          tau_sum += *s.regime.tau_ps;
          ++tau_count;
        }
      }
      peak_sum += static_cast<double>(s.regime.accepted_peaks.size());
      msa_sum += s.regime.msa;
      if (s.plateau_ratio) {
        ratio_sum += *s.plateau_ratio;
        ++ratio_count;
      }
      if (!s.wrap_invalid) {
        if (variance_runs == 0) {
          variance_sum.assign(rec.variance_nm2.begin(), rec.variance_nm2.end());
          dt_ps = rec.dt_ps;
          mass_me = rec.config.mass_me;
          fit_fraction = rec.config.fit_fraction;
          variance_runs = 1;
        } else if (rec.variance_nm2.size() == variance_sum.size()) {
          for (std::size_t i = 0; i < variance_sum.size(); ++i)
            variance_sum[i] += rec.variance_nm2[i];
          ++variance_runs;
        }
      }
    }

    cell.complete = cell.runs_completed == cell.runs_expected && cell.runs_expected > 0;
    if (cell.runs_completed > 0) {
      cell.adiabatic_fraction = static_cast<double>(adiabatic) / cell.runs_completed;
      cell.mean_peak_count = peak_sum / cell.runs_completed;
      cell.msa_mean = msa_sum / cell.runs_completed;
      const int min_peaks = detector_override
                                ? detector_override->min_peaks
                                : tables.plan.base_config.detector.min_peaks;
      // Strict majority decides; an exact tie falls back to the mean count.
      if (2 * adiabatic > cell.runs_completed)
        cell.majority_label = RegimeLabel::adiabatic;
      else if (2 * adiabatic < cell.runs_completed)
        cell.majority_label = RegimeLabel::diabatic;
      else
        cell.majority_label = cell.mean_peak_count >= min_peaks ? RegimeLabel::adiabatic
                                                                : RegimeLabel::diabatic;
    }
    if (tau_count > 0) cell.tau_mean_ps = tau_sum / tau_count;
    if (ratio_count > 0) cell.coherence_ratio_mean = ratio_sum / ratio_count;
    if (variance_runs > 0) {
      std::vector<double> t(variance_sum.size());
      for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = static_cast<double>(i) * dt_ps;
        variance_sum[i] /= variance_runs;
      }
      try {
        cell.transport = fit_diffusivity(t, variance_sum, mass_me, fit_fraction, variance_runs);
      } catch (const Error&) {
        cell.transport = std::nullopt;
      }
    }

    const std::size_t slot = static_cast<std::size_t>((cell.ti * nv + cell.vi) * ng + cell.gi);
    tables.cells[slot] = std::move(cell);
  }
  return tables;
}

namespace {

// Cell borders sit midway between adjacent axis values; edge cells carry
// their inner half-width outward. A single-value axis gets unit width.
std::pair<double, double> cell_bounds(const std::vector<double>& axis, int i) {
  const int n = static_cast<int>(axis.size());
  double lo, hi;
  if (n == 1) {
    lo = axis[0] - 0.5;
    hi = axis[0] + 0.5;
  } else {
    lo = i == 0 ? axis[0] - 0.5 * (axis[1] - axis[0]) : 0.5 * (axis[i - 1] + axis[i]);
    hi = i == n - 1 ? axis[n - 1] + 0.5 * (axis[n - 1] - axis[n - 2])
                    : 0.5 * (axis[i] + axis[i + 1]);
  }
  return {lo, hi};
}

}  // namespace

std::vector<BoundarySegment> boundary_staircase(const MapTables& tables, int gi) {
  const auto& tax = tables.plan.temperatures_K;
  const auto& vax = tables.plan.sound_speeds_nm_per_ps;
  const int nt = static_cast<int>(tax.size());
  const int nv = static_cast<int>(vax.size());
  std::vector<BoundarySegment> segments;
  // Edges between T-neighbours: vertical border at the shared T midpoint.
  for (int ti = 0; ti + 1 < nt; ++ti)
    for (int vi = 0; vi < nv; ++vi) {
      const MapCell& a = tables.cell(ti, vi, gi);
      const MapCell& b = tables.cell(ti + 1, vi, gi);
      if (!a.complete || !b.complete || a.majority_label == b.majority_label) continue;
      const double tmid = 0.5 * (tax[ti] + tax[ti + 1]);
      const auto [vlo, vhi] = cell_bounds(vax, vi);
      segments.push_back({tmid, vlo, tmid, vhi});
    }
  // Edges between v-neighbours: horizontal border at the shared v midpoint.
  for (int ti = 0; ti < nt; ++ti)
    for (int vi = 0; vi + 1 < nv; ++vi) {
      const MapCell& a = tables.cell(ti, vi, gi);
      const MapCell& b = tables.cell(ti, vi + 1, gi);
      if (!a.complete || !b.complete || a.majority_label == b.majority_label) continue;
      const double vmid = 0.5 * (vax[vi] + vax[vi + 1]);
      const auto [tlo, thi] = cell_bounds(tax, ti);
      segments.push_back({tlo, vmid, thi, vmid});
    }
  return segments;
}

std::vector<DiagonalPoint> diagonal_statistic(const MapTables& tables, int gi,
                                              DiagonalKind kind) {
  const int nt = static_cast<int>(tables.plan.temperatures_K.size());
  const int nv = static_cast<int>(tables.plan.sound_speeds_nm_per_ps.size());
  const int n = std::min(nt, nv);
  std::vector<DiagonalPoint> points;
  points.reserve(n);
  for (int k = 0; k < n; ++k) {
    // anti runs from the low-T/high-v corner toward high-T/low-v.
    const int vi = kind == DiagonalKind::anti ? nv - 1 - k : k;
    const MapCell& cell = tables.cell(k, vi, gi);
    DiagonalPoint p;
    p.position = k;
    p.ti = k;
    p.vi = vi;
    p.temperature_K = tables.plan.temperatures_K[k];
    p.sound_speed_nm_per_ps = tables.plan.sound_speeds_nm_per_ps[vi];
    p.complete = cell.complete;
    p.mean_peak_count = cell.mean_peak_count;
    p.majority_label = cell.majority_label;
    points.push_back(p);
  }
  return points;
}

RateSeries rate_series_for(const MapTables& tables, int vi, int gi) {
  const int nt = static_cast<int>(tables.plan.temperatures_K.size());
  std::vector<double> temps(nt), diffusivities(nt, 0.0);
  for (int ti = 0; ti < nt; ++ti) {
    const MapCell& cell = tables.cell(ti, vi, gi);
    temps[ti] = tables.plan.temperatures_K[ti];
    if (cell.complete && cell.transport && !cell.transport->clamped)
      diffusivities[ti] = cell.transport->d_nm2_ps;
  }
  return rate_vs_temperature(temps, diffusivities, tables.plan.base_config.mass_me);
}

void write_map_tables(const MapTables& tables, const std::string& dataset_dir) {
  const fs::path maps_dir = fs::path(dataset_dir) / "maps";
  fs::create_directories(maps_dir);
  const int nt = static_cast<int>(tables.plan.temperatures_K.size());
  const int nv = static_cast<int>(tables.plan.sound_speeds_nm_per_ps.size());
  const int ng = static_cast<int>(tables.plan.couplings_meV.size());

  std::string regime, msa, coher, diff;
  row(regime, "ti", "vi", "gi", "temperature_K", "sound_speed_nm_per_ps", "coupling_meV",
      "complete", "runs_completed", "adiabatic_fraction", "majority_label", "mean_peak_count",
      "tau_mean_ps");
  row(msa, "ti", "vi", "gi", "temperature_K", "sound_speed_nm_per_ps", "coupling_meV", "complete",
      "msa_mean_nm_ps2");
  row(coher, "ti", "vi", "gi", "temperature_K", "sound_speed_nm_per_ps", "coupling_meV",
      "complete", "plateau_ratio_mean");
  row(diff, "ti", "vi", "gi", "temperature_K", "sound_speed_nm_per_ps", "coupling_meV",
      "complete", "d_nm2_ps", "alpha", "planckian", "fit_r2", "seeds_used", "clamped",
      "nonlinearity_warning");
  for (int ti = 0; ti < nt; ++ti)
    for (int vi = 0; vi < nv; ++vi)
      for (int gi = 0; gi < ng; ++gi) {
        const MapCell& c = tables.cell(ti, vi, gi);
        const std::string prefix_t = fmt(c.temperature_K);
        const std::string prefix_v = fmt(c.sound_speed_nm_per_ps);
        const std::string prefix_g = fmt(c.coupling_meV);
        row(regime, fmt(ti), fmt(vi), fmt(gi), prefix_t, prefix_v, prefix_g, fmt(c.complete),
            fmt(c.runs_completed), fmt(c.adiabatic_fraction),
            std::string(to_string(c.majority_label)), fmt(c.mean_peak_count),
            fmt(c.tau_mean_ps));
        row(msa, fmt(ti), fmt(vi), fmt(gi), prefix_t, prefix_v, prefix_g, fmt(c.complete),
            fmt(c.msa_mean));
        row(coher, fmt(ti), fmt(vi), fmt(gi), prefix_t, prefix_v, prefix_g, fmt(c.complete),
            fmt(c.coherence_ratio_mean));
        if (c.transport)
          row(diff, fmt(ti), fmt(vi), fmt(gi), prefix_t, prefix_v, prefix_g, fmt(c.complete),
              fmt(c.transport->d_nm2_ps), fmt(c.transport->alpha), fmt(c.transport->planckian),
              fmt(c.transport->fit_r2), fmt(c.transport->seeds_used), fmt(c.transport->clamped),
              fmt(c.transport->nonlinearity_warning));
        else
          row(diff, fmt(ti), fmt(vi), fmt(gi), prefix_t, prefix_v, prefix_g, fmt(c.complete),
              std::string(), std::string(), std::string(), std::string(), std::string(),
              std::string(), std::string());
      }
  write_text_file_atomic((maps_dir / "regime.csv").string(), regime);
  write_text_file_atomic((maps_dir / "msa.csv").string(), msa);
  write_text_file_atomic((maps_dir / "coherence.csv").string(), coher);
  write_text_file_atomic((maps_dir / "diffusivity.csv").string(), diff);

  for (int gi = 0; gi < ng; ++gi) {
    std::string stairs;
    row(stairs, "t0_K", "v0_nm_per_ps", "t1_K", "v1_nm_per_ps");
    for (const BoundarySegment& s : boundary_staircase(tables, gi))
      row(stairs, fmt(s.t0), fmt(s.v0), fmt(s.t1), fmt(s.v1));
    write_text_file_atomic((maps_dir / ("staircase_g" + std::to_string(gi) + ".csv")).string(),
                           stairs);

    std::string diag;
    row(diag, "position", "ti", "vi", "temperature_K", "sound_speed_nm_per_ps", "complete",
        "mean_peak_count", "majority_label");
    for (const DiagonalPoint& p : diagonal_statistic(tables, gi))
      row(diag, fmt(p.position), fmt(p.ti), fmt(p.vi), fmt(p.temperature_K),
          fmt(p.sound_speed_nm_per_ps), fmt(p.complete), fmt(p.mean_peak_count),
          std::string(to_string(p.majority_label)));
    write_text_file_atomic((maps_dir / ("diagonal_g" + std::to_string(gi) + ".csv")).string(),
                           diag);
  }
}

void write_rate_tables(const MapTables& tables, const std::string& dataset_dir) {
  const fs::path maps_dir = fs::path(dataset_dir) / "maps";
  fs::create_directories(maps_dir);
  const int nv = static_cast<int>(tables.plan.sound_speeds_nm_per_ps.size());
  const int ng = static_cast<int>(tables.plan.couplings_meV.size());

  std::string fits;
  row(fits, "vi", "gi", "sound_speed_nm_per_ps", "coupling_meV", "valid_points",
      "through_origin_slope", "through_origin_r2", "free_slope", "free_intercept", "free_r2");
  for (int vi = 0; vi < nv; ++vi)
    for (int gi = 0; gi < ng; ++gi) {
      const RateSeries series = rate_series_for(tables, vi, gi);
      std::string rates;
      row(rates, "temperature_K", "d_nm2_ps", "alpha", "rate_per_ps", "valid");
      for (const RatePoint& p : series.points)
        row(rates, fmt(p.temperature_K), fmt(p.d_nm2_ps), fmt(p.alpha), fmt(p.rate_per_ps),
            fmt(p.valid));
      write_text_file_atomic(
          (maps_dir / ("rates_v" + std::to_string(vi) + "_g" + std::to_string(gi) + ".csv"))
              .string(),
          rates);
      row(fits, fmt(vi), fmt(gi), fmt(tables.plan.sound_speeds_nm_per_ps[vi]),
          fmt(tables.plan.couplings_meV[gi]), fmt(series.valid_points),
          series.through_origin ? fmt(series.through_origin->slope) : std::string(),
          series.through_origin ? fmt(series.through_origin->r2) : std::string(),
          series.free_intercept ? fmt(series.free_intercept->slope) : std::string(),
          series.free_intercept ? fmt(series.free_intercept->intercept) : std::string(),
          series.free_intercept ? fmt(series.free_intercept->r2) : std::string());
    }
  write_text_file_atomic((maps_dir / "rates_fits.csv").string(), fits);
}

}  // namespace qac
