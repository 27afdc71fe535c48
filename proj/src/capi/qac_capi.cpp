#include "qac/qac.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/calibration.hpp"
#include "core/config.hpp"
#include "core/error.hpp"
#include "core/maps.hpp"
#include "core/record_io.hpp"
#include "core/sweep.hpp"
#include "core/trajectory.hpp"
#include "core/validate.hpp"

using nlohmann::json;

struct qac_config {
  qac::SimulationConfig cfg;
};

struct qac_trajectory {
  qac::TrajectoryRecord record;
  // Materialized coherence columns so the C view has stable pointers.
  std::vector<double> coh_t, coh_l, coh_ratio;
};

namespace {

thread_local std::string g_last_error;

qac_status fail(qac_status status, const char* message) {
  g_last_error = message;
  return status;
}

qac_status from_error(const qac::Error& e) {
  g_last_error = e.what();
  switch (e.code()) {
    case qac::ErrorCode::invalid_argument: return QAC_ERR_INVALID_ARGUMENT;
    case qac::ErrorCode::config: return QAC_ERR_CONFIG;
    case qac::ErrorCode::io: return QAC_ERR_IO;
    case qac::ErrorCode::schema: return QAC_ERR_SCHEMA;
    case qac::ErrorCode::numeric: return QAC_ERR_NUMERIC;
    case qac::ErrorCode::internal: return QAC_ERR_INTERNAL;
  }
  return QAC_ERR_INTERNAL;
}

// Run `body` inside the uniform exception-to-status boundary.
template <class Body>
qac_status guarded(Body&& body) {
  try {
    return body();
  } catch (const qac::Error& e) {
    return from_error(e);
  } catch (const std::bad_alloc&) {
    return fail(QAC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QAC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QAC_ERR_INTERNAL, "unknown error");
  }
}

qac_status copy_string(const std::string& s, char** out) {
  char* buf = static_cast<char*>(std::malloc(s.size() + 1));
  if (!buf) return fail(QAC_ERR_INTERNAL, "out of memory");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  *out = buf;
  return QAC_OK;
}

qac_status require(bool ok, const char* what) {
  return ok ? QAC_OK : fail(QAC_ERR_INVALID_ARGUMENT, what);
}

json summary_json(const qac_trajectory& t) {
  const qac::TrajectoryRecord& rec = t.record;
  const qac::RunSummary s = qac::summarize_record(rec);
  json j{{"schema_version", qac::schema_version()},
         {"config_hash", rec.config_hash},
         {"seed", rec.seed},
         {"dt_ps", rec.dt_ps},
         {"n_steps", rec.n_steps},
         {"completed", rec.completed},
         {"failure", rec.failure},
         {"norm_drift", rec.norm_drift},
         {"energy_drift_meV", rec.energy_drift_meV},
         {"wrap_invalid", rec.wrap_invalid},
         {"indeterminate_center_samples", rec.indeterminate_center_samples}};
  if (rec.completed) {
    json peaks = json::array();
    for (const auto& p : s.regime.accepted_peaks)
      peaks.push_back({{"time_ps", p.time_ps},
                       {"height_z", p.height_z},
                       {"prominence_z", p.prominence_z},
                       {"width_ps", p.width_ps}});
    j["regime"] = qac::to_string(s.regime.label);
    j["accepted_peaks"] = std::move(peaks);
    j["accepted_peak_count"] = s.regime.accepted_peaks.size();
    if (s.regime.tau_ps) j["tau_ps"] = *s.regime.tau_ps;
    j["msa_nm_ps2"] = s.regime.msa;
    if (s.plateau_ratio) j["coherence_plateau_ratio"] = *s.plateau_ratio;
    if (s.transport) j["transport"] = s.transport->to_json();
  }
  return j;
}

}  // namespace

extern "C" {

const char* qac_version(void) { return QAC_VERSION_STRING; }

const char* qac_schema_version(void) { return qac::schema_version(); }

const char* qac_last_error(void) { return g_last_error.c_str(); }

void qac_string_free(char* s) { std::free(s); }

qac_status qac_config_create(qac_config** out) {
  if (require(out != nullptr, "out must not be null")) return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    *out = new qac_config{};
    return QAC_OK;
  });
}

qac_status qac_config_load(const char* path, qac_config** out) {
  if (require(path && out, "path and out must not be null")) return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    auto cfg = qac::SimulationConfig::load(path);
    *out = new qac_config{std::move(cfg)};
    return QAC_OK;
  });
}

qac_status qac_config_from_json(const char* json_text, qac_config** out) {
  if (require(json_text && out, "json_text and out must not be null"))
    return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    auto cfg = qac::SimulationConfig::from_json(qac::parse_json_text(json_text, "json_text argument"));
    *out = new qac_config{std::move(cfg)};
    return QAC_OK;
  });
}

qac_status qac_config_to_json(const qac_config* cfg, char** json_out) {
  if (require(cfg && json_out, "cfg and json_out must not be null"))
    return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] { return copy_string(cfg->cfg.to_json().dump(2) + "\n", json_out); });
}

qac_status qac_config_save(const qac_config* cfg, const char* path) {
  if (require(cfg && path, "cfg and path must not be null")) return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    cfg->cfg.save(path);
    return QAC_OK;
  });
}

qac_status qac_config_hash(const qac_config* cfg, char** hash_out) {
  if (require(cfg && hash_out, "cfg and hash_out must not be null"))
    return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] { return copy_string(cfg->cfg.hash(), hash_out); });
}

void qac_config_free(qac_config* cfg) { delete cfg; }

qac_status qac_trajectory_run(const qac_config* cfg, uint64_t seed, qac_trajectory** out) {
  if (require(cfg && out, "cfg and out must not be null")) return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    auto traj = std::make_unique<qac_trajectory>();
    traj->record = qac::run_trajectory(cfg->cfg, seed);
    traj->coh_t.reserve(traj->record.coherence.size());
    traj->coh_l.reserve(traj->record.coherence.size());
    traj->coh_ratio.reserve(traj->record.coherence.size());
    for (const auto& p : traj->record.coherence) {
      traj->coh_t.push_back(p.t_ps);
      traj->coh_l.push_back(p.l_phi_nm);
      traj->coh_ratio.push_back(p.ratio);
    }
    *out = traj.release();
    return QAC_OK;
  });
}

qac_status qac_trajectory_series(const qac_trajectory* traj, const char* name,
                                 const double** data, size_t* len) {
  if (require(traj && name && data && len, "all parameters must be non-null"))
    return QAC_ERR_INVALID_ARGUMENT;
  const std::vector<double>* src = nullptr;
  if (std::strcmp(name, "x_cm_nm") == 0)
    src = &traj->record.x_cm_nm;
  else if (std::strcmp(name, "variance_nm2") == 0)
    src = &traj->record.variance_nm2;
  else
    return fail(QAC_ERR_INVALID_ARGUMENT, "unknown series name (use x_cm_nm or variance_nm2)");
  *data = src->data();
  *len = src->size();
  return QAC_OK;
}

qac_status qac_trajectory_coherence(const qac_trajectory* traj, const double** t_ps,
                                    const double** l_phi_nm, const double** ratio, size_t* len) {
  if (require(traj && t_ps && l_phi_nm && ratio && len, "all parameters must be non-null"))
    return QAC_ERR_INVALID_ARGUMENT;
  *t_ps = traj->coh_t.data();
  *l_phi_nm = traj->coh_l.data();
  *ratio = traj->coh_ratio.data();
  *len = traj->coh_t.size();
  return QAC_OK;
}

qac_status qac_trajectory_summary_json(const qac_trajectory* traj, char** json_out) {
  if (require(traj && json_out, "traj and json_out must not be null"))
    return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] { return copy_string(summary_json(*traj).dump(2) + "\n", json_out); });
}

qac_status qac_trajectory_write(const qac_trajectory* traj, const char* path) {
  if (require(traj && path, "traj and path must not be null")) return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    qac::save_record(traj->record, path);
    return QAC_OK;
  });
}

void qac_trajectory_free(qac_trajectory* traj) { delete traj; }

qac_status qac_sweep_run(const char* plan_path, const char* output_dir, int workers,
                         int* failed_out) {
  if (require(plan_path != nullptr, "plan_path must not be null"))
    return QAC_ERR_INVALID_ARGUMENT;
  if (require(workers >= 1, "workers must be >= 1")) return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    qac::SweepPlan plan = qac::SweepPlan::load(plan_path);
    if (output_dir && *output_dir) plan.output_dir = output_dir;
    const qac::SweepOutcome outcome = qac::run_sweep(plan, workers);
    if (failed_out) *failed_out = outcome.runs_failed;
    return QAC_OK;
  });
}

qac_status qac_maps_aggregate(const char* dataset_dir, const char* detector_json) {
  if (require(dataset_dir != nullptr, "dataset_dir must not be null"))
    return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    qac::DetectorConfig det;
    const qac::DetectorConfig* det_ptr = nullptr;
    if (detector_json && *detector_json) {
      det = qac::DetectorConfig::from_json(qac::parse_json_text(detector_json, "detector thresholds argument"));
      det_ptr = &det;
    }
    const qac::MapTables tables = qac::aggregate_dataset(dataset_dir, det_ptr);
    qac::write_map_tables(tables, dataset_dir);
    return QAC_OK;
  });
}

qac_status qac_rates_export(const char* dataset_dir) {
  if (require(dataset_dir != nullptr, "dataset_dir must not be null"))
    return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    const qac::MapTables tables = qac::aggregate_dataset(dataset_dir);
    qac::write_rate_tables(tables, dataset_dir);
    return QAC_OK;
  });
}

qac_status qac_detector_calibrate(const char* detector_json, int noise_trials,
                                  uint64_t base_seed, const char* output_dir, int* passed_out) {
  if (require(output_dir != nullptr, "output_dir must not be null"))
    return QAC_ERR_INVALID_ARGUMENT;
  if (require(noise_trials >= 1, "noise_trials must be >= 1")) return QAC_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    qac::DetectorConfig det;
    if (detector_json && *detector_json)
      det = qac::DetectorConfig::from_json(qac::parse_json_text(detector_json, "detector thresholds argument"));
    const qac::CalibrationReport report =
        qac::write_calibration_report(det, noise_trials, base_seed, output_dir);
    if (passed_out) *passed_out = report.passed ? 1 : 0;
    return QAC_OK;
  });
}

qac_status qac_validate(char** report_json_out, int* passed_out) {
  return guarded([&] {
    const std::vector<qac::CheckResult> checks = qac::run_validation_suite();
    bool all = true;
    json arr = json::array();
    for (const auto& c : checks) {
      all = all && c.pass;
      arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    if (passed_out) *passed_out = all ? 1 : 0;
    if (report_json_out) {
      const json report{{"schema_version", qac::schema_version()},
                        {"checks", std::move(arr)},
                        {"passed", all}};
      return copy_string(report.dump(2) + "\n", report_json_out);
    }
    return QAC_OK;
  });
}

}  // extern "C"
