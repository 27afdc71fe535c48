#include "core/record_io.hpp"

#include <chrono>

#include "core/error.hpp"

namespace qac {

namespace {

using nlohmann::json;

std::int64_t now_unix_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

template <typename T>
T pull(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw schema_error(std::string("record is missing key '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw schema_error(std::string("record key '") + key + "' has the wrong type");
  }
}

}  // namespace

const char* schema_version() { return "1"; }

nlohmann::json record_to_json(const TrajectoryRecord& rec) {
  json coh_t = json::array(), coh_l = json::array(), coh_r = json::array();
  for (const auto& c : rec.coherence) {
    coh_t.push_back(c.t_ps);
    coh_l.push_back(c.l_phi_nm);
    coh_r.push_back(c.ratio);
  }
  json en_t = json::array(), en_e = json::array();
  for (const auto& e : rec.energy) {
    en_t.push_back(e.t_ps);
    en_e.push_back(e.energy_meV);
  }
  return {{"schema_version", schema_version()},
          {"kind", "trajectory_record"},
          {"config", rec.config.to_json()},
          {"config_hash", rec.config_hash},
          {"seed", rec.seed},
          {"dt_ps", rec.dt_ps},
          {"n_steps", rec.n_steps},
          {"x_cm_nm", rec.x_cm_nm},
          {"variance_nm2", rec.variance_nm2},
          {"coherence_t_ps", std::move(coh_t)},
          {"coherence_l_phi_nm", std::move(coh_l)},
          {"coherence_ratio", std::move(coh_r)},
          {"energy_t_ps", std::move(en_t)},
          {"energy_meV", std::move(en_e)},
          {"completed", rec.completed},
          {"failure", rec.failure},
          {"norm_drift", rec.norm_drift},
          {"energy_drift_meV", rec.energy_drift_meV},
          {"wrap_invalid", rec.wrap_invalid},
          {"indeterminate_center_samples", rec.indeterminate_center_samples},
          {"created_unix_ms", now_unix_ms()}};
}

TrajectoryRecord record_from_json(const nlohmann::json& j) {
  if (pull<std::string>(j, "kind") != "trajectory_record")
    throw schema_error("not a trajectory record");
  if (pull<std::string>(j, "schema_version") != schema_version())
    throw schema_error("unsupported record schema version");
  TrajectoryRecord rec;
  rec.config = SimulationConfig::from_json(j.at("config"));
  rec.config_hash = pull<std::string>(j, "config_hash");
  rec.seed = pull<std::uint64_t>(j, "seed");
  rec.dt_ps = pull<double>(j, "dt_ps");
  rec.n_steps = pull<int>(j, "n_steps");
  rec.x_cm_nm = pull<std::vector<double>>(j, "x_cm_nm");
  rec.variance_nm2 = pull<std::vector<double>>(j, "variance_nm2");
  const auto ct = pull<std::vector<double>>(j, "coherence_t_ps");
  const auto cl = pull<std::vector<double>>(j, "coherence_l_phi_nm");
  const auto cr = pull<std::vector<double>>(j, "coherence_ratio");
  if (ct.size() != cl.size() || ct.size() != cr.size())
    throw schema_error("coherence columns have mismatched lengths");
  for (std::size_t i = 0; i < ct.size(); ++i)
    rec.coherence.push_back({ct[i], cl[i], cr[i]});
  const auto et = pull<std::vector<double>>(j, "energy_t_ps");
  const auto ee = pull<std::vector<double>>(j, "energy_meV");
  if (et.size() != ee.size()) throw schema_error("energy columns have mismatched lengths");
  for (std::size_t i = 0; i < et.size(); ++i) rec.energy.push_back({et[i], ee[i]});
  rec.completed = pull<bool>(j, "completed");
  rec.failure = pull<std::string>(j, "failure");
  rec.norm_drift = pull<double>(j, "norm_drift");
  rec.energy_drift_meV = pull<double>(j, "energy_drift_meV");
  rec.wrap_invalid = pull<bool>(j, "wrap_invalid");
  rec.indeterminate_center_samples = pull<int>(j, "indeterminate_center_samples");
  if (rec.x_cm_nm.size() != rec.variance_nm2.size())
    throw schema_error("position and variance series have mismatched lengths");
  return rec;
}

void save_record(const TrajectoryRecord& rec, const std::string& path) {
  write_text_file_atomic(path, record_to_json(rec).dump() + "\n");
}

TrajectoryRecord load_record(const std::string& path) {
  return record_from_json(read_json_file(path));
}

}  // namespace qac
