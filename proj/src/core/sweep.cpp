#include "core/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "core/error.hpp"
#include "core/record_io.hpp"
#include "core/rng.hpp"
#include "core/trajectory.hpp"

namespace qac {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& message) {
  if (!ok) throw config_error(message);
}

}  // namespace

void SweepPlan::validate() const {
  require(!temperatures_K.empty(), "sweep needs at least one temperature");
  require(!sound_speeds_nm_per_ps.empty(), "sweep needs at least one sound speed");
  require(!couplings_meV.empty(), "sweep needs at least one coupling");
  require(seeds_per_cell >= 1, "sweep needs at least one seed per cell");
  require(!output_dir.empty(), "sweep needs an output directory");
  for (double t : temperatures_K) require(t >= 0.0, "temperatures must be non-negative");
  for (double v : sound_speeds_nm_per_ps) require(v > 0.0, "sound speeds must be positive");
  for (double g : couplings_meV) require(g >= 0.0, "couplings must be non-negative");

  // Every cell config must itself be valid.
  for (std::size_t ti = 0; ti < temperatures_K.size(); ++ti)
    for (std::size_t vi = 0; vi < sound_speeds_nm_per_ps.size(); ++vi)
      for (std::size_t gi = 0; gi < couplings_meV.size(); ++gi)
        cell_config(*this, static_cast<int>(ti), static_cast<int>(vi), static_cast<int>(gi))
            .validate();

  // Exhaustive seed-collision check over the whole plan.
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(static_cast<std::size_t>(run_count()));
  for (std::size_t ti = 0; ti < temperatures_K.size(); ++ti)
    for (std::size_t vi = 0; vi < sound_speeds_nm_per_ps.size(); ++vi)
      for (std::size_t gi = 0; gi < couplings_meV.size(); ++gi)
        for (int r = 0; r < seeds_per_cell; ++r) {
          const std::uint64_t s = derive_seed(base_seed, static_cast<int>(ti),
                                              static_cast<int>(vi), static_cast<int>(gi), r);
          if (!seen.insert(s).second)
            throw config_error("derived seed collision inside the plan; change base_seed");
        }
}

int SweepPlan::cell_count() const {
  return static_cast<int>(temperatures_K.size() * sound_speeds_nm_per_ps.size() *
                          couplings_meV.size());
}

int SweepPlan::run_count() const { return cell_count() * seeds_per_cell; }

nlohmann::json SweepPlan::to_json() const {
  return {{"temperatures_K", temperatures_K},
          {"sound_speeds_nm_per_ps", sound_speeds_nm_per_ps},
          {"couplings_meV", couplings_meV},
          {"seeds_per_cell", seeds_per_cell},
          {"base_seed", base_seed},
          {"config", base_config.to_json()},
          {"output_dir", output_dir}};
}

SweepPlan SweepPlan::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw schema_error("sweep plan must be a JSON object");
  SweepPlan p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "temperatures_K" && key != "sound_speeds_nm_per_ps" &&
        key != "couplings_meV" && key != "seeds_per_cell" && key != "base_seed" &&
        key != "config" && key != "output_dir")
      throw schema_error("unknown sweep plan key '" + key + "'");
  }
  try {
    if (j.contains("temperatures_K"))
      p.temperatures_K = j.at("temperatures_K").get<std::vector<double>>();
    if (j.contains("sound_speeds_nm_per_ps"))
      p.sound_speeds_nm_per_ps = j.at("sound_speeds_nm_per_ps").get<std::vector<double>>();
    if (j.contains("couplings_meV"))
      p.couplings_meV = j.at("couplings_meV").get<std::vector<double>>();
    if (j.contains("seeds_per_cell")) p.seeds_per_cell = j.at("seeds_per_cell").get<int>();
    if (j.contains("base_seed")) p.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("output_dir")) p.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw schema_error(std::string("sweep plan: ") + e.what());
  }
  if (j.contains("config")) p.base_config = SimulationConfig::from_json(j.at("config"));
  p.validate();
  return p;
}

SweepPlan SweepPlan::load(const std::string& path) {
  return from_json(read_json_file(path));
}

void SweepPlan::save(const std::string& path) const {
  write_text_file_atomic(path, to_json().dump(2) + "\n");
}

std::string SweepPlan::hash() const {
  json j = to_json();
  j.erase("output_dir");
  const std::uint64_t h = fnv1a64(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t base_seed, int t_index, int v_index, int g_index,
                          int replicate) {
  std::uint64_t s = base_seed;
  s = stream_key(s, 0x100000ULL + static_cast<std::uint64_t>(t_index));
  s = stream_key(s, 0x200000ULL + static_cast<std::uint64_t>(v_index));
  s = stream_key(s, 0x300000ULL + static_cast<std::uint64_t>(g_index));
  s = stream_key(s, 0x400000ULL + static_cast<std::uint64_t>(replicate));
  return s;
}

SimulationConfig cell_config(const SweepPlan& plan, int ti, int vi, int gi) {
  SimulationConfig cfg = plan.base_config;
  cfg.temperature_K = plan.temperatures_K.at(ti);
  cfg.sound_speed_nm_per_ps = plan.sound_speeds_nm_per_ps.at(vi);
  cfg.coupling_meV = plan.couplings_meV.at(gi);
  return cfg;
}

std::string run_relative_path(int ti, int vi, int gi, int replicate) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "cells/%d_%d_%d/run_%d.rec", ti, vi, gi, replicate);
  return buf;
}

namespace {

struct Task {
  int ti, vi, gi, replicate;
  std::uint64_t seed;
  std::string rel_path;
};

enum class TaskOutcome { executed, reused, failed };

TaskOutcome run_task(const SweepPlan& plan, const Task& task,
                     const std::string& expected_hash, const SimulationConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path path = fs::path(plan.output_dir) / task.rel_path;

  if (fs::exists(path)) {
    try {
      const TrajectoryRecord existing = load_record(path.string());
      if (existing.config_hash == expected_hash && existing.seed == task.seed)
        return existing.completed ? TaskOutcome::reused : TaskOutcome::failed;
    } catch (const Error&) {
      // Unreadable or stale: fall through and recompute.
    }
  }
  const TrajectoryRecord rec = run_trajectory(cfg, task.seed);
  save_record(rec, path.string());
  return rec.completed ? TaskOutcome::executed : TaskOutcome::failed;
}

}  // namespace

SweepOutcome run_sweep(const SweepPlan& plan, int workers, const SweepProgress& progress) {
  namespace fs = std::filesystem;
  plan.validate();
  if (workers < 1) throw invalid_argument_error("worker count must be at least 1");

  const fs::path root(plan.output_dir);
  const fs::path manifest_path = root / "manifest.json";
  if (fs::exists(manifest_path)) {
    const json existing = read_json_file(manifest_path.string());
    if (existing.value("plan_hash", "") != plan.hash())
      throw config_error("output directory holds a dataset from a different plan");
  }

  // Build the full task table in deterministic order.
  const int nt = static_cast<int>(plan.temperatures_K.size());
  const int nv = static_cast<int>(plan.sound_speeds_nm_per_ps.size());
  const int ng = static_cast<int>(plan.couplings_meV.size());
  std::vector<Task> tasks;
  std::vector<SimulationConfig> cell_cfgs;
  std::vector<std::string> cell_hashes;
  tasks.reserve(static_cast<std::size_t>(plan.run_count()));
  for (int ti = 0; ti < nt; ++ti)
    for (int vi = 0; vi < nv; ++vi)
      for (int gi = 0; gi < ng; ++gi) {
        const SimulationConfig cfg = cell_config(plan, ti, vi, gi);
        cell_cfgs.push_back(cfg);
        cell_hashes.push_back(cfg.hash());
        std::error_code ec;
        fs::create_directories(root / "cells" /
                                   (std::to_string(ti) + "_" + std::to_string(vi) + "_" +
                                    std::to_string(gi)),
                               ec);
        for (int r = 0; r < plan.seeds_per_cell; ++r)
          tasks.push_back({ti, vi, gi, r, derive_seed(plan.base_seed, ti, vi, gi, r),
                           run_relative_path(ti, vi, gi, r)});
      }

  SweepOutcome outcome;
  outcome.runs_total = static_cast<int>(tasks.size());
  std::atomic<int> next{0}, done{0}, executed{0}, reused{0}, failed{0};
  std::mutex progress_mutex;

  auto worker_loop = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= static_cast<int>(tasks.size())) return;
      const Task& task = tasks[i];
      const int cell_index =
          (task.ti * nv + task.vi) * ng + task.gi;
      const TaskOutcome r =
          run_task(plan, task, cell_hashes[cell_index], cell_cfgs[cell_index]);
      switch (r) {
        case TaskOutcome::executed: ++executed; break;
        case TaskOutcome::reused: ++reused; break;
        case TaskOutcome::failed: ++failed; ++executed; break;
      }
      const int d = ++done;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(d, outcome.runs_total, task.rel_path);
      }
    }
  };

  if (workers == 1) {
    worker_loop();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker_loop);
    for (auto& th : pool) th.join();
  }

  outcome.runs_executed = executed;
  outcome.runs_reused = reused;
  outcome.runs_failed = failed;

  // Manifest last: it references only files that now exist.
  json cell_table = json::array();
  for (int ti = 0; ti < nt; ++ti)
    for (int vi = 0; vi < nv; ++vi)
      for (int gi = 0; gi < ng; ++gi) {
        const int cell_index = (ti * nv + vi) * ng + gi;
        json runs = json::array();
        for (int r = 0; r < plan.seeds_per_cell; ++r)
          runs.push_back({{"replicate", r},
                          {"seed", derive_seed(plan.base_seed, ti, vi, gi, r)},
                          {"file", run_relative_path(ti, vi, gi, r)}});
        cell_table.push_back({{"ti", ti},
                              {"vi", vi},
                              {"gi", gi},
                              {"temperature_K", plan.temperatures_K[ti]},
                              {"sound_speed_nm_per_ps", plan.sound_speeds_nm_per_ps[vi]},
                              {"coupling_meV", plan.couplings_meV[gi]},
                              {"config_hash", cell_hashes[cell_index]},
                              {"runs", std::move(runs)}});
      }
  const json manifest{{"schema_version", schema_version()},
                      {"kind", "sweep_dataset"},
                      {"plan", plan.to_json()},
                      {"plan_hash", plan.hash()},
                      {"cells", std::move(cell_table)}};
  write_text_file_atomic(manifest_path.string(), manifest.dump(2) + "\n");
  return outcome;
}

}  // namespace qac
