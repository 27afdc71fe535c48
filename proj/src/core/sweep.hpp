#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/config.hpp"

namespace qac {

// Declarative description of a (T, v, g) sweep: axis values, replicate
// count, base seed, and the per-run config template whose bath fields the
// cell values override.
struct SweepPlan {
  std::vector<double> temperatures_K;
  std::vector<double> sound_speeds_nm_per_ps;
  std::vector<double> couplings_meV;
  int seeds_per_cell = 8;
  std::uint64_t base_seed = 1;
  SimulationConfig base_config;
  std::string output_dir = "dataset";

  void validate() const;  // includes the exhaustive seed-collision check

  int cell_count() const;
  int run_count() const;

  nlohmann::json to_json() const;
  static SweepPlan from_json(const nlohmann::json& j);
  static SweepPlan load(const std::string& path);
  void save(const std::string& path) const;

  // Digest over everything except output_dir (relocating a dataset does
  // not change its identity).
  std::string hash() const;
};

// Stable five-input mix; fixed forever so datasets stay addressable.
// Independent of traversal order and worker count by construction.
std::uint64_t derive_seed(std::uint64_t base_seed, int t_index, int v_index, int g_index,
                          int replicate);

// The template with one cell's (T, v, g) substituted.
SimulationConfig cell_config(const SweepPlan& plan, int ti, int vi, int gi);

// Relative path of one run's record inside the dataset directory.
std::string run_relative_path(int ti, int vi, int gi, int replicate);

struct SweepOutcome {
  int runs_total = 0;
  int runs_executed = 0;
  int runs_reused = 0;   // resume hits: existing file with matching hash+seed
  int runs_failed = 0;   // executed but numerically failed (recorded in-cell)
};

// Progress callback: (finished_so_far, total, relative_path).
using SweepProgress = std::function<void(int, int, const std::string&)>;

// Execute every (cell, replicate) run into plan.output_dir, atomically
// publishing each record and writing manifest.json last. Existing records
// that match the expected config hash and seed are reused. `workers` > 1
// runs trajectories concurrently; outputs are bit-identical regardless.
SweepOutcome run_sweep(const SweepPlan& plan, int workers = 1,
                       const SweepProgress& progress = {});

}  // namespace qac
