#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/maps.hpp"
#include "core/record_io.hpp"
#include "core/sweep.hpp"
#include "core/trajectory.hpp"

using namespace qac;
namespace fs = std::filesystem;

namespace {

// Small, fast base configuration: 32 nm box, auto grid, short window.
SimulationConfig tiny_config() {
  SimulationConfig cfg;
  cfg.cells = 32;
  cfg.t_total_ps = 0.6;
  cfg.snapshot_target = 40;
  cfg.sigma0_nm = 2.0;
  cfg.k0_per_nm = 0.0;
  cfg.fermi_k_per_nm = 0.5;
  cfg.validate();
  return cfg;
}

SweepPlan tiny_plan(const std::string& out_dir) {
  SweepPlan plan;
  plan.temperatures_K = {20.0, 60.0};
  plan.sound_speeds_nm_per_ps = {1.0, 4.0};
  plan.couplings_meV = {0.1};
  plan.seeds_per_cell = 2;
  plan.base_seed = 9;
  plan.base_config = tiny_config();
  plan.output_dir = out_dir;
  return plan;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

// Hand-built map tables on a nt x nv grid at one coupling; peak counts and
// labels are injected per cell so the geometry helpers can be checked
// against brute-force expectations.
MapTables synthetic_tables(const std::vector<double>& temps, const std::vector<double>& speeds,
                           const std::vector<std::vector<double>>& peak_counts,
                           double label_threshold) {
  MapTables tables;
  tables.plan.temperatures_K = temps;
  tables.plan.sound_speeds_nm_per_ps = speeds;
  tables.plan.couplings_meV = {0.05};
  tables.plan.seeds_per_cell = 1;
  tables.plan.base_config = tiny_config();
  for (std::size_t ti = 0; ti < temps.size(); ++ti) {
    for (std::size_t vi = 0; vi < speeds.size(); ++vi) {
      MapCell cell;
      cell.ti = static_cast<int>(ti);
      cell.vi = static_cast<int>(vi);
      cell.gi = 0;
      cell.temperature_K = temps[ti];
      cell.sound_speed_nm_per_ps = speeds[vi];
      cell.coupling_meV = 0.05;
      cell.runs_expected = 1;
      cell.runs_loaded = 1;
      cell.runs_completed = 1;
      cell.complete = true;
      cell.mean_peak_count = peak_counts[ti][vi];
      cell.majority_label = peak_counts[ti][vi] >= label_threshold
                                ? RegimeLabel::adiabatic
                                : RegimeLabel::diabatic;
      tables.cells.push_back(cell);
    }
  }
  return tables;
}

}  // namespace

TEST_CASE("sweep: derived seeds are deterministic and collision-free") {
  const std::uint64_t a = derive_seed(1, 0, 0, 0, 0);
  CHECK(a == derive_seed(1, 0, 0, 0, 0));  // pure function

  std::set<std::uint64_t> seen;
  for (int ti = 0; ti < 4; ++ti)
    for (int vi = 0; vi < 4; ++vi)
      for (int gi = 0; gi < 4; ++gi)
        for (int r = 0; r < 8; ++r)
          seen.insert(derive_seed(1, ti, vi, gi, r));
  CHECK(seen.size() == 4u * 4u * 4u * 8u);

  // Different base seeds decorrelate whole plans.
  CHECK(derive_seed(1, 2, 3, 0, 4) != derive_seed(2, 2, 3, 0, 4));
}

TEST_CASE("sweep: cell_config substitutes exactly the bath fields") {
  SweepPlan plan = tiny_plan("unused");
  const SimulationConfig cfg = cell_config(plan, 1, 0, 0);
  CHECK(cfg.temperature_K == 60.0);
  CHECK(cfg.sound_speed_nm_per_ps == 1.0);
  CHECK(cfg.coupling_meV == 0.1);
  // Everything else follows the template.
  CHECK(cfg.cells == plan.base_config.cells);
  CHECK(cfg.t_total_ps == plan.base_config.t_total_ps);
  CHECK(cfg.sigma0_nm == plan.base_config.sigma0_nm);
}

TEST_CASE("sweep: run_relative_path layout is frozen") {
  CHECK(run_relative_path(0, 0, 0, 0) == "cells/0_0_0/run_0.rec");
  CHECK(run_relative_path(3, 1, 2, 7) == "cells/3_1_2/run_7.rec");
}

TEST_CASE("sweep: plan JSON round-trip, validation, and hashing") {
  SweepPlan plan = tiny_plan("somewhere");
  const SweepPlan back = SweepPlan::from_json(plan.to_json());
  CHECK(back.temperatures_K == plan.temperatures_K);
  CHECK(back.sound_speeds_nm_per_ps == plan.sound_speeds_nm_per_ps);
  CHECK(back.couplings_meV == plan.couplings_meV);
  CHECK(back.seeds_per_cell == plan.seeds_per_cell);
  CHECK(back.base_seed == plan.base_seed);
  CHECK(back.hash() == plan.hash());

  SUBCASE("output_dir does not change identity") {
    SweepPlan moved = plan;
    moved.output_dir = "elsewhere";
    CHECK(moved.hash() == plan.hash());
  }

  SUBCASE("axis values do change identity") {
    SweepPlan other = plan;
    other.temperatures_K.back() += 1.0;
    CHECK(other.hash() != plan.hash());
  }

  SUBCASE("unknown keys are schema errors") {
    nlohmann::json j = plan.to_json();
    j["verbosity"] = 3;
    CHECK_THROWS_AS(SweepPlan::from_json(j), Error);
  }

  SUBCASE("empty axes are invalid") {
    SweepPlan bad = plan;
    bad.temperatures_K.clear();
    CHECK_THROWS_AS(bad.validate(), Error);
  }
}

TEST_CASE("sweep: execution, resume, fault injection, and aggregation") {
  const fs::path dir = fresh_dir("qac_sweep_exec");
  SweepPlan plan = tiny_plan(dir.string());

  const SweepOutcome first = run_sweep(plan, 1);
  CHECK(first.runs_total == 8);
  CHECK(first.runs_executed == 8);
  CHECK(first.runs_reused == 0);
  CHECK(first.runs_failed == 0);
  REQUIRE(fs::exists(dir / "manifest.json"));
  for (int ti = 0; ti < 2; ++ti)
    for (int vi = 0; vi < 2; ++vi)
      for (int r = 0; r < 2; ++r)
        CHECK(fs::exists(dir / run_relative_path(ti, vi, 0, r)));

  SUBCASE("second pass reuses every record") {
    const SweepOutcome second = run_sweep(plan, 1);
    CHECK(second.runs_executed == 0);
    CHECK(second.runs_reused == 8);
  }

  SUBCASE("aggregation sees a complete dataset") {
    const MapTables tables = aggregate_dataset(dir.string());
    CHECK(tables.cells.size() == 4);
    for (const MapCell& cell : tables.cells) {
      CHECK(cell.complete);
      CHECK(cell.runs_completed == 2);
    }
  }

  SUBCASE("deleting one record marks exactly that cell incomplete") {
    fs::remove(dir / run_relative_path(1, 0, 0, 1));
    const MapTables tables = aggregate_dataset(dir.string());
    for (const MapCell& cell : tables.cells) {
      if (cell.ti == 1 && cell.vi == 0) {
        CHECK_FALSE(cell.complete);
        CHECK(cell.runs_loaded == 1);
      } else {
        CHECK(cell.complete);
      }
    }
    // Restore for the remaining subcases.
    run_sweep(plan, 1);
  }

  SUBCASE("a foreign plan refuses to reuse the directory") {
    SweepPlan other = plan;
    other.base_seed = 1234;
    CHECK_THROWS_AS(run_sweep(other, 1), Error);
  }
}

TEST_CASE("sweep: worker count never changes the published tables") {
  const fs::path dir1 = fresh_dir("qac_sweep_w1");
  const fs::path dir3 = fresh_dir("qac_sweep_w3");
  SweepPlan p1 = tiny_plan(dir1.string());
  SweepPlan p3 = tiny_plan(dir3.string());

  run_sweep(p1, 1);
  run_sweep(p3, 3);
  write_map_tables(aggregate_dataset(dir1.string()), dir1.string());
  write_map_tables(aggregate_dataset(dir3.string()), dir3.string());

  const char* names[] = {"regime.csv",       "msa.csv",        "coherence.csv",
                         "diffusivity.csv",  "staircase_g0.csv", "diagonal_g0.csv"};
  for (const char* name : names) {
    CAPTURE(name);
    CHECK(slurp(dir1 / "maps" / name) == slurp(dir3 / "maps" / name));
  }

  SUBCASE("rewriting the tables is byte-idempotent") {
    const std::string before = slurp(dir1 / "maps" / "regime.csv");
    write_map_tables(aggregate_dataset(dir1.string()), dir1.string());
    CHECK(slurp(dir1 / "maps" / "regime.csv") == before);
  }

  SUBCASE("per-run records agree up to the timestamp metadata") {
    for (const char* rel : {"cells/0_0_0/run_0.rec", "cells/1_1_0/run_1.rec"}) {
      nlohmann::json a = nlohmann::json::parse(slurp(dir1 / rel));
      nlohmann::json b = nlohmann::json::parse(slurp(dir3 / rel));
      a.erase("created_unix_ms");
      b.erase("created_unix_ms");
      CHECK(a == b);
    }
  }
}

TEST_CASE("sweep: record files round-trip and reject foreign schemas") {
  SimulationConfig cfg = tiny_config();
  cfg.temperature_K = 30.0;
  const TrajectoryRecord rec = run_trajectory(cfg, 77);
  REQUIRE(rec.completed);

  const fs::path dir = fresh_dir("qac_record_io");
  fs::create_directories(dir);
  const fs::path path = dir / "one.rec";
  save_record(rec, path.string());

  SUBCASE("load restores every persisted field") {
    const TrajectoryRecord back = load_record(path.string());
    CHECK(back.seed == rec.seed);
    CHECK(back.config_hash == rec.config_hash);
    CHECK(back.dt_ps == rec.dt_ps);
    CHECK(back.n_steps == rec.n_steps);
    CHECK(back.x_cm_nm == rec.x_cm_nm);
    CHECK(back.variance_nm2 == rec.variance_nm2);
    CHECK(back.completed == rec.completed);
    REQUIRE(back.coherence.size() == rec.coherence.size());
    CHECK(back.coherence.front().ratio == rec.coherence.front().ratio);
    REQUIRE(back.energy.size() == rec.energy.size());
    CHECK(back.energy.back().energy_meV == rec.energy.back().energy_meV);
  }

  SUBCASE("schema version mismatch is a schema error") {
    nlohmann::json j = record_to_json(rec);
    j["schema_version"] = "0.0-not-a-real-schema";
    CHECK_THROWS_AS(record_from_json(j), Error);
  }

  SUBCASE("missing required field is a schema error") {
    nlohmann::json j = record_to_json(rec);
    j.erase("x_cm_nm");
    CHECK_THROWS_AS(record_from_json(j), Error);
  }

  SUBCASE("unreadable path is an io error") {
    CHECK_THROWS_AS(load_record((dir / "absent.rec").string()), Error);
  }
}

TEST_CASE("sweep: staircase boundary matches brute-force discordant pairs") {
  SUBCASE("vertical split half adiabatic, half diabatic") {
    // 4x4 grid, columns 0-1 high counts, columns 2-3 low: one vertical
    // boundary of four segments between vi = 1 and vi = 2.
    const std::vector<double> temps = {10, 20, 30, 40};
    const std::vector<double> speeds = {1, 2, 3, 4};
    std::vector<std::vector<double>> counts(4, std::vector<double>(4));
    for (int ti = 0; ti < 4; ++ti)
      for (int vi = 0; vi < 4; ++vi) counts[ti][vi] = vi < 2 ? 6.0 : 0.0;
    const MapTables tables = synthetic_tables(temps, speeds, counts, 3.0);

    const std::vector<BoundarySegment> segs = boundary_staircase(tables, 0);
    CHECK(segs.size() == 4);
    for (const BoundarySegment& s : segs) {
      CHECK(s.v0 == doctest::Approx(2.5));  // halfway between v = 2 and v = 3
      CHECK(s.v1 == doctest::Approx(2.5));
    }

    // Brute force: count 4-adjacent discordant pairs.
    int discordant = 0;
    for (int ti = 0; ti < 4; ++ti)
      for (int vi = 0; vi < 4; ++vi) {
        if (ti + 1 < 4 &&
            (counts[ti][vi] >= 3.0) != (counts[ti + 1][vi] >= 3.0))
          ++discordant;
        if (vi + 1 < 4 &&
            (counts[ti][vi] >= 3.0) != (counts[ti][vi + 1] >= 3.0))
          ++discordant;
      }
    CHECK(static_cast<int>(segs.size()) == discordant);
  }

  SUBCASE("staircase-shaped boundary counts both edge orientations") {
    const std::vector<double> temps = {10, 20, 30};
    const std::vector<double> speeds = {1, 2, 3};
    // Adiabatic in the lower-left triangle (ti >= vi).
    std::vector<std::vector<double>> counts(3, std::vector<double>(3));
    int discordant = 0;
    for (int ti = 0; ti < 3; ++ti)
      for (int vi = 0; vi < 3; ++vi) counts[ti][vi] = ti >= vi ? 5.0 : 1.0;
    for (int ti = 0; ti < 3; ++ti)
      for (int vi = 0; vi < 3; ++vi) {
        if (ti + 1 < 3 && (counts[ti][vi] >= 3.0) != (counts[ti + 1][vi] >= 3.0))
          ++discordant;
        if (vi + 1 < 3 && (counts[ti][vi] >= 3.0) != (counts[ti][vi + 1] >= 3.0))
          ++discordant;
      }
    const MapTables tables = synthetic_tables(temps, speeds, counts, 3.0);
    const std::vector<BoundarySegment> segs = boundary_staircase(tables, 0);
    CHECK(static_cast<int>(segs.size()) == discordant);

    // Expected geometry, brute-forced from the axis midpoints. Borders of
    // edge cells extend half the spacing to the nearest neighbour outward.
    std::multiset<std::tuple<double, double, double, double>> expected;
    // T-edges (vertical segments at the T midpoint, spanning the v cell).
    auto vbounds = [&](int vi) {
      const double lo = vi == 0 ? speeds[0] - 0.5 * (speeds[1] - speeds[0])
                                : 0.5 * (speeds[vi - 1] + speeds[vi]);
      const double hi = vi == 2 ? speeds[2] + 0.5 * (speeds[2] - speeds[1])
                                : 0.5 * (speeds[vi] + speeds[vi + 1]);
      return std::pair<double, double>(lo, hi);
    };
    auto tbounds = [&](int ti) {
      const double lo = ti == 0 ? temps[0] - 0.5 * (temps[1] - temps[0])
                                : 0.5 * (temps[ti - 1] + temps[ti]);
      const double hi = ti == 2 ? temps[2] + 0.5 * (temps[2] - temps[1])
                                : 0.5 * (temps[ti] + temps[ti + 1]);
      return std::pair<double, double>(lo, hi);
    };
    for (int ti = 0; ti + 1 < 3; ++ti)
      for (int vi = 0; vi < 3; ++vi)
        if ((counts[ti][vi] >= 3.0) != (counts[ti + 1][vi] >= 3.0)) {
          const double tmid = 0.5 * (temps[ti] + temps[ti + 1]);
          const auto [vlo, vhi] = vbounds(vi);
          expected.insert({tmid, vlo, tmid, vhi});
        }
    for (int ti = 0; ti < 3; ++ti)
      for (int vi = 0; vi + 1 < 3; ++vi)
        if ((counts[ti][vi] >= 3.0) != (counts[ti][vi + 1] >= 3.0)) {
          const double vmid = 0.5 * (speeds[vi] + speeds[vi + 1]);
          const auto [tlo, thi] = tbounds(ti);
          expected.insert({tlo, vmid, thi, vmid});
        }
    std::multiset<std::tuple<double, double, double, double>> got;
    for (const BoundarySegment& s : segs) got.insert({s.t0, s.v0, s.t1, s.v1});
    CHECK(got == expected);
  }
}

TEST_CASE("sweep: diagonal statistic walks the anti-diagonal toward low v") {
  const std::vector<double> temps = {10, 20, 30, 40};
  const std::vector<double> speeds = {1, 2, 3, 4};
  std::vector<std::vector<double>> counts(4, std::vector<double>(4, 0.0));
  // Anti-diagonal cells (ti, 3 - ti) get distinct values.
  counts[0][3] = 0.5;
  counts[1][2] = 2.0;
  counts[2][1] = 4.0;
  counts[3][0] = 6.5;
  const MapTables tables = synthetic_tables(temps, speeds, counts, 3.0);

  const std::vector<DiagonalPoint> anti = diagonal_statistic(tables, 0, DiagonalKind::anti);
  REQUIRE(anti.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(anti[i].position == i);
    CHECK(anti[i].ti == i);
    CHECK(anti[i].vi == 3 - i);
    CHECK(anti[i].temperature_K == temps[i]);
    CHECK(anti[i].sound_speed_nm_per_ps == speeds[3 - i]);
    CHECK(anti[i].complete);
  }
  CHECK(anti[0].mean_peak_count == doctest::Approx(0.5));
  CHECK(anti[1].mean_peak_count == doctest::Approx(2.0));
  CHECK(anti[2].mean_peak_count == doctest::Approx(4.0));
  CHECK(anti[3].mean_peak_count == doctest::Approx(6.5));
  CHECK(anti[0].majority_label == RegimeLabel::diabatic);
  CHECK(anti[3].majority_label == RegimeLabel::adiabatic);

  const std::vector<DiagonalPoint> main = diagonal_statistic(tables, 0, DiagonalKind::main);
  REQUIRE(main.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(main[i].ti == i);
    CHECK(main[i].vi == i);
  }
  CHECK(main[0].mean_peak_count == doctest::Approx(0.0));
}
