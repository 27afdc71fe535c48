// qacsim: command-line front end over the public C API.
//
// Subcommands: run, sweep, maps, rates, calibrate-detector, validate.
// Exit codes: 0 success; 1 a requested check failed (validate /
// calibrate-detector); 64 usage; 65 config; 66 io; 67 schema;
// 68 numeric; 70 internal.
//
// Environment: QACSIM_OUTPUT_DIR overrides output directories,
// QACSIM_WORKERS overrides --workers.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qac/qac.h"

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 64;

int exit_code_for(qac_status status) {
  switch (status) {
    case QAC_OK: return 0;
    case QAC_ERR_INVALID_ARGUMENT: return kExitUsage;
    case QAC_ERR_CONFIG: return 65;
    case QAC_ERR_IO: return 66;
    case QAC_ERR_SCHEMA: return 67;
    case QAC_ERR_NUMERIC: return 68;
    case QAC_ERR_INTERNAL: return 70;
  }
  return 70;
}

const char* status_name(qac_status status) {
  switch (status) {
    case QAC_OK: return "ok";
    case QAC_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case QAC_ERR_CONFIG: return "config";
    case QAC_ERR_IO: return "io";
    case QAC_ERR_SCHEMA: return "schema";
    case QAC_ERR_NUMERIC: return "numeric";
    case QAC_ERR_INTERNAL: return "internal";
  }
  return "internal";
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Machine-readable error record on stderr, one line.
int report_failure(const char* command, qac_status status) {
  std::fprintf(stderr, "{\"error\": \"%s\", \"command\": \"%s\", \"message\": \"%s\", \"exit_code\": %d}\n",
               status_name(status), command, json_escape(qac_last_error()).c_str(),
               exit_code_for(status));
  return exit_code_for(status);
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value && *value ? value : fallback;
}

int env_workers_or(int fallback) {
  const char* value = std::getenv("QACSIM_WORKERS");
  if (!value || !*value) return fallback;
  try {
    const int workers = std::stoi(value);
    if (workers >= 1) return workers;
  } catch (...) {
  }
  std::fprintf(stderr, "{\"error\": \"invalid_argument\", \"command\": \"env\", \"message\": \"QACSIM_WORKERS must be a positive integer\", \"exit_code\": %d}\n",
               kExitUsage);
  std::exit(kExitUsage);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "{\"error\": \"io\", \"command\": \"read\", \"message\": \"cannot open '%s'\", \"exit_code\": 66}\n",
                 json_escape(path).c_str());
    std::exit(66);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { qac_string_free(ptr); }
};

int cmd_run(const std::string& config_path, std::uint64_t seed, const std::string& output,
            bool summary_only) {
  qac_config* cfg = nullptr;
  qac_status st = qac_config_load(config_path.c_str(), &cfg);
  if (st != QAC_OK) return report_failure("run", st);

  qac_trajectory* traj = nullptr;
  st = qac_trajectory_run(cfg, seed, &traj);
  qac_config_free(cfg);
  if (st != QAC_OK) return report_failure("run", st);

  int code = 0;
  if (!summary_only) {
    st = qac_trajectory_write(traj, output.c_str());
    if (st != QAC_OK) code = report_failure("run", st);
  }
  if (code == 0) {
    OwnedString summary;
    st = qac_trajectory_summary_json(traj, &summary.ptr);
    if (st != QAC_OK)
      code = report_failure("run", st);
    else
      std::fputs(summary.ptr, stdout);
  }
  qac_trajectory_free(traj);
  return code;
}

int cmd_sweep(const std::string& plan_path, const std::string& output_dir, int workers) {
  int failed = 0;
  const qac_status st = qac_sweep_run(plan_path.c_str(),
                                      output_dir.empty() ? nullptr : output_dir.c_str(),
                                      workers, &failed);
  if (st != QAC_OK) return report_failure("sweep", st);
  std::printf("{\"sweep\": \"complete\", \"runs_failed\": %d}\n", failed);
  return 0;
}

int cmd_maps(const std::string& dataset_dir, const std::string& detector_path) {
  std::string detector_json;
  if (!detector_path.empty()) detector_json = slurp(detector_path);
  const qac_status st = qac_maps_aggregate(dataset_dir.c_str(),
                                           detector_json.empty() ? nullptr : detector_json.c_str());
  if (st != QAC_OK) return report_failure("maps", st);
  std::printf("{\"maps\": \"written\", \"dataset\": \"%s\"}\n", json_escape(dataset_dir).c_str());
  return 0;
}

int cmd_rates(const std::string& dataset_dir) {
  const qac_status st = qac_rates_export(dataset_dir.c_str());
  if (st != QAC_OK) return report_failure("rates", st);
  std::printf("{\"rates\": \"written\", \"dataset\": \"%s\"}\n", json_escape(dataset_dir).c_str());
  return 0;
}

int cmd_calibrate(const std::string& detector_path, int noise_trials, std::uint64_t seed,
                  const std::string& output_dir) {
  std::string detector_json;
  if (!detector_path.empty()) detector_json = slurp(detector_path);
  int passed = 0;
  const qac_status st = qac_detector_calibrate(detector_json.empty() ? nullptr : detector_json.c_str(),
                                               noise_trials, seed, output_dir.c_str(), &passed);
  if (st != QAC_OK) return report_failure("calibrate-detector", st);
  std::printf("{\"calibration\": \"%s\", \"report\": \"%s/calibration/detector.json\"}\n",
              passed ? "passed" : "failed", json_escape(output_dir).c_str());
  return passed ? 0 : kExitCheckFailed;
}

int cmd_validate() {
  OwnedString report;
  int passed = 0;
  const qac_status st = qac_validate(&report.ptr, &passed);
  if (st != QAC_OK) return report_failure("validate", st);
  std::fputs(report.ptr, stdout);
  return passed ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qacsim: 1D quantum-acoustics transport simulator"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", std::string("qacsim ") + qac_version() + " (schema " +
                                        qac_schema_version() + ")");

  // run
  auto* run = app.add_subcommand("run", "Propagate one seeded trajectory from a config file");
  std::string run_config, run_output = "trajectory.rec";
  std::uint64_t run_seed = 1;
  bool run_summary_only = false;
  run->add_option("config", run_config, "Simulation config JSON file")->required();
  run->add_option("--seed", run_seed, "Thermal phase seed (default 1)");
  run->add_option("-o,--output", run_output, "Record output path (default trajectory.rec)");
  run->add_flag("--summary-only", run_summary_only, "Print diagnostics without writing the record");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Execute a sweep plan into a dataset directory");
  std::string sweep_plan, sweep_output;
  int sweep_workers = 1;
  sweep->add_option("plan", sweep_plan, "Sweep plan JSON file")->required();
  sweep->add_option("-o,--output", sweep_output, "Override the plan's output directory");
  sweep->add_option("--workers", sweep_workers, "Concurrent trajectory workers (default 1)")
      ->check(CLI::PositiveNumber);

  // maps
  auto* maps = app.add_subcommand("maps", "Aggregate a dataset into the map tables");
  std::string maps_dataset, maps_detector;
  maps->add_option("dataset", maps_dataset, "Dataset directory (contains manifest.json)")
      ->required();
  maps->add_option("--detector", maps_detector,
                   "Detector thresholds JSON overriding the stored ones");

  // rates
  auto* rates = app.add_subcommand("rates", "Export rate-vs-temperature tables from a dataset");
  std::string rates_dataset;
  rates->add_option("dataset", rates_dataset, "Dataset directory (contains manifest.json)")
      ->required();

  // calibrate-detector
  auto* calib = app.add_subcommand("calibrate-detector",
                                   "Run the synthetic corpus and write the calibration report");
  std::string calib_detector, calib_output = "dataset";
  int calib_trials = 200;
  std::uint64_t calib_seed = 1;
  calib->add_option("--detector", calib_detector, "Detector thresholds JSON (default thresholds)");
  calib->add_option("--noise-trials", calib_trials, "White-noise trials (default 200)")
      ->check(CLI::PositiveNumber);
  calib->add_option("--seed", calib_seed, "Corpus base seed (default 1)");
  calib->add_option("-o,--output", calib_output, "Directory receiving calibration/detector.json");

  // validate
  app.add_subcommand("validate", "Run the built-in invariant self-checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "{\"error\": \"usage\", \"command\": \"parse\", \"message\": \"%s\", \"exit_code\": %d}\n",
                 json_escape(e.what()).c_str(), kExitUsage);
    return kExitUsage;
  }

  if (app.get_subcommands().empty()) {
    std::fputs(app.help().c_str(), stdout);
    return kExitUsage;
  }

  const std::string out_override = env_or("QACSIM_OUTPUT_DIR", "");

  if (run->parsed())
    return cmd_run(run_config, run_seed,
                   out_override.empty() ? run_output : out_override + "/" + run_output,
                   run_summary_only);
  if (sweep->parsed())
    return cmd_sweep(sweep_plan, out_override.empty() ? sweep_output : out_override,
                     env_workers_or(sweep_workers));
  if (maps->parsed()) return cmd_maps(maps_dataset, maps_detector);
  if (rates->parsed()) return cmd_rates(rates_dataset);
  if (calib->parsed())
    return cmd_calibrate(calib_detector, calib_trials, calib_seed,
                         out_override.empty() ? calib_output : out_override);
  return cmd_validate();
}
