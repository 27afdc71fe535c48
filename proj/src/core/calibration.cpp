#include "core/calibration.hpp"

#include <filesystem>

#include "core/config.hpp"
#include "core/record_io.hpp"

namespace qac {

CalibrationReport write_calibration_report(const DetectorConfig& cfg, int noise_trials,
                                           std::uint64_t base_seed,
                                           const std::string& output_dir) {
  CalibrationReport report = calibrate_detector(cfg, noise_trials, base_seed);
  const std::filesystem::path dir = std::filesystem::path(output_dir) / "calibration";
  std::filesystem::create_directories(dir);
  nlohmann::json j = report.to_json();
  j["schema_version"] = schema_version();
  j["base_seed"] = base_seed;
  write_text_file_atomic((dir / "detector.json").string(), j.dump(2) + "\n");
  return report;
}

}  // namespace qac
