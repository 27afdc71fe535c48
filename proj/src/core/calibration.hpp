#pragma once

#include <cstdint>
#include <string>

#include "core/kinks.hpp"

namespace qac {

// Runs the synthetic-corpus calibration and persists the report as
// <output_dir>/calibration/detector.json. Returns the report; `passed`
// tells the caller whether the thresholds survived every check.
CalibrationReport write_calibration_report(const DetectorConfig& cfg, int noise_trials,
                                           std::uint64_t base_seed,
                                           const std::string& output_dir);

}  // namespace qac
