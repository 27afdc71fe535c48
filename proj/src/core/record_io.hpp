#pragma once

#include <string>

#include "core/trajectory.hpp"

namespace qac {

// Version tag written into every persisted artifact (records, manifests,
// map tables, calibration reports). Bump on any schema change.
const char* schema_version();

// Trajectory records persist as schema-versioned JSON: embedded config,
// seed, dense series, health flags, plus a timestamp metadata field (the
// only field allowed to differ between identical reruns).
nlohmann::json record_to_json(const TrajectoryRecord& rec);
TrajectoryRecord record_from_json(const nlohmann::json& j);

void save_record(const TrajectoryRecord& rec, const std::string& path);
TrajectoryRecord load_record(const std::string& path);

}  // namespace qac
