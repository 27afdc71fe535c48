#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/kinks.hpp"
#include "core/sweep.hpp"
#include "core/trajectory.hpp"
#include "core/transport.hpp"

namespace qac {

// Per-run diagnostics derived from a stored record. Detector settings
// default to the record's own config; an override recomputes labels
// without re-propagating (threshold sensitivity studies).
struct RunSummary {
  bool completed = false;
  bool wrap_invalid = false;
  RegimeResult regime;
  std::optional<double> plateau_ratio;
  std::optional<TransportSummary> transport;  // per-seed fit, diagnostic only
};

RunSummary summarize_record(const TrajectoryRecord& rec,
                            const DetectorConfig* detector_override = nullptr);

// One aggregated grid point of the sweep.
struct MapCell {
  int ti = 0, vi = 0, gi = 0;
  double temperature_K = 0.0, sound_speed_nm_per_ps = 0.0, coupling_meV = 0.0;
  int runs_expected = 0;
  int runs_loaded = 0;     // records present and readable
  int runs_completed = 0;  // numerically completed
  bool complete = false;   // runs_completed == runs_expected
  bool any_wrap_invalid = false;

  double adiabatic_fraction = 0.0;  // over completed runs
  RegimeLabel majority_label = RegimeLabel::diabatic;
  double mean_peak_count = 0.0;
  std::optional<double> tau_mean_ps;  // over adiabatic runs
  double msa_mean = 0.0;
  std::optional<double> coherence_ratio_mean;
  std::optional<TransportSummary> transport;  // fit of the seed-averaged variance
};

struct MapTables {
  SweepPlan plan;
  std::vector<MapCell> cells;  // ti-major, then vi, then gi

  const MapCell& cell(int ti, int vi, int gi) const;
};

// Load a dataset directory (manifest + per-run records) and reduce it.
// Missing or unreadable run files mark their cell incomplete; they are
// never fatal. The optional detector override recomputes every label.
MapTables aggregate_dataset(const std::string& dataset_dir,
                            const DetectorConfig* detector_override = nullptr);

// Write the four map tables (regime, msa, coherence, diffusivity) plus the
// staircase and diagonal tables under <dataset_dir>/maps/.
void write_map_tables(const MapTables& tables, const std::string& dataset_dir);

// Write the rate-vs-temperature series (one file per (vi, gi) scan line)
// and the fit summary under <dataset_dir>/maps/.
void write_rate_tables(const MapTables& tables, const std::string& dataset_dir);

// Axis-aligned boundary segments between 4-adjacent cells whose majority
// labels differ, in (T, v) coordinates at one coupling index. Cell borders
// sit halfway between neighbouring axis values (edge cells extrapolate
// their outer half-width). Segments are ordered lexicographically.
struct BoundarySegment {
  double t0 = 0.0, v0 = 0.0, t1 = 0.0, v1 = 0.0;
};
std::vector<BoundarySegment> boundary_staircase(const MapTables& tables, int gi);

// Mean accepted-peak count along a grid diagonal (anti: low-T/high-v
// toward high-T/low-v, the default crossing direction; main: index-aligned).
enum class DiagonalKind { anti, main };
struct DiagonalPoint {
  int position = 0;
  int ti = 0, vi = 0;
  double temperature_K = 0.0, sound_speed_nm_per_ps = 0.0;
  bool complete = false;  // incomplete cells are emitted as gap markers
  double mean_peak_count = 0.0;
  RegimeLabel majority_label = RegimeLabel::diabatic;
};
std::vector<DiagonalPoint> diagonal_statistic(const MapTables& tables, int gi,
                                              DiagonalKind kind = DiagonalKind::anti);

// Rate-vs-temperature series for one (vi, gi) scan line.
RateSeries rate_series_for(const MapTables& tables, int vi, int gi);

}  // namespace qac
