#pragma once

#include <cstdint>
#include <string>

#include "core/grid.hpp"

#include <nlohmann/json.hpp>

namespace qac {

// Kink-detector thresholds. All window sizes are fractions of the series
// length so behaviour is invariant under resampling.
struct DetectorConfig {
  double median_window_fraction = 0.005;
  double background_fraction = 0.08;
  double height_z = 6.0;
  double prominence_z = 4.0;
  double width_cap_fraction = 0.01;
  double min_separation_fraction = 0.005;
  int min_peaks = 3;

  void validate() const;
  nlohmann::json to_json() const;
  static DetectorConfig from_json(const nlohmann::json& j);
};

// Full description of a single trajectory run. Every physical quantity
// carries its unit in the key name when serialized (nm / ps / meV / K,
// masses in electron-mass multiples).
struct SimulationConfig {
  // Bath and coupling.
  double temperature_K = 40.0;
  double sound_speed_nm_per_ps = 2.0;
  double coupling_meV = 0.05;
  double lattice_nm = 1.0;
  int cells = 256;
  double fermi_k_per_nm = 0.0;  // 0 = auto: k0 if k0 > 0, else pi/(2a)
  double debye_k_per_nm = 0.0;  // 0 = auto: 2 * fermi_k
  bool back_action = false;
  bool freeze_potential = false;

  // Electron.
  double mass_me = 8.0;
  double sigma0_nm = 2.5;
  double k0_per_nm = 0.5;
  double x0_nm = -1.0;  // negative = auto: box centre

  // Discretization. Zeros mean "derive from the resolution rules".
  int grid_points = 0;
  double dt_ps = 0.0;
  double t_total_ps = 8.0;
  int snapshot_target = 200;
  int energy_stride = 25;

  // Diagnostics.
  double support_epsilon = 1e-8;
  double fit_fraction = 0.5;
  double plateau_fraction = 0.3;
  int plateau_min_samples = 4;
  double norm_tol = 1e-6;
  DetectorConfig detector;

  void validate() const;

  // Derived quantities (valid only after validate() passes).
  double box_length() const { return cells * lattice_nm; }
  double mass_internal() const;          // meV ps^2 / nm^2
  double fermi_k() const;                // 1/nm, with defaulting applied
  double debye_k() const;                // 1/nm, with defaulting applied
  double x0() const { return x0_nm < 0.0 ? 0.5 * box_length() : x0_nm; }
  int resolve_grid_points() const;       // power of two from the dx rule
  double resolve_dt() const;             // from the kinetic-phase rule
  int n_steps() const;
  int snapshot_stride() const;
  SpatialGrid make_grid() const;

  nlohmann::json to_json() const;
  static SimulationConfig from_json(const nlohmann::json& j);
  static SimulationConfig load(const std::string& path);
  void save(const std::string& path) const;

  // 16-hex-digit digest of the canonical serialization; used to detect
  // config drift when resuming datasets.
  std::string hash() const;
};

// Strict file/JSON plumbing shared with other schemas.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);
nlohmann::json read_json_file(const std::string& path);
void write_text_file_atomic(const std::string& path, const std::string& text);
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace qac
