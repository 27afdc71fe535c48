#include "core/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "core/constants.hpp"
#include "core/error.hpp"

namespace qac {

namespace {

using nlohmann::json;

// Pull a field if present, enforcing the JSON type; leave the default
// otherwise. Collects the key so unknown keys can be rejected afterwards.
struct FieldReader {
  const json& j;
  std::set<std::string> seen;

  template <typename T>
  void get(const char* key, T& target) {
    auto it = j.find(key);
    if (it == j.end()) return;
    seen.insert(key);
    try {
      target = it->get<T>();
    } catch (const json::exception&) {
      throw schema_error(std::string("config key '") + key + "' has the wrong type");
    }
  }

  void finish(const char* what) const {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!seen.count(it.key()))
        throw schema_error(std::string("unknown ") + what + " key '" + it.key() + "'");
    }
  }
};

void require(bool ok, const std::string& message) {
  if (!ok) throw config_error(message);
}

int next_power_of_two(double x) {
  int n = 2;
  while (n < x) n *= 2;
  return n;
}

}  // namespace

void DetectorConfig::validate() const {
  require(median_window_fraction > 0.0 && median_window_fraction <= 0.2,
          "detector median window fraction must lie in (0, 0.2]");
  require(background_fraction > 0.0 && background_fraction <= 0.2,
          "detector background fraction must lie in (0, 0.2]");
  require(height_z > 0.0, "detector height threshold must be positive");
  require(prominence_z > 0.0, "detector prominence threshold must be positive");
  require(width_cap_fraction > 0.0 && width_cap_fraction <= 0.2,
          "detector width cap fraction must lie in (0, 0.2]");
  require(min_separation_fraction > 0.0 && min_separation_fraction <= 0.2,
          "detector separation fraction must lie in (0, 0.2]");
  require(min_peaks >= 1, "detector needs at least one peak for a label");
}

nlohmann::json DetectorConfig::to_json() const {
  return json{
      {"detector_median_window_fraction", median_window_fraction},
      {"detector_background_fraction", background_fraction},
      {"detector_height_z", height_z},
      {"detector_prominence_z", prominence_z},
      {"detector_width_cap_fraction", width_cap_fraction},
      {"detector_min_separation_fraction", min_separation_fraction},
      {"detector_min_peaks", min_peaks},
  };
}

DetectorConfig DetectorConfig::from_json(const nlohmann::json& j) {
  DetectorConfig d;
  FieldReader r{j, {}};
  r.get("detector_median_window_fraction", d.median_window_fraction);
  r.get("detector_background_fraction", d.background_fraction);
  r.get("detector_height_z", d.height_z);
  r.get("detector_prominence_z", d.prominence_z);
  r.get("detector_width_cap_fraction", d.width_cap_fraction);
  r.get("detector_min_separation_fraction", d.min_separation_fraction);
  r.get("detector_min_peaks", d.min_peaks);
  d.validate();
  return d;
}

void SimulationConfig::validate() const {
  require(temperature_K >= 0.0, "temperature must be non-negative");
  require(sound_speed_nm_per_ps >= 0.0, "sound speed must be non-negative");
  require(!(sound_speed_nm_per_ps == 0.0 && temperature_K > 0.0),
          "thermal occupation diverges when the dispersion vanishes; "
          "a zero sound speed requires zero temperature");
  require(coupling_meV >= 0.0, "coupling must be non-negative");
  require(lattice_nm > 0.0, "lattice constant must be positive");
  require(cells >= 4, "need at least 4 lattice cells");
  require(mass_me > 0.0, "mass must be positive");
  require(sigma0_nm > 0.0, "packet width must be positive");
  require(sigma0_nm < box_length() / 8.0,
          "packet width must stay below one eighth of the box");
  require(k0_per_nm >= 0.0, "packet wave number must be non-negative");
  require(x0_nm < box_length(), "packet centre must lie inside the box");
  require(fermi_k_per_nm >= 0.0, "Fermi wave number must be non-negative");
  require(debye_k_per_nm >= 0.0, "cutoff wave number must be non-negative");
  require(!(back_action && freeze_potential),
          "back-action and a frozen potential are mutually exclusive");
  require(t_total_ps > 0.0, "total time must be positive");
  require(dt_ps >= 0.0, "time step must be non-negative (0 = auto)");
  require(grid_points == 0 || (grid_points >= 2 && (grid_points & (grid_points - 1)) == 0),
          "grid size must be a power of two (0 = auto)");
  if (grid_points > 0) {
    const double dx = box_length() / grid_points;
    require(dx <= std::min(lattice_nm / 4.0, sigma0_nm / 10.0) * (1.0 + 1e-12),
            "explicit grid too coarse: dx must not exceed min(a/4, sigma0/10)");
  }
  require(snapshot_target >= 2, "need at least two coherence snapshots");
  require(energy_stride >= 1, "energy stride must be at least 1");
  require(support_epsilon > 0.0 && support_epsilon < 1.0,
          "support threshold must lie in (0, 1)");
  require(fit_fraction > 0.0 && fit_fraction <= 1.0, "fit fraction must lie in (0, 1]");
  require(plateau_fraction > 0.0 && plateau_fraction < 1.0,
          "plateau fraction must lie in (0, 1)");
  require(plateau_min_samples >= 2, "plateau needs at least two samples");
  require(norm_tol > 0.0, "norm tolerance must be positive");
  detector.validate();
}

double SimulationConfig::mass_internal() const { return mass_me * kElectronMass; }

double SimulationConfig::fermi_k() const {
  if (fermi_k_per_nm > 0.0) return fermi_k_per_nm;
  if (k0_per_nm > 0.0) return k0_per_nm;
  return M_PI / (2.0 * lattice_nm);
}

double SimulationConfig::debye_k() const {
  return debye_k_per_nm > 0.0 ? debye_k_per_nm : 2.0 * fermi_k();
}

int SimulationConfig::resolve_grid_points() const {
  if (grid_points > 0) return grid_points;
  const double dx_cap = std::min(lattice_nm / 4.0, sigma0_nm / 10.0);
  return next_power_of_two(box_length() / dx_cap);
}

double SimulationConfig::resolve_dt() const {
  if (dt_ps > 0.0) return dt_ps;
  // Cap the kinetic phase advanced per step at the grid's Nyquist wave
  // number: hbar k_max^2 dt / (2 m) <= 0.5 rad.
  const double dx = box_length() / resolve_grid_points();
  const double k_max = M_PI / dx;
  const double dt_cap = mass_internal() / (kHbar * k_max * k_max);
  const int steps = std::max(1, static_cast<int>(std::ceil(t_total_ps / dt_cap - 1e-12)));
  return t_total_ps / steps;
}

int SimulationConfig::n_steps() const {
  const double dt = resolve_dt();
  return std::max(1, static_cast<int>(std::llround(t_total_ps / dt)));
}

int SimulationConfig::snapshot_stride() const {
  return std::max(1, n_steps() / snapshot_target);
}

SpatialGrid SimulationConfig::make_grid() const {
  return SpatialGrid::make(resolve_grid_points(), box_length());
}

nlohmann::json SimulationConfig::to_json() const {
  json j{
      {"temperature_K", temperature_K},
      {"sound_speed_nm_per_ps", sound_speed_nm_per_ps},
      {"coupling_meV", coupling_meV},
      {"lattice_nm", lattice_nm},
      {"cells", cells},
      {"fermi_k_per_nm", fermi_k_per_nm},
      {"debye_k_per_nm", debye_k_per_nm},
      {"back_action", back_action},
      {"freeze_potential", freeze_potential},
      {"mass_me", mass_me},
      {"sigma0_nm", sigma0_nm},
      {"k0_per_nm", k0_per_nm},
      {"x0_nm", x0_nm},
      {"grid_points", grid_points},
      {"dt_ps", dt_ps},
      {"t_total_ps", t_total_ps},
      {"snapshot_target", snapshot_target},
      {"energy_stride", energy_stride},
      {"support_epsilon", support_epsilon},
      {"fit_fraction", fit_fraction},
      {"plateau_fraction", plateau_fraction},
      {"plateau_min_samples", plateau_min_samples},
      {"norm_tol", norm_tol},
  };
  j.update(detector.to_json());
  return j;
}

SimulationConfig SimulationConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw schema_error("config must be a JSON object");
  SimulationConfig c;
  FieldReader r{j, {}};
  r.get("temperature_K", c.temperature_K);
  r.get("sound_speed_nm_per_ps", c.sound_speed_nm_per_ps);
  r.get("coupling_meV", c.coupling_meV);
  r.get("lattice_nm", c.lattice_nm);
  r.get("cells", c.cells);
  r.get("fermi_k_per_nm", c.fermi_k_per_nm);
  r.get("debye_k_per_nm", c.debye_k_per_nm);
  r.get("back_action", c.back_action);
  r.get("freeze_potential", c.freeze_potential);
  r.get("mass_me", c.mass_me);
  r.get("sigma0_nm", c.sigma0_nm);
  r.get("k0_per_nm", c.k0_per_nm);
  r.get("x0_nm", c.x0_nm);
  r.get("grid_points", c.grid_points);
  r.get("dt_ps", c.dt_ps);
  r.get("t_total_ps", c.t_total_ps);
  r.get("snapshot_target", c.snapshot_target);
  r.get("energy_stride", c.energy_stride);
  r.get("support_epsilon", c.support_epsilon);
  r.get("fit_fraction", c.fit_fraction);
  r.get("plateau_fraction", c.plateau_fraction);
  r.get("plateau_min_samples", c.plateau_min_samples);
  r.get("norm_tol", c.norm_tol);
  r.get("detector_median_window_fraction", c.detector.median_window_fraction);
  r.get("detector_background_fraction", c.detector.background_fraction);
  r.get("detector_height_z", c.detector.height_z);
  r.get("detector_prominence_z", c.detector.prominence_z);
  r.get("detector_width_cap_fraction", c.detector.width_cap_fraction);
  r.get("detector_min_separation_fraction", c.detector.min_separation_fraction);
  r.get("detector_min_peaks", c.detector.min_peaks);
  r.finish("config");
  c.validate();
  return c;
}

SimulationConfig SimulationConfig::load(const std::string& path) {
  return from_json(read_json_file(path));
}

void SimulationConfig::save(const std::string& path) const {
  write_text_file_atomic(path, to_json().dump(2) + "\n");
}

std::string SimulationConfig::hash() const {
  const std::uint64_t h = fnv1a64(to_json().dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw schema_error(origin + ": " + e.what());
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof()) throw io_error("failed reading '" + path + "'");
  return parse_json_text(ss.str(), path);
}

void write_text_file_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + tmp.string() + "' for writing");
    out << text;
    out.flush();
    if (!out.good()) throw io_error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw io_error("cannot replace '" + path + "': " + ec.message());
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace qac
