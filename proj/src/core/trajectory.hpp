#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/phonon.hpp"

namespace qac {

struct CoherencePoint {
  double t_ps = 0.0;
  double l_phi_nm = 0.0;
  double ratio = 0.0;  // l_phi / sigma0
};

struct EnergyPoint {
  double t_ps = 0.0;
  double energy_meV = 0.0;
};

// Raw output of one seeded run: dense center/variance series, strided
// coherence and energy samples, and health flags. Diagnostics (labels,
// fits) are derived from this record downstream so they can be recomputed
// under different detector settings without re-propagating.
struct TrajectoryRecord {
  SimulationConfig config;
  std::string config_hash;
  std::uint64_t seed = 0;
  double dt_ps = 0.0;
  int n_steps = 0;

  std::vector<double> x_cm_nm;        // unwrapped, one sample per step incl. t=0
  std::vector<double> variance_nm2;   // same sampling
  std::vector<CoherencePoint> coherence;
  std::vector<EnergyPoint> energy;

  bool completed = false;
  std::string failure;                  // empty when completed
  double norm_drift = 0.0;              // max |norm - 1| seen
  double energy_drift_meV = 0.0;        // max |E - E(0)| over energy samples
  bool wrap_invalid = false;            // travelled > box/2 while var > (box/8)^2
  int indeterminate_center_samples = 0; // circular-mean resultant below 1e-6
};

// Propagate one wave packet through one thermally drawn landscape.
// Deterministic for fixed (cfg, seed). Numerical blow-up (norm drift over
// cfg.norm_tol, or non-finite values) ends the run early with
// completed = false; the partial series is retained.
TrajectoryRecord run_trajectory(const SimulationConfig& cfg, std::uint64_t seed);

}  // namespace qac
