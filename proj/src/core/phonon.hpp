#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "core/config.hpp"
#include "core/fft.hpp"
#include "core/grid.hpp"

namespace qac {

// One acoustic mode of the periodic chain. Mode index s labels the wave
// number q = 2 pi s / (L a); s runs over +-1 .. +-s_max with s = 0 (uniform
// shift) absent and |s| = L/2 (zone boundary, zero group velocity) excluded.
struct PhononMode {
  int s = 0;
  double q = 0.0;      // rad / nm
  double omega = 0.0;  // rad / ps
  double g = 0.0;      // meV, signed coupling amplitude
  std::complex<double> alpha;  // coherent amplitude
};

struct PhononEnsemble {
  std::vector<PhononMode> modes;  // sorted by s: -s_max..-1, +1..+s_max
  double temperature_K = 0.0;
  double sound_speed_nm_per_ps = 0.0;
  double coupling_meV = 0.0;
  double lattice_nm = 0.0;
  int cells = 0;
  bool back_action = false;
  std::uint64_t seed = 0;

  // Sum of |alpha|^2 over modes; conserved under free rotation.
  double total_occupation() const;
  // Debug/restart dump: header metadata plus one flat record per mode.
  nlohmann::json to_json() const;
};

// Acoustic dispersion of the discrete chain: omega = (2 v / a) |sin(q a / 2)|.
double phonon_dispersion(double q, double sound_speed, double lattice);

// Signed deformation-potential amplitude for mode index s:
//   g_s = g * s / sqrt((L / pi) * |sin(pi s / L)|),
// antisymmetric in s. Requires 0 < |s| < L/2.
double phonon_coupling(int s, double coupling_scale, int cells);

// Bose-Einstein occupation at temperature T (K) for a mode of frequency
// omega (rad/ps). T = 0 gives 0. omega = 0 with T > 0 is rejected upstream.
double bose_occupation(double omega, double temperature_K);

// Draw the initial thermal coherent state: |alpha_q| = sqrt(N_q) with an
// independent uniform phase per mode. Mode phases come from per-mode
// substreams of `seed`, so the draw for a given mode does not depend on how
// many other modes exist or in which order they are filled.
PhononEnsemble sample_thermal_ensemble(const SimulationConfig& cfg, std::uint64_t seed);

// Advance mode amplitudes by dt. Without back-action this is the free
// rotation alpha <- alpha e^{-i omega dt} (magnitude-preserving). With
// back-action, the source term -i dt g_q n_q / hbar is added, where n_q is
// the electron-density Fourier component aligned with `modes` ordering.
void evolve_modes(PhononEnsemble& ens, double dt);
void evolve_modes(PhononEnsemble& ens, double dt,
                  const std::vector<std::complex<double>>& density_fourier);

// Deformation potential V(x_j) = sum_q 2 Re[g_q alpha_q e^{i q x_j}].
// `phase_advance_ps` rotates each mode by e^{-i omega tau} first without
// mutating the ensemble (used to evaluate V at a substep midpoint).
//
// The spectral route scatters modes into FFT bins (q = 2 pi s / box maps to
// bin s) and inverse-transforms; the direct route is the literal sum and is
// retained as the cross-check oracle.
void synthesize_potential(const PhononEnsemble& ens, const SpatialGrid& grid, const Fft& fft,
                          std::vector<std::complex<double>>& scratch, std::vector<double>& out,
                          double phase_advance_ps = 0.0);
std::vector<double> synthesize_potential_direct(const PhononEnsemble& ens,
                                                const SpatialGrid& grid,
                                                double phase_advance_ps = 0.0);

// Electron-density Fourier components at the ensemble's wave numbers:
// n_q = sum_j |psi_j|^2 e^{-i q x_j} dx. The FFT route fills one value per
// mode (aligned with ens.modes); the direct overload is the oracle.
void density_fourier_components(const std::vector<double>& density_times_dx,
                                const PhononEnsemble& ens, const Fft& fft,
                                std::vector<std::complex<double>>& scratch,
                                std::vector<std::complex<double>>& out);
std::complex<double> density_fourier_direct(const std::vector<std::complex<double>>& psi,
                                            const SpatialGrid& grid, double q);

}  // namespace qac
