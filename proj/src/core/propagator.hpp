#pragma once

#include <complex>
#include <vector>

#include "core/fft.hpp"
#include "core/grid.hpp"
#include "core/wavepacket.hpp"

namespace qac {

// Strang-split spectral stepper for the 1D Schroedinger equation on the
// periodic grid: half potential kick, full kinetic rotation in k-space,
// half potential kick. Exactly norm-preserving (each factor is a pure
// phase) and second-order accurate in dt for potentials evaluated at the
// step midpoint.
class Propagator {
 public:
  Propagator(const SpatialGrid& grid, double mass_me, double dt_ps);

  void step(WavepacketState& state, const std::vector<double>& potential_meV);

  double dt() const { return dt_; }
  void set_dt(double dt_ps);

  const SpatialGrid& grid() const { return grid_; }
  const Fft& fft() const { return fft_; }

  // <psi| p^2/2m |psi> in meV, evaluated spectrally.
  double kinetic_energy(const WavepacketState& state);
  // sum V_j |psi_j|^2 dx in meV.
  static double potential_energy(const WavepacketState& state,
                                 const std::vector<double>& potential_meV);

 private:
  void rebuild_tables();

  SpatialGrid grid_;
  double mass_internal_;  // meV ps^2 / nm^2
  double dt_;
  Fft fft_;
  std::vector<std::complex<double>> kinetic_phase_;  // includes the 1/N roundtrip factor
  std::vector<double> kinetic_meV_;                  // hbar^2 k^2 / 2m per bin
  std::vector<std::complex<double>> scratch_;
};

}  // namespace qac
