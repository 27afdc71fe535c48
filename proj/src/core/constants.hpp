#pragma once

namespace qac {

// Internal unit system: lengths in nm, times in ps, energies in meV,
// particle masses as multiples of the electron mass.
inline constexpr double kHbar = 0.6582119569;        // meV ps
inline constexpr double kBoltzmann = 0.08617333262;  // meV / K
inline constexpr double kHbar2Over2Me = 38.0998;     // meV nm^2

// Electron mass expressed in meV ps^2 / nm^2, derived so that
// hbar^2 / (2 m_e) comes out as kHbar2Over2Me exactly.
inline constexpr double kElectronMass = kHbar * kHbar / (2.0 * kHbar2Over2Me);

}  // namespace qac
