#pragma once

// Physical constants (CODATA 2018) and the unit conversions used throughout.
//
// Unit policy: rotational energies and trap frequencies are ordinary
// frequencies in MHz, couplings in kHz, positions in um, masses in u,
// dipole moments in Debye.  Open-system propagation works in SI
// (seconds, angular rad/s); the conversion happens at the module boundary.

namespace rotcool::constants {

inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double atomic_mass_unit  = 1.66053906660e-27; // kg
inline constexpr double epsilon0          = 8.8541878128e-12;  // F/m
inline constexpr double hbar              = 1.054571817e-34;   // J s
inline constexpr double planck_h          = 6.62607015e-34;    // J s
inline constexpr double speed_of_light    = 299792458.0;       // m/s
inline constexpr double debye             = 3.33564095198e-30; // C m  (1e-21/c)
inline constexpr double pi                = 3.14159265358979323846;

// Coulomb constant e^2/(4 pi eps0), in J m
inline constexpr double coulomb_e2 =
    elementary_charge * elementary_charge / (4.0 * pi * epsilon0);

} // namespace rotcool::constants
