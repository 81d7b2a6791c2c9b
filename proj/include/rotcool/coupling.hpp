#pragma once

#include "rotcool/rotor.hpp"
#include "rotcool/trap.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rotcool::coupling {

// Dipole-phonon coupling record for one rotational transition at fixed M.
struct DipolePhononCoupling {
    double modeFrequency_MHz{};
    double prefactor_kHzPerD{};   // E0 such that E0 * mu[D] is an ordinary kHz
    rotor::RotState j1;           // lower level
    rotor::RotState j2;           // upper level
    double matrixElement_D{};     // |<j2,M| mu.z |j1,M>|, Debye (per Debye if no dipole)
    double totalCoupling_kHz{};   // Etilde0 = |prefactor * matrixElement|
    double detuning_kHz{};        // |dE_rot - omega_p|
    bool perDebye{false};
};

// Coupling prefactor E0 for a labeled mode:
//   E0 = |b_m| sqrt(h f_p^3 M_rot / (2 e^2)),
// with f_p the ordinary mode frequency, expressed so that E0 * mu[D] is an
// ordinary frequency in kHz.  (The equivalent hbar/omega_p^3 form quoted in
// the angular convention is 2*pi larger; this normalization is the one that
// reproduces the reference couplings, see the unit note in the README.)
double prefactor(const trap::NormalModeSet& modes, std::string_view modeLabel,
                 double moleculeMass_u);

double prefactorFromMode(double b_m, double modeFreq_MHz, double moleculeMass_u);

// Dressed-state splitting dE_{n_p} = sqrt(n_p) * Etilde0; n_p = 0 has no
// |n_p - 1, j2> partner and returns 0.
double splitting(double totalCoupling_kHz, int n_p);

// |n_p, j+-> = (|n_p,j1> +- |n_p-1,j2>)/sqrt(2), split by +-dE_{n_p}.
// Diagnostic description, not used for propagation.
struct DressedStates {
    int n_p{};
    double splitting_kHz{};     // dE_{n_p}
    double energyPlus_kHz{};    // +dE relative to the bare degenerate pair
    double energyMinus_kHz{};   // -dE
    rotor::RotState j1, j2;

    double phononExpectation() const { return n_p - 0.5; }
    static constexpr double amplitude() { return 0.70710678118654752440; }
};

DressedStates dressedStates(int n_p, double totalCoupling_kHz,
                            const rotor::RotState& j1, const rotor::RotState& j2);

// Full coupling record for a labeled mode and a (j1, j2, M) transition.
DipolePhononCoupling couplingFor(const rotor::RotorModel& model,
                                 const trap::NormalModeSet& modes,
                                 std::string_view modeLabel,
                                 const rotor::RotLevel& lower,
                                 const rotor::RotLevel& upper, int M);

struct ScanPoint {
    double mass_u{};
    double radialFreq_MHz{};
    double zigzagFreq_MHz{};
    double prefactor_kHzPerD{};
    bool unstable{false};
};

struct ResonanceRecord {
    double mass_u{};
    double radialFreqStar_MHz{};  // quoted trap frequency at the crossing
    double modeFreq_MHz{};        // zig-zag frequency there (= transition)
    rotor::Transition transition;
    double prefactor_kHzPerD{};
};

struct ScanResult {
    std::vector<ScanPoint> grid;           // row-major over (mass, omega_z)
    std::vector<ResonanceRecord> resonances;
};

// Fig. 1(c)-style scan: prefactor of the radial zig-zag mode on a
// (mass x omega_z) grid, plus resonance records where the zig-zag frequency
// crosses a dipole-allowed transition of `spec` (bisection on omega_z,
// refined to 1 Hz, accepted within `tolerance_kHz`).  The chain template
// supplies the co-trapped atoms and the scaling convention; its molecule
// slot takes the scanned mass.
ScanResult scanResonances(const std::optional<rotor::MoleculeSpec>& spec,
                          const trap::IonChainSpec& chainTemplate,
                          const std::vector<double>& radialFreqGrid_MHz,
                          const std::vector<double>& massGrid_u,
                          int Jmax, double tolerance_kHz, int jobs = 1);

} // namespace rotcool::coupling
