#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace rotcool::trap {

enum class ParticleKind { Atom, Molecule };

struct Particle {
    double mass_u{};
    double charge_e{1.0};
    ParticleKind kind{ParticleKind::Atom};
};

// How the quoted single-particle trap frequencies scale with mass:
//   Pseudopotential: particle i sees  omega_x * sqrt(m_ref/m_i)  axially and
//                    omega_z * (m_ref/m_i)  radially (RF pseudopotential).
//   None:            every particle sees the quoted frequencies as its own.
enum class ScalingConvention { Pseudopotential, None };

struct IonChainSpec {
    std::vector<Particle> particles;
    double axialFreq_MHz{1.0};   // quoted omega_x
    double radialFreq_MHz{};     // quoted omega_z
    ParticleKind refSpecies{ParticleKind::Molecule};
    ScalingConvention scaling{ScalingConvention::Pseudopotential};

    void validate() const;
    int moleculeIndex() const; // -1 if no molecule
    int referenceIndex() const;

    // per-particle single-particle frequencies after convention scaling, MHz
    std::vector<double> axialFreqs() const;
    std::vector<double> radialFreqs() const;
};

enum class ModeAxis { Axial, Radial };

struct NormalMode {
    ModeAxis axis{};
    double frequency_MHz{};
    Eigen::VectorXd displacement; // mass-weighted, orthonormal across modes
    std::string label;            // e.g. "axial-com", "radial-zigzag", "radial-1"
};

struct NormalModeSet {
    std::vector<double> equilibria_um;
    std::vector<NormalMode> modes;
    int moleculeIndex{-1};

    const NormalMode& mode(std::string_view label) const;
};

struct InstabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Axial equilibrium positions in um (Newton iteration on the harmonic +
// Coulomb potential; throws with the residual on non-convergence).
std::vector<double> equilibriumPositions(const IonChainSpec& chain);

// Axial and radial normal modes from the mass-weighted Hessian at
// equilibrium.  Throws InstabilityError naming the mode if any squared
// frequency is non-positive (zig-zag instability).
NormalModeSet normalModes(const IonChainSpec& chain);

// Molecule-row entry of a labeled mode's displacement vector.
double moleculeDisplacement(const NormalModeSet& modes, std::string_view label);

} // namespace rotcool::trap
