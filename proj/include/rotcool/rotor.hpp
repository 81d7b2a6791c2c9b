#pragma once

#include "rotcool/angular.hpp"

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rotcool::rotor {

// Molecular input record: rotational constants in MHz (ordinary frequency),
// body-frame dipole components in Debye.  A missing dipole set is allowed;
// couplings are then reported per Debye.
struct MoleculeSpec {
    std::string name;
    double mass_u{};
    double A_MHz{};
    double B_MHz{};
    double C_MHz{};
    double mu_a_D{};
    double mu_b_D{};
    double mu_c_D{};

    bool hasDipole() const { return mu_a_D != 0.0 || mu_b_D != 0.0 || mu_c_D != 0.0; }
    void validate() const;
};

struct RotLevel {
    int J{};
    int Ka{};
    int Kc{};
    double energy_MHz{};
};

// (level, M) pair used wherever a full rotational state is needed.
struct RotState {
    RotLevel level;
    int M{};
};

// One J block of the rigid asymmetric top: eigenlevels labeled J_{Ka,Kc}
// and the orthogonal eigenvector matrix over the symmetric-top K basis
// (column k = level k, rows K = -J..J, representation I^r with a -> z).
struct RotorBlock {
    int J{};
    std::vector<RotLevel> levels;   // ascending energy
    Eigen::MatrixXd eigenvectors;   // (2J+1) x (2J+1)
};

// Canonical (Ka,Kc) sequence in ascending energy for A > B > C:
// (0,J), (1,J), (1,J-1), (2,J-1), ...
std::vector<std::pair<int, int>> canonicalLabels(int J);

// Analytic Hamiltonian matrix in the K basis (shared with tests as the
// reconstruction reference).
Eigen::MatrixXd hamiltonianMatrix(const MoleculeSpec& spec, int J);

RotorBlock buildRotorBlock(const MoleculeSpec& spec, int J);

enum class Polarization { X, Y, Z, SigmaPlus, SigmaMinus };

// epsilon vectors for the named polarizations: x, y, z Cartesian,
// sigma+- = (x +- i y)/sqrt(2).
Eigen::Vector3cd polarizationVector(Polarization p);

struct Transition {
    RotLevel lower;
    RotLevel upper;
    double frequency_MHz{};
    // max over M of |<upper,M'|mu.eps|lower,M>|^2 per polarization, Debye^2
    double strength_x{};
    double strength_y{};
    double strength_z{};
};

// Caches RotorBlocks per J and evaluates dipole matrix elements between
// labeled eigenstates.
class RotorModel {
public:
    explicit RotorModel(MoleculeSpec spec);

    const MoleculeSpec& spec() const { return spec_; }
    const RotorBlock& block(int J) const;
    RotLevel level(int J, int Ka, int Kc) const;

    // <bra| mu . eps |ket> in Debye; zero unless |dJ| <= 1 and the
    // polarization's spherical content matches dM.
    std::complex<double> dipoleElement(const RotState& bra, const RotState& ket,
                                       const Eigen::Vector3cd& eps) const;
    std::complex<double> dipoleElement(const RotState& bra, const RotState& ket,
                                       Polarization p) const;

    // All dipole-allowed level pairs with J <= Jmax and positive frequency,
    // sorted by frequency.
    std::vector<Transition> transitionTable(int Jmax) const;

private:
    MoleculeSpec spec_;
    mutable std::map<int, RotorBlock> blocks_;
};

} // namespace rotcool::rotor
