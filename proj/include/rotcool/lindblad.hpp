#pragma once

#include "rotcool/ode.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

namespace rotcool::lindblad {

// Composite atom (x) atom (x) phonon (x) rotor Hilbert space.  The rotor
// carries exactly the resonant pair (j1 lower, j2 upper) at fixed M; the
// flat index runs rotor fastest, then phonon, then the atomic bit pattern.
struct CompositeSpace {
    int atomCount{2};
    int phononCutoff{2}; // phonon states 0..phononCutoff

    int dim() const { return (1 << atomCount) * (phononCutoff + 1) * 2; }
    int index(int atomBits, int n_p, int j) const {
        return (atomBits * (phononCutoff + 1) + n_p) * 2 + j;
    }
    int atomBits(int idx) const { return idx / (2 * (phononCutoff + 1)); }
    int phonon(int idx) const { return (idx / 2) % (phononCutoff + 1); }
    int rotor(int idx) const { return idx % 2; }
};

// Normalization of the spontaneous-emission channels.  The reference model
// writes L = gamma Sum_i sigma-^(i); reading gamma as a rate with one
// independent channel per atom is the default.
enum class JumpConvention {
    IndependentRate,      // L_i = sqrt(gamma) sigma-^(i)        (default)
    CollectiveRate,       // L   = sqrt(gamma) Sum_i sigma-^(i)
    CollectiveAmplitude,  // L   = gamma Sum_i sigma-^(i)
};

struct CoolingParams {
    double rabi_radPerSec{};        // Omega (angular; configured as 2*pi x value)
    double gamma_MHz{0.1};          // effective decay rate, 1e6/s
    double eta{0.012};              // effective per-mode Lamb-Dicke parameter
    double b1{1.0}, b2{1.0};        // atom displacement entries of the mode
    double totalCoupling_kHz{};     // Etilde0, ordinary kHz
    double modeFreq_MHz{};          // omega_p, ordinary MHz
    double detuning_radPerSec{};    // Delta; 0 means "use the red sideband"
    bool redSidebandDefault{true};  // Delta = -omega_p unless overridden
    double phi1{0.0}, phi2{0.0};    // laser phases at the atom equilibria
    double duration_ms{8.0};
    double rotorDetuning_kHz{0.0};  // (E_j2 - E_j1) - omega_p, usually 0

    bool secular{false};            // drop terms oscillating at omega_p, 2 omega_p
    JumpConvention jump{JumpConvention::IndependentRate};
    double rtol{1e-8};
    double atol{1e-12};

    void validate() const {
        if (gamma_MHz < 0.0 || rabi_radPerSec < 0.0 || eta < 0.0 || duration_ms < 0.0)
            throw std::invalid_argument("CoolingParams: negative parameter");
    }
    double delta_radPerSec() const;
};

struct PropagationError : std::runtime_error {
    double t_ms;
    PropagationError(double t, const std::string& msg)
        : std::runtime_error(msg), t_ms(t) {}
};

struct TrajectoryPoint {
    double t_ms{};
    Eigen::VectorXd populations; // diagonal of rho over the composite space
    double trace{};
    double purity{};
};

struct Trajectory {
    CompositeSpace space;
    std::vector<TrajectoryPoint> points;

    // reductions of the final point
    Eigen::Vector2d rotorPopulations() const;   // (P_j1, P_j2)
    Eigen::VectorXd phononPopulations() const;  // per n_p
    double atomExcited(int atom) const;
};

// Interaction-picture Hamiltonian H(t)/hbar at time t (rad/s), for tests and
// diagnostics.  Hermitian by construction.
Eigen::MatrixXcd buildInteractionHamiltonian(const CompositeSpace& space,
                                             const CoolingParams& params,
                                             double t_s);

// Lindblad propagation of rho0 over params.duration_ms.  Records every
// recordEvery_ms (0 = endpoints only).  Hermiticity/trace/positivity are
// asserted at every recorded point.
Trajectory propagate(const Eigen::MatrixXcd& rho0, const CompositeSpace& space,
                     const CoolingParams& params, double recordEvery_ms = 0.0);

// Convenience: final density matrix only.
Eigen::MatrixXcd propagateDense(const Eigen::MatrixXcd& rho0,
                                const CompositeSpace& space,
                                const CoolingParams& params);

// One sideband-cooling step on the resonant rotor pair, per M block.
// `rotorBlocks[k]` is the 2x2 (j1,j2) density block for M = Ms[k] (need not
// be normalized; its trace is the block weight).  `couplings_kHz[k]` is
// Etilde0(M).  Blocks with zero coupling (M = 0) are passed through
// unchanged.  The phonon distribution is shared across blocks going in and
// population-weight averaged coming out.
struct CoolStepResult {
    std::vector<Eigen::Matrix2cd> rotorBlocks;
    Eigen::VectorXd phononDist;
};

CoolStepResult coolStep(const std::vector<Eigen::Matrix2cd>& rotorBlocks,
                        const std::vector<double>& couplings_kHz,
                        const Eigen::VectorXd& phononDist,
                        const CompositeSpace& space, const CoolingParams& base);

// Spec-level wrapper: diagonal (p_j1, p_j2) per M in -J..J order.
struct CoolOneStepResult {
    std::vector<Eigen::Vector2d> populations;
    Eigen::VectorXd phononDist;
};

CoolOneStepResult coolOneStep(const std::vector<Eigen::Vector2d>& populations,
                              const std::vector<double>& couplings_kHz,
                              const Eigen::VectorXd& phononDist,
                              const CompositeSpace& space,
                              const CoolingParams& base);

// Precomputed linear action of one cooling step on (rotor 2x2 block, phonon
// distribution) inputs with ground-state atoms.  The Lindblad map is linear,
// so twelve basis propagations (4 Hermitian block components x phonon
// number states) determine it completely; repeated protocol iterations then
// cost a small linear combination instead of an integration.
class CoolingMap {
public:
    CoolingMap(const CompositeSpace& space, const CoolingParams& params);

    struct Output {
        Eigen::Matrix2cd block;
        Eigen::VectorXd phononDist;
    };
    Output apply(const Eigen::Matrix2cd& block,
                 const Eigen::VectorXd& phononDist) const;

private:
    CompositeSpace space_;
    // outputs indexed [phonon n][block basis: E00, E11, E01+E10, i(E01-E10)]
    std::vector<std::array<Output, 4>> basis_;
};

} // namespace rotcool::lindblad
