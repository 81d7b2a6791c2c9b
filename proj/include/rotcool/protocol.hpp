#pragma once

#include "rotcool/coupling.hpp"
#include "rotcool/lindblad.hpp"
#include "rotcool/microwave.hpp"
#include "rotcool/rotor.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rotcool::protocol {

struct LevelRef {
    int J{}, Ka{}, Kc{};
    bool operator==(const LevelRef&) const = default;
    std::string str() const {
        return std::to_string(J) + "_{" + std::to_string(Ka) + "," +
               std::to_string(Kc) + "}";
    }
};

// One microwave tone of a plan, defined symbolically by the level pair it is
// resonant with.  The reference pair for the Rabi normalization is the
// largest-element (M, M') pair under the tone's polarization.
struct PlanPulse {
    LevelRef upper, lower;
    Eigen::Vector3cd polarization;
    double peakRabi_kHz{10.0};
    double area_rad{constants::pi};
};

struct CoolStep {};
struct PulseStep {
    std::vector<PlanPulse> tones; // applied jointly
};
using Step = std::variant<CoolStep, PulseStep>;

struct ProtocolPlan {
    rotor::MoleculeSpec molecule;
    std::vector<LevelRef> subspace;
    std::vector<LevelRef> initialLevels; // uniform initial spread; empty = subspace
    LevelRef cooledLower; // j1, the level fed by the engineered decay
    LevelRef cooledUpper; // j2, the decaying level
    lindblad::CoolingParams cooling;    // totalCoupling_kHz filled per M block
    std::vector<double> couplings_kHz;  // Etilde0 by |M|; [0] must be 0
    int phononCutoff{2};

    std::vector<Step> steps;            // one iteration
    std::vector<Step> stage2;           // optional second stage
    int stage2Every{3};                 // run stage2 every k-th iteration
    int iterations{8};

    bool pulsesOnFirstIteration{false}; // skip pulses in iteration 1 otherwise
    double resonanceTolerance_kHz{1.0}; // cooled pair vs mode frequency check
    microwave::MixingConvention mixing{microwave::MixingConvention::Intensity};

    // target for the cooling error: whole level, or one (level, M) state
    LevelRef targetLevel;
    std::optional<int> targetM;

    void validate(const rotor::RotorModel& model) const;
};

struct ProtocolRecord {
    int iteration{};
    std::string step; // "initial", "cool", "pulse:<n>"
    double error{};
    double trace{};
    Eigen::VectorXd populations;
};

struct ProtocolTrace {
    std::vector<std::string> stateLabels;
    std::vector<ProtocolRecord> iterations;    // one per iteration, after cooling
    std::vector<ProtocolRecord> stepSnapshots; // optional, per step
    double finalError{};
};

// 1 - (summed target population) for a population snapshot.
double coolingError(const Eigen::VectorXd& populations,
                    const microwave::RotorSubspace& subspace,
                    const LevelRef& target, std::optional<int> targetM = {});

ProtocolTrace runProtocol(const ProtocolPlan& plan, bool recordSteps = false);

// Fig. 2-style depletion into the cooled lower level: per iteration, one
// x-polarized pulse on upper<->2_21 then one on 2_21<->j2, then cooling.
// epsilonZ admixes z polarization (intensity fraction) into every pulse.
ProtocolPlan makeDepletionPlan(const rotor::MoleculeSpec& molecule,
                               double epsilonZ);
ProtocolTrace runDepletionProtocol(const ProtocolPlan& plan, double epsilonZ);

// Fig. 3-style single-state preparation of |j1, M=J>: stage 1 climbs M with
// a sigma+ pulse on j1<->j2; stage 2 clears |j2, 0> via |2_21, 0> with z and
// sigma+ pulses.  epsilonMinus admixes sigma- into every sigma+ tone.
ProtocolPlan makeSingleStatePlan(const rotor::MoleculeSpec& molecule,
                                 double epsilonMinus, int iterations = 60);
ProtocolTrace runSingleStateProtocol(const ProtocolPlan& plan,
                                     double epsilonMinus);

struct ValidationReport {
    bool allReachable{true};
    std::vector<std::string> strandedStates;
    std::vector<std::string> suggestions;
    std::string text() const;
};

// Reachability of the dissipative channel (j2, M != 0) from every subspace
// state under the plan's pulses plus the cooled transition.
ValidationReport planValidator(const ProtocolPlan& plan);

} // namespace rotcool::protocol
