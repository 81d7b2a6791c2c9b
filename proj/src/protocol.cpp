#include "rotcool/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace rotcool::protocol {

namespace {

using cd = std::complex<double>;

std::string stateLabel(const rotor::RotState& s) {
    return std::to_string(s.level.J) + "_{" + std::to_string(s.level.Ka) + "," +
           std::to_string(s.level.Kc) + "},M=" + std::to_string(s.M);
}

} // namespace

void ProtocolPlan::validate(const rotor::RotorModel& model) const {
    molecule.validate();
    if (subspace.empty())
        throw std::invalid_argument("ProtocolPlan: empty subspace");
    auto inSubspace = [&](const LevelRef& l) {
        return std::find(subspace.begin(), subspace.end(), l) != subspace.end();
    };
    if (!inSubspace(cooledLower) || !inSubspace(cooledUpper))
        throw std::invalid_argument("ProtocolPlan: cooled pair not in subspace");
    if (!inSubspace(targetLevel))
        throw std::invalid_argument("ProtocolPlan: target level not in subspace");
    if (couplings_kHz.empty() || couplings_kHz[0] != 0.0)
        throw std::invalid_argument(
            "ProtocolPlan: couplings_kHz must start with the M=0 entry (0)");

    const auto lo = model.level(cooledLower.J, cooledLower.Ka, cooledLower.Kc);
    const auto up = model.level(cooledUpper.J, cooledUpper.Ka, cooledUpper.Kc);
    if (up.energy_MHz <= lo.energy_MHz)
        throw std::invalid_argument("ProtocolPlan: cooled upper level is not above lower");
    const int Jpair = std::min(cooledLower.J, cooledUpper.J);
    if (static_cast<int>(couplings_kHz.size()) < Jpair + 1)
        throw std::invalid_argument("ProtocolPlan: couplings_kHz must cover |M| <= " +
                                    std::to_string(Jpair));

    const double detuning_kHz =
        std::abs((up.energy_MHz - lo.energy_MHz) - cooling.modeFreq_MHz) * 1e3;
    if (detuning_kHz > resonanceTolerance_kHz)
        throw std::invalid_argument(
            "ProtocolPlan: cooled transition detuned from the mode by " +
            std::to_string(detuning_kHz) + " kHz (tolerance " +
            std::to_string(resonanceTolerance_kHz) + " kHz)");
}

double coolingError(const Eigen::VectorXd& populations,
                    const microwave::RotorSubspace& subspace,
                    const LevelRef& target, std::optional<int> targetM) {
    if (populations.size() != subspace.dim())
        throw std::invalid_argument("coolingError: population vector size mismatch");
    double p = 0.0;
    bool found = false;
    for (int i = 0; i < subspace.dim(); ++i) {
        const auto& s = subspace.states()[i];
        if (s.level.J != target.J || s.level.Ka != target.Ka || s.level.Kc != target.Kc)
            continue;
        if (targetM && s.M != *targetM) continue;
        p += populations(i);
        found = true;
    }
    if (!found)
        throw std::domain_error("coolingError: target " + target.str() +
                                " not in subspace");
    return 1.0 - p;
}

namespace {

struct Engine {
    const ProtocolPlan& plan;
    rotor::RotorModel model;
    microwave::RotorSubspace subspace;
    int Jpair;
    std::vector<int> j1Idx, j2Idx; // per M = -Jpair..Jpair
    std::set<int> cooledStates;
    std::map<int, lindblad::CoolingMap> coolingMaps; // by |M|
    lindblad::CompositeSpace space;
    mutable std::map<const PulseStep*, Eigen::MatrixXcd> pulseCache;

    explicit Engine(const ProtocolPlan& p)
        : plan(p), model(p.molecule),
          subspace(model,
                   [&] {
                       std::vector<rotor::RotLevel> lv;
                       for (const auto& r : p.subspace)
                           lv.push_back(model.level(r.J, r.Ka, r.Kc));
                       return lv;
                   }()) {
        plan.validate(model);
        Jpair = std::min(plan.cooledLower.J, plan.cooledUpper.J);
        for (int M = -Jpair; M <= Jpair; ++M) {
            j1Idx.push_back(subspace.require(plan.cooledLower.J, plan.cooledLower.Ka,
                                             plan.cooledLower.Kc, M));
            j2Idx.push_back(subspace.require(plan.cooledUpper.J, plan.cooledUpper.Ka,
                                             plan.cooledUpper.Kc, M));
            cooledStates.insert(j1Idx.back());
            cooledStates.insert(j2Idx.back());
        }
        space.atomCount = 2;
        space.phononCutoff = plan.phononCutoff;
        for (int absM = 1; absM <= Jpair; ++absM) {
            if (plan.couplings_kHz[absM] == 0.0) continue;
            lindblad::CoolingParams p2 = plan.cooling;
            p2.totalCoupling_kHz = plan.couplings_kHz[absM];
            coolingMaps.emplace(absM, lindblad::CoolingMap(space, p2));
        }
    }

    microwave::PulseSpec buildTone(const PlanPulse& t) const {
        const auto up = model.level(t.upper.J, t.upper.Ka, t.upper.Kc);
        const auto lo = model.level(t.lower.J, t.lower.Ka, t.lower.Kc);
        const Eigen::MatrixXcd d = subspace.elements(t.polarization.normalized());
        // reference pair: largest element within the tone's level pair
        int ib = -1, ik = -1;
        double best = 0.0;
        for (int i = 0; i < subspace.dim(); ++i) {
            const auto& si = subspace.states()[i];
            if (si.level.Ka != up.Ka || si.level.Kc != up.Kc || si.level.J != up.J)
                continue;
            for (int j = 0; j < subspace.dim(); ++j) {
                const auto& sj = subspace.states()[j];
                if (sj.level.Ka != lo.Ka || sj.level.Kc != lo.Kc || sj.level.J != lo.J)
                    continue;
                const double a = std::abs(d(i, j));
                if (a > best) { best = a; ib = i; ik = j; }
            }
        }
        if (ib < 0 || best < 1e-14)
            throw microwave::DesignError(
                "protocol: no dipole-allowed element for the pulse on " +
                t.upper.str() + " <-> " + t.lower.str() +
                " under the chosen polarization");
        return microwave::designPiPulse(subspace, ib, ik,
                                        t.polarization.normalized(),
                                        t.peakRabi_kHz, t.area_rad);
    }

    void applyCool(Eigen::MatrixXcd& rho, Eigen::VectorXd& phonon) const {
        // per-M 2x2 blocks of the cooled pair
        std::vector<Eigen::Matrix2cd> blocksOut(2 * Jpair + 1);
        Eigen::VectorXd phononAcc = Eigen::VectorXd::Zero(space.phononCutoff + 1);
        double weightAcc = 0.0;
        for (int M = -Jpair; M <= Jpair; ++M) {
            const int i1 = j1Idx[M + Jpair], i2 = j2Idx[M + Jpair];
            Eigen::Matrix2cd b;
            b << rho(i1, i1), rho(i1, i2), rho(i2, i1), rho(i2, i2);
            const int absM = std::abs(M);
            const auto it = coolingMaps.find(absM);
            if (it == coolingMaps.end()) {
                blocksOut[M + Jpair] = b; // M = 0: not affected by the cooling
                continue;
            }
            const double weight = b.trace().real();
            const auto out = it->second.apply(b, phonon);
            blocksOut[M + Jpair] = out.block;
            if (weight > 1e-14) {
                phononAcc += out.phononDist;
                weightAcc += weight;
            }
        }
        // drop coherences that involve cooled states (the per-M pair coherence
        // is replaced from the lindblad output below)
        for (int i = 0; i < subspace.dim(); ++i)
            for (int j = 0; j < subspace.dim(); ++j) {
                if (i == j) continue;
                if (cooledStates.count(i) || cooledStates.count(j)) rho(i, j) = 0.0;
            }
        for (int M = -Jpair; M <= Jpair; ++M) {
            const int i1 = j1Idx[M + Jpair], i2 = j2Idx[M + Jpair];
            const auto& b = blocksOut[M + Jpair];
            rho(i1, i1) = b(0, 0);
            rho(i1, i2) = b(0, 1);
            rho(i2, i1) = b(1, 0);
            rho(i2, i2) = b(1, 1);
        }
        if (weightAcc > 0.0) phonon = phononAcc / weightAcc;
    }

    void checkTrace(const Eigen::MatrixXcd& rho, int iteration,
                    const std::string& where) const {
        const double tr = rho.trace().real();
        if (std::abs(tr - 1.0) > 1e-8)
            throw std::runtime_error("protocol: population not conserved at iteration " +
                                     std::to_string(iteration) + " (" + where +
                                     "): trace=" + std::to_string(tr));
    }
};

} // namespace

ProtocolTrace runProtocol(const ProtocolPlan& plan, bool recordSteps) {
    Engine eng(plan);
    const auto& sub = eng.subspace;
    const int n = sub.dim();

    ProtocolTrace trace;
    for (const auto& s : sub.states()) trace.stateLabels.push_back(stateLabel(s));

    // initial state: uniform over the listed levels (all M), atoms ground,
    // phonons uniform over 0..cutoff
    std::vector<int> initStates;
    for (int i = 0; i < n; ++i) {
        const auto& s = sub.states()[i];
        const LevelRef ref{s.level.J, s.level.Ka, s.level.Kc};
        const auto& levels =
            plan.initialLevels.empty() ? plan.subspace : plan.initialLevels;
        if (std::find(levels.begin(), levels.end(), ref) != levels.end())
            initStates.push_back(i);
    }
    if (initStates.empty())
        throw std::invalid_argument("runProtocol: initial distribution is empty");

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
    for (int i : initStates) rho(i, i) = 1.0 / double(initStates.size());
    Eigen::VectorXd phonon =
        Eigen::VectorXd::Constant(plan.phononCutoff + 1, 1.0 / (plan.phononCutoff + 1));

    auto record = [&](int iter, const std::string& step,
                      std::vector<ProtocolRecord>& dst) {
        ProtocolRecord rec;
        rec.iteration = iter;
        rec.step = step;
        rec.populations = rho.diagonal().real();
        rec.trace = rho.trace().real();
        rec.error = coolingError(rec.populations, sub, plan.targetLevel, plan.targetM);
        dst.push_back(std::move(rec));
    };

    record(0, "initial", trace.iterations);
    if (recordSteps) record(0, "initial", trace.stepSnapshots);

    for (int iter = 1; iter <= plan.iterations; ++iter) {
        std::vector<const Step*> steps;
        const bool stage2 = !plan.stage2.empty() && plan.stage2Every > 0 &&
                            iter % plan.stage2Every == 0;
        if (stage2)
            for (const auto& s : plan.stage2) steps.push_back(&s);
        for (const auto& s : plan.steps) steps.push_back(&s);

        int pulseCount = 0;
        for (const Step* step : steps) {
            if (std::holds_alternative<PulseStep>(*step)) {
                ++pulseCount;
                if (iter == 1 && !plan.pulsesOnFirstIteration) continue;
                const auto& ps = std::get<PulseStep>(*step);
                auto it = eng.pulseCache.find(&ps);
                if (it == eng.pulseCache.end()) {
                    std::vector<microwave::PulseSpec> tones;
                    tones.reserve(ps.tones.size());
                    for (const auto& t : ps.tones) tones.push_back(eng.buildTone(t));
                    it = eng.pulseCache
                             .emplace(&ps, microwave::pulseUnitary(sub, tones))
                             .first;
                }
                rho = it->second * rho * it->second.adjoint();
                eng.checkTrace(rho, iter, "pulse");
                if (recordSteps)
                    record(iter, "pulse:" + std::to_string(pulseCount),
                           trace.stepSnapshots);
            } else {
                eng.applyCool(rho, phonon);
                eng.checkTrace(rho, iter, "cool");
                if (recordSteps) record(iter, "cool", trace.stepSnapshots);
            }
        }
        record(iter, stage2 ? "iteration(stage2)" : "iteration", trace.iterations);
    }
    trace.finalError = trace.iterations.back().error;
    return trace;
}

namespace {

Eigen::Vector3cd xPol() { return rotor::polarizationVector(rotor::Polarization::X); }
Eigen::Vector3cd zPol() { return rotor::polarizationVector(rotor::Polarization::Z); }
Eigen::Vector3cd sigmaPlus() {
    return rotor::polarizationVector(rotor::Polarization::SigmaPlus);
}
Eigen::Vector3cd sigmaMinus() {
    return rotor::polarizationVector(rotor::Polarization::SigmaMinus);
}

lindblad::CoolingParams referenceCooling(const rotor::RotorModel& model,
                                         const LevelRef& lower, const LevelRef& upper) {
    lindblad::CoolingParams c;
    c.rabi_radPerSec = 2.0 * constants::pi * 200e3; // Omega = 2 pi x 200 kHz
    c.gamma_MHz = 0.1;
    c.eta = 0.012;
    c.b1 = c.b2 = 1.0;
    c.phi1 = c.phi2 = 0.0;
    c.duration_ms = 8.0;
    c.secular = true;
    const auto lo = model.level(lower.J, lower.Ka, lower.Kc);
    const auto up = model.level(upper.J, upper.Ka, upper.Kc);
    c.modeFreq_MHz = up.energy_MHz - lo.energy_MHz; // resonant by construction
    return c;
}

} // namespace

ProtocolPlan makeDepletionPlan(const rotor::MoleculeSpec& molecule, double epsilonZ) {
    rotor::RotorModel model(molecule);
    ProtocolPlan plan;
    plan.molecule = molecule;
    plan.subspace = {{2, 2, 1}, {3, 3, 1}, {3, 3, 0}};
    plan.cooledLower = {3, 3, 1};
    plan.cooledUpper = {3, 3, 0};
    plan.targetLevel = {3, 3, 1};
    plan.couplings_kHz = {0.0, 2.7, 5.7, 8.4}; // reference propanediol couplings
    plan.cooling = referenceCooling(model, plan.cooledLower, plan.cooledUpper);
    plan.iterations = 8;
    plan.pulsesOnFirstIteration = false; // first iteration cools the raw ensemble

    const Eigen::Vector3cd pol =
        microwave::imperfectPolarization(xPol(), epsilonZ, zPol());
    // shuffle population into the decaying level: 2_21 -> 3_30, then cool.
    // A tone on the target (3_31 <-> 2_21) would keep extracting target
    // population and stall the error at a cycling plateau.
    plan.steps.push_back(PulseStep{{PlanPulse{{3, 3, 0}, {2, 2, 1}, pol}}});
    plan.steps.push_back(CoolStep{});
    return plan;
}

ProtocolTrace runDepletionProtocol(const ProtocolPlan& plan, double epsilonZ) {
    ProtocolPlan p = plan;
    const Eigen::Vector3cd pol =
        microwave::imperfectPolarization(xPol(), epsilonZ, zPol(), plan.mixing);
    for (auto& step : p.steps)
        if (std::holds_alternative<PulseStep>(step))
            for (auto& tone : std::get<PulseStep>(step).tones) tone.polarization = pol;
    return runProtocol(p);
}

ProtocolPlan makeSingleStatePlan(const rotor::MoleculeSpec& molecule,
                                 double epsilonMinus, int iterations) {
    rotor::RotorModel model(molecule);
    ProtocolPlan plan;
    plan.molecule = molecule;
    plan.subspace = {{2, 2, 1}, {3, 3, 1}, {3, 3, 0}};
    plan.cooledLower = {3, 3, 1};
    plan.cooledUpper = {3, 3, 0};
    plan.targetLevel = {3, 3, 1};
    plan.targetM = 3;
    plan.initialLevels = {{3, 3, 1}};
    plan.couplings_kHz = {0.0, 2.7, 5.7, 8.4};
    plan.cooling = referenceCooling(model, plan.cooledLower, plan.cooledUpper);
    plan.iterations = iterations;
    plan.pulsesOnFirstIteration = true; // the initial ensemble sits in j1

    const Eigen::Vector3cd sp =
        microwave::imperfectPolarization(sigmaPlus(), epsilonMinus, sigmaMinus());
    // stage 1: climb M on the cooled pair
    plan.steps.push_back(PulseStep{{PlanPulse{{3, 3, 0}, {3, 3, 1}, sp}}});
    plan.steps.push_back(CoolStep{});
    // stage 2 (every k-th iteration): clear |3_30, 0> via |2_21, 0>
    plan.stage2.push_back(PulseStep{{PlanPulse{{3, 3, 0}, {2, 2, 1}, zPol()}}});
    plan.stage2.push_back(PulseStep{{PlanPulse{{3, 3, 0}, {2, 2, 1}, sp}}});
    plan.stage2Every = 3;
    return plan;
}

ProtocolTrace runSingleStateProtocol(const ProtocolPlan& plan, double epsilonMinus) {
    ProtocolPlan p = plan;
    const Eigen::Vector3cd sp = microwave::imperfectPolarization(
        sigmaPlus(), epsilonMinus, sigmaMinus(), plan.mixing);
    auto remix = [&](std::vector<Step>& steps) {
        for (auto& step : steps)
            if (std::holds_alternative<PulseStep>(step))
                for (auto& tone : std::get<PulseStep>(step).tones) {
                    // only sigma tones are remixed; z tones stay z
                    if (std::abs(tone.polarization(2)) < 0.5) tone.polarization = sp;
                }
    };
    remix(p.steps);
    remix(p.stage2);
    return runProtocol(p);
}

ValidationReport planValidator(const ProtocolPlan& plan) {
    rotor::RotorModel model(plan.molecule);
    std::vector<rotor::RotLevel> levels;
    for (const auto& r : plan.subspace)
        levels.push_back(model.level(r.J, r.Ka, r.Kc));
    microwave::RotorSubspace sub(model, levels);
    const int n = sub.dim();

    // adjacency from pulses (all stages)
    std::vector<std::set<int>> adj(n);
    auto addPulseEdges = [&](const PlanPulse& t) {
        const Eigen::MatrixXcd d = sub.elements(t.polarization.normalized());
        for (int i = 0; i < n; ++i) {
            const auto& si = sub.states()[i];
            if (si.level.J != t.upper.J || si.level.Ka != t.upper.Ka ||
                si.level.Kc != t.upper.Kc)
                continue;
            for (int j = 0; j < n; ++j) {
                const auto& sj = sub.states()[j];
                if (sj.level.J != t.lower.J || sj.level.Ka != t.lower.Ka ||
                    sj.level.Kc != t.lower.Kc)
                    continue;
                if (std::abs(d(i, j)) > 1e-12) {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
    };
    auto addSteps = [&](const std::vector<Step>& steps) {
        for (const auto& s : steps)
            if (std::holds_alternative<PulseStep>(s))
                for (const auto& t : std::get<PulseStep>(s).tones) addPulseEdges(t);
    };
    addSteps(plan.steps);
    addSteps(plan.stage2);

    // cooled-transition edges and the absorbing set (j2, M != 0)
    const int Jpair = std::min(plan.cooledLower.J, plan.cooledUpper.J);
    std::set<int> absorbing;
    for (int M = -Jpair; M <= Jpair; ++M) {
        const int i1 = sub.find(plan.cooledLower.J, plan.cooledLower.Ka,
                                plan.cooledLower.Kc, M);
        const int i2 = sub.find(plan.cooledUpper.J, plan.cooledUpper.Ka,
                                plan.cooledUpper.Kc, M);
        if (i1 < 0 || i2 < 0 || M == 0) continue;
        adj[i1].insert(i2);
        adj[i2].insert(i1);
        absorbing.insert(i2);
    }

    // BFS from the absorbing set
    std::vector<bool> reachable(n, false);
    std::vector<int> queue(absorbing.begin(), absorbing.end());
    for (int i : queue) reachable[i] = true;
    while (!queue.empty()) {
        const int u = queue.back();
        queue.pop_back();
        for (int v : adj[u])
            if (!reachable[v]) {
                reachable[v] = true;
                queue.push_back(v);
            }
    }

    // target states are the destination; they hold population by design and
    // are not required to drain
    auto isTarget = [&](int i) {
        const auto& s = sub.states()[i];
        if (s.level.J != plan.targetLevel.J || s.level.Ka != plan.targetLevel.Ka ||
            s.level.Kc != plan.targetLevel.Kc)
            return false;
        return !plan.targetM || s.M == *plan.targetM;
    };

    ValidationReport report;
    for (int i = 0; i < n; ++i) {
        if (reachable[i] || isTarget(i)) continue;
        report.allReachable = false;
        report.strandedStates.push_back(stateLabel(sub.states()[i]));
        // suggest a dipole-allowed link to some reachable state
        bool suggested = false;
        for (const auto pol : {rotor::Polarization::X, rotor::Polarization::Z,
                               rotor::Polarization::SigmaPlus}) {
            const Eigen::MatrixXcd d = sub.elements(rotor::polarizationVector(pol));
            for (int j = 0; j < n && !suggested; ++j) {
                if (!reachable[j] || std::abs(d(i, j)) < 1e-12) continue;
                const char* polName = pol == rotor::Polarization::X ? "x"
                                      : pol == rotor::Polarization::Z ? "z" : "sigma+";
                report.suggestions.push_back(
                    "link " + stateLabel(sub.states()[i]) + " -> " +
                    stateLabel(sub.states()[j]) + " with a " + polName +
                    "-polarized pulse (dJ=" +
                    std::to_string(sub.states()[j].level.J - sub.states()[i].level.J) +
                    ", dM=" + std::to_string(sub.states()[j].M - sub.states()[i].M) + ")");
                suggested = true;
            }
            if (suggested) break;
        }
        if (!suggested)
            report.suggestions.push_back("no dipole-allowed link found for " +
                                         stateLabel(sub.states()[i]));
    }
    return report;
}

std::string ValidationReport::text() const {
    std::ostringstream os;
    if (allReachable) {
        os << "all subspace states reach the cooled channel\n";
        return os.str();
    }
    os << "stranded states:\n";
    for (std::size_t i = 0; i < strandedStates.size(); ++i) {
        os << "  " << strandedStates[i];
        if (i < suggestions.size()) os << "  (" << suggestions[i] << ")";
        os << "\n";
    }
    return os.str();
}

} // namespace rotcool::protocol
