// rotcool: rotational sympathetic-cooling simulator CLI.
//
// Subcommands: levels | modes | scan | cool | drive | protocol.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "rotcool/config.hpp"
#include "rotcool/coupling.hpp"
#include "rotcool/csv.hpp"
#include "rotcool/lindblad.hpp"
#include "rotcool/microwave.hpp"
#include "rotcool/protocol.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace rotcool;
using nlohmann::json;

struct CommonArgs {
    std::string configPath;
    std::string preset;
    std::string outDir{"."};
    std::vector<std::string> overrides;
    int jobs{1};
};

void addCommon(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.configPath, "configuration file (JSON)");
    cmd->add_option("--preset", args.preset, "named preset");
    cmd->add_option("--out", args.outDir, "output directory");
    cmd->add_option("--set", args.overrides, "override key.path=value");
    cmd->add_option("--jobs", args.jobs, "parallel workers for sweeps");
}

config::RunConfig loadRun(const CommonArgs& args) {
    json tree = json::object();
    if (!args.configPath.empty()) {
        std::ifstream in(args.configPath);
        if (!in)
            throw config::ConfigError("cannot open config file '" + args.configPath + "'");
        tree = json::parse(in, nullptr, true, true);
    }
    if (!args.preset.empty()) tree["preset"] = args.preset;
    auto cfg = config::resolveConfig(std::move(tree), args.overrides);
    cfg.outputDirectory = args.outDir;
    return cfg;
}

std::vector<std::pair<std::string, std::string>> metadataFor(
    const config::RunConfig& cfg) {
    return {
        {"version", cfg.resolved["version"].get<std::string>()},
        {"molecule", cfg.molecule.name},
        {"scaling_convention",
         cfg.resolved["chain"]["scaling_convention"].get<std::string>()},
        {"reference_species",
         cfg.resolved["chain"]["reference_species"].get<std::string>()},
        {"jump_convention", cfg.jumpConvention},
        {"polarization_mixing", cfg.polarizationMixing},
    };
}

int cmdLevels(const CommonArgs& args) {
    auto cfg = loadRun(args);
    config::writeResolvedConfig(cfg, cfg.outputDirectory);
    rotor::RotorModel model(cfg.molecule);

    csv::Writer w(std::filesystem::path(cfg.outputDirectory) / "levels.csv",
                  "levels", metadataFor(cfg),
                  {"J", "Ka", "Kc", "energy_MHz"});
    for (int J = 0; J <= cfg.levelsJmax; ++J)
        for (const auto& lv : model.block(J).levels)
            w.row({std::to_string(lv.J), std::to_string(lv.Ka),
                   std::to_string(lv.Kc), csv::num(lv.energy_MHz)});

    csv::Writer t(std::filesystem::path(cfg.outputDirectory) / "transitions.csv",
                  "transitions", metadataFor(cfg),
                  {"J_lo", "Ka_lo", "Kc_lo", "J_up", "Ka_up", "Kc_up",
                   "frequency_MHz", "strength_x_D2", "strength_y_D2",
                   "strength_z_D2"});
    for (const auto& tr : model.transitionTable(cfg.levelsJmax))
        t.row({std::to_string(tr.lower.J), std::to_string(tr.lower.Ka),
               std::to_string(tr.lower.Kc), std::to_string(tr.upper.J),
               std::to_string(tr.upper.Ka), std::to_string(tr.upper.Kc),
               csv::num(tr.frequency_MHz), csv::num(tr.strength_x),
               csv::num(tr.strength_y), csv::num(tr.strength_z)});
    return 0;
}

int cmdModes(const CommonArgs& args) {
    auto cfg = loadRun(args);
    config::writeResolvedConfig(cfg, cfg.outputDirectory);
    if (cfg.chain.radialFreq_MHz <= 0.0)
        throw config::ConfigError("chain.radial_freq_MHz must be set for 'modes'");
    const auto modes = trap::normalModes(cfg.chain);

    csv::Writer eq(std::filesystem::path(cfg.outputDirectory) / "equilibria.csv",
                   "equilibria", metadataFor(cfg), {"particle", "position_um"});
    for (std::size_t i = 0; i < modes.equilibria_um.size(); ++i)
        eq.row({std::to_string(i), csv::num(modes.equilibria_um[i])});

    std::vector<std::string> cols{"axis", "label", "frequency_MHz"};
    for (std::size_t i = 0; i < modes.equilibria_um.size(); ++i)
        cols.push_back("b" + std::to_string(i));
    csv::Writer w(std::filesystem::path(cfg.outputDirectory) / "modes.csv",
                  "modes", metadataFor(cfg), cols);
    for (const auto& m : modes.modes) {
        std::vector<std::string> row{
            m.axis == trap::ModeAxis::Axial ? "axial" : "radial", m.label,
            csv::num(m.frequency_MHz)};
        for (int i = 0; i < m.displacement.size(); ++i)
            row.push_back(csv::num(m.displacement(i)));
        w.row(row);
    }
    return 0;
}

int cmdScan(const CommonArgs& args) {
    auto cfg = loadRun(args);
    config::writeResolvedConfig(cfg, cfg.outputDirectory);

    std::vector<double> masses(cfg.scan.massPoints);
    for (int i = 0; i < cfg.scan.massPoints; ++i)
        masses[i] = cfg.scan.massMin_u +
                    (cfg.scan.massMax_u - cfg.scan.massMin_u) * i /
                        std::max(1, cfg.scan.massPoints - 1);
    std::vector<double> freqs(cfg.scan.radialPoints);
    for (int i = 0; i < cfg.scan.radialPoints; ++i)
        freqs[i] = cfg.scan.radialMin_MHz +
                   (cfg.scan.radialMax_MHz - cfg.scan.radialMin_MHz) * i /
                       std::max(1, cfg.scan.radialPoints - 1);

    const auto result = coupling::scanResonances(cfg.molecule, cfg.chain, freqs,
                                                 masses, cfg.scan.Jmax,
                                                 cfg.scan.tolerance_kHz, args.jobs);

    csv::Writer g(std::filesystem::path(cfg.outputDirectory) / "scan_grid.csv",
                  "scan-grid", metadataFor(cfg),
                  {"mass_u", "radial_freq_MHz", "zigzag_freq_MHz",
                   "prefactor_kHz_per_D", "unstable"});
    for (const auto& p : result.grid)
        g.row({csv::num(p.mass_u), csv::num(p.radialFreq_MHz),
               csv::num(p.zigzagFreq_MHz), csv::num(p.prefactor_kHzPerD),
               p.unstable ? "1" : "0"});

    csv::Writer r(std::filesystem::path(cfg.outputDirectory) / "resonances.csv",
                  "resonances", metadataFor(cfg),
                  {"mass_u", "radial_freq_star_MHz", "J_lo", "Ka_lo", "Kc_lo",
                   "J_up", "Ka_up", "Kc_up", "transition_MHz",
                   "prefactor_kHz_per_D"});
    for (const auto& rec : result.resonances)
        r.row({csv::num(rec.mass_u), csv::num(rec.radialFreqStar_MHz),
               std::to_string(rec.transition.lower.J),
               std::to_string(rec.transition.lower.Ka),
               std::to_string(rec.transition.lower.Kc),
               std::to_string(rec.transition.upper.J),
               std::to_string(rec.transition.upper.Ka),
               std::to_string(rec.transition.upper.Kc),
               csv::num(rec.transition.frequency_MHz),
               csv::num(rec.prefactor_kHzPerD)});
    std::cout << "scan: " << result.resonances.size() << " resonances\n";
    return 0;
}

int cmdCool(const CommonArgs& args) {
    auto cfg = loadRun(args);
    config::writeResolvedConfig(cfg, cfg.outputDirectory);

    rotor::RotorModel model(cfg.molecule);
    const auto lo = model.level(cfg.cooledLower.J, cfg.cooledLower.Ka, cfg.cooledLower.Kc);
    const auto up = model.level(cfg.cooledUpper.J, cfg.cooledUpper.Ka, cfg.cooledUpper.Kc);

    lindblad::CompositeSpace space;
    space.phononCutoff = cfg.phononCutoff;
    lindblad::CoolingParams p = cfg.cooling;
    if (p.modeFreq_MHz <= 0.0) p.modeFreq_MHz = up.energy_MHz - lo.energy_MHz;
    if (p.totalCoupling_kHz == 0.0 && cfg.couplings_kHz.size() > 1)
        p.totalCoupling_kHz = cfg.couplings_kHz.back();

    // equal distribution over phonons 0..cutoff and the rotor pair
    const int n = space.dim();
    Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(n, n);
    const double w = 1.0 / (2.0 * (space.phononCutoff + 1));
    for (int np = 0; np <= space.phononCutoff; ++np)
        for (int j = 0; j < 2; ++j)
            rho0(space.index(0, np, j), space.index(0, np, j)) = w;

    const auto traj = lindblad::propagate(rho0, space, p, cfg.coolRecordEvery_ms);

    auto meta = metadataFor(cfg);
    meta.push_back({"mode_freq_MHz", csv::num(p.modeFreq_MHz)});
    meta.push_back({"coupling_kHz", csv::num(p.totalCoupling_kHz)});
    std::vector<std::string> cols{"t_ms"};
    for (int i = 0; i < n; ++i) {
        std::ostringstream c;
        c << "p_a" << space.atomBits(i) << "_n" << space.phonon(i) << "_j"
          << (space.rotor(i) + 1);
        cols.push_back(c.str());
    }
    cols.push_back("trace");
    cols.push_back("purity");
    csv::Writer w2(std::filesystem::path(cfg.outputDirectory) / "cooling.csv",
                   "cooling-trajectory", meta, cols);
    for (const auto& pt : traj.points) {
        std::vector<std::string> row{csv::num(pt.t_ms)};
        for (int i = 0; i < n; ++i) row.push_back(csv::num(pt.populations(i)));
        row.push_back(csv::num(pt.trace));
        row.push_back(csv::num(pt.purity));
        w2.row(row);
    }
    const auto rot = traj.rotorPopulations();
    std::cout << "cool: final P(j1)=" << rot(0) << " P(j2)=" << rot(1) << "\n";
    return 0;
}

int cmdDrive(const CommonArgs& args, const std::string& populationsPath) {
    auto cfg = loadRun(args);
    config::writeResolvedConfig(cfg, cfg.outputDirectory);
    if (cfg.pulses.empty())
        throw config::ConfigError("drive: config has no 'pulses' list");

    rotor::RotorModel model(cfg.molecule);
    // subspace of every level referenced by a pulse
    std::vector<rotor::RotLevel> levels;
    auto addLevel = [&](const protocol::LevelRef& r) {
        const auto lv = model.level(r.J, r.Ka, r.Kc);
        for (const auto& e : levels)
            if (e.J == lv.J && e.Ka == lv.Ka && e.Kc == lv.Kc) return;
        levels.push_back(lv);
    };
    for (const auto& p : cfg.pulses) {
        addLevel(p.upper);
        addLevel(p.lower);
    }
    microwave::RotorSubspace sub(model, levels);

    Eigen::VectorXd pops = Eigen::VectorXd::Zero(sub.dim());
    if (!populationsPath.empty()) {
        std::ifstream in(populationsPath);
        if (!in)
            throw config::ConfigError("cannot open populations file '" +
                                      populationsPath + "'");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("J,", 0) == 0) continue;
            std::istringstream ls(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ls, cell, ',')) cells.push_back(cell);
            if (cells.size() != 5)
                throw config::ConfigError("populations file: expected J,Ka,Kc,M,population");
            pops(sub.require(std::stoi(cells[0]), std::stoi(cells[1]),
                             std::stoi(cells[2]), std::stoi(cells[3]))) =
                std::stod(cells[4]);
        }
    } else {
        pops.setConstant(1.0 / sub.dim());
    }

    const auto mixing = cfg.polarizationMixing == "amplitude"
                            ? microwave::MixingConvention::Amplitude
                            : microwave::MixingConvention::Intensity;
    auto polOf = [&](const std::string& name) {
        if (name == "x") return rotor::polarizationVector(rotor::Polarization::X);
        if (name == "y") return rotor::polarizationVector(rotor::Polarization::Y);
        if (name == "z") return rotor::polarizationVector(rotor::Polarization::Z);
        if (name == "sigma+")
            return rotor::polarizationVector(rotor::Polarization::SigmaPlus);
        if (name == "sigma-")
            return rotor::polarizationVector(rotor::Polarization::SigmaMinus);
        throw config::ConfigError("unknown polarization '" + name + "'");
    };

    for (const auto& pc : cfg.pulses) {
        Eigen::Vector3cd pol = polOf(pc.polarization);
        if (pc.admixture > 0.0)
            pol = microwave::imperfectPolarization(pol, pc.admixture,
                                                   polOf(pc.admixed), mixing);
        // reference pair: largest element within the level pair
        const Eigen::MatrixXcd d = sub.elements(pol);
        int ib = -1, ik = -1;
        double best = 0.0;
        for (int i = 0; i < sub.dim(); ++i)
            for (int j = 0; j < sub.dim(); ++j) {
                const auto& si = sub.states()[i];
                const auto& sj = sub.states()[j];
                if (si.level.J != pc.upper.J || si.level.Ka != pc.upper.Ka ||
                    si.level.Kc != pc.upper.Kc)
                    continue;
                if (sj.level.J != pc.lower.J || sj.level.Ka != pc.lower.Ka ||
                    sj.level.Kc != pc.lower.Kc)
                    continue;
                if (std::abs(d(i, j)) > best) {
                    best = std::abs(d(i, j));
                    ib = i;
                    ik = j;
                }
            }
        if (ib < 0 || best < 1e-14)
            throw microwave::DesignError("drive: pulse has no dipole-allowed element");
        const auto pulse = microwave::designPiPulse(
            sub, ib, ik, pol, pc.peakRabi_kHz, pc.areaPi * constants::pi);
        pops = microwave::propagatePulse(pops, sub,
                                         std::vector<microwave::PulseSpec>{pulse});
    }

    csv::Writer w(std::filesystem::path(cfg.outputDirectory) / "populations.csv",
                  "populations", metadataFor(cfg),
                  {"J", "Ka", "Kc", "M", "population"});
    for (int i = 0; i < sub.dim(); ++i) {
        const auto& s = sub.states()[i];
        w.row({std::to_string(s.level.J), std::to_string(s.level.Ka),
               std::to_string(s.level.Kc), std::to_string(s.M),
               csv::num(pops(i))});
    }
    return 0;
}

int cmdProtocol(const CommonArgs& args) {
    auto cfg = loadRun(args);
    config::writeResolvedConfig(cfg, cfg.outputDirectory);

    auto plan = config::buildProtocolPlan(cfg);
    const auto report = protocol::planValidator(plan);
    if (!report.allReachable)
        std::cerr << "[protocol] warning: " << report.text();

    const auto trace =
        cfg.protocol.type == "single-state"
            ? protocol::runSingleStateProtocol(plan, cfg.protocol.epsilonMinus)
            : protocol::runDepletionProtocol(plan, cfg.protocol.epsilonZ);

    std::vector<std::string> cols{"iteration", "error"};
    for (const auto& l : trace.stateLabels) cols.push_back("P(" + l + ")");
    csv::Writer w(std::filesystem::path(cfg.outputDirectory) / "protocol.csv",
                  "protocol-trace", metadataFor(cfg), cols);
    for (const auto& rec : trace.iterations) {
        std::vector<std::string> row{std::to_string(rec.iteration),
                                     csv::num(rec.error)};
        for (int i = 0; i < rec.populations.size(); ++i)
            row.push_back(csv::num(rec.populations(i)));
        w.row(row);
    }

    int toThreshold = -1;
    for (const auto& rec : trace.iterations)
        if (rec.error <= cfg.protocol.errorThreshold) {
            toThreshold = rec.iteration;
            break;
        }
    json summary{{"final_error", trace.finalError},
                 {"iterations", cfg.protocol.iterations},
                 {"error_threshold", cfg.protocol.errorThreshold},
                 {"iterations_to_threshold", toThreshold},
                 {"converged", toThreshold >= 0},
                 {"stranded_states", report.strandedStates}};
    std::ofstream js(std::filesystem::path(cfg.outputDirectory) / "summary.json");
    js << summary.dump(2) << "\n";
    std::cout << "protocol: final error " << trace.finalError << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotational sympathetic-cooling simulator"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string populationsPath;

    auto* levels = app.add_subcommand("levels", "rotational level table");
    addCommon(levels, args);
    auto* modes = app.add_subcommand("modes", "ion-chain normal modes");
    addCommon(modes, args);
    auto* scan = app.add_subcommand("scan", "coupling-prefactor grid and resonances");
    addCommon(scan, args);
    auto* cool = app.add_subcommand("cool", "sideband-cooling trajectory");
    addCommon(cool, args);
    auto* drive = app.add_subcommand("drive", "apply microwave pulses to populations");
    addCommon(drive, args);
    drive->add_option("--populations", populationsPath,
                      "input populations CSV (J,Ka,Kc,M,population)");
    auto* proto = app.add_subcommand("protocol", "cooling + microwave protocol");
    addCommon(proto, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (levels->parsed()) return cmdLevels(args);
        if (modes->parsed()) return cmdModes(args);
        if (scan->parsed()) return cmdScan(args);
        if (cool->parsed()) return cmdCool(args);
        if (drive->parsed()) return cmdDrive(args, populationsPath);
        if (proto->parsed()) return cmdProtocol(args);
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
