#include "rotcool/config.hpp"

#include "rotcool/constants.hpp"

#include <fstream>
#include <sstream>

namespace rotcool::config {

using nlohmann::json;

namespace {

json moleculeJson(const std::string& name, double mass, double A, double B,
                  double C, double mua, double mub, double muc) {
    return json{{"name", name},   {"mass_u", mass}, {"A_MHz", A},
                {"B_MHz", B},     {"C_MHz", C},     {"mu_a_D", mua},
                {"mu_b_D", mub},  {"mu_c_D", muc}};
}

// Reference molecular constants (masses in u, rotational constants in MHz,
// dipole components in Debye).  CHDBrI+ and CHCaBrI+ carry no dipole data;
// couplings for them are reported per Debye.
const std::map<std::string, json>& moleculeTable() {
    static const std::map<std::string, json> table = {
        {"propanediol", moleculeJson("propanediol", 77, 8612, 3758, 2868, 2.4, 0, 0)},
        {"glutamine", moleculeJson("glutamine", 147, 2210, 830, 750, 2.0, 0, 0)},
        {"chdbri", moleculeJson("chdbri", 221, 14750, 1170, 1095, 0, 0, 0)},
        {"chcabri", moleculeJson("chcabri", 259, 2550, 830, 660, 0, 0, 0)},
    };
    return table;
}

// The protocol presets need nonzero mu_b/mu_c for the b- and c-type
// microwave routes; the magnitudes cancel against the configured Rabi rate,
// so unit placeholders are used.
json propanediolWithPulseDipoles() {
    json m = moleculeTable().at("propanediol");
    m["mu_b_D"] = 1.0;
    m["mu_c_D"] = 1.0;
    return m;
}

json defaultTree() {
    return json{
        {"version", "0.1.0"},
        {"molecule", nullptr},
        {"chain",
         {{"atom_mass_u", 172.0},
          {"atom_count", 2},
          {"axial_freq_MHz", 1.0},
          {"radial_freq_MHz", 0.0},
          {"reference_species", "molecule"},
          {"scaling_convention", "pseudopotential"}}},
        {"cooling",
         {{"rabi_2pi_kHz", 200.0},
          {"gamma_MHz", 0.1},
          {"eta", 0.012},
          {"b1", 1.0},
          {"b2", 1.0},
          {"phi1", 0.0},
          {"phi2", 0.0},
          {"mode_freq_MHz", "auto"},
          {"coupling_kHz", 0.0},
          {"couplings_kHz", json::array({0.0})},
          {"duration_ms", 8.0},
          {"record_every_ms", 0.1},
          {"secular", true}}},
        {"pulses", json::array()},
        {"protocol",
         {{"type", "depletion"},
          {"epsilon_z", 0.0},
          {"epsilon_minus", 0.0},
          {"iterations", 8},
          {"stage2_every", 3},
          {"record_steps", false},
          {"error_threshold", 0.05}}},
        {"scan",
         {{"mass_min_u", 70.0},
          {"mass_max_u", 270.0},
          {"mass_points", 200},
          {"radial_min_MHz", 0.5},
          {"radial_max_MHz", 20.0},
          {"radial_points", 200},
          {"jmax", 3},
          {"tolerance_kHz", 1.0}}},
        {"levels", {{"jmax", 3}}},
        {"numerics",
         {{"phonon_cutoff", 2},
          {"rtol", 1e-8},
          {"atol", 1e-12},
          {"jump_convention", "independent-rate"},
          {"polarization_mixing", "intensity"}}},
        {"output", {{"directory", "."}}},
    };
}

void mergeInto(json& base, const json& overlay) {
    if (!overlay.is_object() || !base.is_object()) {
        base = overlay;
        return;
    }
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() &&
            it.value().is_object())
            mergeInto(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

void applyOverride(json& tree, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects key.path=value, got '" + kv + "'");
    const std::string path = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    json* node = &tree;
    std::istringstream ps(path);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(ps, key, '.')) keys.push_back(key);
    if (keys.empty()) throw ConfigError("--set: empty key path");
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) node = &((*node)[keys[i]]);
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::parse_error&) {
        parsed = value; // plain string
    }
    (*node)[keys.back()] = parsed;
}

template <typename T>
T need(const json& j, const std::string& section, const std::string& key) {
    if (!j.contains(key))
        throw ConfigError("missing key '" + section + "." + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + section + "." + key + "': " + e.what());
    }
}

rotor::MoleculeSpec parseMolecule(const json& tree) {
    if (!tree.contains("molecule") || tree["molecule"].is_null())
        throw ConfigError("missing key 'molecule'");
    json m = tree["molecule"];
    if (m.is_string()) {
        const auto it = moleculeTable().find(m.get<std::string>());
        if (it == moleculeTable().end())
            throw ConfigError("unknown molecule preset '" + m.get<std::string>() + "'");
        m = it->second;
    }
    rotor::MoleculeSpec spec;
    spec.name = m.value("name", "unnamed");
    spec.mass_u = need<double>(m, "molecule", "mass_u");
    spec.A_MHz = need<double>(m, "molecule", "A_MHz");
    spec.B_MHz = need<double>(m, "molecule", "B_MHz");
    spec.C_MHz = need<double>(m, "molecule", "C_MHz");
    spec.mu_a_D = m.value("mu_a_D", 0.0);
    spec.mu_b_D = m.value("mu_b_D", 0.0);
    spec.mu_c_D = m.value("mu_c_D", 0.0);
    try {
        spec.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("molecule: ") + e.what());
    }
    return spec;
}

json normalizedMolecule(const rotor::MoleculeSpec& m) {
    return moleculeJson(m.name, m.mass_u, m.A_MHz, m.B_MHz, m.C_MHz, m.mu_a_D,
                        m.mu_b_D, m.mu_c_D);
}

protocol::LevelRef parseLevelRef(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError(where + ": level must be [J, Ka, Kc]");
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

} // namespace

rotor::MoleculeSpec moleculePreset(const std::string& name) {
    const auto it = moleculeTable().find(name);
    if (it == moleculeTable().end())
        throw ConfigError("unknown molecule preset '" + name + "'");
    json t;
    t["molecule"] = it->second;
    return parseMolecule(t);
}

std::vector<std::string> moleculePresetNames() {
    std::vector<std::string> names;
    for (const auto& [k, v] : moleculeTable()) names.push_back(k);
    return names;
}

nlohmann::json runPreset(const std::string& name) {
    // protonated 1,2-propanediol, Fig. 2 cooling/shuffling parameters
    if (name == "propanediol-fig2") {
        json t;
        t["molecule"] = propanediolWithPulseDipoles();
        t["chain"] = {{"atom_mass_u", 172.0}, {"atom_count", 2},
                      {"axial_freq_MHz", 1.0}, {"radial_freq_MHz", 8.87},
                      {"reference_species", "molecule"},
                      {"scaling_convention", "none"}};
        t["cooling"] = {{"rabi_2pi_kHz", 200.0}, {"gamma_MHz", 0.1},
                        {"eta", 0.012},          {"mode_freq_MHz", "auto"},
                        {"couplings_kHz", json::array({0.0, 2.7, 5.7, 8.4})},
                        {"coupling_kHz", 8.4},
                        {"duration_ms", 8.0},    {"secular", true}};
        t["protocol"] = {{"type", "depletion"}, {"iterations", 8}};
        return t;
    }
    if (name == "propanediol-fig3") {
        json t = runPreset("propanediol-fig2");
        t["protocol"] = {{"type", "single-state"},
                         {"iterations", 60},
                         {"stage2_every", 3},
                         {"error_threshold", 1e-3}};
        return t;
    }
    if (name == "glutamine-2_21") {
        json t;
        t["molecule"] = moleculeTable().at("glutamine");
        t["chain"] = {{"atom_mass_u", 172.0}, {"atom_count", 2},
                      {"axial_freq_MHz", 1.0}, {"radial_freq_MHz", 3.76},
                      {"reference_species", "molecule"},
                      {"scaling_convention", "none"}};
        t["cooling"] = {{"rabi_2pi_kHz", 50.0}, {"gamma_MHz", 0.05},
                        {"eta", 0.033},         {"mode_freq_MHz", "auto"},
                        {"couplings_kHz", json::array({0.0, 0.38, 0.8})},
                        {"coupling_kHz", 0.8},
                        {"duration_ms", 30.0},  {"secular", true},
                        {"cooled_pair", {{"lower", json::array({2, 2, 1})},
                                         {"upper", json::array({2, 2, 0})}}}};
        return t;
    }
    if (name == "glutamine-3_22") {
        json t = runPreset("glutamine-2_21");
        t["chain"]["radial_freq_MHz"] = 16.95;
        t["cooling"]["rabi_2pi_kHz"] = 200.0;
        t["cooling"]["gamma_MHz"] = 0.1;
        t["cooling"]["eta"] = 0.015;
        t["cooling"]["couplings_kHz"] = json::array({0.0, 2.2, 4.3, 6.6});
        t["cooling"]["coupling_kHz"] = 6.6;
        t["cooling"]["duration_ms"] = 10.0;
        t["cooling"]["cooled_pair"] = {{"lower", json::array({3, 2, 2})},
                                       {"upper", json::array({3, 2, 1})}};
        return t;
    }
    if (name == "fig1c-scan") {
        json t;
        t["molecule"] = moleculeTable().at("propanediol");
        t["chain"] = {{"atom_mass_u", 172.0}, {"atom_count", 2},
                      {"axial_freq_MHz", 1.0}, {"radial_freq_MHz", 8.87},
                      {"reference_species", "molecule"},
                      {"scaling_convention", "none"}};
        t["scan"] = {{"mass_min_u", 70.0},   {"mass_max_u", 270.0},
                     {"mass_points", 200},   {"radial_min_MHz", 0.5},
                     {"radial_max_MHz", 20.0}, {"radial_points", 200},
                     {"jmax", 3},            {"tolerance_kHz", 1.0}};
        return t;
    }
    // bare molecule presets double as run presets
    if (moleculeTable().count(name)) {
        json t;
        t["molecule"] = moleculeTable().at(name);
        return t;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> runPresetNames() {
    auto names = moleculePresetNames();
    for (const char* n : {"propanediol-fig2", "propanediol-fig3",
                          "glutamine-2_21", "glutamine-3_22", "fig1c-scan"})
        names.emplace_back(n);
    return names;
}

RunConfig resolveConfig(json tree, const std::vector<std::string>& overrides) {
    if (tree.contains("preset")) {
        json base = runPreset(tree["preset"].get<std::string>());
        tree.erase("preset");
        mergeInto(base, tree);
        tree = std::move(base);
    }
    json full = defaultTree();
    mergeInto(full, tree);
    for (const auto& kv : overrides) applyOverride(full, kv);

    RunConfig cfg;
    cfg.molecule = parseMolecule(full);
    full["molecule"] = normalizedMolecule(cfg.molecule); // canonical form

    const json& ch = full["chain"];
    const double atomMass = need<double>(ch, "chain", "atom_mass_u");
    const int atomCount = need<int>(ch, "chain", "atom_count");
    if (atomCount != 2)
        throw ConfigError("chain.atom_count: only the atom-molecule-atom chain "
                          "(atom_count=2) is supported");
    cfg.chain.particles = {
        {atomMass, 1.0, trap::ParticleKind::Atom},
        {cfg.molecule.mass_u, 1.0, trap::ParticleKind::Molecule},
        {atomMass, 1.0, trap::ParticleKind::Atom}};
    cfg.chain.axialFreq_MHz = need<double>(ch, "chain", "axial_freq_MHz");
    cfg.chain.radialFreq_MHz = ch.value("radial_freq_MHz", 0.0);
    const std::string ref = need<std::string>(ch, "chain", "reference_species");
    if (ref == "molecule") cfg.chain.refSpecies = trap::ParticleKind::Molecule;
    else if (ref == "atom") cfg.chain.refSpecies = trap::ParticleKind::Atom;
    else throw ConfigError("chain.reference_species must be 'molecule' or 'atom'");
    const std::string sc = need<std::string>(ch, "chain", "scaling_convention");
    if (sc == "pseudopotential")
        cfg.chain.scaling = trap::ScalingConvention::Pseudopotential;
    else if (sc == "none")
        cfg.chain.scaling = trap::ScalingConvention::None;
    else throw ConfigError("chain.scaling_convention must be 'pseudopotential' or 'none'");

    const json& co = full["cooling"];
    cfg.cooling.rabi_radPerSec =
        2.0 * constants::pi * need<double>(co, "cooling", "rabi_2pi_kHz") * 1e3;
    cfg.cooling.gamma_MHz = need<double>(co, "cooling", "gamma_MHz");
    cfg.cooling.eta = need<double>(co, "cooling", "eta");
    cfg.cooling.b1 = co.value("b1", 1.0);
    cfg.cooling.b2 = co.value("b2", 1.0);
    cfg.cooling.phi1 = co.value("phi1", 0.0);
    cfg.cooling.phi2 = co.value("phi2", 0.0);
    cfg.cooling.duration_ms = need<double>(co, "cooling", "duration_ms");
    cfg.cooling.secular = need<bool>(co, "cooling", "secular");
    cfg.cooling.totalCoupling_kHz = co.value("coupling_kHz", 0.0);
    if (co["mode_freq_MHz"].is_number())
        cfg.cooling.modeFreq_MHz = co["mode_freq_MHz"].get<double>();
    else
        cfg.cooling.modeFreq_MHz = 0.0; // "auto": resonant with the cooled pair
    if (co.contains("couplings_kHz")) {
        cfg.couplings_kHz.clear();
        for (const auto& v : co["couplings_kHz"])
            cfg.couplings_kHz.push_back(v.get<double>());
    }
    cfg.coolRecordEvery_ms = co.value("record_every_ms", 0.1);
    if (co.contains("cooled_pair")) {
        cfg.cooledLower = parseLevelRef(co["cooled_pair"].at("lower"),
                                        "cooling.cooled_pair.lower");
        cfg.cooledUpper = parseLevelRef(co["cooled_pair"].at("upper"),
                                        "cooling.cooled_pair.upper");
    }

    const json& nu = full["numerics"];
    cfg.phononCutoff = need<int>(nu, "numerics", "phonon_cutoff");
    cfg.cooling.rtol = need<double>(nu, "numerics", "rtol");
    cfg.cooling.atol = need<double>(nu, "numerics", "atol");
    cfg.jumpConvention = need<std::string>(nu, "numerics", "jump_convention");
    if (cfg.jumpConvention == "independent-rate")
        cfg.cooling.jump = lindblad::JumpConvention::IndependentRate;
    else if (cfg.jumpConvention == "collective-rate")
        cfg.cooling.jump = lindblad::JumpConvention::CollectiveRate;
    else if (cfg.jumpConvention == "collective-amplitude")
        cfg.cooling.jump = lindblad::JumpConvention::CollectiveAmplitude;
    else
        throw ConfigError("numerics.jump_convention must be independent-rate, "
                          "collective-rate or collective-amplitude");
    cfg.polarizationMixing = need<std::string>(nu, "numerics", "polarization_mixing");
    if (cfg.polarizationMixing != "intensity" && cfg.polarizationMixing != "amplitude")
        throw ConfigError("numerics.polarization_mixing must be 'intensity' or 'amplitude'");

    for (const auto& pj : full["pulses"]) {
        PulseConfig pc;
        pc.upper = parseLevelRef(pj.at("upper"), "pulses.upper");
        pc.lower = parseLevelRef(pj.at("lower"), "pulses.lower");
        pc.polarization = pj.value("polarization", "x");
        pc.admixture = pj.value("admixture", 0.0);
        pc.admixed = pj.value("admixed", "z");
        pc.peakRabi_kHz = pj.value("peak_rabi_kHz", 10.0);
        pc.areaPi = pj.value("area_pi", 1.0);
        cfg.pulses.push_back(pc);
    }

    const json& pr = full["protocol"];
    cfg.protocol.type = need<std::string>(pr, "protocol", "type");
    cfg.protocol.epsilonZ = pr.value("epsilon_z", 0.0);
    cfg.protocol.epsilonMinus = pr.value("epsilon_minus", 0.0);
    cfg.protocol.iterations = pr.value("iterations", 8);
    cfg.protocol.stage2Every = pr.value("stage2_every", 3);
    cfg.protocol.recordSteps = pr.value("record_steps", false);
    cfg.protocol.errorThreshold = pr.value("error_threshold", 0.05);

    const json& sc2 = full["scan"];
    cfg.scan.massMin_u = need<double>(sc2, "scan", "mass_min_u");
    cfg.scan.massMax_u = need<double>(sc2, "scan", "mass_max_u");
    cfg.scan.massPoints = need<int>(sc2, "scan", "mass_points");
    cfg.scan.radialMin_MHz = need<double>(sc2, "scan", "radial_min_MHz");
    cfg.scan.radialMax_MHz = need<double>(sc2, "scan", "radial_max_MHz");
    cfg.scan.radialPoints = need<int>(sc2, "scan", "radial_points");
    cfg.scan.Jmax = need<int>(sc2, "scan", "jmax");
    cfg.scan.tolerance_kHz = need<double>(sc2, "scan", "tolerance_kHz");

    cfg.levelsJmax = need<int>(full["levels"], "levels", "jmax");
    cfg.outputDirectory = need<std::string>(full["output"], "output", "directory");

    cfg.resolved = std::move(full);
    return cfg;
}

RunConfig loadConfig(const std::filesystem::path& path,
                     const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json tree;
    try {
        tree = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("parse error in '" + path.string() + "': " + e.what());
    }
    return resolveConfig(std::move(tree), overrides);
}

void writeResolvedConfig(const RunConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "resolved_config.json");
    out << cfg.resolved.dump(2) << "\n";
}

protocol::ProtocolPlan buildProtocolPlan(const RunConfig& cfg) {
    protocol::ProtocolPlan plan =
        cfg.protocol.type == "single-state"
            ? protocol::makeSingleStatePlan(cfg.molecule, cfg.protocol.epsilonMinus,
                                            cfg.protocol.iterations)
            : protocol::makeDepletionPlan(cfg.molecule, cfg.protocol.epsilonZ);
    plan.iterations = cfg.protocol.iterations;
    plan.stage2Every = cfg.protocol.stage2Every;
    plan.phononCutoff = cfg.phononCutoff;
    plan.mixing = cfg.polarizationMixing == "amplitude"
                      ? microwave::MixingConvention::Amplitude
                      : microwave::MixingConvention::Intensity;

    // cooling parameters from the config; the mode frequency stays resonant
    // with the cooled pair when set to "auto" (0)
    const double autoFreq = plan.cooling.modeFreq_MHz;
    lindblad::CoolingParams c = cfg.cooling;
    c.totalCoupling_kHz = 0.0;
    c.modeFreq_MHz = cfg.cooling.modeFreq_MHz > 0.0 ? cfg.cooling.modeFreq_MHz : autoFreq;
    plan.cooling = c;
    if (cfg.couplings_kHz.size() > 1) plan.couplings_kHz = cfg.couplings_kHz;
    return plan;
}

} // namespace rotcool::config
