#pragma once

#include "rotcool/lindblad.hpp"
#include "rotcool/protocol.hpp"
#include "rotcool/rotor.hpp"
#include "rotcool/trap.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rotcool::config {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScanConfig {
    double massMin_u{70.0}, massMax_u{270.0};
    int massPoints{200};
    double radialMin_MHz{0.5}, radialMax_MHz{20.0};
    int radialPoints{200};
    int Jmax{3};
    double tolerance_kHz{1.0};
};

struct ProtocolConfig {
    std::string type{"depletion"}; // "depletion" | "single-state"
    double epsilonZ{0.0};
    double epsilonMinus{0.0};
    int iterations{8};
    int stage2Every{3};
    bool recordSteps{false};
    double errorThreshold{0.05};
};

struct PulseConfig {
    protocol::LevelRef upper, lower;
    std::string polarization{"x"}; // x|y|z|sigma+|sigma-
    double admixture{0.0};
    std::string admixed{"z"};
    double peakRabi_kHz{10.0};
    double areaPi{1.0};
};

// Fully resolved run configuration; every convention flag is explicit after
// preset expansion.
struct RunConfig {
    rotor::MoleculeSpec molecule;
    trap::IonChainSpec chain;
    lindblad::CoolingParams cooling;
    std::vector<double> couplings_kHz{0.0}; // per |M|
    protocol::LevelRef cooledLower{3, 3, 1};
    protocol::LevelRef cooledUpper{3, 3, 0};
    std::vector<PulseConfig> pulses;
    ProtocolConfig protocol;
    ScanConfig scan;
    int levelsJmax{3};
    int phononCutoff{2};
    std::string polarizationMixing{"intensity"}; // or "amplitude"
    std::string jumpConvention{"independent-rate"};
    std::string outputDirectory{"."};
    double coolRecordEvery_ms{0.1};

    nlohmann::json resolved; // the fully expanded tree, for provenance
};

// Named molecule specs (reference molecular constants).
rotor::MoleculeSpec moleculePreset(const std::string& name);
std::vector<std::string> moleculePresetNames();

// Named full-run presets ("propanediol-fig2", "glutamine-2_21", ...).
nlohmann::json runPreset(const std::string& name);
std::vector<std::string> runPresetNames();

// Load and resolve: file -> presets expanded -> overrides applied ->
// validated RunConfig.  `overrides` are dotted key=value pairs.
RunConfig loadConfig(const std::filesystem::path& path,
                     const std::vector<std::string>& overrides = {});
RunConfig resolveConfig(nlohmann::json tree,
                        const std::vector<std::string>& overrides = {});

// Serialization of the resolved tree (round-trips through resolveConfig).
void writeResolvedConfig(const RunConfig& cfg, const std::filesystem::path& dir);

protocol::ProtocolPlan buildProtocolPlan(const RunConfig& cfg);

} // namespace rotcool::config
