// pybind11 bindings exposing the main operations.

#include "rotcool/angular.hpp"
#include "rotcool/config.hpp"
#include "rotcool/coupling.hpp"
#include "rotcool/lindblad.hpp"
#include "rotcool/microwave.hpp"
#include "rotcool/protocol.hpp"
#include "rotcool/rotor.hpp"
#include "rotcool/trap.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pybind11::literals;
using namespace rotcool;

namespace {

rotor::Polarization polFromName(const std::string& name) {
    if (name == "x") return rotor::Polarization::X;
    if (name == "y") return rotor::Polarization::Y;
    if (name == "z") return rotor::Polarization::Z;
    if (name == "sigma+") return rotor::Polarization::SigmaPlus;
    if (name == "sigma-") return rotor::Polarization::SigmaMinus;
    throw std::invalid_argument("unknown polarization '" + name + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "rotational sympathetic-cooling simulator";

    // angular
    m.def("wigner3j", &angular::wigner3j, "j1"_a, "j2"_a, "j3"_a, "m1"_a, "m2"_a,
          "m3"_a);
    m.def(
        "direction_cosine",
        [](int J1, int K1, int M1, int J2, int K2, int M2,
           const std::string& space, const std::string& body) {
            const auto beta = space == "x"   ? angular::SpaceAxis::X
                              : space == "y" ? angular::SpaceAxis::Y
                                             : angular::SpaceAxis::Z;
            const auto alpha = body == "b"   ? angular::BodyAxis::B
                               : body == "c" ? angular::BodyAxis::C
                                             : angular::BodyAxis::A;
            return angular::directionCosine({J1, K1, M1}, {J2, K2, M2}, beta, alpha);
        },
        "J_bra"_a, "K_bra"_a, "M_bra"_a, "J_ket"_a, "K_ket"_a, "M_ket"_a,
        "space_axis"_a, "body_axis"_a);

    // rotor
    py::class_<rotor::MoleculeSpec>(m, "MoleculeSpec")
        .def(py::init([](std::string name, double mass_u, double A, double B,
                         double C, double mu_a, double mu_b, double mu_c) {
                 rotor::MoleculeSpec s{std::move(name), mass_u, A, B, C,
                                       mu_a, mu_b, mu_c};
                 s.validate();
                 return s;
             }),
             "name"_a, "mass_u"_a, "A_MHz"_a, "B_MHz"_a, "C_MHz"_a,
             "mu_a_D"_a = 0.0, "mu_b_D"_a = 0.0, "mu_c_D"_a = 0.0)
        .def_readonly("name", &rotor::MoleculeSpec::name)
        .def_readonly("mass_u", &rotor::MoleculeSpec::mass_u)
        .def_readonly("A_MHz", &rotor::MoleculeSpec::A_MHz)
        .def_readonly("B_MHz", &rotor::MoleculeSpec::B_MHz)
        .def_readonly("C_MHz", &rotor::MoleculeSpec::C_MHz)
        .def_readonly("mu_a_D", &rotor::MoleculeSpec::mu_a_D)
        .def_readonly("mu_b_D", &rotor::MoleculeSpec::mu_b_D)
        .def_readonly("mu_c_D", &rotor::MoleculeSpec::mu_c_D);

    py::class_<rotor::RotLevel>(m, "RotLevel")
        .def_readonly("J", &rotor::RotLevel::J)
        .def_readonly("Ka", &rotor::RotLevel::Ka)
        .def_readonly("Kc", &rotor::RotLevel::Kc)
        .def_readonly("energy_MHz", &rotor::RotLevel::energy_MHz)
        .def("__repr__", [](const rotor::RotLevel& l) {
            return std::to_string(l.J) + "_{" + std::to_string(l.Ka) + "," +
                   std::to_string(l.Kc) + "} @ " + std::to_string(l.energy_MHz) +
                   " MHz";
        });

    py::class_<rotor::Transition>(m, "Transition")
        .def_readonly("lower", &rotor::Transition::lower)
        .def_readonly("upper", &rotor::Transition::upper)
        .def_readonly("frequency_MHz", &rotor::Transition::frequency_MHz)
        .def_readonly("strength_x", &rotor::Transition::strength_x)
        .def_readonly("strength_y", &rotor::Transition::strength_y)
        .def_readonly("strength_z", &rotor::Transition::strength_z);

    py::class_<rotor::RotorModel>(m, "RotorModel")
        .def(py::init<rotor::MoleculeSpec>(), "spec"_a)
        .def("levels",
             [](const rotor::RotorModel& model, int J) {
                 return model.block(J).levels;
             },
             "J"_a)
        .def("level", &rotor::RotorModel::level, "J"_a, "Ka"_a, "Kc"_a)
        .def(
            "dipole_element",
            [](const rotor::RotorModel& model, const rotor::RotLevel& bra, int Mbra,
               const rotor::RotLevel& ket, int Mket, const std::string& pol) {
                return model.dipoleElement({bra, Mbra}, {ket, Mket},
                                           polFromName(pol));
            },
            "bra"_a, "M_bra"_a, "ket"_a, "M_ket"_a, "polarization"_a)
        .def("transition_table", &rotor::RotorModel::transitionTable, "jmax"_a);

    // trap
    py::class_<trap::IonChainSpec>(m, "IonChainSpec")
        .def(py::init([](double atomMass_u, double moleculeMass_u,
                         double axial_MHz, double radial_MHz,
                         const std::string& reference, const std::string& scaling) {
                 trap::IonChainSpec c;
                 c.particles = {{atomMass_u, 1.0, trap::ParticleKind::Atom},
                                {moleculeMass_u, 1.0, trap::ParticleKind::Molecule},
                                {atomMass_u, 1.0, trap::ParticleKind::Atom}};
                 c.axialFreq_MHz = axial_MHz;
                 c.radialFreq_MHz = radial_MHz;
                 c.refSpecies = reference == "atom" ? trap::ParticleKind::Atom
                                                    : trap::ParticleKind::Molecule;
                 c.scaling = scaling == "none"
                                 ? trap::ScalingConvention::None
                                 : trap::ScalingConvention::Pseudopotential;
                 return c;
             }),
             "atom_mass_u"_a, "molecule_mass_u"_a, "axial_freq_MHz"_a = 1.0,
             "radial_freq_MHz"_a = 8.87, "reference"_a = "molecule",
             "scaling"_a = "pseudopotential");

    py::class_<trap::NormalMode>(m, "NormalMode")
        .def_readonly("frequency_MHz", &trap::NormalMode::frequency_MHz)
        .def_readonly("label", &trap::NormalMode::label)
        .def_readonly("displacement", &trap::NormalMode::displacement)
        .def_property_readonly("axis", [](const trap::NormalMode& mo) {
            return mo.axis == trap::ModeAxis::Axial ? "axial" : "radial";
        });

    py::class_<trap::NormalModeSet>(m, "NormalModeSet")
        .def_readonly("equilibria_um", &trap::NormalModeSet::equilibria_um)
        .def_readonly("modes", &trap::NormalModeSet::modes)
        .def_readonly("molecule_index", &trap::NormalModeSet::moleculeIndex)
        .def("mode", &trap::NormalModeSet::mode, "label"_a,
             py::return_value_policy::reference_internal);

    m.def("equilibrium_positions", &trap::equilibriumPositions, "chain"_a);
    m.def("normal_modes", &trap::normalModes, "chain"_a);
    m.def("molecule_displacement", &trap::moleculeDisplacement, "modes"_a,
          "label"_a);

    // coupling
    m.def("coupling_prefactor", &coupling::prefactor, "modes"_a, "label"_a,
          "molecule_mass_u"_a);
    m.def("coupling_prefactor_from_mode", &coupling::prefactorFromMode, "b_m"_a,
          "mode_freq_MHz"_a, "molecule_mass_u"_a);
    m.def("splitting", &coupling::splitting, "total_coupling_kHz"_a, "n_p"_a);
    m.def(
        "scan_resonances",
        [](const rotor::MoleculeSpec& spec, const trap::IonChainSpec& tmpl,
           const std::vector<double>& wz, const std::vector<double>& masses,
           int jmax, double tol, int jobs) {
            const auto res =
                coupling::scanResonances(spec, tmpl, wz, masses, jmax, tol, jobs);
            py::list grid, reso;
            for (const auto& p : res.grid)
                grid.append(py::dict("mass_u"_a = p.mass_u,
                                     "radial_freq_MHz"_a = p.radialFreq_MHz,
                                     "zigzag_freq_MHz"_a = p.zigzagFreq_MHz,
                                     "prefactor_kHz_per_D"_a = p.prefactor_kHzPerD,
                                     "unstable"_a = p.unstable));
            for (const auto& r : res.resonances)
                reso.append(py::dict(
                    "mass_u"_a = r.mass_u,
                    "radial_freq_star_MHz"_a = r.radialFreqStar_MHz,
                    "transition_MHz"_a = r.transition.frequency_MHz,
                    "lower"_a = r.transition.lower, "upper"_a = r.transition.upper,
                    "prefactor_kHz_per_D"_a = r.prefactor_kHzPerD));
            return py::make_tuple(grid, reso);
        },
        "spec"_a, "chain"_a, "radial_grid_MHz"_a, "mass_grid_u"_a, "jmax"_a = 3,
        "tolerance_kHz"_a = 1.0, "jobs"_a = 1);

    // lindblad
    py::class_<lindblad::CompositeSpace>(m, "CompositeSpace")
        .def(py::init([](int atoms, int cutoff) {
                 lindblad::CompositeSpace s;
                 s.atomCount = atoms;
                 s.phononCutoff = cutoff;
                 return s;
             }),
             "atom_count"_a = 2, "phonon_cutoff"_a = 2)
        .def_readonly("atom_count", &lindblad::CompositeSpace::atomCount)
        .def_readonly("phonon_cutoff", &lindblad::CompositeSpace::phononCutoff)
        .def("dim", &lindblad::CompositeSpace::dim)
        .def("index", &lindblad::CompositeSpace::index, "atom_bits"_a, "n_p"_a,
             "j"_a);

    py::class_<lindblad::CoolingParams>(m, "CoolingParams")
        .def(py::init([](double rabi2piKHz, double gammaMHz, double eta,
                         double couplingKHz, double modeMHz, double durationMs,
                         bool secular) {
                 lindblad::CoolingParams p;
                 p.rabi_radPerSec = 2.0 * constants::pi * rabi2piKHz * 1e3;
                 p.gamma_MHz = gammaMHz;
                 p.eta = eta;
                 p.totalCoupling_kHz = couplingKHz;
                 p.modeFreq_MHz = modeMHz;
                 p.duration_ms = durationMs;
                 p.secular = secular;
                 return p;
             }),
             "rabi_2pi_kHz"_a = 200.0, "gamma_MHz"_a = 0.1, "eta"_a = 0.012,
             "coupling_kHz"_a = 8.4, "mode_freq_MHz"_a = 8.8175,
             "duration_ms"_a = 8.0, "secular"_a = true)
        .def_readwrite("gamma_MHz", &lindblad::CoolingParams::gamma_MHz)
        .def_readwrite("eta", &lindblad::CoolingParams::eta)
        .def_readwrite("coupling_kHz", &lindblad::CoolingParams::totalCoupling_kHz)
        .def_readwrite("mode_freq_MHz", &lindblad::CoolingParams::modeFreq_MHz)
        .def_readwrite("duration_ms", &lindblad::CoolingParams::duration_ms)
        .def_readwrite("secular", &lindblad::CoolingParams::secular)
        .def_readwrite("rabi_rad_per_sec", &lindblad::CoolingParams::rabi_radPerSec);

    py::class_<lindblad::Trajectory>(m, "Trajectory")
        .def("times_ms",
             [](const lindblad::Trajectory& t) {
                 std::vector<double> out;
                 for (const auto& p : t.points) out.push_back(p.t_ms);
                 return out;
             })
        .def("populations",
             [](const lindblad::Trajectory& t) {
                 std::vector<Eigen::VectorXd> out;
                 for (const auto& p : t.points) out.push_back(p.populations);
                 return out;
             })
        .def("rotor_populations", &lindblad::Trajectory::rotorPopulations)
        .def("phonon_populations", &lindblad::Trajectory::phononPopulations)
        .def("atom_excited", &lindblad::Trajectory::atomExcited, "atom"_a);

    m.def("build_interaction_hamiltonian", &lindblad::buildInteractionHamiltonian,
          "space"_a, "params"_a, "t_s"_a);
    m.def("propagate", &lindblad::propagate, "rho0"_a, "space"_a, "params"_a,
          "record_every_ms"_a = 0.0);

    m.def(
        "cool_one_step",
        [](const std::vector<Eigen::Vector2d>& pops,
           const std::vector<double>& couplings, const Eigen::VectorXd& phonon,
           const lindblad::CompositeSpace& space,
           const lindblad::CoolingParams& base) {
            const auto r = lindblad::coolOneStep(pops, couplings, phonon, space, base);
            return py::make_tuple(r.populations, r.phononDist);
        },
        "populations"_a, "couplings_kHz"_a, "phonon_dist"_a, "space"_a, "params"_a);

    // protocol
    py::class_<protocol::ProtocolPlan>(m, "ProtocolPlan")
        .def_readwrite("iterations", &protocol::ProtocolPlan::iterations)
        .def_readwrite("stage2_every", &protocol::ProtocolPlan::stage2Every);

    py::class_<protocol::ProtocolTrace>(m, "ProtocolTrace")
        .def_readonly("state_labels", &protocol::ProtocolTrace::stateLabels)
        .def_readonly("final_error", &protocol::ProtocolTrace::finalError)
        .def("errors",
             [](const protocol::ProtocolTrace& t) {
                 std::vector<double> e;
                 for (const auto& r : t.iterations) e.push_back(r.error);
                 return e;
             })
        .def("populations", [](const protocol::ProtocolTrace& t) {
            std::vector<Eigen::VectorXd> out;
            for (const auto& r : t.iterations) out.push_back(r.populations);
            return out;
        });

    m.def("make_depletion_plan", &protocol::makeDepletionPlan, "molecule"_a,
          "epsilon_z"_a = 0.0);
    m.def("run_depletion_protocol", &protocol::runDepletionProtocol, "plan"_a,
          "epsilon_z"_a = 0.0);
    m.def("make_single_state_plan", &protocol::makeSingleStatePlan, "molecule"_a,
          "epsilon_minus"_a = 0.0, "iterations"_a = 60);
    m.def("run_single_state_protocol", &protocol::runSingleStateProtocol, "plan"_a,
          "epsilon_minus"_a = 0.0);
    m.def("validate_plan", [](const protocol::ProtocolPlan& plan) {
        const auto rep = protocol::planValidator(plan);
        return py::dict("all_reachable"_a = rep.allReachable,
                        "stranded"_a = rep.strandedStates,
                        "suggestions"_a = rep.suggestions, "text"_a = rep.text());
    });

    // presets
    m.def("molecule_preset", &config::moleculePreset, "name"_a);
    m.def("molecule_preset_names", &config::moleculePresetNames);
    m.def("run_preset_names", &config::runPresetNames);
}
