#include "rotcool/coupling.hpp"

#include "rotcool/constants.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace rotcool::coupling {

namespace c = rotcool::constants;

double prefactorFromMode(double b_m, double modeFreq_MHz, double moleculeMass_u) {
    if (moleculeMass_u <= 0.0)
        throw std::invalid_argument("prefactor: molecule mass must be positive");
    const double f = modeFreq_MHz * 1e6;
    const double M = moleculeMass_u * c::atomic_mass_unit;
    const double field = std::abs(b_m) *
        std::sqrt(c::planck_h * f * f * f * M /
                  (2.0 * c::elementary_charge * c::elementary_charge));
    return field * c::debye / c::planck_h / 1e3;
}

double prefactor(const trap::NormalModeSet& modes, std::string_view modeLabel,
                 double moleculeMass_u) {
    const auto& mode = modes.mode(modeLabel);
    const double b_m = modes.moleculeIndex >= 0
                           ? mode.displacement(modes.moleculeIndex)
                           : 0.0;
    return prefactorFromMode(b_m, mode.frequency_MHz, moleculeMass_u);
}

double splitting(double totalCoupling_kHz, int n_p) {
    if (n_p < 0) throw std::invalid_argument("splitting: n_p must be >= 0");
    if (n_p == 0) return 0.0;
    return std::sqrt(double(n_p)) * totalCoupling_kHz;
}

DressedStates dressedStates(int n_p, double totalCoupling_kHz,
                            const rotor::RotState& j1, const rotor::RotState& j2) {
    if (n_p < 1) throw std::invalid_argument("dressedStates: n_p must be >= 1");
    DressedStates d;
    d.n_p = n_p;
    d.splitting_kHz = splitting(totalCoupling_kHz, n_p);
    d.energyPlus_kHz = d.splitting_kHz;
    d.energyMinus_kHz = -d.splitting_kHz;
    d.j1 = j1;
    d.j2 = j2;
    return d;
}

DipolePhononCoupling couplingFor(const rotor::RotorModel& model,
                                 const trap::NormalModeSet& modes,
                                 std::string_view modeLabel,
                                 const rotor::RotLevel& lower,
                                 const rotor::RotLevel& upper, int M) {
    const auto& mode = modes.mode(modeLabel);
    DipolePhononCoupling rec;
    rec.modeFrequency_MHz = mode.frequency_MHz;
    rec.prefactor_kHzPerD = prefactor(modes, modeLabel, model.spec().mass_u);
    rec.j1 = {lower, M};
    rec.j2 = {upper, M};
    rec.perDebye = !model.spec().hasDipole();
    // radial mode -> space-fixed z axis samples the field
    rec.matrixElement_D = std::abs(
        model.dipoleElement(rec.j2, rec.j1, rotor::Polarization::Z));
    rec.totalCoupling_kHz = rec.prefactor_kHzPerD * rec.matrixElement_D;
    rec.detuning_kHz =
        std::abs((upper.energy_MHz - lower.energy_MHz) - mode.frequency_MHz) * 1e3;
    return rec;
}

namespace {

struct ZigzagSample {
    double freq_MHz{};
    double b_m{};
    bool unstable{false};
};

ZigzagSample zigzagAt(const trap::IonChainSpec& tmpl, double mass_u, double wz) {
    trap::IonChainSpec chain = tmpl;
    chain.radialFreq_MHz = wz;
    const int mi = chain.moleculeIndex();
    if (mi >= 0) chain.particles[mi].mass_u = mass_u;
    ZigzagSample s;
    try {
        const auto modes = trap::normalModes(chain);
        const auto& zz = modes.mode("radial-zigzag");
        s.freq_MHz = zz.frequency_MHz;
        s.b_m = mi >= 0 ? zz.displacement(mi) : 0.0;
    } catch (const trap::InstabilityError&) {
        s.unstable = true;
    } catch (const std::domain_error&) {
        // no alternating radial mode at this point
        s.unstable = true;
    }
    return s;
}

} // namespace

ScanResult scanResonances(const std::optional<rotor::MoleculeSpec>& spec,
                          const trap::IonChainSpec& chainTemplate,
                          const std::vector<double>& radialFreqGrid_MHz,
                          const std::vector<double>& massGrid_u,
                          int Jmax, double tolerance_kHz, int jobs) {
    if (radialFreqGrid_MHz.empty() || massGrid_u.empty())
        throw std::invalid_argument("scanResonances: grids must be nonempty");
    if (chainTemplate.moleculeIndex() < 0)
        throw std::invalid_argument("scanResonances: chain template needs a molecule slot");

    ScanResult result;
    result.grid.resize(massGrid_u.size() * radialFreqGrid_MHz.size());

    const int nthreads = std::max(1, jobs);
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const double mass = massGrid_u[idx / radialFreqGrid_MHz.size()];
            const double wz = radialFreqGrid_MHz[idx % radialFreqGrid_MHz.size()];
            const auto s = zigzagAt(chainTemplate, mass, wz);
            ScanPoint& p = result.grid[idx];
            p.mass_u = mass;
            p.radialFreq_MHz = wz;
            p.unstable = s.unstable;
            if (!s.unstable) {
                p.zigzagFreq_MHz = s.freq_MHz;
                p.prefactor_kHzPerD = prefactorFromMode(s.b_m, s.freq_MHz, mass);
            }
        }
    };
    if (nthreads == 1) {
        worker(0, result.grid.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (result.grid.size() + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const std::size_t b = t * chunk;
            const std::size_t e = std::min(result.grid.size(), b + chunk);
            if (b < e) pool.emplace_back(worker, b, e);
        }
        for (auto& th : pool) th.join();
    }

    // resonance search along omega_z at the molecule's own mass
    if (spec) {
        spec->validate();
        rotor::RotorModel model(*spec);
        const auto transitions = model.transitionTable(Jmax);
        for (const auto& tr : transitions) {
            for (std::size_t i = 0; i + 1 < radialFreqGrid_MHz.size(); ++i) {
                double lo = radialFreqGrid_MHz[i], hi = radialFreqGrid_MHz[i + 1];
                auto flo = zigzagAt(chainTemplate, spec->mass_u, lo);
                auto fhi = zigzagAt(chainTemplate, spec->mass_u, hi);
                if (flo.unstable || fhi.unstable) continue;
                const double dlo = flo.freq_MHz - tr.frequency_MHz;
                const double dhi = fhi.freq_MHz - tr.frequency_MHz;
                if (dlo == 0.0 && dhi == 0.0) continue;
                if (dlo * dhi > 0.0) continue;
                // bisect to 1 Hz on the quoted trap frequency
                double a = lo, b = hi, da = dlo;
                for (int it = 0; it < 80 && (b - a) > 1e-6; ++it) {
                    const double mid = 0.5 * (a + b);
                    const auto fm = zigzagAt(chainTemplate, spec->mass_u, mid);
                    if (fm.unstable) break;
                    const double dm = fm.freq_MHz - tr.frequency_MHz;
                    if (da * dm <= 0.0) b = mid;
                    else { a = mid; da = dm; }
                }
                const double wzStar = 0.5 * (a + b);
                const auto fs = zigzagAt(chainTemplate, spec->mass_u, wzStar);
                if (fs.unstable) continue;
                const double residual_kHz =
                    std::abs(fs.freq_MHz - tr.frequency_MHz) * 1e3;
                if (residual_kHz > tolerance_kHz) continue;
                ResonanceRecord rec;
                rec.mass_u = spec->mass_u;
                rec.radialFreqStar_MHz = wzStar;
                rec.modeFreq_MHz = fs.freq_MHz;
                rec.transition = tr;
                rec.prefactor_kHzPerD =
                    prefactorFromMode(fs.b_m, fs.freq_MHz, spec->mass_u);
                result.resonances.push_back(rec);
            }
        }
        std::sort(result.resonances.begin(), result.resonances.end(),
                  [](const ResonanceRecord& x, const ResonanceRecord& y) {
                      return x.radialFreqStar_MHz < y.radialFreqStar_MHz;
                  });
    }
    return result;
}

} // namespace rotcool::coupling
