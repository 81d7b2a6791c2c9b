#include "rotcool/microwave.hpp"

#include "rotcool/ode.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace rotcool::microwave {

namespace {

using cd = std::complex<double>;
constexpr double twoPi = 2.0 * constants::pi;

double envelopeShape(const PulseSpec& p, double frac) {
    switch (p.envelope) {
        case Envelope::FlatTop: {
            const double r = p.rampFraction;
            if (r <= 0.0) return 1.0;
            if (frac < r) {
                const double s = std::sin(0.5 * constants::pi * frac / r);
                return s * s;
            }
            if (frac > 1.0 - r) {
                const double s = std::sin(0.5 * constants::pi * (1.0 - frac) / r);
                return s * s;
            }
            return 1.0;
        }
        case Envelope::Gaussian: {
            const double sigma = p.gaussianSigmaFraction;
            const double x = (frac - 0.5) / sigma;
            return std::exp(-0.5 * x * x);
        }
    }
    return 1.0;
}

// integral of the unit-duration envelope shape
double envelopeShapeIntegral(const PulseSpec& p) {
    switch (p.envelope) {
        case Envelope::FlatTop:
            return 1.0 - p.rampFraction; // two sin^2 ramps average to 1/2
        case Envelope::Gaussian: {
            const double s = p.gaussianSigmaFraction;
            return s * std::sqrt(twoPi) * std::erf(0.5 / (s * std::sqrt(2.0)));
        }
    }
    return 1.0;
}

} // namespace

void PulseSpec::validatePolarization() const {
    const double norm = polarization.norm();
    if (norm < 1e-12)
        throw std::invalid_argument("PulseSpec: zero polarization vector");
    if (std::abs(norm - 1.0) > 1e-12)
        throw std::invalid_argument("PulseSpec: polarization not normalized");
}

RotorSubspace::RotorSubspace(const rotor::RotorModel& model,
                             const std::vector<rotor::RotLevel>& levels) {
    for (const auto& lv : levels)
        for (int M = -lv.J; M <= lv.J; ++M) states_.push_back({lv, M});

    const int n = dim();
    energies_.resize(n);
    for (int i = 0; i < n; ++i) energies_(i) = states_[i].level.energy_MHz;

    ex_ = Eigen::MatrixXcd::Zero(n, n);
    ey_ = Eigen::MatrixXcd::Zero(n, n);
    ez_ = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (std::abs(states_[i].level.J - states_[j].level.J) > 1) continue;
            if (std::abs(states_[i].M - states_[j].M) > 1) continue;
            ex_(i, j) = model.dipoleElement(states_[i], states_[j],
                                            rotor::Polarization::X);
            ey_(i, j) = model.dipoleElement(states_[i], states_[j],
                                            rotor::Polarization::Y);
            ez_(i, j) = model.dipoleElement(states_[i], states_[j],
                                            rotor::Polarization::Z);
        }
}

int RotorSubspace::find(int J, int Ka, int Kc, int M) const {
    for (int i = 0; i < dim(); ++i) {
        const auto& s = states_[i];
        if (s.level.J == J && s.level.Ka == Ka && s.level.Kc == Kc && s.M == M)
            return i;
    }
    return -1;
}

int RotorSubspace::require(int J, int Ka, int Kc, int M) const {
    const int i = find(J, Ka, Kc, M);
    if (i < 0)
        throw std::domain_error("RotorSubspace: state " + std::to_string(J) + "_{" +
                                std::to_string(Ka) + "," + std::to_string(Kc) +
                                "}, M=" + std::to_string(M) + " not in subspace");
    return i;
}

Eigen::MatrixXcd RotorSubspace::elements(const Eigen::Vector3cd& eps) const {
    return eps(0) * ex_ + eps(1) * ey_ + eps(2) * ez_;
}

namespace {

// One retained RWA coupling between a pair of states.
struct Coupling {
    int hi, lo;      // row > col by energy pairing choice
    cd halfRabi;     // Omega_ij/2 at unit envelope (rad/us), complex
    double detuning; // rad/us residual rotation
    int tone;
};

struct RwaSystem {
    std::vector<Coupling> couplings;
    std::vector<double> durations_us;
    double duration_us{};
};

RwaSystem buildRwa(const RotorSubspace& sub, const std::vector<PulseSpec>& tones) {
    if (tones.empty()) throw std::invalid_argument("pulse list is empty");
    RwaSystem sys;
    const int n = sub.dim();
    for (std::size_t k = 0; k < tones.size(); ++k) {
        const auto& p = tones[k];
        p.validatePolarization();
        if (p.duration_us <= 0.0)
            throw std::invalid_argument("PulseSpec: duration must be positive");
        if (p.referenceBra < 0 || p.referenceKet < 0 ||
            p.referenceBra >= n || p.referenceKet >= n)
            throw std::invalid_argument("PulseSpec: reference transition not set");
        const Eigen::MatrixXcd d = sub.elements(p.polarization);
        const double dref = std::abs(d(p.referenceBra, p.referenceKet));
        if (dref < 1e-14)
            throw DesignError("pulse reference transition has vanishing element");

        const double wc = twoPi * p.carrier_MHz; // rad/us
        const double rabiRef = twoPi * p.peakRabi_kHz * 1e-3; // rad/us
        if (rabiRef > 0.2 * wc)
            std::cerr << "[microwave] warning: peak Rabi is not small against the "
                         "carrier; RWA questionable\n";

        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < i; ++j) {
                // pair (i,j); keep the slow pairing only
                if (d(i, j) == cd{}) continue;
                const double wij = twoPi * (sub.energies_MHz()(i) -
                                            sub.energies_MHz()(j));
                const double res1 = wij - wc;  // |i> above |j| pairing
                const double res2 = wij + wc;
                const double cut = 0.5 * wc;
                double res;
                if (std::abs(res1) < cut && std::abs(res1) <= std::abs(res2))
                    res = res1;
                else if (std::abs(res2) < cut)
                    res = res2;
                else
                    continue;
                Coupling cpl;
                cpl.hi = i;
                cpl.lo = j;
                cpl.halfRabi = 0.5 * rabiRef * d(i, j) / dref;
                cpl.detuning = res;
                cpl.tone = static_cast<int>(k);
                sys.couplings.push_back(cpl);
            }
        }
        sys.durations_us.push_back(p.duration_us);
        sys.duration_us = std::max(sys.duration_us, p.duration_us);
    }
    return sys;
}

} // namespace

Eigen::MatrixXcd pulseUnitary(const RotorSubspace& sub,
                              const std::vector<PulseSpec>& tones) {
    const auto sys = buildRwa(sub, tones);
    const int n = sub.dim();

    Eigen::MatrixXcd H(n, n);
    auto rhs = [&](double t, const Eigen::VectorXcd& u, Eigen::VectorXcd& du) {
        H.setZero();
        for (const auto& cpl : sys.couplings) {
            const auto& p = tones[cpl.tone];
            if (t > p.duration_us) continue;
            const double env = envelopeShape(p, t / p.duration_us);
            const cd hij = cpl.halfRabi * env * std::exp(cd(0, cpl.detuning * t));
            H(cpl.hi, cpl.lo) += hij;
            H(cpl.lo, cpl.hi) += std::conj(hij);
        }
        Eigen::Map<const Eigen::MatrixXcd> U(u.data(), n, n);
        Eigen::Map<Eigen::MatrixXcd> dU(du.data(), n, n);
        dU.noalias() = cd(0, -1) * (H * U);
    };

    ode::Options opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-12;
    Eigen::VectorXcd y(n * n);
    Eigen::Map<Eigen::MatrixXcd>(y.data(), n, n) =
        Eigen::MatrixXcd::Identity(n, n);
    ode::Dopri5(opts).integrate(rhs, y, 0.0, sys.duration_us);

    Eigen::MatrixXcd U = Eigen::Map<Eigen::MatrixXcd>(y.data(), n, n);
    const double unit = (U.adjoint() * U -
                         Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (unit > 1e-9)
        throw std::runtime_error("pulseUnitary: unitarity defect " +
                                 std::to_string(unit));
    return U;
}

Eigen::MatrixXcd propagatePulse(const Eigen::MatrixXcd& rho,
                                const RotorSubspace& sub,
                                const std::vector<PulseSpec>& tones) {
    const Eigen::MatrixXcd U = pulseUnitary(sub, tones);
    return U * rho * U.adjoint();
}

Eigen::MatrixXcd propagatePulse(const Eigen::MatrixXcd& rho,
                                const RotorSubspace& sub, const PulseSpec& pulse) {
    return propagatePulse(rho, sub, std::vector<PulseSpec>{pulse});
}

Eigen::VectorXd propagatePulse(const Eigen::VectorXd& populations,
                               const RotorSubspace& sub,
                               const std::vector<PulseSpec>& tones) {
    Eigen::MatrixXcd rho = populations.cast<cd>().asDiagonal();
    return propagatePulse(rho, sub, tones).diagonal().real();
}

PulseSpec designPiPulse(const RotorSubspace& sub, int bra, int ket,
                        const Eigen::Vector3cd& polarization,
                        double peakRabi_kHz, double area_rad) {
    PulseSpec p;
    p.polarization = polarization.normalized();
    p.peakRabi_kHz = peakRabi_kHz;
    p.referenceBra = bra;
    p.referenceKet = ket;

    const Eigen::MatrixXcd d = sub.elements(p.polarization);
    if (std::abs(d(bra, ket)) < 1e-14) {
        const auto& sb = sub.states()[bra];
        const auto& sk = sub.states()[ket];
        throw DesignError("designPiPulse: vanishing matrix element <" +
                          std::to_string(sb.level.J) + "_{" + std::to_string(sb.level.Ka) +
                          "," + std::to_string(sb.level.Kc) + "},M=" + std::to_string(sb.M) +
                          "| mu.eps |" + std::to_string(sk.level.J) + "_{" +
                          std::to_string(sk.level.Ka) + "," + std::to_string(sk.level.Kc) +
                          "},M=" + std::to_string(sk.M) + ">");
    }
    p.carrier_MHz = std::abs(sub.energies_MHz()(bra) - sub.energies_MHz()(ket));
    if (p.carrier_MHz <= 0.0)
        throw DesignError("designPiPulse: degenerate transition has no carrier");

    const double rabi = twoPi * peakRabi_kHz * 1e-3; // rad/us on the reference
    const double teff = area_rad / rabi;             // us of unit envelope
    p.duration_us = teff / envelopeShapeIntegral(p);
    p.area_rad = area_rad;
    return p;
}

Eigen::Vector3cd imperfectPolarization(const Eigen::Vector3cd& base, double eps,
                                       const Eigen::Vector3cd& admixed,
                                       MixingConvention convention) {
    if (eps < 0.0 || eps > 1.0)
        throw std::invalid_argument("imperfectPolarization: eps must be in [0,1]");
    const double wb = convention == MixingConvention::Intensity
                          ? std::sqrt(1.0 - eps)
                          : 1.0 - eps;
    const double wa = convention == MixingConvention::Intensity ? std::sqrt(eps) : eps;
    Eigen::Vector3cd v = wb * base.normalized() + wa * admixed.normalized();
    const double n = v.norm();
    if (n < 1e-12)
        throw std::invalid_argument("imperfectPolarization: degenerate mixture");
    return v / n;
}

} // namespace rotcool::microwave
