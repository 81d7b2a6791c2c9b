#include "rotcool/trap.hpp"

#include "rotcool/constants.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace rotcool::trap {

namespace {
constexpr double twoPi = 2.0 * constants::pi;
}

void IonChainSpec::validate() const {
    if (particles.size() < 2)
        throw std::invalid_argument("IonChainSpec: need at least 2 particles");
    for (const auto& p : particles) {
        if (p.mass_u <= 0.0) throw std::invalid_argument("IonChainSpec: mass must be positive");
        if (p.charge_e <= 0.0) throw std::invalid_argument("IonChainSpec: charges must be positive");
    }
    if (axialFreq_MHz <= 0.0 || radialFreq_MHz <= 0.0)
        throw std::invalid_argument("IonChainSpec: trap frequencies must be positive");
}

int IonChainSpec::moleculeIndex() const {
    for (std::size_t i = 0; i < particles.size(); ++i)
        if (particles[i].kind == ParticleKind::Molecule) return static_cast<int>(i);
    return -1;
}

int IonChainSpec::referenceIndex() const {
    for (std::size_t i = 0; i < particles.size(); ++i)
        if (particles[i].kind == refSpecies) return static_cast<int>(i);
    return 0;
}

std::vector<double> IonChainSpec::axialFreqs() const {
    std::vector<double> f(particles.size(), axialFreq_MHz);
    if (scaling == ScalingConvention::Pseudopotential) {
        const double mref = particles[referenceIndex()].mass_u;
        for (std::size_t i = 0; i < particles.size(); ++i)
            f[i] = axialFreq_MHz * std::sqrt(mref / particles[i].mass_u);
    }
    return f;
}

std::vector<double> IonChainSpec::radialFreqs() const {
    std::vector<double> f(particles.size(), radialFreq_MHz);
    if (scaling == ScalingConvention::Pseudopotential) {
        const double mref = particles[referenceIndex()].mass_u;
        for (std::size_t i = 0; i < particles.size(); ++i)
            f[i] = radialFreq_MHz * (mref / particles[i].mass_u);
    }
    return f;
}

const NormalMode& NormalModeSet::mode(std::string_view label) const {
    for (const auto& m : modes)
        if (m.label == label) return m;
    throw std::domain_error("NormalModeSet: no mode labeled '" + std::string(label) + "'");
}

namespace {

// axial spring constants m_i w_i^2 in SI
std::vector<double> axialSprings(const IonChainSpec& chain) {
    const auto f = chain.axialFreqs();
    std::vector<double> k(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = twoPi * f[i] * 1e6;
        k[i] = chain.particles[i].mass_u * constants::atomic_mass_unit * w * w;
    }
    return k;
}

std::vector<double> equilibriumSI(const IonChainSpec& chain) {
    chain.validate();
    const int n = static_cast<int>(chain.particles.size());
    const auto kax = axialSprings(chain);

    // length scale from the reference particle, used for the seed and the
    // convergence criterion
    const double kref = kax[chain.referenceIndex()];
    const double ell = std::cbrt(constants::coulomb_e2 / kref);

    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i)
        x(i) = (i - 0.5 * (n - 1)) * 1.5 * ell;

    const double forceScale = kref * ell;
    Eigen::VectorXd grad(n);
    Eigen::MatrixXd hess(n, n);
    for (int iter = 0; iter < 200; ++iter) {
        grad.setZero();
        hess.setZero();
        for (int i = 0; i < n; ++i) {
            grad(i) = kax[i] * x(i);
            hess(i, i) = kax[i];
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const double qq = chain.particles[i].charge_e * chain.particles[j].charge_e;
                const double d = x(i) - x(j);
                const double c = constants::coulomb_e2 * qq;
                grad(i) -= c / (d * d) * (d > 0 ? 1.0 : -1.0);
                hess(i, i) += 2.0 * c / std::pow(std::abs(d), 3);
                hess(i, j) -= 2.0 * c / std::pow(std::abs(d), 3);
            }
        }
        const double res = grad.norm() / forceScale;
        if (res < 1e-13) return {x.data(), x.data() + n};
        Eigen::VectorXd step = hess.ldlt().solve(grad);
        // keep the ordering; damp if a step would swap neighbors
        double alpha = 1.0;
        for (int cut = 0; cut < 60; ++cut) {
            Eigen::VectorXd trial = x - alpha * step;
            bool ordered = true;
            for (int i = 0; i + 1 < n; ++i)
                if (trial(i) >= trial(i + 1)) { ordered = false; break; }
            if (ordered) { x = trial; break; }
            alpha *= 0.5;
        }
    }
    std::ostringstream os;
    os << "equilibriumPositions: Newton iteration did not converge, residual "
       << grad.norm() / forceScale;
    throw std::runtime_error(os.str());
}

std::string axialLabel(const Eigen::VectorXd& b, int idx, int n) {
    bool sameSign = true;
    for (int i = 1; i < n; ++i)
        if (b(i) * b(0) <= 0.0) { sameSign = false; break; }
    if (sameSign) return "axial-com";
    if (idx == 1 && n >= 2) return "axial-stretch";
    return "axial-" + std::to_string(idx);
}

std::string radialLabel(const Eigen::VectorXd& b, int idx, int n) {
    bool alternating = true, sameSign = true;
    for (int i = 0; i + 1 < n; ++i) {
        if (b(i) * b(i + 1) >= 0.0) alternating = false;
        if (b(i) * b(0) <= 0.0 || b(i + 1) * b(0) <= 0.0) sameSign = false;
    }
    if (alternating) return "radial-zigzag";
    if (sameSign) return "radial-com";
    return "radial-" + std::to_string(idx);
}

} // namespace

std::vector<double> equilibriumPositions(const IonChainSpec& chain) {
    auto xs = equilibriumSI(chain);
    for (auto& x : xs) x *= 1e6;
    return xs;
}

NormalModeSet normalModes(const IonChainSpec& chain) {
    const auto xsi = equilibriumSI(chain);
    const int n = static_cast<int>(chain.particles.size());

    Eigen::VectorXd sqrtm(n);
    for (int i = 0; i < n; ++i)
        sqrtm(i) = std::sqrt(chain.particles[i].mass_u * constants::atomic_mass_unit);

    // Coulomb curvature coefficients c_ij = kq qi qj / |x_i - x_j|^3
    Eigen::MatrixXd cmat = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double qq = chain.particles[i].charge_e * chain.particles[j].charge_e;
            cmat(i, j) = constants::coulomb_e2 * qq / std::pow(std::abs(xsi[i] - xsi[j]), 3);
        }

    const auto kax = axialSprings(chain);
    const auto frad = chain.radialFreqs();

    Eigen::MatrixXd Hax = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd Hrad = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double wr = twoPi * frad[i] * 1e6;
        Hax(i, i) = kax[i];
        Hrad(i, i) = chain.particles[i].mass_u * constants::atomic_mass_unit * wr * wr;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            Hax(i, i) += 2.0 * cmat(i, j);
            Hax(i, j) -= 2.0 * cmat(i, j);
            Hrad(i, i) -= cmat(i, j);
            Hrad(i, j) += cmat(i, j);
        }
    }

    NormalModeSet result;
    result.moleculeIndex = chain.moleculeIndex();
    result.equilibria_um.resize(n);
    for (int i = 0; i < n; ++i) result.equilibria_um[i] = xsi[i] * 1e6;

    auto solveAxis = [&](const Eigen::MatrixXd& H, ModeAxis axis) {
        Eigen::MatrixXd K = H.array() /
            (sqrtm * sqrtm.transpose()).array();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
        for (int k = 0; k < n; ++k) {
            const double lam = es.eigenvalues()(k);
            Eigen::VectorXd b = es.eigenvectors().col(k);
            int imax = 0;
            b.cwiseAbs().maxCoeff(&imax);
            if (b(imax) < 0.0) b = -b;
            NormalMode mode;
            mode.axis = axis;
            mode.displacement = b;
            mode.label = (axis == ModeAxis::Axial) ? axialLabel(b, k, n)
                                                   : radialLabel(b, k, n);
            if (lam <= 0.0)
                throw InstabilityError("normalModes: mode '" + mode.label +
                                       "' has non-positive squared frequency "
                                       "(chain structurally unstable)");
            mode.frequency_MHz = std::sqrt(lam) / twoPi / 1e6;
            result.modes.push_back(std::move(mode));
        }
    };
    solveAxis(Hax, ModeAxis::Axial);
    solveAxis(Hrad, ModeAxis::Radial);
    return result;
}

double moleculeDisplacement(const NormalModeSet& modes, std::string_view label) {
    if (modes.moleculeIndex < 0)
        throw std::domain_error("moleculeDisplacement: chain has no molecule");
    return modes.mode(label).displacement(modes.moleculeIndex);
}

} // namespace rotcool::trap
