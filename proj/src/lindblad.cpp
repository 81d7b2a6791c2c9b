#include "rotcool/lindblad.hpp"

#include "rotcool/constants.hpp"

#include <cmath>
#include <iostream>

namespace rotcool::lindblad {

namespace {

using cd = std::complex<double>;
constexpr double twoPi = 2.0 * constants::pi;

struct Entry {
    int row, col;
    cd value;
};

// One structure term: H(t) = sum_k [ amp_k e^{i freq_k t} A_k + h.c. ]
struct Term {
    cd amp;
    double freq; // rad/s
    std::vector<Entry> entries;
};

} // namespace

double CoolingParams::delta_radPerSec() const {
    if (redSidebandDefault && detuning_radPerSec == 0.0)
        return -twoPi * modeFreq_MHz * 1e6;
    return detuning_radPerSec;
}

namespace {

struct Generator {
    CompositeSpace space;
    std::vector<Term> terms;
    struct Channel {
        double rate;                            // prefactor on L rho L^dagger
        std::vector<std::pair<int, int>> flips; // (from,to) basis map of sigma-
    };
    std::vector<Channel> channels;
    Eigen::VectorXd decayDiag; // diag of sum_i L_i^dagger L_i (independent case)
    bool collective{false};
    Eigen::MatrixXcd L, LdagL;  // collective channel, explicit
};

Generator makeGenerator(const CompositeSpace& space, const CoolingParams& p) {
    p.validate();
    if (p.eta > 0.3)
        std::cerr << "[lindblad] warning: Lamb-Dicke parameter eta=" << p.eta
                  << " outside the Lamb-Dicke regime\n";

    Generator g;
    g.space = space;
    const int n = space.dim();
    const double wp = twoPi * p.modeFreq_MHz * 1e6;
    const double delta = p.delta_radPerSec();
    const double etil = twoPi * p.totalCoupling_kHz * 1e3;
    const double drot = twoPi * p.rotorDetuning_kHz * 1e3;

    const double bi[2] = {p.b1, p.b2};
    const double phii[2] = {p.phi1, p.phi2};

    for (int atom = 0; atom < space.atomCount && atom < 2; ++atom) {
        std::vector<Entry> carrier, red, blue;
        for (int idx = 0; idx < n; ++idx) {
            const int bits = space.atomBits(idx);
            if (bits & (1 << atom)) continue;
            const int np = space.phonon(idx);
            const int j = space.rotor(idx);
            const int upBits = bits | (1 << atom);
            carrier.push_back({space.index(upBits, np, j), idx, cd(1, 0)});
            if (np > 0) // sigma+ a
                red.push_back({space.index(upBits, np - 1, j), idx,
                               cd(std::sqrt(double(np)), 0)});
            if (np < space.phononCutoff) // sigma+ a^dagger
                blue.push_back({space.index(upBits, np + 1, j), idx,
                                cd(std::sqrt(double(np + 1)), 0)});
        }
        const cd half = cd(0.5 * p.rabi_radPerSec, 0) * std::exp(cd(0, phii[atom]));
        const cd sb = half * cd(0, p.eta * bi[atom]); // i eta b_i
        g.terms.push_back({half, delta, std::move(carrier)});
        g.terms.push_back({sb, delta + wp, std::move(red)});
        g.terms.push_back({sb, delta - wp, std::move(blue)});
    }

    // H_dp,I = Etilde ( a |j2><j1| + a^dagger |j1><j2| )
    {
        std::vector<Entry> dp;
        for (int idx = 0; idx < n; ++idx) {
            if (space.rotor(idx) != 0) continue;
            const int np = space.phonon(idx);
            if (np > 0)
                dp.push_back({space.index(space.atomBits(idx), np - 1, 1), idx,
                              cd(std::sqrt(double(np)), 0)});
        }
        g.terms.push_back({cd(etil, 0), drot, std::move(dp)});
    }

    // secular mode: drop everything oscillating at ~omega_p or faster
    if (p.secular) {
        const double cutoff = 0.5 * wp;
        std::vector<Term> kept;
        for (auto& t : g.terms)
            if (std::abs(t.freq) < cutoff) kept.push_back(std::move(t));
        g.terms = std::move(kept);
    }

    const double gamma = p.gamma_MHz * 1e6;
    g.decayDiag = Eigen::VectorXd::Zero(n);
    auto atomFlips = [&](int atom) {
        std::vector<std::pair<int, int>> flips;
        for (int idx = 0; idx < n; ++idx) {
            const int bits = space.atomBits(idx);
            if (!(bits & (1 << atom))) continue;
            flips.emplace_back(idx, space.index(bits & ~(1 << atom),
                                                space.phonon(idx),
                                                space.rotor(idx)));
        }
        return flips;
    };
    switch (p.jump) {
        case JumpConvention::IndependentRate:
            for (int atom = 0; atom < space.atomCount && atom < 2; ++atom)
                g.channels.push_back({gamma, atomFlips(atom)});
            for (const auto& ch : g.channels)
                for (const auto& [from, to] : ch.flips) {
                    (void)to;
                    g.decayDiag(from) += ch.rate;
                }
            break;
        case JumpConvention::CollectiveRate:
        case JumpConvention::CollectiveAmplitude: {
            g.collective = true;
            const double rate = (p.jump == JumpConvention::CollectiveRate)
                                    ? gamma
                                    : gamma * gamma;
            g.L = Eigen::MatrixXcd::Zero(n, n);
            for (int atom = 0; atom < space.atomCount && atom < 2; ++atom)
                for (const auto& [from, to] : atomFlips(atom))
                    g.L(to, from) += std::sqrt(rate);
            g.LdagL = g.L.adjoint() * g.L;
            break;
        }
    }
    return g;
}

class MasterEquation {
public:
    MasterEquation(const CompositeSpace& space, const CoolingParams& p)
        : gen_(makeGenerator(space, p)), n_(space.dim()),
          rhoT_(n_, n_), hRhoT_(n_, n_), rhoH_(n_, n_) {}

    int dim() const { return n_; }
    const Generator& generator() const { return gen_; }

    // drho = -i[H(t),rho] + D(rho), applied term by term through the sparse
    // structure.  H rho is accumulated transposed and rho H directly so that
    // every inner update is a contiguous column axpy.
    void operator()(double t, const Eigen::VectorXcd& rhoVec,
                    Eigen::VectorXcd& out) const {
        Eigen::Map<const Eigen::MatrixXcd> rho(rhoVec.data(), n_, n_);
        Eigen::Map<Eigen::MatrixXcd> drho(out.data(), n_, n_);

        rhoT_ = rho.transpose();
        hRhoT_.setZero();
        rhoH_.setZero();
        const cd* rhoP = rho.data();
        const cd* rhoTP = rhoT_.data();
        cd* hP = hRhoT_.data();
        cd* rhP = rhoH_.data();
        auto axpy = [n = n_](cd v, const cd* x, cd* y) {
            for (int i = 0; i < n; ++i) y[i] += v * x[i];
        };
        for (const auto& term : gen_.terms) {
            const cd c = term.amp * std::exp(cd(0, term.freq * t));
            for (const auto& e : term.entries) {
                const cd v = c * e.value;
                const cd vc = std::conj(v);
                // A = v |row><col| plus the Hermitian conjugate
                axpy(v, rhoTP + n_ * e.col, hP + n_ * e.row);  // (A rho)^T
                axpy(vc, rhoTP + n_ * e.row, hP + n_ * e.col); // (A^+ rho)^T
                axpy(v, rhoP + n_ * e.row, rhP + n_ * e.col);  // rho A
                axpy(vc, rhoP + n_ * e.col, rhP + n_ * e.row); // rho A^+
            }
        }

        if (!gen_.collective) {
            const cd mi(0, -1);
            for (int c = 0; c < n_; ++c) {
                const double dc = gen_.decayDiag(c);
                for (int r = 0; r < n_; ++r)
                    drho(r, c) = mi * (hRhoT_(c, r) - rhoH_(r, c)) -
                                 0.5 * (gen_.decayDiag(r) + dc) * rho(r, c);
            }
            for (const auto& ch : gen_.channels)
                for (const auto& [fr, tr] : ch.flips)
                    for (const auto& [fc, tc] : ch.flips)
                        drho(tr, tc) += ch.rate * rho(fr, fc);
        } else {
            drho.noalias() = cd(0, -1) * (hRhoT_.transpose() - rhoH_);
            drho.noalias() += gen_.L * rho * gen_.L.adjoint();
            drho.noalias() -= 0.5 * (gen_.LdagL * rho + rho * gen_.LdagL);
        }
    }

private:
    Generator gen_;
    int n_;
    mutable Eigen::MatrixXcd rhoT_, hRhoT_, rhoH_;
};

void checkState(const Eigen::MatrixXcd& rho, double t_ms) {
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10)
        throw PropagationError(t_ms, "density matrix lost hermiticity (" +
                                         std::to_string(herm) + ") at t=" +
                                         std::to_string(t_ms) + " ms");
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-8)
        throw PropagationError(t_ms, "trace drifted to " + std::to_string(tr) +
                                         " at t=" + std::to_string(t_ms) + " ms");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw PropagationError(
            t_ms, "positivity violated (min eig " +
                      std::to_string(es.eigenvalues().minCoeff()) + ") at t=" +
                      std::to_string(t_ms) + " ms");
}

ode::Options integratorOptions(const CoolingParams& params) {
    ode::Options opts;
    opts.rtol = params.rtol;
    opts.atol = params.atol;
    if (!params.secular && params.modeFreq_MHz > 0.0)
        opts.maxStep = 1.0 / (20.0 * params.modeFreq_MHz * 1e6);
    return opts;
}

// integration core without state-validity checks (used for linear-map bases)
Eigen::MatrixXcd propagateRaw(const Eigen::MatrixXcd& rho0,
                              const CompositeSpace& space,
                              const CoolingParams& params) {
    const int n = space.dim();
    MasterEquation eq(space, params);
    Eigen::VectorXcd y(n * n);
    Eigen::Map<Eigen::MatrixXcd>(y.data(), n, n) = rho0;
    const double T = params.duration_ms * 1e-3;
    if (T > 0.0) {
        ode::Dopri5 integrator(integratorOptions(params));
        try {
            integrator.integrate(
                [&eq](double t, const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) {
                    eq(t, v, dv);
                },
                y, 0.0, T);
        } catch (const ode::StepSizeUnderflow& e) {
            throw PropagationError(e.t * 1e3, e.what());
        }
    }
    return Eigen::Map<Eigen::MatrixXcd>(y.data(), n, n);
}

} // namespace

Eigen::MatrixXcd buildInteractionHamiltonian(const CompositeSpace& space,
                                             const CoolingParams& params,
                                             double t_s) {
    const auto gen = makeGenerator(space, params);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(space.dim(), space.dim());
    for (const auto& term : gen.terms) {
        const cd c = term.amp * std::exp(cd(0, term.freq * t_s));
        for (const auto& e : term.entries) {
            H(e.row, e.col) += c * e.value;
            H(e.col, e.row) += std::conj(c * e.value);
        }
    }
    return H;
}

Trajectory propagate(const Eigen::MatrixXcd& rho0, const CompositeSpace& space,
                     const CoolingParams& params, double recordEvery_ms) {
    const int n = space.dim();
    if (rho0.rows() != n || rho0.cols() != n)
        throw std::invalid_argument("propagate: rho0 does not match the space");

    MasterEquation eq(space, params);
    const auto opts = integratorOptions(params);

    Trajectory traj;
    traj.space = space;
    const double T = params.duration_ms * 1e-3;

    auto record = [&](double t_s, const Eigen::MatrixXcd& rho) {
        TrajectoryPoint pt;
        pt.t_ms = t_s * 1e3;
        pt.populations = rho.diagonal().real();
        pt.trace = rho.trace().real();
        pt.purity = (rho * rho).trace().real();
        checkState(rho, pt.t_ms);
        traj.points.push_back(std::move(pt));
    };

    Eigen::VectorXcd y(n * n);
    Eigen::Map<Eigen::MatrixXcd>(y.data(), n, n) = rho0;
    record(0.0, rho0);
    if (T == 0.0) return traj;

    const double dtRec = recordEvery_ms > 0.0 ? recordEvery_ms * 1e-3 : T;
    ode::Dopri5 integrator(opts);
    double tPrev = 0.0;
    try {
        while (tPrev < T) {
            const double tNext = std::min(T, tPrev + dtRec);
            integrator.integrate(
                [&eq](double t, const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) {
                    eq(t, v, dv);
                },
                y, tPrev, tNext);
            record(tNext, Eigen::Map<Eigen::MatrixXcd>(y.data(), n, n));
            tPrev = tNext;
        }
    } catch (const ode::StepSizeUnderflow& e) {
        throw PropagationError(e.t * 1e3, e.what());
    }
    return traj;
}

Eigen::MatrixXcd propagateDense(const Eigen::MatrixXcd& rho0,
                                const CompositeSpace& space,
                                const CoolingParams& params) {
    const int n = space.dim();
    if (rho0.rows() != n || rho0.cols() != n)
        throw std::invalid_argument("propagateDense: rho0 does not match the space");
    checkState(rho0, 0.0);
    Eigen::MatrixXcd rho = propagateRaw(rho0, space, params);
    checkState(rho, params.duration_ms);
    return rho;
}

Eigen::Vector2d Trajectory::rotorPopulations() const {
    Eigen::Vector2d p = Eigen::Vector2d::Zero();
    const auto& last = points.back();
    for (int i = 0; i < space.dim(); ++i) p(space.rotor(i)) += last.populations(i);
    return p;
}

Eigen::VectorXd Trajectory::phononPopulations() const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(space.phononCutoff + 1);
    const auto& last = points.back();
    for (int i = 0; i < space.dim(); ++i) p(space.phonon(i)) += last.populations(i);
    return p;
}

double Trajectory::atomExcited(int atom) const {
    double p = 0.0;
    const auto& last = points.back();
    for (int i = 0; i < space.dim(); ++i)
        if (space.atomBits(i) & (1 << atom)) p += last.populations(i);
    return p;
}

namespace {

Eigen::MatrixXcd embedBlock(const CompositeSpace& space, int n_p,
                            const Eigen::Matrix2cd& block) {
    const int n = space.dim();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
    for (int ja = 0; ja < 2; ++ja)
        for (int jb = 0; jb < 2; ++jb)
            rho(space.index(0, n_p, ja), space.index(0, n_p, jb)) = block(ja, jb);
    return rho;
}

void reduceState(const CompositeSpace& space, const Eigen::MatrixXcd& rho,
                 Eigen::Matrix2cd& block, Eigen::VectorXd& phonon) {
    block.setZero();
    phonon = Eigen::VectorXd::Zero(space.phononCutoff + 1);
    const int n = space.dim();
    for (int i = 0; i < n; ++i) {
        phonon(space.phonon(i)) += rho(i, i).real();
        for (int j = 0; j < n; ++j) {
            if (space.atomBits(i) != space.atomBits(j) ||
                space.phonon(i) != space.phonon(j))
                continue;
            block(space.rotor(i), space.rotor(j)) += rho(i, j);
        }
    }
}

const std::array<Eigen::Matrix2cd, 4>& blockBasis() {
    static const std::array<Eigen::Matrix2cd, 4> basis = [] {
        std::array<Eigen::Matrix2cd, 4> b;
        b[0] << 1, 0, 0, 0;                    // E00
        b[1] << 0, 0, 0, 1;                    // E11
        b[2] << 0, 1, 1, 0;                    // E01 + E10
        b[3] << 0, cd(0, 1), cd(0, -1), 0;     // i(E01 - E10), Hermitian
        return b;
    }();
    return basis;
}

} // namespace

CoolingMap::CoolingMap(const CompositeSpace& space, const CoolingParams& params)
    : space_(space) {
    basis_.resize(space.phononCutoff + 1);
    for (int np = 0; np <= space.phononCutoff; ++np) {
        for (int k = 0; k < 4; ++k) {
            const Eigen::MatrixXcd rho0 = embedBlock(space, np, blockBasis()[k]);
            const Eigen::MatrixXcd rhoF = propagateRaw(rho0, space, params);
            Output& out = basis_[np][k];
            reduceState(space, rhoF, out.block, out.phononDist);
        }
    }
}

CoolingMap::Output CoolingMap::apply(const Eigen::Matrix2cd& block,
                                     const Eigen::VectorXd& phononDist) const {
    if (phononDist.size() != space_.phononCutoff + 1)
        throw std::invalid_argument("CoolingMap: phonon distribution size mismatch");
    Output out;
    out.block.setZero();
    out.phononDist = Eigen::VectorXd::Zero(space_.phononCutoff + 1);
    for (int np = 0; np <= space_.phononCutoff; ++np) {
        if (phononDist(np) == 0.0) continue;
        const double coeff[4] = {block(0, 0).real(), block(1, 1).real(),
                                 block(0, 1).real(), block(0, 1).imag()};
        for (int k = 0; k < 4; ++k) {
            if (coeff[k] == 0.0) continue;
            out.block += phononDist(np) * coeff[k] * basis_[np][k].block;
            out.phononDist += phononDist(np) * coeff[k] * basis_[np][k].phononDist;
        }
    }
    return out;
}

CoolStepResult coolStep(const std::vector<Eigen::Matrix2cd>& rotorBlocks,
                        const std::vector<double>& couplings_kHz,
                        const Eigen::VectorXd& phononDist,
                        const CompositeSpace& space, const CoolingParams& base) {
    if (rotorBlocks.size() != couplings_kHz.size())
        throw std::invalid_argument("coolStep: blocks and couplings size mismatch");
    if (phononDist.size() != space.phononCutoff + 1)
        throw std::invalid_argument("coolStep: phonon distribution size mismatch");

    CoolStepResult out;
    out.rotorBlocks = rotorBlocks;
    Eigen::VectorXd phononAcc = Eigen::VectorXd::Zero(space.phononCutoff + 1);
    double weightAcc = 0.0;

    for (std::size_t k = 0; k < rotorBlocks.size(); ++k) {
        const double weight = rotorBlocks[k].trace().real();
        if (couplings_kHz[k] == 0.0 || weight < 1e-14) continue; // M = 0 skipped

        CoolingParams p = base;
        p.totalCoupling_kHz = couplings_kHz[k];

        const int n = space.dim();
        Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(n, n);
        for (int np = 0; np <= space.phononCutoff; ++np)
            for (int ja = 0; ja < 2; ++ja)
                for (int jb = 0; jb < 2; ++jb)
                    rho0(space.index(0, np, ja), space.index(0, np, jb)) =
                        phononDist(np) * rotorBlocks[k](ja, jb) / weight;

        const Eigen::MatrixXcd rhoF = propagateDense(rho0, space, p);
        Eigen::Matrix2cd blockF;
        Eigen::VectorXd ph;
        reduceState(space, rhoF, blockF, ph);
        out.rotorBlocks[k] = blockF * weight;
        phononAcc += ph * weight;
        weightAcc += weight;
    }
    out.phononDist = weightAcc > 0.0 ? Eigen::VectorXd(phononAcc / weightAcc)
                                     : phononDist;
    return out;
}

CoolOneStepResult coolOneStep(const std::vector<Eigen::Vector2d>& populations,
                              const std::vector<double>& couplings_kHz,
                              const Eigen::VectorXd& phononDist,
                              const CompositeSpace& space,
                              const CoolingParams& base) {
    std::vector<Eigen::Matrix2cd> blocks;
    blocks.reserve(populations.size());
    for (const auto& p : populations) {
        Eigen::Matrix2cd b = Eigen::Matrix2cd::Zero();
        b(0, 0) = p(0);
        b(1, 1) = p(1);
        blocks.push_back(b);
    }
    const auto res = coolStep(blocks, couplings_kHz, phononDist, space, base);
    CoolOneStepResult out;
    out.phononDist = res.phononDist;
    out.populations.reserve(res.rotorBlocks.size());
    for (const auto& b : res.rotorBlocks)
        out.populations.push_back({b(0, 0).real(), b(1, 1).real()});
    return out;
}

} // namespace rotcool::lindblad
