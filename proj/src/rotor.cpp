#include "rotcool/rotor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rotcool::rotor {

void MoleculeSpec::validate() const {
    if (!(A_MHz >= B_MHz && B_MHz >= C_MHz && C_MHz > 0.0))
        throw std::invalid_argument("MoleculeSpec '" + name +
                                    "': rotational constants must satisfy A >= B >= C > 0");
    if (mass_u <= 0.0)
        throw std::invalid_argument("MoleculeSpec '" + name + "': mass must be positive");
}

std::vector<std::pair<int, int>> canonicalLabels(int J) {
    std::vector<std::pair<int, int>> labels;
    labels.reserve(2 * J + 1);
    int Ka = 0, Kc = J;
    labels.emplace_back(Ka, Kc);
    while (static_cast<int>(labels.size()) < 2 * J + 1) {
        if (Ka + Kc == J)
            ++Ka;      // (Ka,Kc) -> (Ka+1,Kc)
        else
            --Kc;      // (Ka,Kc) -> (Ka,Kc-1)
        labels.emplace_back(Ka, Kc);
    }
    return labels;
}

Eigen::MatrixXd hamiltonianMatrix(const MoleculeSpec& spec, int J) {
    const int n = 2 * J + 1;
    const double JJ = double(J) * (J + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const int K = i - J;
        H(i, i) = 0.5 * (spec.B_MHz + spec.C_MHz) * (JJ - K * K) +
                  spec.A_MHz * K * K;
    }
    for (int i = 0; i + 2 < n; ++i) {
        const int K = i - J;
        const double off = 0.25 * (spec.B_MHz - spec.C_MHz) *
            std::sqrt((JJ - double(K) * (K + 1)) * (JJ - double(K + 1) * (K + 2)));
        H(i + 2, i) = off;
        H(i, i + 2) = off;
    }
    return H;
}

RotorBlock buildRotorBlock(const MoleculeSpec& spec, int J) {
    if (J < 0) throw std::invalid_argument("buildRotorBlock: J must be >= 0");
    spec.validate();

    RotorBlock block;
    block.J = J;
    if (J == 0) {
        block.levels.push_back({0, 0, 0, 0.0});
        block.eigenvectors = Eigen::MatrixXd::Ones(1, 1);
        return block;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hamiltonianMatrix(spec, J));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("buildRotorBlock: eigensolver failed");

    block.eigenvectors = es.eigenvectors(); // ascending eigenvalues
    const auto labels = canonicalLabels(J);
    block.levels.reserve(2 * J + 1);
    for (int k = 0; k < 2 * J + 1; ++k) {
        block.levels.push_back({J, labels[k].first, labels[k].second,
                                es.eigenvalues()(k)});
        // sign convention: largest-magnitude component positive
        auto col = block.eigenvectors.col(k);
        int imax = 0;
        col.cwiseAbs().maxCoeff(&imax);
        if (col(imax) < 0.0) block.eigenvectors.col(k) = -col;
    }
    return block;
}

Eigen::Vector3cd polarizationVector(Polarization p) {
    using cd = std::complex<double>;
    constexpr double s = 0.70710678118654752440;
    switch (p) {
        case Polarization::X: return {cd(1, 0), cd(0, 0), cd(0, 0)};
        case Polarization::Y: return {cd(0, 0), cd(1, 0), cd(0, 0)};
        case Polarization::Z: return {cd(0, 0), cd(0, 0), cd(1, 0)};
        case Polarization::SigmaPlus: return {cd(s, 0), cd(0, s), cd(0, 0)};
        case Polarization::SigmaMinus: return {cd(s, 0), cd(0, -s), cd(0, 0)};
    }
    throw std::logic_error("polarizationVector: unknown preset");
}

RotorModel::RotorModel(MoleculeSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
}

const RotorBlock& RotorModel::block(int J) const {
    auto it = blocks_.find(J);
    if (it == blocks_.end())
        it = blocks_.emplace(J, buildRotorBlock(spec_, J)).first;
    return it->second;
}

RotLevel RotorModel::level(int J, int Ka, int Kc) const {
    for (const auto& lv : block(J).levels)
        if (lv.Ka == Ka && lv.Kc == Kc) return lv;
    throw std::domain_error("RotorModel: no level " + std::to_string(J) + "_{" +
                            std::to_string(Ka) + "," + std::to_string(Kc) + "}");
}

std::complex<double> RotorModel::dipoleElement(const RotState& bra,
                                               const RotState& ket,
                                               const Eigen::Vector3cd& eps) const {
    using angular::BodyAxis;
    using angular::SpaceAxis;
    using angular::SymTopKet;

    if (std::abs(bra.level.J - ket.level.J) > 1) return {};
    if (std::abs(bra.M) > bra.level.J || std::abs(ket.M) > ket.level.J)
        throw std::domain_error("dipoleElement: |M| > J");

    const RotorBlock& bb = block(bra.level.J);
    const RotorBlock& kb = block(ket.level.J);
    auto column = [](const RotorBlock& blk, const RotLevel& lv) {
        for (std::size_t i = 0; i < blk.levels.size(); ++i)
            if (blk.levels[i].Ka == lv.Ka && blk.levels[i].Kc == lv.Kc)
                return blk.eigenvectors.col(static_cast<int>(i));
        throw std::domain_error("dipoleElement: unknown level label");
    };
    const auto cb = column(bb, bra.level);
    const auto ck = column(kb, ket.level);

    const double mu[3] = {spec_.mu_a_D, spec_.mu_b_D, spec_.mu_c_D};
    const BodyAxis axes[3] = {BodyAxis::A, BodyAxis::B, BodyAxis::C};
    const SpaceAxis space[3] = {SpaceAxis::X, SpaceAxis::Y, SpaceAxis::Z};

    std::complex<double> total{};
    for (int ib = 0; ib < 2 * bra.level.J + 1; ++ib) {
        if (cb(ib) == 0.0) continue;
        const SymTopKet bket{bra.level.J, ib - bra.level.J, bra.M};
        for (int ik = 0; ik < 2 * ket.level.J + 1; ++ik) {
            if (ck(ik) == 0.0) continue;
            const SymTopKet kket{ket.level.J, ik - ket.level.J, ket.M};
            if (std::abs(bket.K - kket.K) > 1) continue;
            for (int beta = 0; beta < 3; ++beta) {
                if (eps(beta) == std::complex<double>{}) continue;
                for (int alpha = 0; alpha < 3; ++alpha) {
                    if (mu[alpha] == 0.0) continue;
                    const auto r = angular::directionCosine(bket, kket,
                                                            space[beta], axes[alpha]);
                    if (r != std::complex<double>{})
                        total += cb(ib) * ck(ik) * eps(beta) * mu[alpha] * r;
                }
            }
        }
    }
    return total;
}

std::complex<double> RotorModel::dipoleElement(const RotState& bra,
                                               const RotState& ket,
                                               Polarization p) const {
    // Report per-Debye elements when the spec carries no dipole moment.
    if (!spec_.hasDipole()) {
        MoleculeSpec unit = spec_;
        unit.mu_a_D = 1.0;
        return RotorModel(unit).dipoleElement(bra, ket, polarizationVector(p));
    }
    return dipoleElement(bra, ket, polarizationVector(p));
}

std::vector<Transition> RotorModel::transitionTable(int Jmax) const {
    if (Jmax < 1) throw std::invalid_argument("transitionTable: Jmax must be >= 1");

    // Per-Debye enumeration when no dipole data is available.
    if (!spec_.hasDipole()) {
        MoleculeSpec unit = spec_;
        unit.mu_a_D = 1.0;
        return RotorModel(unit).transitionTable(Jmax);
    }

    std::vector<RotLevel> all;
    for (int J = 0; J <= Jmax; ++J)
        for (const auto& lv : block(J).levels) all.push_back(lv);

    std::vector<Transition> table;
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            const RotLevel* lo = &all[i];
            const RotLevel* up = &all[j];
            if (lo->energy_MHz > up->energy_MHz) std::swap(lo, up);
            if (std::abs(lo->J - up->J) > 1) continue;
            const double freq = up->energy_MHz - lo->energy_MHz;
            if (freq <= 0.0) continue;

            Transition tr{*lo, *up, freq, 0.0, 0.0, 0.0};
            for (int M = -lo->J; M <= lo->J; ++M) {
                for (int Mp = -up->J; Mp <= up->J; ++Mp) {
                    if (std::abs(Mp - M) > 1) continue;
                    const RotState b{*up, Mp}, k{*lo, M};
                    auto s = [&](Polarization p) {
                        return std::norm(dipoleElement(b, k, polarizationVector(p)));
                    };
                    tr.strength_x = std::max(tr.strength_x, s(Polarization::X));
                    tr.strength_y = std::max(tr.strength_y, s(Polarization::Y));
                    tr.strength_z = std::max(tr.strength_z, s(Polarization::Z));
                }
            }
            if (tr.strength_x + tr.strength_y + tr.strength_z > 1e-20)
                table.push_back(tr);
        }
    }
    std::sort(table.begin(), table.end(),
              [](const Transition& a, const Transition& b) {
                  return a.frequency_MHz < b.frequency_MHz;
              });
    return table;
}

} // namespace rotcool::rotor
