#include "rotcool/angular.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <cmath>
#include <vector>

namespace rotcool::angular {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

// Factorial cache; grows on demand.  wigner3j is documented for J <= 40,
// which needs factorials up to (j1+j2+j3+1)! = 121!.
const cpp_int& factorial(int n) {
    static std::vector<cpp_int> table{1, 1};
    while (static_cast<int>(table.size()) <= n)
        table.push_back(table.back() * static_cast<int>(table.size()));
    return table[n];
}

// Doubled representation: returns 2*x as an exact integer, or throws.
int doubled(double x, const char* what) {
    const double two = 2.0 * x;
    const double r = std::round(two);
    if (std::abs(two - r) > 1e-9)
        throw std::domain_error(std::string("wigner3j: ") + what +
                                " is neither integer nor half-integer");
    return static_cast<int>(r);
}

} // namespace

double wigner3j(double j1, double j2, double j3,
                double m1, double m2, double m3) {
    const int tj1 = doubled(j1, "j1"), tj2 = doubled(j2, "j2"), tj3 = doubled(j3, "j3");
    const int tm1 = doubled(m1, "m1"), tm2 = doubled(m2, "m2"), tm3 = doubled(m3, "m3");

    if (tj1 < 0 || tj2 < 0 || tj3 < 0)
        throw std::domain_error("wigner3j: negative angular momentum");
    if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3)
        throw std::domain_error("wigner3j: |m| > j");
    if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tj3 + tm3) % 2)
        throw std::domain_error("wigner3j: j and m differ by a non-integer");

    if (tm1 + tm2 + tm3 != 0) return 0.0;
    // triangle rule; the differences must also be integers
    if (tj3 > tj1 + tj2 || tj3 < std::abs(tj1 - tj2)) return 0.0;
    if ((tj1 + tj2 + tj3) % 2) return 0.0;

    // integer combinations entering the factorials (all guaranteed integral here)
    const int a1 = (tj1 + tj2 - tj3) / 2;
    const int a2 = (tj1 - tj2 + tj3) / 2;
    const int a3 = (-tj1 + tj2 + tj3) / 2;
    const int jtot1 = (tj1 + tj2 + tj3) / 2 + 1;

    const int b1 = (tj1 + tm1) / 2, b2 = (tj1 - tm1) / 2;
    const int b3 = (tj2 + tm2) / 2, b4 = (tj2 - tm2) / 2;
    const int b5 = (tj3 + tm3) / 2, b6 = (tj3 - tm3) / 2;

    const cpp_rational delta(factorial(a1) * factorial(a2) * factorial(a3),
                             factorial(jtot1));
    const cpp_int norm = factorial(b1) * factorial(b2) * factorial(b3) *
                         factorial(b4) * factorial(b5) * factorial(b6);

    // Racah sum over k
    const int c1 = (tj3 - tj2 + tm1) / 2; // j3-j2+m1
    const int c2 = (tj3 - tj1 - tm2) / 2; // j3-j1-m2
    const int kmin = std::max({0, -c1, -c2});
    const int kmax = std::min({a1, b2, b3});

    cpp_rational sum = 0;
    for (int k = kmin; k <= kmax; ++k) {
        cpp_int den = factorial(k) * factorial(a1 - k) * factorial(b2 - k) *
                      factorial(b3 - k) * factorial(c1 + k) * factorial(c2 + k);
        cpp_rational term(1, den);
        if (k % 2) term = -term;
        sum += term;
    }
    if (sum == 0) return 0.0;

    // value = sign * sqrt(delta * norm) * sum; convert via value^2 so the
    // huge intermediate factorials never hit floating point.
    const cpp_rational value_sq = delta * norm * sum * sum;
    double v = std::sqrt(static_cast<double>(value_sq));
    if (sum < 0) v = -v;
    const int phase = (tj1 - tj2 - tm3) / 2; // integer for valid arguments
    if (phase % 2) v = -v;
    return v;
}

double directionCosineSpherical(const SymTopKet& bra, const SymTopKet& ket,
                                int m, int k) {
    bra.validate();
    ket.validate();
    if (std::abs(m) > 1 || std::abs(k) > 1)
        throw std::domain_error("directionCosineSpherical: rank-1 components only");

    if (std::abs(bra.J - ket.J) > 1) return 0.0;
    if (bra.M != ket.M + m) return 0.0;
    if (bra.K != ket.K + k) return 0.0;

    const double pref = std::sqrt(double(2 * ket.J + 1) * double(2 * bra.J + 1));
    const double sign = ((bra.M - bra.K) % 2) ? -1.0 : 1.0;
    return sign * pref *
           wigner3j(ket.J, 1, bra.J, ket.M, m, -bra.M) *
           wigner3j(ket.J, 1, bra.J, ket.K, k, -bra.K);
}

std::complex<double> directionCosine(const SymTopKet& bra, const SymTopKet& ket,
                                     SpaceAxis beta, BodyAxis alpha) {
    using cd = std::complex<double>;
    constexpr double inv_sqrt2 = 0.70710678118654752440;

    // weights over spherical components -1, 0, +1
    auto weights = [&](int axis_kind) -> std::array<cd, 3> {
        switch (axis_kind) {
            case 0: return {cd(inv_sqrt2, 0), cd(0, 0), cd(-inv_sqrt2, 0)}; // x-like
            case 1: return {cd(0, inv_sqrt2), cd(0, 0), cd(0, inv_sqrt2)};  // y-like
            default: return {cd(0, 0), cd(1, 0), cd(0, 0)};                 // z-like
        }
    };
    const auto ws = weights(beta == SpaceAxis::X ? 0 : beta == SpaceAxis::Y ? 1 : 2);
    const auto wb = weights(alpha == BodyAxis::B ? 0 : alpha == BodyAxis::C ? 1 : 2);

    cd total{};
    for (int m = -1; m <= 1; ++m) {
        if (ws[m + 1] == cd{}) continue;
        for (int k = -1; k <= 1; ++k) {
            if (wb[k + 1] == cd{}) continue;
            const double el = directionCosineSpherical(bra, ket, m, k);
            if (el != 0.0) total += ws[m + 1] * wb[k + 1] * el;
        }
    }
    return total;
}

} // namespace rotcool::angular
