#pragma once

#include <complex>
#include <stdexcept>

namespace rotcool::angular {

// Symmetric-top basis ket |J K M>: K is the body-frame projection,
// M the space-frame projection.
struct SymTopKet {
    int J{};
    int K{};
    int M{};

    void validate() const {
        if (J < 0) throw std::domain_error("SymTopKet: J must be non-negative");
        if (K < -J || K > J) throw std::domain_error("SymTopKet: |K| <= J violated");
        if (M < -J || M > J) throw std::domain_error("SymTopKet: |M| <= J violated");
    }
};

// Wigner 3j symbol.  Arguments may be half-integer.  Evaluated from the
// Racah sum with exact integer factorial arithmetic (arbitrary precision),
// promoted to floating point only at the end; the alternating sum would
// otherwise lose all digits to cancellation by J ~ 20.
//
// Returns 0 when the triangle rule or m1+m2+m3=0 is not satisfied.
// Throws std::domain_error for negative j, |m| > j, or arguments that are
// not (half-)integers.
double wigner3j(double j1, double j2, double j3, double m1, double m2, double m3);

enum class BodyAxis { A, B, C };
enum class SpaceAxis { X, Y, Z };

// <J' K' M'| D^1*_{m k} |J K M> in the symmetric-top basis (Condon-Shortley
// phases, Zare's active z-y-z convention):
//   (-1)^(M'-K') sqrt((2J+1)(2J'+1)) 3j(J,1,J'; M,m,-M') 3j(J,1,J'; K,k,-K')
// Vanishes unless |J'-J| <= 1, M' = M + m and K' = K + k.
double directionCosineSpherical(const SymTopKet& bra, const SymTopKet& ket,
                                int m, int k);

// Direction-cosine matrix element <bra| R_{beta alpha} |ket| with Cartesian
// axes expanded into spherical components:
//   z <-> m=0,  x <-> (m=-1 minus m=+1)/sqrt(2),  y <-> i(m=-1 plus m=+1)/sqrt(2)
// (same combinations for the body frame with a->z in representation I^r).
// Complex in general (y axis); magnitude <= 1.
std::complex<double> directionCosine(const SymTopKet& bra, const SymTopKet& ket,
                                     SpaceAxis beta, BodyAxis alpha);

} // namespace rotcool::angular
