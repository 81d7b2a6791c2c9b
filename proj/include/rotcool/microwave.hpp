#pragma once

#include "rotcool/constants.hpp"
#include "rotcool/rotor.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace rotcool::microwave {

enum class Envelope { FlatTop, Gaussian };

// One microwave tone.  The Rabi rate is defined on a designated reference
// transition; all other pairs scale with their dipole matrix elements.
struct PulseSpec {
    double carrier_MHz{};
    Eigen::Vector3cd polarization{0, 0, 1}; // complex unit 3-vector over (x,y,z)
    double peakRabi_kHz{10.0};              // ordinary kHz (angular 2*pi x value)
    Envelope envelope{Envelope::FlatTop};
    double rampFraction{0.1};               // sin^2 ramp share per side (flat-top)
    double gaussianSigmaFraction{1.0 / 6.0};
    double duration_us{};
    double area_rad{};                      // realized area on the reference pair
    int referenceBra{-1}, referenceKet{-1}; // subspace state indices

    void validatePolarization() const;
};

// Fixed set of rotational states with precomputed energies and Cartesian
// dipole element matrices.
class RotorSubspace {
public:
    RotorSubspace(const rotor::RotorModel& model,
                  const std::vector<rotor::RotLevel>& levels);

    int dim() const { return static_cast<int>(states_.size()); }
    const std::vector<rotor::RotState>& states() const { return states_; }
    const Eigen::VectorXd& energies_MHz() const { return energies_; }

    int find(int J, int Ka, int Kc, int M) const; // -1 if absent
    int require(int J, int Ka, int Kc, int M) const;

    // <i| mu . eps |j> in Debye for a complex polarization vector
    Eigen::MatrixXcd elements(const Eigen::Vector3cd& eps) const;

    const Eigen::MatrixXcd& elementsX() const { return ex_; }
    const Eigen::MatrixXcd& elementsY() const { return ey_; }
    const Eigen::MatrixXcd& elementsZ() const { return ez_; }

private:
    std::vector<rotor::RotState> states_;
    Eigen::VectorXd energies_;
    Eigen::MatrixXcd ex_, ey_, ez_;
};

// Unitary for one or more tones applied jointly over max(duration).
// Rotating-wave approximation per tone: for each state pair the slowly
// rotating pairing with the carrier is kept when its residual frequency is
// below carrier/2; co- and counter-rotating fast terms are dropped.
Eigen::MatrixXcd pulseUnitary(const RotorSubspace& subspace,
                              const std::vector<PulseSpec>& tones);

// Applies tones (jointly) to a density matrix: U rho U^dagger.
Eigen::MatrixXcd propagatePulse(const Eigen::MatrixXcd& rho,
                                const RotorSubspace& subspace,
                                const std::vector<PulseSpec>& tones);
Eigen::MatrixXcd propagatePulse(const Eigen::MatrixXcd& rho,
                                const RotorSubspace& subspace,
                                const PulseSpec& pulse);

// Population vector convenience (diagonal in, diagonal out).
Eigen::VectorXd propagatePulse(const Eigen::VectorXd& populations,
                               const RotorSubspace& subspace,
                               const std::vector<PulseSpec>& tones);

struct DesignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Resonant pulse with area pi on the given transition: carrier = |dE|,
// duration solved from the envelope so that the pulse area on that pair
// matches `area_rad` at the given peak Rabi rate.  Throws DesignError when
// the matrix element vanishes.
PulseSpec designPiPulse(const RotorSubspace& subspace, int bra, int ket,
                        const Eigen::Vector3cd& polarization,
                        double peakRabi_kHz, double area_rad = constants::pi);

// "25% z-polarization" can mean an intensity or an amplitude fraction; the
// intensity convention (amplitude weights sqrt(1-eps), sqrt(eps)) is the
// default, the amplitude convention ((1-eps), eps) is selectable.
enum class MixingConvention { Intensity, Amplitude };

Eigen::Vector3cd imperfectPolarization(
    const Eigen::Vector3cd& base, double eps, const Eigen::Vector3cd& admixed,
    MixingConvention convention = MixingConvention::Intensity);

} // namespace rotcool::microwave
