#include "rotcool/ode.hpp"

#include <algorithm>
#include <cmath>

namespace rotcool::ode {

namespace {

// Dormand-Prince RK5(4)7M coefficients
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// embedded 4th-order weights
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

} // namespace

void Dopri5::integrate(const Rhs& rhs, Vec& y, double t0, double t1,
                       const Observer& observer) const {
    if (t1 <= t0) {
        if (t1 == t0) return;
        throw std::invalid_argument("Dopri5: t1 < t0");
    }
    const auto n = y.size();
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y5(n), yerr(n);

    double t = t0;
    rhs(t, y, k1);

    double h = opts_.initialStep;
    if (h <= 0.0) {
        // crude first guess from the derivative scale
        const double d0 = y.norm(), d1 = k1.norm();
        h = (d1 > 1e-30) ? 0.01 * std::max(d0, opts_.atol) / d1 : 1e-6 * (t1 - t0);
        h = std::min(h, 0.1 * (t1 - t0));
        if (h <= 0.0) h = 1e-6 * (t1 - t0);
    }
    if (opts_.maxStep > 0.0) h = std::min(h, opts_.maxStep);

    if (observer) observer(t, y);

    const double hmin = 1e-14 * (t1 - t0);
    while (t < t1) {
        if (h < hmin)
            throw StepSizeUnderflow(t, "Dopri5: step size underflow at t=" +
                                           std::to_string(t));
        bool lastStep = false;
        if (t + h >= t1) {
            h = t1 - t;
            lastStep = true;
        }

        ytmp = y + h * a21 * k1;
        rhs(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, ytmp, k6);
        y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, y5, k7);
        yerr = y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        // max scaled error over components; squared norms avoid a sqrt per
        // element (the scale atol^2 + rtol^2 |y|^2 underestimates
        // (atol + rtol |y|)^2 by at most 2, i.e. slightly stricter control)
        double err2 = 0.0;
        const double at2 = opts_.atol * opts_.atol;
        const double rt2 = opts_.rtol * opts_.rtol;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc2 =
                at2 + rt2 * std::max(std::norm(y5(i)), std::norm(y(i)));
            const double d2 = std::norm(y5(i) - yerr(i));
            if (d2 > err2 * sc2) err2 = d2 / sc2;
        }
        const double err = std::sqrt(err2);

        if (err <= 1.0) {
            t = lastStep ? t1 : t + h;
            y.swap(y5);
            k1.swap(k7); // FSAL; on rejection k1 still matches y
            if (observer) observer(t, y);
        }

        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        fac = std::clamp(fac, 0.2, 5.0);
        h *= fac;
        if (opts_.maxStep > 0.0) h = std::min(h, opts_.maxStep);
    }
}

} // namespace rotcool::ode
