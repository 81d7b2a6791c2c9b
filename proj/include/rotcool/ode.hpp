#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>

namespace rotcool::ode {

struct Options {
    double rtol{1e-9};
    double atol{1e-12};
    double maxStep{0.0};      // 0 = unlimited
    double initialStep{0.0};  // 0 = auto
};

struct StepSizeUnderflow : std::runtime_error {
    double t;
    StepSizeUnderflow(double t_, const std::string& msg)
        : std::runtime_error(msg), t(t_) {}
};

// Adaptive Dormand-Prince 5(4) on a complex vector.  `rhs(t, y, dydt)` fills
// the derivative; `observer(t, y)`, when set, is called at every accepted
// step.  Integration state y is advanced in place to t1.
class Dopri5 {
public:
    using Vec = Eigen::VectorXcd;
    using Rhs = std::function<void(double, const Vec&, Vec&)>;
    using Observer = std::function<void(double, const Vec&)>;

    explicit Dopri5(Options opts = {}) : opts_(opts) {}

    void integrate(const Rhs& rhs, Vec& y, double t0, double t1,
                   const Observer& observer = nullptr) const;

private:
    Options opts_;
};

} // namespace rotcool::ode
