#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>

namespace neseek {

/// Thrown when an integration step produces a non-finite state or derivative.
struct OdeError : std::runtime_error {
    OdeError(const std::string& what, double at) : std::runtime_error(what), position(at) {}
    double position = 0.0;  // independent variable where the failure occurred
};

/// Thrown when the step budget is exhausted before reaching the target.
struct StepBudgetExhausted : std::runtime_error {
    StepBudgetExhausted(const std::string& what, double at) : std::runtime_error(what), position(at) {}
    double position = 0.0;
};

/// y' = f(s, y), written into the third argument.
using OdeRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Embedded Dormand-Prince 5(4) pair with PI step-size control. The
/// independent variable is called s throughout; callers integrate segment by
/// segment and the last accepted step size carries over between segments.
class Rk45Integrator {
public:
    Rk45Integrator(OdeRhs rhs, double rel_tol, double abs_tol);

    /// Advance y in place from s_from to s_to, debiting accepted and rejected
    /// steps from step_budget. Throws StepBudgetExhausted (with y at the
    /// reached position) or OdeError.
    double advance(double s_from, double s_to, Eigen::VectorXd& y, long& step_budget);

    [[nodiscard]] long accepted() const { return accepted_; }
    [[nodiscard]] long rejected() const { return rejected_; }

private:
    double initial_step(double s, const Eigen::VectorXd& y, double direction);
    double error_norm(const Eigen::VectorXd& y0, const Eigen::VectorXd& y1, const Eigen::VectorXd& err) const;

    OdeRhs rhs_;
    double rel_tol_;
    double abs_tol_;
    double h_ = 0.0;           // carried between segments
    double prev_error_ = 1.0;  // PI controller memory
    long accepted_ = 0;
    long rejected_ = 0;
    Eigen::VectorXd k_[7], y_stage_, y_new_, err_;
    bool have_first_stage_ = false;  // FSAL: k_[6] of the last accepted step is k_[0] of the next
};

/// Classical fixed-step fourth-order Runge-Kutta over nsteps equal steps.
/// Serves as the independent cross-validation route for the adaptive scheme.
[[nodiscard]] Eigen::VectorXd rk4_fixed(const OdeRhs& rhs, double s_from, double s_to,
                                        Eigen::VectorXd y, long nsteps);

}  // namespace neseek
