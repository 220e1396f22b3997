#include "neseek/ode.hpp"

#include <algorithm>
#include <cmath>

namespace neseek {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 5th-order minus embedded 4th-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;
constexpr double kAlpha = 0.7 / 5.0;  // PI exponents for a 5th-order pair
constexpr double kBeta = 0.4 / 5.0;

}  // namespace

Rk45Integrator::Rk45Integrator(OdeRhs rhs, double rel_tol, double abs_tol)
    : rhs_(std::move(rhs)), rel_tol_(rel_tol), abs_tol_(abs_tol) {
    if (rel_tol <= 0.0 || abs_tol <= 0.0) throw std::invalid_argument("rk45: tolerances must be positive");
}

double Rk45Integrator::error_norm(const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                                  const Eigen::VectorXd& err) const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale = abs_tol_ + rel_tol_ * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double e = err(i) / scale;
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
}

double Rk45Integrator::initial_step(double s, const Eigen::VectorXd& y, double direction) {
    // Hairer-Norsett-Wanner starting step selection, order 5.
    Eigen::VectorXd f0(y.size()), f1(y.size());
    rhs_(s, y, f0);
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double sc = abs_tol_ + rel_tol_ * std::abs(y(i));
        d0 += (y(i) / sc) * (y(i) / sc);
        d1 += (f0(i) / sc) * (f0(i) / sc);
    }
    d0 = std::sqrt(d0 / static_cast<double>(y.size()));
    d1 = std::sqrt(d1 / static_cast<double>(y.size()));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 *= direction;

    Eigen::VectorXd y1 = y + h0 * f0;
    rhs_(s + h0, y1, f1);
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double sc = abs_tol_ + rel_tol_ * std::abs(y(i));
        const double df = (f1(i) - f0(i)) / sc;
        d2 += df * df;
    }
    d2 = std::sqrt(d2 / static_cast<double>(y.size())) / std::abs(h0);

    const double d_max = std::max(d1, d2);
    const double h1 = (d_max <= 1e-15) ? std::max(1e-6, std::abs(h0) * 1e-3)
                                       : std::pow(0.01 / d_max, 1.0 / 5.0);
    return direction * std::min(100.0 * std::abs(h0), h1);
}

double Rk45Integrator::advance(double s_from, double s_to, Eigen::VectorXd& y, long& step_budget) {
    if (s_to == s_from) return s_from;
    const double direction = (s_to > s_from) ? 1.0 : -1.0;
    double s = s_from;

    const auto dim = y.size();
    for (auto& k : k_) k.resize(dim);
    y_stage_.resize(dim);
    y_new_.resize(dim);
    err_.resize(dim);

    if (h_ == 0.0) h_ = initial_step(s, y, direction);
    if (!have_first_stage_) {
        rhs_(s, y, k_[0]);
        have_first_stage_ = true;
    }

    while (direction * (s_to - s) > 0.0) {
        if (step_budget <= 0) throw StepBudgetExhausted("rk45: step budget exhausted", s);

        double h = h_;
        if (direction * (s + h - s_to) > 0.0) h = s_to - s;

        y_stage_ = y + h * (a21 * k_[0]);
        rhs_(s + c2 * h, y_stage_, k_[1]);
        y_stage_ = y + h * (a31 * k_[0] + a32 * k_[1]);
        rhs_(s + c3 * h, y_stage_, k_[2]);
        y_stage_ = y + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
        rhs_(s + c4 * h, y_stage_, k_[3]);
        y_stage_ = y + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
        rhs_(s + c5 * h, y_stage_, k_[4]);
        y_stage_ = y + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] + a65 * k_[4]);
        rhs_(s + h, y_stage_, k_[5]);
        y_new_ = y + h * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] + b6 * k_[5]);
        rhs_(s + h, y_new_, k_[6]);
        err_ = h * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] + e6 * k_[5] + e7 * k_[6]);

        if (!y_new_.allFinite() || !k_[6].allFinite())
            throw OdeError("rk45: non-finite state or derivative", s);

        const double err = error_norm(y, y_new_, err_);
        --step_budget;
        if (err <= 1.0) {
            s += h;
            y.swap(y_new_);
            k_[0].swap(k_[6]);  // FSAL
            ++accepted_;
            const double grow = kSafety * std::pow(std::max(err, 1e-16), -kAlpha) * std::pow(prev_error_, kBeta);
            h_ = h * std::clamp(grow, kMinFactor, kMaxFactor);
            prev_error_ = std::max(err, 1e-16);
        } else {
            ++rejected_;
            const double shrink = kSafety * std::pow(err, -0.2);
            h_ = h * std::clamp(shrink, kMinFactor, 1.0);
        }
        if (std::abs(h_) < 1e-14 * std::max(1.0, std::abs(s)))
            throw OdeError("rk45: step size underflow", s);
    }
    return s;
}

Eigen::VectorXd rk4_fixed(const OdeRhs& rhs, double s_from, double s_to, Eigen::VectorXd y, long nsteps) {
    if (nsteps <= 0) throw std::invalid_argument("rk4: step count must be positive");
    const double h = (s_to - s_from) / static_cast<double>(nsteps);
    Eigen::VectorXd k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
    double s = s_from;
    for (long step = 0; step < nsteps; ++step) {
        rhs(s, y, k1);
        tmp = y + 0.5 * h * k1;
        rhs(s + 0.5 * h, tmp, k2);
        tmp = y + 0.5 * h * k2;
        rhs(s + 0.5 * h, tmp, k3);
        tmp = y + h * k3;
        rhs(s + h, tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s = s_from + h * static_cast<double>(step + 1);
    }
    return y;
}

}  // namespace neseek
