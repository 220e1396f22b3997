#include "neseek/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

namespace neseek {

namespace {

constexpr double kKktTol = 1e-10;

/// Indices of players that carry a constraint.
std::vector<int> constrained_players(const QuadraticGame& game) {
    std::vector<int> out;
    for (int i = 0; i < game.player_count(); ++i)
        if (game.constraint(i)) out.push_back(i);
    return out;
}

}  // namespace

EquilibriumReport solve_kkt(const QuadraticGame& game) {
    const int N = game.player_count();
    const int n = game.total_dim();
    const Eigen::MatrixXd& M = game.pseudo_gradient_matrix();
    const Eigen::VectorXd& m = game.pseudo_gradient_offset();

    const std::vector<int> constrained = constrained_players(game);
    const int C = static_cast<int>(constrained.size());
    if (C > 24) throw std::invalid_argument("solve_kkt: too many constrained players for exact enumeration");

    const double scale = 1.0 + m.lpNorm<Eigen::Infinity>();
    double best_violation = std::numeric_limits<double>::infinity();

    for (unsigned long mask = 0; mask < (1UL << C); ++mask) {
        std::vector<int> active;
        for (int c = 0; c < C; ++c)
            if (mask & (1UL << c)) active.push_back(constrained[c]);
        const int A = static_cast<int>(active.size());

        // [ M  A_S^T ; A_S  0 ] [x; lambda] = [ -m ; beta ]
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + A, n + A);
        Eigen::VectorXd rhs(n + A);
        kkt.topLeftCorner(n, n) = M;
        rhs.head(n) = -m;
        for (int r = 0; r < A; ++r) {
            const int i = active[static_cast<std::size_t>(r)];
            const PlayerConstraint& con = *game.constraint(i);
            kkt.block(n + r, game.block_start(i), 1, game.dim(i)) = con.coeff.transpose();
            kkt.block(game.block_start(i), n + r, game.dim(i), 1) = con.coeff;
            rhs(n + r) = con.offset;
        }

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
        const Eigen::VectorXd sol = lu.solve(rhs);
        if (!sol.allFinite()) continue;
        const Eigen::VectorXd x = sol.head(n);
        const Eigen::VectorXd lam = sol.tail(A);

        // The solve can lose digits on near-degenerate patterns; reject those.
        if ((kkt * sol - rhs).lpNorm<Eigen::Infinity>() > 1e-8 * scale) continue;

        double violation = 0.0;
        for (int r = 0; r < A; ++r) violation = std::max(violation, -lam(r));
        for (int c = 0; c < C; ++c) {
            if (mask & (1UL << c)) continue;
            const int i = constrained[static_cast<std::size_t>(c)];
            violation = std::max(violation, game.constraint_value(i, game.player_block(i, x)));
        }
        if (violation <= kKktTol) {
            EquilibriumReport report;
            report.x_star = x;
            report.multipliers = Eigen::VectorXd::Zero(N);
            for (int r = 0; r < A; ++r)
                report.multipliers(active[static_cast<std::size_t>(r)]) = std::max(lam(r), 0.0);
            report.active_set.assign(static_cast<std::size_t>(N), false);
            for (int i : active) report.active_set[static_cast<std::size_t>(i)] = true;
            std::tie(report.mu, report.l) = game.monotonicity_constants();
            return report;
        }
        best_violation = std::min(best_violation, violation);
    }
    throw KktFailure("solve_kkt: no active-set pattern satisfies the KKT checks (best violation " +
                         std::to_string(best_violation) + ")",
                     best_violation);
}

Eigen::VectorXd halfspace_project(const Eigen::VectorXd& point, const Eigen::VectorXd& coeff, double offset) {
    const double norm2 = coeff.squaredNorm();
    if (!(norm2 > 0.0)) throw std::invalid_argument("halfspace_project: coefficient vector must be nonzero");
    const double excess = coeff.dot(point) - offset;
    if (excess <= 0.0) return point;
    return point - (excess / norm2) * coeff;
}

Eigen::VectorXd projected_pseudo_gradient(const QuadraticGame& game, double step, long max_iters, double tol) {
    const auto [mu, l] = game.monotonicity_constants();
    if (step == 0.0) step = mu / (l * l);
    if (!(step > 0.0) || step >= 2.0 * mu / (l * l))
        throw std::invalid_argument("projected_pseudo_gradient: step must lie in (0, 2 mu / l^2)");
    if (max_iters <= 0) throw std::invalid_argument("projected_pseudo_gradient: max_iters must be positive");

    const int N = game.player_count();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(game.total_dim());
    Eigen::VectorXd next(game.total_dim());
    double residual = std::numeric_limits<double>::infinity();
    for (long it = 0; it < max_iters; ++it) {
        next = x - step * (game.pseudo_gradient_matrix() * x + game.pseudo_gradient_offset());
        for (int i = 0; i < N; ++i) {
            if (!game.constraint(i)) continue;
            const PlayerConstraint& con = *game.constraint(i);
            next.segment(game.block_start(i), game.dim(i)) =
                halfspace_project(next.segment(game.block_start(i), game.dim(i)), con.coeff, con.offset);
        }
        residual = (next - x).norm();
        x = next;
        if (residual <= tol) return x;
    }
    throw ProjectionFailure("projected_pseudo_gradient: no convergence within iteration budget (last update " +
                                std::to_string(residual) + ")",
                            residual);
}

double omega_lower_bound(double mu, double l, double lambda2) {
    if (!(mu > 0.0)) throw std::invalid_argument("omega_lower_bound: mu must be positive");
    if (!(l >= mu)) throw std::invalid_argument("omega_lower_bound: l must be >= mu");
    if (!(lambda2 > 0.0)) throw std::invalid_argument("omega_lower_bound: lambda2 must be positive");
    return (l * l + l * mu) / (mu * lambda2 * lambda2);
}

XiResult xi_matrix(int player_count, double mu, double l, double omega_star, double lambda2) {
    if (player_count < 1) throw std::invalid_argument("xi_matrix: player count must be positive");
    if (!(mu > 0.0) || !(l >= mu) || !(lambda2 > 0.0) || !(omega_star > 0.0))
        throw std::invalid_argument("xi_matrix: constants out of range");
    const double root_n = std::sqrt(static_cast<double>(player_count));
    XiResult result;
    result.xi << mu / player_count, -l / root_n, 0.0, 0.0,  //
        -l / root_n, omega_star * lambda2 * lambda2 - l, 0.0, 0.0,  //
        0.0, 0.0, 1.0, 0.0,  //
        0.0, 0.0, 0.0, 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(result.xi);
    result.theta = solver.eigenvalues()(0);
    // Scale-relative threshold so the exact boundary case (theta = 0 up to
    // rounding) reports not-positive-definite deterministically.
    result.positive_definite = result.theta > 1e-12 * result.xi.cwiseAbs().maxCoeff();
    return result;
}

double decay_envelope(double v0, double theta, const GainSchedule& schedule, double t) {
    if (v0 < 0.0) throw std::invalid_argument("decay_envelope: v0 must be >= 0");
    if (!(theta > 0.0)) throw std::invalid_argument("decay_envelope: theta must be positive");
    const double s = reparameterize(schedule.prescribed_time, t);
    return 2.0 * v0 * std::exp(-(2.0 * theta * schedule.prescribed_time / std::numbers::pi) * s);
}

double lyapunov_value(const SeekerState& state, const Eigen::VectorXd& x_star,
                      const Eigen::VectorXd& sigma_ref, const Eigen::VectorXd& omega_ref,
                      const Eigen::VectorXd& gamma) {
    if (!(state.q > 0.0)) throw std::domain_error("lyapunov_value: q must be positive");
    const auto N = state.sigma.size();
    if (sigma_ref.size() != N || omega_ref.size() != N || gamma.size() != N)
        throw std::invalid_argument("lyapunov_value: reference dimensions do not match state");
    const auto n = x_star.size();
    if (state.estimates.size() != N * n)
        throw std::invalid_argument("lyapunov_value: estimate dimensions do not match x_star");
    if ((gamma.array() <= 0.0).any()) throw std::invalid_argument("lyapunov_value: gamma must be positive");

    double v = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) v += 0.5 * (state.estimates.segment(i * n, n) - x_star).squaredNorm();
    v += (state.sigma - sigma_ref).squaredNorm() / (2.0 * state.q);
    v += ((state.omega - omega_ref).array().square() / gamma.array()).sum() / (2.0 * state.q);
    return v;
}

EquilibriumReport analyze_game(const QuadraticGame& game, const Graph& g, double omega_star) {
    if (g.size() != game.player_count())
        throw std::invalid_argument("analyze_game: graph size does not match player count");
    EquilibriumReport report = solve_kkt(game);
    report.lambda2 = g.lambda2();
    report.omega_bar = omega_lower_bound(report.mu, report.l, report.lambda2);
    report.omega_star = (omega_star > 0.0) ? omega_star : 2.0 * report.omega_bar;
    const XiResult xi = xi_matrix(game.player_count(), report.mu, report.l, report.omega_star, report.lambda2);
    report.xi = xi.xi;
    report.theta = xi.theta;
    report.xi_positive_definite = xi.positive_definite;
    return report;
}

void annotate_trajectory(Trajectory& traj, const QuadraticGame& game, const EquilibriumReport& report,
                         const GainSchedule& schedule) {
    if (traj.samples.empty()) return;
    const int N = game.player_count();
    const Eigen::Index n = game.total_dim();
    const TrajectorySample& last = traj.samples.back();
    const Eigen::VectorXd& sigma_ref = last.sigma;
    const Eigen::VectorXd& omega_ref = last.omega;

    for (TrajectorySample& sample : traj.samples) {
        double dist = 0.0;
        for (int i = 0; i < N; ++i)
            dist = std::max(dist, (sample.estimates.segment(i * n, n) - report.x_star).norm());
        sample.dist_to_nash = dist;

        SeekerState state;
        state.estimates = sample.estimates;
        state.sigma = sample.sigma;
        state.omega = sample.omega;
        state.q = sample.q;
        sample.lyapunov = lyapunov_value(state, report.x_star, sigma_ref, omega_ref, schedule.gamma);
    }
}

}  // namespace neseek
