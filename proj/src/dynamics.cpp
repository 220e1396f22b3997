#include "neseek/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace neseek {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<const RowMat>;

void check_state(const QuadraticGame& game, const Graph& g, const GainSchedule& schedule,
                 const SeekerState& state) {
    const int N = game.player_count();
    if (g.size() != N) throw std::invalid_argument("dynamics: graph size does not match player count");
    if (state.estimates.size() != static_cast<Eigen::Index>(N) * game.total_dim())
        throw std::invalid_argument("dynamics: estimate vector size mismatch");
    if (state.sigma.size() != N || state.omega.size() != N)
        throw std::invalid_argument("dynamics: gain vector size mismatch");
    schedule.validate(N);
}

}  // namespace

void GainSchedule::validate(int player_count) const {
    if (prescribed_time <= 0.0) throw std::invalid_argument("schedule: prescribed time must be positive");
    if (q_initial <= 0.0) throw std::invalid_argument("schedule: q(0) must be positive");
    if (gamma.size() != player_count) throw std::invalid_argument("schedule: gamma size mismatch");
    if (gamma.size() > 0 && gamma.minCoeff() <= 0.0)
        throw std::invalid_argument("schedule: gamma entries must be positive");
}

double time_gain(const GainSchedule& schedule, double t) {
    if (t < 0.0 || t >= schedule.prescribed_time)
        throw std::domain_error("time_gain: t = " + std::to_string(t) + " outside [0, Tp)");
    const double c = std::cos(0.5 * std::numbers::pi * t / schedule.prescribed_time);
    return 1.0 / (c * c);
}

Eigen::VectorXd local_disagreement(const Eigen::VectorXd& estimates, const Graph& g, int i) {
    const int N = g.size();
    if (i < 0 || i >= N) throw std::out_of_range("local_disagreement: player index out of range");
    const auto n = estimates.size() / N;
    if (n * N != estimates.size()) throw std::invalid_argument("local_disagreement: estimate size not divisible");
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(n);
    const auto xi = estimates.segment(i * n, n);
    for (int j : g.neighbors(i)) rho += g.weights()(i, j) * (xi - estimates.segment(j * n, n));
    return rho;
}

Eigen::MatrixXd disagreement_matrix(const Eigen::VectorXd& estimates, const Graph& g) {
    const int N = g.size();
    const auto n = estimates.size() / N;
    Eigen::MatrixXd rho(N, static_cast<int>(n));
    for (int i = 0; i < N; ++i) rho.row(i) = local_disagreement(estimates, g, i).transpose();
    return rho;
}

Eigen::VectorXd select_own(const QuadraticGame& game, int i, const Eigen::VectorXd& v) {
    if (v.size() != game.total_dim()) throw std::invalid_argument("select_own: vector size mismatch");
    return v.segment(game.block_start(i), game.dim(i));
}

Eigen::VectorXd select_others(const QuadraticGame& game, int i, const Eigen::VectorXd& v) {
    if (v.size() != game.total_dim()) throw std::invalid_argument("select_others: vector size mismatch");
    const int o = game.block_start(i);
    const int ni = game.dim(i);
    Eigen::VectorXd out(v.size() - ni);
    out.head(o) = v.head(o);
    out.tail(v.size() - o - ni) = v.tail(v.size() - o - ni);
    return out;
}

SeekerDerivative gain_free_field(const QuadraticGame& game, const Graph& g, const GainSchedule& schedule,
                                 const SeekerState& state) {
    check_state(game, g, schedule, state);
    const int N = game.player_count();
    const int n = game.total_dim();
    const Eigen::VectorXd& X = state.estimates;

    // rho^i for every player, assembled from neighbor differences.
    Eigen::MatrixXd rho(N, n);
    for (int i = 0; i < N; ++i) {
        Eigen::RowVectorXd ri = Eigen::RowVectorXd::Zero(n);
        const auto xi = X.segment(static_cast<Eigen::Index>(i) * n, n).transpose();
        for (int j : g.neighbors(i)) ri += g.weights()(i, j) * (xi - X.segment(static_cast<Eigen::Index>(j) * n, n).transpose());
        rho.row(i) = ri;
    }

    SeekerDerivative d;
    d.estimates.resize(static_cast<Eigen::Index>(N) * n);
    d.sigma.resize(N);
    d.omega.resize(N);

    for (int i = 0; i < N; ++i) {
        // Consensus penalty sum_j a_ij (omega_i rho^i - omega_j rho^j).
        Eigen::RowVectorXd cons = Eigen::RowVectorXd::Zero(n);
        for (int j : g.neighbors(i))
            cons += g.weights()(i, j) * (state.omega(i) * rho.row(i) - state.omega(j) * rho.row(j));

        auto block = d.estimates.segment(static_cast<Eigen::Index>(i) * n, n);
        block = -cons.transpose();

        const Eigen::VectorXd own_action =
            X.segment(static_cast<Eigen::Index>(i) * n + game.block_start(i), game.dim(i));
        block.segment(game.block_start(i), game.dim(i)) -=
            game.partial_gradient(i, X.segment(static_cast<Eigen::Index>(i) * n, n)) +
            state.sigma(i) * game.penalty_subgradient(i, own_action);

        d.sigma(i) = state.q * game.penalty_value(i, own_action);
        d.omega(i) = state.q * schedule.gamma(i) * rho.row(i).squaredNorm();
    }
    d.q = state.q;
    return d;
}

SeekerDerivative vector_field(const QuadraticGame& game, const Graph& g, const GainSchedule& schedule,
                              const SeekerState& state) {
    const double k = time_gain(schedule, state.t);
    SeekerDerivative d = gain_free_field(game, g, schedule, state);
    d.estimates *= k;
    d.sigma *= k;
    d.omega *= k;
    d.q *= k;
    return d;
}

Eigen::VectorXd stationarity_vector(const QuadraticGame& game, const Eigen::VectorXd& estimates,
                                    const Eigen::VectorXd& sigma) {
    const int N = game.player_count();
    const int n = game.total_dim();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N) * n);
    for (int i = 0; i < N; ++i) {
        const auto xi_est = estimates.segment(static_cast<Eigen::Index>(i) * n, n);
        const Eigen::VectorXd own_action = xi_est.segment(game.block_start(i), game.dim(i));
        out.segment(static_cast<Eigen::Index>(i) * n + game.block_start(i), game.dim(i)) =
            game.partial_gradient(i, xi_est) + sigma(i) * game.penalty_subgradient(i, own_action);
    }
    return out;
}

Eigen::VectorXd compact_estimate_field(const QuadraticGame& game, const Graph& g, const SeekerState& state) {
    const int N = game.player_count();
    const int n = game.total_dim();
    const RowMap Xmat(state.estimates.data(), N, n);

    const RowMat rho = g.laplacian() * Xmat;                             // (L kron I) X, blocks as rows
    const RowMat LZrho = g.laplacian() * (state.omega.asDiagonal() * rho);  // (L kron I) Z rho

    Eigen::VectorXd out = -stationarity_vector(game, state.estimates, state.sigma);
    out -= Eigen::Map<const Eigen::VectorXd>(LZrho.data(), LZrho.size());
    return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> consensus_decompose(const Eigen::VectorXd& X, int player_count) {
    if (player_count <= 0) throw std::invalid_argument("consensus_decompose: player count must be positive");
    const auto n = X.size() / player_count;
    if (n * player_count != X.size())
        throw std::invalid_argument("consensus_decompose: vector size not divisible by player count");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < player_count; ++i) mean += X.segment(i * n, n);
    mean /= player_count;
    Eigen::VectorXd parallel(X.size());
    for (int i = 0; i < player_count; ++i) parallel.segment(i * n, n) = mean;
    return {parallel, X - parallel};
}

EquilibriumResidual equilibrium_residual(const QuadraticGame& game, const Graph& g,
                                         const Eigen::VectorXd& estimates, const Eigen::VectorXd& sigma) {
    const int N = game.player_count();
    const int n = game.total_dim();
    if (estimates.size() != static_cast<Eigen::Index>(N) * n)
        throw std::invalid_argument("equilibrium_residual: estimate vector size mismatch");
    if (sigma.size() != N) throw std::invalid_argument("equilibrium_residual: sigma size mismatch");
    if (g.size() != N) throw std::invalid_argument("equilibrium_residual: graph size mismatch");

    EquilibriumResidual r;

    // Stationarity treats the penalty subdifferential as a set: on the
    // constraint boundary any scaling of the normal in [0, 1] is admissible,
    // so pick the one that best cancels the gradient. This makes the residual
    // vanish at equilibria with active constraints, where the single-valued
    // selection used by the flow would report a spurious defect.
    double stat_sq = 0.0;
    double feas_sq = 0.0;
    for (int i = 0; i < N; ++i) {
        const auto xi_est = estimates.segment(static_cast<Eigen::Index>(i) * n, n);
        const Eigen::VectorXd own = xi_est.segment(game.block_start(i), game.dim(i));
        Eigen::VectorXd block = game.partial_gradient(i, xi_est);
        if (game.constraint(i)) {
            const auto& con = *game.constraint(i);
            const double gi = game.constraint_value(i, own);
            const double boundary_tol =
                1e-9 * (1.0 + std::abs(con.offset) + con.coeff.cwiseAbs().dot(own.cwiseAbs()));
            if (gi > boundary_tol) {
                block += sigma(i) * con.coeff;
            } else if (std::abs(gi) <= boundary_tol && sigma(i) > 0.0) {
                const double denom = sigma(i) * con.coeff.squaredNorm();
                const double tau = std::clamp(-con.coeff.dot(block) / denom, 0.0, 1.0);
                block += sigma(i) * tau * con.coeff;
            }
            const double viol = game.penalty_value(i, own);
            feas_sq += viol * viol;
        }
        stat_sq += block.squaredNorm();
    }
    r.stationarity = std::sqrt(stat_sq);
    r.feasibility = std::sqrt(feas_sq);

    const RowMap Xmat(estimates.data(), N, n);
    r.consensus = (g.laplacian() * Xmat).norm();
    return r;
}

}  // namespace neseek
