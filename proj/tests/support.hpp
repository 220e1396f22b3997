#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "neseek/game.hpp"
#include "neseek/graph.hpp"
#include "neseek/integrator.hpp"

namespace neseek::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
}

inline Eigen::VectorXd uniform_vector(std::mt19937_64& gen, Eigen::Index size, double lo, double hi) {
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = uniform(gen, lo, hi);
    return v;
}

inline Eigen::MatrixXd uniform_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols,
                                      double lo, double hi) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = uniform(gen, lo, hi);
    return m;
}

/// Random strongly monotone game: positive-definite quad blocks plus small
/// couplings, resampling on the rare draw the constructor rejects. Any
/// constraint keeps the origin strictly feasible, so projection iterations
/// can always start there.
inline QuadraticGame random_game(std::mt19937_64& gen, int max_players = 5, int max_dim = 3,
                                 bool with_constraints = true) {
    std::uniform_int_distribution<int> player_dist(2, max_players);
    std::uniform_int_distribution<int> dim_dist(1, max_dim);
    for (;;) {
        const int N = player_dist(gen);
        std::vector<int> dims(static_cast<std::size_t>(N));
        for (auto& d : dims) d = dim_dist(gen);
        std::vector<Eigen::MatrixXd> quad;
        std::vector<Eigen::VectorXd> linear;
        std::vector<std::optional<PlayerConstraint>> constraints(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i) {
            const int ni = dims[static_cast<std::size_t>(i)];
            const Eigen::MatrixXd b = uniform_matrix(gen, ni, ni, -1.0, 1.0);
            quad.push_back(b * b.transpose() +
                           uniform(gen, 0.6, 1.6) * Eigen::MatrixXd::Identity(ni, ni));
            linear.push_back(uniform_vector(gen, ni, -2.0, 2.0));
            if (with_constraints && uniform(gen, 0.0, 1.0) < 0.7) {
                PlayerConstraint con;
                con.coeff = uniform_vector(gen, ni, -1.0, 1.0);
                if (con.coeff.norm() < 0.1) con.coeff(0) += 1.0;
                con.offset = uniform(gen, 0.3, 2.0);
                constraints[static_cast<std::size_t>(i)] = con;
            }
        }
        QuadraticGame::CouplingMap coupling;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                if (i != j && uniform(gen, 0.0, 1.0) < 0.5) {
                    coupling[{i, j}] = 0.15 * uniform_matrix(gen, dims[static_cast<std::size_t>(i)],
                                                             dims[static_cast<std::size_t>(j)], -1.0, 1.0);
                }
        try {
            return QuadraticGame(dims, quad, linear, constraints, coupling);
        } catch (const std::invalid_argument&) {
            // not strongly monotone with this draw; resample
        }
    }
}

/// Random connected graph: a random spanning tree plus extra edges, weights
/// in [0.5, 2].
inline Graph random_connected_graph(std::mt19937_64& gen, int node_count) {
    std::vector<GraphEdge> edges;
    for (int i = 1; i < node_count; ++i) {
        std::uniform_int_distribution<int> pick(0, i - 1);
        edges.push_back({pick(gen), i, uniform(gen, 0.5, 2.0)});
    }
    for (int i = 0; i < node_count; ++i)
        for (int j = i + 1; j < node_count; ++j)
            if (uniform(gen, 0.0, 1.0) < 0.2) edges.push_back({i, j, uniform(gen, 0.5, 2.0)});
    return Graph::from_edges(node_count, edges);
}

/// Random symmetric weight matrix with edge probability p; may be
/// disconnected (callers check).
inline Eigen::MatrixXd random_weights(std::mt19937_64& gen, int node_count, double p) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(node_count, node_count);
    for (int i = 0; i < node_count; ++i)
        for (int j = i + 1; j < node_count; ++j)
            if (uniform(gen, 0.0, 1.0) < p) w(i, j) = w(j, i) = uniform(gen, 0.5, 2.0);
    return w;
}

/// Central finite difference of J_i with respect to player i's own action.
inline Eigen::VectorXd finite_diff_partial(const QuadraticGame& game, int i, const Eigen::VectorXd& x,
                                           double h = 1e-5) {
    Eigen::VectorXd grad(game.dim(i));
    for (int k = 0; k < game.dim(i); ++k) {
        Eigen::VectorXd xp = x;
        Eigen::VectorXd xm = x;
        const int idx = game.block_start(i) + k;
        xp(idx) += h;
        xm(idx) -= h;
        grad(k) = (game.cost(i, xp) - game.cost(i, xm)) / (2.0 * h);
    }
    return grad;
}

/// Two scalar players with a hand-solvable KKT system:
///   J_1 = (x_1 - 1)^2 subject to x_1 <= 1/2,  J_2 = (x_2 + 1)^2 free.
/// Equilibrium (1/2, -1) with multipliers (1, 0), first constraint active.
inline QuadraticGame two_player_kkt_game() {
    std::vector<Eigen::MatrixXd> quad{Eigen::MatrixXd::Constant(1, 1, 2.0),
                                      Eigen::MatrixXd::Constant(1, 1, 2.0)};
    std::vector<Eigen::VectorXd> linear{Eigen::VectorXd::Constant(1, -2.0),
                                        Eigen::VectorXd::Constant(1, 2.0)};
    std::vector<std::optional<PlayerConstraint>> constraints(2);
    constraints[0] = PlayerConstraint{Eigen::VectorXd::Constant(1, 1.0), 0.5};
    return QuadraticGame({1, 1}, quad, linear, constraints);
}

/// Unconstrained two scalar players with equilibrium (1, -1).
inline QuadraticGame two_player_free_game() {
    std::vector<Eigen::MatrixXd> quad{Eigen::MatrixXd::Constant(1, 1, 2.0),
                                      Eigen::MatrixXd::Constant(1, 1, 2.0)};
    std::vector<Eigen::VectorXd> linear{Eigen::VectorXd::Constant(1, -2.0),
                                        Eigen::VectorXd::Constant(1, 2.0)};
    return QuadraticGame({1, 1}, quad, linear, std::vector<std::optional<PlayerConstraint>>(2));
}

/// Largest per-player distance between an estimate stack and a profile.
inline double worst_player_distance(const QuadraticGame& game, const Eigen::VectorXd& estimates,
                                    const Eigen::VectorXd& x_star) {
    const int n = game.total_dim();
    double worst = 0.0;
    for (int i = 0; i < game.player_count(); ++i)
        worst = std::max(worst,
                         (estimates.segment(static_cast<Eigen::Index>(i) * n, n) - x_star).norm());
    return worst;
}

/// Runs fn and returns the std::exception message it throws, or an empty
/// string when nothing is thrown (for asserting on message substrings).
template <typename Fn>
inline std::string thrown_message(Fn&& fn) {
    try {
        std::forward<Fn>(fn)();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

/// The recorded sample closest to model time t, or nullptr when none is
/// within tol.
inline const TrajectorySample* sample_at(const Trajectory& traj, double t, double tol = 1e-9) {
    const TrajectorySample* best = nullptr;
    double best_gap = tol;
    for (const auto& s : traj.samples)
        if (std::abs(s.t - t) <= best_gap) {
            best = &s;
            best_gap = std::abs(s.t - t);
        }
    return best;
}

}  // namespace neseek::testing
