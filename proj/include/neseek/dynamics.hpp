#pragma once

#include <Eigen/Dense>

#include <utility>

#include "neseek/game.hpp"
#include "neseek/graph.hpp"

namespace neseek {

/// Prescribed-time gain schedule. The time gain k(t) = sec^2(pi t / 2 Tp)
/// satisfies k(0) = 1 and diverges as t approaches the prescribed time, which
/// compresses infinite-horizon convergence into [0, Tp).
struct GainSchedule {
    double prescribed_time = 10.0;  // Tp
    double q_initial = 0.001;       // q(0) > 0
    Eigen::VectorXd gamma;          // per-player edge-gain adaptation rates, > 0

    void validate(int player_count) const;
};

/// k(t) = sec^2(pi t / 2 Tp). Throws std::domain_error outside [0, Tp).
[[nodiscard]] double time_gain(const GainSchedule& schedule, double t);

/// Full state of the seeking dynamics. `estimates` stacks each player's
/// estimate of the whole action profile (N blocks of size n); block i of
/// estimate i is player i's own action. sigma and omega are the adaptive
/// penalty and edge gains, both nondecreasing along trajectories; q is the
/// shared integrator gain with q-dot = k q.
struct SeekerState {
    Eigen::VectorXd estimates;  // size N * n
    Eigen::VectorXd sigma;      // size N
    Eigen::VectorXd omega;      // size N
    double q = 0.0;
    double t = 0.0;  // wall-clock model time in [0, Tp)
    double s = 0.0;  // reparameterized time, s = tan(pi t / 2 Tp)
};

/// Time derivative of a SeekerState (without the clock components).
struct SeekerDerivative {
    Eigen::VectorXd estimates;
    Eigen::VectorXd sigma;
    Eigen::VectorXd omega;
    double q = 0.0;
};

/// Player i's local disagreement rho^i = sum_j a_ij (x^i - x^j), a size-n
/// vector. Stacking all rho^i equals (L kron I_n) X.
[[nodiscard]] Eigen::VectorXd local_disagreement(const Eigen::VectorXd& estimates, const Graph& g, int i);

/// All local disagreements as an N x n matrix (row i is rho^i).
[[nodiscard]] Eigen::MatrixXd disagreement_matrix(const Eigen::VectorXd& estimates, const Graph& g);

/// Own-block selection (the action of the row-selection matrix for player i)
/// and its complement, preserving index order.
[[nodiscard]] Eigen::VectorXd select_own(const QuadraticGame& game, int i, const Eigen::VectorXd& v);
[[nodiscard]] Eigen::VectorXd select_others(const QuadraticGame& game, int i, const Eigen::VectorXd& v);

/// The seeking dynamics assembled player by player, with the time gain k(t)
/// factored out: the returned derivative d satisfies (full derivative) =
/// k(t) * d. Used directly by the reparameterized-time integrator.
[[nodiscard]] SeekerDerivative gain_free_field(const QuadraticGame& game, const Graph& g,
                                               const GainSchedule& schedule, const SeekerState& state);

/// Full time-domain vector field including k(t). Throws std::domain_error if
/// state.t is outside [0, Tp).
[[nodiscard]] SeekerDerivative vector_field(const QuadraticGame& game, const Graph& g,
                                            const GainSchedule& schedule, const SeekerState& state);

/// Independent compact-form assembly of the estimate derivative (gain-free):
///   -[ R^T (F(X) + eta(x) sigma) + (L kron I) Z rho ],  Z = diag{omega_i I_n}.
/// Kept as a second algebraic route for cross-checking the per-player
/// assembly; not used by the integrator.
[[nodiscard]] Eigen::VectorXd compact_estimate_field(const QuadraticGame& game, const Graph& g,
                                                     const SeekerState& state);

/// Stacked vector R^T (F(X) + eta(x) sigma): block i holds player i's own
/// gradient plus penalty force at its own coordinates, zero elsewhere.
[[nodiscard]] Eigen::VectorXd stationarity_vector(const QuadraticGame& game, const Eigen::VectorXd& estimates,
                                                  const Eigen::VectorXd& sigma);

/// Orthogonal split of a stacked estimate vector into its consensus component
/// (all N blocks equal to the blockwise mean) and the complement.
[[nodiscard]] std::pair<Eigen::VectorXd, Eigen::VectorXd> consensus_decompose(const Eigen::VectorXd& X,
                                                                              int player_count);

struct EquilibriumResidual {
    double stationarity = 0.0;  // || R^T (F(X) + eta(x) sigma) ||
    double feasibility = 0.0;   // || G(x) ||
    double consensus = 0.0;     // || (L kron I) X ||
};

/// The three residuals that vanish exactly at a consensus state on the Nash
/// equilibrium with a compatible penalty-gain vector. On a constraint
/// boundary the stationarity term uses the best subdifferential element, so
/// actively constrained equilibria report zero as well.
[[nodiscard]] EquilibriumResidual equilibrium_residual(const QuadraticGame& game, const Graph& g,
                                                       const Eigen::VectorXd& estimates,
                                                       const Eigen::VectorXd& sigma);

}  // namespace neseek
