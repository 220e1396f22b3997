#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <vector>

#include "neseek/dynamics.hpp"
#include "neseek/game.hpp"
#include "neseek/graph.hpp"
#include "neseek/integrator.hpp"

namespace neseek {

/// Ground truth about a game: the exact equilibrium with its KKT
/// certificate, plus the analysis constants behind the convergence-rate
/// bound. solve_kkt fills the equilibrium part; analyze_game also fills the
/// spectral/rate part (NaN until then).
struct EquilibriumReport {
    Eigen::VectorXd x_star;        ///< equilibrium action profile, size n
    Eigen::VectorXd multipliers;   ///< per-player KKT multiplier, >= 0 (0 if no/inactive constraint)
    std::vector<bool> active_set;  ///< per player: constraint tight at x_star
    double mu = 0.0;               ///< strong-monotonicity constant of the pseudo-gradient
    double l = 0.0;                ///< Lipschitz constant of the pseudo-gradient
    double lambda2 = std::numeric_limits<double>::quiet_NaN();
    double omega_bar = std::numeric_limits<double>::quiet_NaN();   ///< edge-gain threshold
    double omega_star = std::numeric_limits<double>::quiet_NaN();  ///< reference min edge gain used for xi
    double theta = std::numeric_limits<double>::quiet_NaN();       ///< smallest eigenvalue of xi
    Eigen::Matrix4d xi = Eigen::Matrix4d::Zero();
    bool xi_positive_definite = false;
};

/// Thrown when no active-set pattern satisfies the KKT checks; carries the
/// smallest constraint/sign violation seen across all patterns.
struct KktFailure : std::runtime_error {
    KktFailure(const std::string& what, double residual) : std::runtime_error(what), best_residual(residual) {}
    double best_residual = 0.0;
};

/// Thrown when the projected iteration fails to reach its tolerance.
struct ProjectionFailure : std::runtime_error {
    ProjectionFailure(const std::string& what, double residual)
        : std::runtime_error(what), last_residual(residual) {}
    double last_residual = 0.0;
};

/// Exact equilibrium by enumerating the 2^C per-player active/inactive
/// constraint patterns (C = number of constrained players) and solving the
/// linear stationarity system of each; returns the pattern passing all KKT
/// sign and feasibility checks.
[[nodiscard]] EquilibriumReport solve_kkt(const QuadraticGame& game);

/// Cross-validation oracle: iterates x <- project(x - step * F(x)) with
/// per-player halfspace projection until the update norm falls below tol.
/// step = 0 selects the default mu / l^2 (any step < 2 mu / l^2 contracts).
[[nodiscard]] Eigen::VectorXd projected_pseudo_gradient(const QuadraticGame& game, double step = 0.0,
                                                        long max_iters = 1000000, double tol = 1e-12);

/// Euclidean projection of a point onto the halfspace coeff . x <= offset.
[[nodiscard]] Eigen::VectorXd halfspace_project(const Eigen::VectorXd& point, const Eigen::VectorXd& coeff,
                                                double offset);

/// The adaptive edge-gain threshold (l^2 + l mu) / (mu lambda2^2): the rate
/// matrix below is positive definite exactly when the reference min edge
/// gain exceeds this value.
[[nodiscard]] double omega_lower_bound(double mu, double l, double lambda2);

struct XiResult {
    Eigen::Matrix4d xi = Eigen::Matrix4d::Zero();
    double theta = 0.0;  ///< smallest eigenvalue of xi
    bool positive_definite = false;
};

/// The 4x4 symmetric rate matrix
///   [[mu/N, -l/sqrt(N), 0, 0], [-l/sqrt(N), omega_star * lambda2^2 - l, 0, 0],
///    [0,0,1,0], [0,0,0,1]]
/// whose smallest eigenvalue theta sets the decay bound dV/dt <= -k(t) theta V.
/// A nonpositive theta is reported through the flag, not silently.
[[nodiscard]] XiResult xi_matrix(int player_count, double mu, double l, double omega_star, double lambda2);

/// Theoretical envelope 2 * V0 * exp(-(2 theta Tp / pi) * tan(pi t / 2 Tp)):
/// squared distance to the equilibrium stays below it once the edge gains
/// have crossed omega_lower_bound.
[[nodiscard]] double decay_envelope(double v0, double theta, const GainSchedule& schedule, double t);

/// The monitored energy
///   V = 1/2 ||X - 1 kron x*||^2 + 1/(2q) ||sigma - sigma_ref||^2
///       + 1/(2q) sum_i (omega_i - omega_ref_i)^2 / gamma_i.
/// Nonincreasing along trajectories once min(omega_ref) > omega_lower_bound.
[[nodiscard]] double lyapunov_value(const SeekerState& state, const Eigen::VectorXd& x_star,
                                    const Eigen::VectorXd& sigma_ref, const Eigen::VectorXd& omega_ref,
                                    const Eigen::VectorXd& gamma);

/// solve_kkt plus the spectral/rate quantities for a concrete topology.
/// omega_star = 0 selects the default 2 * omega_bar reference.
[[nodiscard]] EquilibriumReport analyze_game(const QuadraticGame& game, const Graph& g,
                                             double omega_star = 0.0);

/// Fills each sample's dist_to_nash (largest per-player estimate error
/// against x_star) and lyapunov (with sigma/omega references taken from the
/// final sample, the documented default).
void annotate_trajectory(Trajectory& traj, const QuadraticGame& game, const EquilibriumReport& report,
                         const GainSchedule& schedule);

}  // namespace neseek
