#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "neseek/dynamics.hpp"
#include "neseek/game.hpp"
#include "neseek/graph.hpp"

namespace neseek {

/// Default reparameterized-time horizon tan(0.995 * pi / 2), i.e. model time
/// 0.995 * Tp — just short of the prescribed time, which is an open endpoint.
[[nodiscard]] double default_s_max();

/// Tuning knobs for simulate().
struct IntegratorConfig {
    double rel_tol = 1e-9;       ///< relative local error tolerance
    double abs_tol = 1e-9;       ///< absolute local error tolerance
    double s_max = default_s_max();
    long max_steps = 20000000;   ///< accepted + rejected step budget
    double q_cap = 1e12;         ///< overflow guard: q is clamped here (flagged, non-fatal)
    bool stop_on_q_cap = false;  ///< if set, stop with status q_overflow once q reaches q_cap
    double converge_tol = 0.0;   ///< > 0 enables early exit when stationarity and consensus
                                 ///< residuals both drop below this threshold
    int sample_count = 400;      ///< uniform-in-model-time sample intervals over the horizon

    void validate() const;
};

enum class SimStatus {
    prescribed_time_reached,  ///< integrated the full horizon, final time >= 0.99 * Tp
    horizon_reached,          ///< integrated the full (user-shortened) horizon short of 0.99 * Tp
    converged,                ///< residuals fell below converge_tol before the horizon
    q_overflow,               ///< q reached q_cap with stop_on_q_cap set
    step_budget,              ///< max_steps exhausted before the horizon
};

[[nodiscard]] std::string to_string(SimStatus status);

/// True for the statuses that should surface as a nonzero exit code.
[[nodiscard]] bool is_failure(SimStatus status);

/// One recorded point of a simulated trajectory. dist_to_nash and lyapunov
/// require the equilibrium oracle and stay NaN until annotate_trajectory
/// fills them in.
struct TrajectorySample {
    double t = 0.0;
    double s = 0.0;
    Eigen::VectorXd estimates;  ///< stacked X at this sample
    Eigen::VectorXd sigma;
    Eigen::VectorXd omega;
    double q = 0.0;
    double consensus_error = 0.0;  ///< || (L kron I) X ||
    double max_violation = 0.0;    ///< max_i G_i(x_i)
    double dist_to_nash = std::numeric_limits<double>::quiet_NaN();
    double lyapunov = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    SimStatus status = SimStatus::horizon_reached;
    bool q_capped = false;  ///< q hit q_cap at some point (guard engaged)
    long accepted_steps = 0;
    long rejected_steps = 0;
};

/// Thrown when integration produces a non-finite state; carries the index of
/// the last successfully recorded sample and the position s of the failure.
struct IntegrationError : std::runtime_error {
    IntegrationError(const std::string& what, int sample_idx, double at)
        : std::runtime_error(what), sample_index(sample_idx), position(at) {}
    int sample_index = 0;
    double position = 0.0;
};

/// s = tan(pi t / 2 Tp): maps model time [0, Tp) onto [0, inf) so the
/// singular gain k(t) disappears from the integrated field.
[[nodiscard]] double reparameterize(double prescribed_time, double t);

/// t = (2 Tp / pi) * atan(s), the inverse map.
[[nodiscard]] double inverse_reparameterize(double prescribed_time, double s);

/// ln q(t) = ln q(0) + (2 Tp / pi) * tan(pi t / 2 Tp) — the exact solution of
/// q-dot = k q in log space, finite for every t in [0, Tp).
[[nodiscard]] double log_closed_form_q(const GainSchedule& schedule, double t);

/// q(t) itself; overflows to +inf near Tp (use the log or capped form there).
[[nodiscard]] double closed_form_q(const GainSchedule& schedule, double t);

struct CappedValue {
    double value = 0.0;
    bool capped = false;
};

/// q(t) clamped at q_cap, with a flag reporting whether the cap engaged.
[[nodiscard]] CappedValue closed_form_q(const GainSchedule& schedule, double t, double q_cap);

/// Flat layout used by the generic integrator: X blocks by player, then
/// sigma, omega, q.
[[nodiscard]] Eigen::VectorXd pack_state(const SeekerState& state);
[[nodiscard]] SeekerState unpack_state(const Eigen::VectorXd& flat, int player_count, int total_dim);

/// Integrates the seeking dynamics in reparameterized time s from 0 to
/// cfg.s_max with an embedded Runge-Kutta pair, recording samples on a
/// uniform-in-t grid (plus the 0.99 * Tp mark). The initial state must have
/// t = s = 0 and q > 0.
[[nodiscard]] Trajectory simulate(const QuadraticGame& game, const Graph& g, const GainSchedule& schedule,
                                  const SeekerState& initial, const IntegratorConfig& cfg = {});

}  // namespace neseek
