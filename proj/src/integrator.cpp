#include "neseek/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neseek/ode.hpp"

namespace neseek {

namespace {
constexpr double kPi = std::numbers::pi;
}

double default_s_max() { return std::tan(0.995 * kPi / 2.0); }

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw std::invalid_argument("integrator config: tolerances must be positive");
    if (!(s_max > 0.0)) throw std::invalid_argument("integrator config: s_max must be positive");
    if (max_steps <= 0) throw std::invalid_argument("integrator config: max_steps must be positive");
    if (!(q_cap > 0.0)) throw std::invalid_argument("integrator config: q_cap must be positive");
    if (converge_tol < 0.0) throw std::invalid_argument("integrator config: converge_tol must be >= 0");
    if (sample_count < 1) throw std::invalid_argument("integrator config: sample_count must be >= 1");
}

std::string to_string(SimStatus status) {
    switch (status) {
        case SimStatus::prescribed_time_reached: return "prescribed_time_reached";
        case SimStatus::horizon_reached: return "horizon_reached";
        case SimStatus::converged: return "converged";
        case SimStatus::q_overflow: return "q_overflow";
        case SimStatus::step_budget: return "step_budget";
    }
    return "unknown";
}

bool is_failure(SimStatus status) {
    return status == SimStatus::q_overflow || status == SimStatus::step_budget;
}

double reparameterize(double prescribed_time, double t) {
    if (!(prescribed_time > 0.0)) throw std::domain_error("reparameterize: prescribed time must be positive");
    if (t < 0.0 || t >= prescribed_time)
        throw std::domain_error("reparameterize: t must lie in [0, prescribed time)");
    return std::tan(kPi * t / (2.0 * prescribed_time));
}

double inverse_reparameterize(double prescribed_time, double s) {
    if (!(prescribed_time > 0.0))
        throw std::domain_error("inverse_reparameterize: prescribed time must be positive");
    if (s < 0.0) throw std::domain_error("inverse_reparameterize: s must be >= 0");
    return (2.0 * prescribed_time / kPi) * std::atan(s);
}

double log_closed_form_q(const GainSchedule& schedule, double t) {
    const double s = reparameterize(schedule.prescribed_time, t);
    return std::log(schedule.q_initial) + (2.0 * schedule.prescribed_time / kPi) * s;
}

double closed_form_q(const GainSchedule& schedule, double t) {
    return std::exp(log_closed_form_q(schedule, t));
}

CappedValue closed_form_q(const GainSchedule& schedule, double t, double q_cap) {
    if (!(q_cap > 0.0)) throw std::invalid_argument("closed_form_q: q_cap must be positive");
    const double log_q = log_closed_form_q(schedule, t);
    if (log_q > std::log(q_cap)) return {q_cap, true};
    return {std::exp(log_q), false};
}

Eigen::VectorXd pack_state(const SeekerState& state) {
    const auto nn = state.estimates.size();
    const auto N = state.sigma.size();
    Eigen::VectorXd flat(nn + 2 * N + 1);
    flat << state.estimates, state.sigma, state.omega, state.q;
    return flat;
}

SeekerState unpack_state(const Eigen::VectorXd& flat, int player_count, int total_dim) {
    const Eigen::Index nn = static_cast<Eigen::Index>(player_count) * total_dim;
    const Eigen::Index N = player_count;
    if (flat.size() != nn + 2 * N + 1)
        throw std::invalid_argument("unpack_state: flat vector has wrong length");
    SeekerState state;
    state.estimates = flat.head(nn);
    state.sigma = flat.segment(nn, N);
    state.omega = flat.segment(nn + N, N);
    state.q = flat(nn + 2 * N);
    return state;
}

namespace {

/// Sample times: cfg.sample_count uniform intervals over [0, t_end] with the
/// 0.99 * Tp mark inserted exactly when it falls strictly inside the horizon.
std::vector<double> sample_times(double prescribed_time, double t_end, int sample_count) {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(sample_count) + 2);
    for (int k = 0; k <= sample_count; ++k)
        grid.push_back(t_end * static_cast<double>(k) / static_cast<double>(sample_count));
    const double mark = 0.99 * prescribed_time;
    if (mark > 0.0 && mark < t_end) {
        auto it = std::lower_bound(grid.begin(), grid.end(), mark);
        if (it == grid.end() || std::abs(*it - mark) > 1e-12 * prescribed_time) grid.insert(it, mark);
    }
    return grid;
}

}  // namespace

Trajectory simulate(const QuadraticGame& game, const Graph& g, const GainSchedule& schedule,
                    const SeekerState& initial, const IntegratorConfig& cfg) {
    cfg.validate();
    schedule.validate(game.player_count());
    if (!g.is_connected()) throw std::invalid_argument("simulate: graph disconnected");
    if (g.size() != game.player_count())
        throw std::invalid_argument("simulate: graph size does not match player count");

    const int N = game.player_count();
    const int n = game.total_dim();
    const Eigen::Index nn = static_cast<Eigen::Index>(N) * n;
    if (initial.estimates.size() != nn || initial.sigma.size() != N || initial.omega.size() != N)
        throw std::invalid_argument("simulate: initial state dimensions do not match game");
    if (initial.t != 0.0 || initial.s != 0.0)
        throw std::invalid_argument("simulate: initial state must start at t = s = 0");
    if (!(initial.q > 0.0)) throw std::invalid_argument("simulate: initial q must be positive");
    if ((initial.sigma.array() < 0.0).any() || (initial.omega.array() < 0.0).any())
        throw std::invalid_argument("simulate: initial sigma and omega must be nonnegative");

    const double Tp = schedule.prescribed_time;
    const double c = 2.0 * Tp / kPi;  // ds/dt = k / c, so d(state)/ds = c * gain-free field
    const Eigen::Index q_index = nn + 2 * N;

    OdeRhs rhs = [&](double /*s*/, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        SeekerState st = unpack_state(y, N, n);
        const bool at_cap = st.q >= cfg.q_cap;
        st.q = std::min(st.q, cfg.q_cap);
        const SeekerDerivative d = gain_free_field(game, g, schedule, st);
        dy.resize(y.size());
        dy.head(nn) = c * d.estimates;
        dy.segment(nn, N) = c * d.sigma;
        dy.segment(nn + N, N) = c * d.omega;
        dy(q_index) = at_cap ? 0.0 : c * d.q;
    };

    Trajectory traj;
    const double t_end = inverse_reparameterize(Tp, cfg.s_max);
    const std::vector<double> t_grid = sample_times(Tp, t_end, cfg.sample_count);

    Eigen::VectorXd y = pack_state(initial);
    Rk45Integrator stepper(rhs, cfg.rel_tol, cfg.abs_tol);
    long budget = cfg.max_steps;

    auto record = [&](double t, double s) {
        TrajectorySample sample;
        sample.t = t;
        sample.s = s;
        SeekerState st = unpack_state(y, N, n);
        sample.estimates = std::move(st.estimates);
        sample.sigma = std::move(st.sigma);
        sample.omega = std::move(st.omega);
        sample.q = st.q;
        sample.consensus_error = disagreement_matrix(sample.estimates, g).norm();
        double violation = 0.0;
        for (int i = 0; i < N; ++i) {
            const Eigen::VectorXd xi =
                sample.estimates.segment(static_cast<Eigen::Index>(i) * n + game.block_start(i), game.dim(i));
            violation = std::max(violation, game.penalty_value(i, xi));
        }
        sample.max_violation = violation;
        traj.samples.push_back(std::move(sample));
    };

    record(0.0, 0.0);
    bool stopped_early = false;
    double s = 0.0;
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double s_target = reparameterize(Tp, t_grid[k]);
        try {
            s = stepper.advance(s, s_target, y, budget);
        } catch (const StepBudgetExhausted& e) {
            if (e.position > s + 1e-12) record(inverse_reparameterize(Tp, e.position), e.position);
            traj.status = SimStatus::step_budget;
            stopped_early = true;
            break;
        } catch (const OdeError& e) {
            throw IntegrationError(std::string("simulate: ") + e.what(),
                                   static_cast<int>(traj.samples.size()) - 1, e.position);
        }
        // A step that jumps across the cap can overshoot arbitrarily far
        // (the derivative only vanishes at evaluation points at or above the
        // cap), so clamp the stored gain before recording.
        if (y(q_index) >= cfg.q_cap) y(q_index) = cfg.q_cap;
        record(t_grid[k], s_target);

        if (y(q_index) >= cfg.q_cap) {
            traj.q_capped = true;
            if (cfg.stop_on_q_cap) {
                traj.status = SimStatus::q_overflow;
                stopped_early = true;
                break;
            }
        }
        if (cfg.converge_tol > 0.0) {
            const TrajectorySample& last = traj.samples.back();
            const EquilibriumResidual res = equilibrium_residual(game, g, last.estimates, last.sigma);
            if (res.stationarity <= cfg.converge_tol && res.feasibility <= cfg.converge_tol &&
                res.consensus <= cfg.converge_tol) {
                traj.status = SimStatus::converged;
                stopped_early = true;
                break;
            }
        }
    }
    if (!stopped_early)
        traj.status = (t_end >= 0.99 * Tp - 1e-9 * Tp) ? SimStatus::prescribed_time_reached
                                                       : SimStatus::horizon_reached;
    traj.accepted_steps = stepper.accepted();
    traj.rejected_steps = stepper.rejected();
    return traj;
}

}  // namespace neseek
