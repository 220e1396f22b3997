#include "neseek/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace neseek {

bool logging_enabled() {
    const char* value = std::getenv("NE_SEEK_LOG");
    return value != nullptr && value[0] != '\0' && std::string(value) != "0";
}

void log_line(const std::string& message) {
    if (logging_enabled()) std::cerr << "[neseek] " << message << "\n";
}

namespace {

/// 17 significant digits — enough to round-trip a double exactly.
std::string fmt(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string fmt_vector(const Eigen::VectorXd& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) out += ", ";
        out += fmt(v(i));
    }
    return out + "]";
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const QuadraticGame& game, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("csv: cannot open '" + path + "' for writing");
    const int N = game.player_count();
    const Eigen::Index n = game.total_dim();

    out << "t,s";
    for (int i = 1; i <= N; ++i)
        for (Eigen::Index j = 1; j <= n; ++j) out << ",x" << i << "_" << j;
    for (int i = 1; i <= N; ++i) out << ",sigma_" << i;
    for (int i = 1; i <= N; ++i) out << ",omega_" << i;
    out << ",q,consensus_error,dist_to_nash,max_constraint_violation,lyapunov_V\n";

    for (const TrajectorySample& sample : traj.samples) {
        out << fmt(sample.t) << ',' << fmt(sample.s);
        for (Eigen::Index k = 0; k < sample.estimates.size(); ++k) out << ',' << fmt(sample.estimates(k));
        for (Eigen::Index i = 0; i < sample.sigma.size(); ++i) out << ',' << fmt(sample.sigma(i));
        for (Eigen::Index i = 0; i < sample.omega.size(); ++i) out << ',' << fmt(sample.omega(i));
        out << ',' << fmt(sample.q) << ',' << fmt(sample.consensus_error) << ','
            << fmt(sample.dist_to_nash) << ',' << fmt(sample.max_violation) << ','
            << fmt(sample.lyapunov) << '\n';
    }
    if (!out) throw std::runtime_error("csv: write to '" + path + "' failed");
}

RunSummary run(const Scenario& scenario, const std::string& csv_path) {
    const QuadraticGame game = make_game(scenario);
    const Graph g = make_graph(scenario);
    const GainSchedule schedule = make_schedule(scenario);
    const SeekerState initial = make_initial_state(scenario, game);
    log_line("run '" + scenario.name + "': Tp=" + fmt(schedule.prescribed_time) +
             " s_max=" + fmt(scenario.integrator.s_max));

    RunSummary summary;
    summary.scenario_name = scenario.name;
    summary.report = analyze_game(game, g);

    Trajectory traj = simulate(game, g, schedule, initial, scenario.integrator);
    annotate_trajectory(traj, game, summary.report, schedule);

    summary.status = traj.status;
    summary.q_capped = traj.q_capped;
    summary.accepted_steps = traj.accepted_steps;
    summary.rejected_steps = traj.rejected_steps;
    const TrajectorySample& last = traj.samples.back();
    summary.terminal_t = last.t;
    summary.terminal_s = last.s;
    summary.terminal_consensus_error = last.consensus_error;
    summary.terminal_dist_to_nash = last.dist_to_nash;
    summary.terminal_lyapunov = last.lyapunov;
    summary.terminal_sigma = last.sigma;
    summary.terminal_omega = last.omega;
    summary.terminal_q = last.q;
    summary.max_violation_over_run = 0.0;
    for (const TrajectorySample& sample : traj.samples)
        summary.max_violation_over_run = std::max(summary.max_violation_over_run, sample.max_violation);

    if (!csv_path.empty()) write_trajectory_csv(traj, game, csv_path);
    log_line("run '" + scenario.name + "': status=" + to_string(summary.status) +
             " dist=" + fmt(summary.terminal_dist_to_nash) +
             " steps=" + std::to_string(summary.accepted_steps) + "+" +
             std::to_string(summary.rejected_steps));
    return summary;
}

std::optional<SweepParam> sweep_param_from_string(const std::string& name) {
    if (name == "tp" || name == "prescribed_time") return SweepParam::prescribed_time;
    if (name == "seed") return SweepParam::seed;
    if (name == "amplitude") return SweepParam::amplitude;
    if (name == "gamma-scale" || name == "gamma_scale") return SweepParam::gamma_scale;
    return std::nullopt;
}

std::string to_string(SweepParam param) {
    switch (param) {
        case SweepParam::prescribed_time: return "tp";
        case SweepParam::seed: return "seed";
        case SweepParam::amplitude: return "amplitude";
        case SweepParam::gamma_scale: return "gamma_scale";
    }
    return "unknown";
}

Scenario apply_sweep_value(Scenario scenario, SweepParam param, double value) {
    switch (param) {
        case SweepParam::prescribed_time:
            if (!(value > 0.0)) throw std::invalid_argument("sweep: prescribed time must be positive");
            scenario.schedule.prescribed_time = value;
            break;
        case SweepParam::seed:
            if (value < 0.0) throw std::invalid_argument("sweep: seed must be nonnegative");
            scenario.seed = static_cast<std::uint64_t>(value);
            break;
        case SweepParam::amplitude:
            if (value < 0.0) throw std::invalid_argument("sweep: amplitude must be nonnegative");
            scenario.amplitude = value;
            break;
        case SweepParam::gamma_scale:
            if (!(value > 0.0)) throw std::invalid_argument("sweep: gamma scale must be positive");
            scenario.schedule.gamma *= value;
            break;
    }
    return scenario;
}

namespace {

std::string file_token(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%g", value);
    std::string token = buffer;
    for (char& c : token)
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    return token;
}

}  // namespace

std::vector<RunSummary> sweep(const Scenario& scenario, SweepParam param, const std::vector<double>& values,
                              const std::string& out_dir) {
    std::vector<RunSummary> summaries;
    summaries.reserve(values.size());
    for (double value : values) {
        const Scenario varied = apply_sweep_value(scenario, param, value);
        std::string csv_path;
        if (!out_dir.empty())
            csv_path = out_dir + "/" + varied.name + "_" + to_string(param) + "_" + file_token(value) +
                       ".csv";
        summaries.push_back(run(varied, csv_path));
    }
    return summaries;
}

std::string format_summary(const RunSummary& summary) {
    std::ostringstream out;
    out << "scenario: " << summary.scenario_name << "\n"
        << "status: " << to_string(summary.status) << "\n"
        << "terminal_t: " << fmt(summary.terminal_t) << "\n"
        << "terminal_s: " << fmt(summary.terminal_s) << "\n"
        << "terminal_consensus_error: " << fmt(summary.terminal_consensus_error) << "\n"
        << "terminal_dist_to_nash: " << fmt(summary.terminal_dist_to_nash) << "\n"
        << "max_constraint_violation: " << fmt(summary.max_violation_over_run) << "\n"
        << "terminal_lyapunov: " << fmt(summary.terminal_lyapunov) << "\n"
        << "terminal_sigma: " << fmt_vector(summary.terminal_sigma) << "\n"
        << "terminal_omega: " << fmt_vector(summary.terminal_omega) << "\n"
        << "terminal_q: " << fmt(summary.terminal_q) << (summary.q_capped ? " (capped)" : "") << "\n"
        << "steps: " << summary.accepted_steps << " accepted, " << summary.rejected_steps << " rejected\n";
    return out.str();
}

std::string format_report(const EquilibriumReport& report) {
    std::ostringstream out;
    out << "x_star: " << fmt_vector(report.x_star) << "\n"
        << "multipliers: " << fmt_vector(report.multipliers) << "\n"
        << "active_set: [";
    for (std::size_t i = 0; i < report.active_set.size(); ++i)
        out << (i > 0 ? ", " : "") << (report.active_set[i] ? "true" : "false");
    out << "]\n"
        << "mu: " << fmt(report.mu) << "\n"
        << "l: " << fmt(report.l) << "\n"
        << "lambda2: " << fmt(report.lambda2) << "\n"
        << "omega_bar: " << fmt(report.omega_bar) << "\n"
        << "omega_star: " << fmt(report.omega_star) << "\n"
        << "theta: " << fmt(report.theta) << "\n"
        << "xi_positive_definite: " << (report.xi_positive_definite ? "true" : "false") << "\n";
    return out.str();
}

std::string sweep_table(SweepParam param, const std::vector<double>& values,
                        const std::vector<RunSummary>& summaries) {
    std::ostringstream out;
    out << to_string(param)
        << ",status,terminal_t,terminal_dist_to_nash,terminal_consensus_error,"
           "max_constraint_violation,accepted_steps\n";
    for (std::size_t i = 0; i < summaries.size() && i < values.size(); ++i) {
        const RunSummary& s = summaries[i];
        out << fmt(values[i]) << ',' << to_string(s.status) << ',' << fmt(s.terminal_t) << ','
            << fmt(s.terminal_dist_to_nash) << ',' << fmt(s.terminal_consensus_error) << ','
            << fmt(s.max_violation_over_run) << ',' << s.accepted_steps << '\n';
    }
    return out.str();
}

}  // namespace neseek
