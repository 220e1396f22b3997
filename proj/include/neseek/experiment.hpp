#pragma once

#include <optional>
#include <string>
#include <vector>

#include "neseek/integrator.hpp"
#include "neseek/oracle.hpp"
#include "neseek/scenario.hpp"

namespace neseek {

/// True when the NE_SEEK_LOG environment variable is set to anything but
/// "" or "0"; log_line then writes to stderr.
[[nodiscard]] bool logging_enabled();
void log_line(const std::string& message);

/// Terminal metrics of one simulated run plus the oracle report it was
/// checked against.
struct RunSummary {
    std::string scenario_name;
    SimStatus status = SimStatus::horizon_reached;
    bool q_capped = false;
    double terminal_t = 0.0;
    double terminal_s = 0.0;
    double terminal_consensus_error = 0.0;
    double terminal_dist_to_nash = 0.0;
    double terminal_lyapunov = 0.0;
    double max_violation_over_run = 0.0;
    Eigen::VectorXd terminal_sigma;
    Eigen::VectorXd terminal_omega;
    double terminal_q = 0.0;
    long accepted_steps = 0;
    long rejected_steps = 0;
    EquilibriumReport report;
};

/// Writes the trajectory in the documented column order: t, s, the N*n
/// estimate components in player-major order, sigma_1..N, omega_1..N, q,
/// consensus_error, dist_to_nash, max_constraint_violation, lyapunov_V.
/// 17 significant digits per value; header row included.
void write_trajectory_csv(const Trajectory& traj, const QuadraticGame& game, const std::string& path);

/// Full experiment: oracle analysis, simulation, annotation, optional CSV
/// export (csv_path empty = no file), summary assembly.
[[nodiscard]] RunSummary run(const Scenario& scenario, const std::string& csv_path = "");

enum class SweepParam { prescribed_time, seed, amplitude, gamma_scale };

[[nodiscard]] std::optional<SweepParam> sweep_param_from_string(const std::string& name);
[[nodiscard]] std::string to_string(SweepParam param);

/// Returns a copy of the scenario with the swept parameter replaced (the
/// gamma scale multiplies every gamma entry).
[[nodiscard]] Scenario apply_sweep_value(Scenario scenario, SweepParam param, double value);

/// One run per value; when out_dir is nonempty each run writes its
/// trajectory CSV there.
[[nodiscard]] std::vector<RunSummary> sweep(const Scenario& scenario, SweepParam param,
                                            const std::vector<double>& values,
                                            const std::string& out_dir = "");

[[nodiscard]] std::string format_summary(const RunSummary& summary);
[[nodiscard]] std::string format_report(const EquilibriumReport& report);

/// Machine-readable CSV table of terminal metrics, one row per swept value.
[[nodiscard]] std::string sweep_table(SweepParam param, const std::vector<double>& values,
                                      const std::vector<RunSummary>& summaries);

}  // namespace neseek
