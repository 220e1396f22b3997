#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neseek/dynamics.hpp"
#include "neseek/game.hpp"
#include "neseek/graph.hpp"
#include "neseek/integrator.hpp"

namespace neseek {

/// Everything needed to reproduce one experiment: the game, the topology,
/// the gain schedule, the initial conditions, and solver overrides.
struct Scenario {
    std::string name = "unnamed";

    // game
    std::vector<int> player_dims;
    std::vector<Eigen::MatrixXd> quad;
    std::vector<Eigen::VectorXd> linear;
    std::vector<std::optional<PlayerConstraint>> constraints;
    QuadraticGame::CouplingMap coupling;

    // topology (0-based node indices)
    int node_count = 0;
    std::vector<GraphEdge> edges;

    GainSchedule schedule;

    // initial conditions: explicit estimates win; otherwise uniform draws in
    // [-amplitude, amplitude] from a fixed-seed generator
    Eigen::VectorXd sigma0;
    Eigen::VectorXd omega0;
    std::optional<Eigen::VectorXd> initial_estimates;
    std::uint64_t seed = 1;
    double amplitude = 1.0;

    IntegratorConfig integrator;
};

/// The bundled five-player demand-management scenario (decoupled costs).
[[nodiscard]] Scenario power5_scenario();

/// The same scenario with bilinear cross-player coupling 0.1 * I enabled.
[[nodiscard]] Scenario power5_coupled_scenario();

/// Looks a name up among the bundled scenarios.
[[nodiscard]] std::optional<Scenario> builtin_scenario(const std::string& name);

/// Parses and fully validates a scenario from its JSON text. Unknown keys
/// are rejected; errors carry the offending key path or parse location.
[[nodiscard]] Scenario parse_scenario_text(const std::string& text);

/// Reads, parses, and validates a scenario file.
[[nodiscard]] Scenario load_scenario(const std::string& path);

[[nodiscard]] QuadraticGame make_game(const Scenario& scenario);
[[nodiscard]] Graph make_graph(const Scenario& scenario);
[[nodiscard]] GainSchedule make_schedule(const Scenario& scenario);
[[nodiscard]] SeekerState make_initial_state(const Scenario& scenario, const QuadraticGame& game);

/// Builds every component once, surfacing any invariant violation (for
/// example "graph disconnected" or "mu <= 0") before a run starts.
void validate_scenario(const Scenario& scenario);

}  // namespace neseek
