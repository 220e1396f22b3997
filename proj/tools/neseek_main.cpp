#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neseek/experiment.hpp"
#include "neseek/ode.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIntegrator = 2;

/// Accepts a bundled scenario name or a file path.
neseek::Scenario resolve_scenario(const std::string& ref) {
    if (auto builtin = neseek::builtin_scenario(ref)) return *builtin;
    return neseek::load_scenario(ref);
}

struct CommonOptions {
    std::string scenario = "power5";
    std::optional<double> tp;
    std::optional<long long> seed;
    std::optional<double> s_max;
    std::optional<double> tol;
};

void add_common_options(CLI::App& cmd, CommonOptions& opts) {
    cmd.add_option("--scenario", opts.scenario, "Bundled scenario name (power5, power5-coupled) or file path")
        ->capture_default_str();
    cmd.add_option("--tp", opts.tp, "Override the prescribed time");
    cmd.add_option("--seed", opts.seed, "Override the initial-condition seed");
    cmd.add_option("--s-max", opts.s_max, "Override the reparameterized-time horizon");
    cmd.add_option("--tol", opts.tol, "Override both integrator tolerances");
}

neseek::Scenario build_scenario(const CommonOptions& opts) {
    neseek::Scenario sc = resolve_scenario(opts.scenario);
    if (opts.tp) {
        if (!(*opts.tp > 0.0)) throw std::invalid_argument("--tp must be positive");
        sc.schedule.prescribed_time = *opts.tp;
    }
    if (opts.seed) {
        if (*opts.seed < 0) throw std::invalid_argument("--seed must be nonnegative");
        sc.seed = static_cast<std::uint64_t>(*opts.seed);
    }
    if (opts.s_max) sc.integrator.s_max = *opts.s_max;
    if (opts.tol) {
        sc.integrator.rel_tol = *opts.tol;
        sc.integrator.abs_tol = *opts.tol;
    }
    return sc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed prescribed-time Nash-equilibrium-seeking simulator"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    std::string run_out;
    CLI::App* run_cmd = app.add_subcommand("run", "Simulate one scenario and print its summary");
    add_common_options(*run_cmd, run_opts);
    run_cmd->add_option("--out", run_out, "Trajectory CSV output path");

    CommonOptions sweep_opts;
    std::string sweep_param = "tp";
    std::vector<double> sweep_values;
    std::string sweep_out;
    std::string sweep_out_dir;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run one scenario across a list of parameter values");
    add_common_options(*sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--param", sweep_param, "Swept parameter: tp, seed, amplitude, gamma-scale")
        ->capture_default_str();
    sweep_cmd->add_option("--values", sweep_values, "Values to sweep over")->delimiter(',');
    sweep_cmd->add_option("--out", sweep_out, "Write the summary table to this file instead of stdout");
    sweep_cmd->add_option("--out-dir", sweep_out_dir, "Directory for per-run trajectory CSVs");

    CommonOptions analyze_opts;
    double analyze_omega_star = 0.0;
    CLI::App* analyze_cmd = app.add_subcommand("analyze", "Print the equilibrium report for a scenario");
    add_common_options(*analyze_cmd, analyze_opts);
    analyze_cmd->add_option("--omega-star", analyze_omega_star,
                            "Reference min edge gain for the rate matrix (default: 2x the threshold)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const neseek::Scenario sc = build_scenario(run_opts);
            const neseek::RunSummary summary = neseek::run(sc, run_out);
            std::cout << neseek::format_summary(summary);
            return neseek::is_failure(summary.status) ? kExitIntegrator : kExitOk;
        }
        if (sweep_cmd->parsed()) {
            const neseek::Scenario sc = build_scenario(sweep_opts);
            const auto param = neseek::sweep_param_from_string(sweep_param);
            if (!param) throw std::invalid_argument("unknown sweep parameter '" + sweep_param + "'");
            const std::vector<neseek::RunSummary> summaries =
                neseek::sweep(sc, *param, sweep_values, sweep_out_dir);
            const std::string table = neseek::sweep_table(*param, sweep_values, summaries);
            if (sweep_out.empty()) {
                std::cout << table;
            } else {
                std::ofstream out(sweep_out);
                if (!out) throw std::invalid_argument("cannot open '" + sweep_out + "' for writing");
                out << table;
            }
            for (const neseek::RunSummary& summary : summaries)
                if (neseek::is_failure(summary.status)) return kExitIntegrator;
            return kExitOk;
        }
        if (analyze_cmd->parsed()) {
            const neseek::Scenario sc = build_scenario(analyze_opts);
            const neseek::QuadraticGame game = neseek::make_game(sc);
            const neseek::Graph g = neseek::make_graph(sc);
            const neseek::EquilibriumReport report = neseek::analyze_game(game, g, analyze_omega_star);
            std::cout << neseek::format_report(report);
            if (!report.xi_positive_definite)
                std::cerr << "warning: rate matrix is not positive definite at this omega_star\n";
            return kExitOk;
        }
    } catch (const neseek::IntegrationError& e) {
        std::cerr << "integrator error: " << e.what() << " (last sample " << e.sample_index << ")\n";
        return kExitIntegrator;
    } catch (const neseek::OdeError& e) {
        std::cerr << "integrator error: " << e.what() << "\n";
        return kExitIntegrator;
    } catch (const neseek::StepBudgetExhausted& e) {
        std::cerr << "integrator error: " << e.what() << "\n";
        return kExitIntegrator;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIntegrator;
    }
    return kExitOk;
}
