#include "neseek/scenario.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace neseek {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw std::invalid_argument("scenario: " + message); }

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail("'" + path + "' must be an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) fail("unknown key '" + (path.empty() ? "" : path + ".") + item.key() + "'");
    }
}

const json& require(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail("missing key '" + (path.empty() ? "" : path + ".") + key + "'");
    return *it;
}

template <typename T>
T get_as(const json& j, const std::string& where) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        fail("bad value for '" + where + "': " + e.what());
    }
}

Eigen::VectorXd parse_vector(const json& j, const std::string& where) {
    const auto values = get_as<std::vector<double>>(j, where);
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& where) {
    const auto rows = get_as<std::vector<std::vector<double>>>(j, where);
    if (rows.empty()) fail("'" + where + "' must have at least one row");
    const std::size_t cols = rows.front().size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) fail("'" + where + "' rows have inconsistent lengths");
        for (std::size_t c = 0; c < cols; ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return out;
}

void parse_game_section(const json& j, Scenario& sc) {
    check_keys(j, "game", {"player_dims", "quad", "linear", "constraints", "coupling"});
    sc.player_dims = get_as<std::vector<int>>(require(j, "game", "player_dims"), "game.player_dims");
    const std::size_t N = sc.player_dims.size();

    const json& quad = require(j, "game", "quad");
    if (!quad.is_array() || quad.size() != N) fail("'game.quad' must list one matrix per player");
    for (std::size_t i = 0; i < N; ++i)
        sc.quad.push_back(parse_matrix(quad[i], "game.quad[" + std::to_string(i) + "]"));

    const json& linear = require(j, "game", "linear");
    if (!linear.is_array() || linear.size() != N) fail("'game.linear' must list one vector per player");
    for (std::size_t i = 0; i < N; ++i)
        sc.linear.push_back(parse_vector(linear[i], "game.linear[" + std::to_string(i) + "]"));

    sc.constraints.assign(N, std::nullopt);
    if (auto it = j.find("constraints"); it != j.end()) {
        if (!it->is_array() || it->size() != N) fail("'game.constraints' must list one entry per player");
        for (std::size_t i = 0; i < N; ++i) {
            const json& entry = (*it)[i];
            if (entry.is_null()) continue;
            const std::string where = "game.constraints[" + std::to_string(i) + "]";
            check_keys(entry, where, {"coeff", "offset"});
            PlayerConstraint con;
            con.coeff = parse_vector(require(entry, where, "coeff"), where + ".coeff");
            con.offset = get_as<double>(require(entry, where, "offset"), where + ".offset");
            sc.constraints[i] = std::move(con);
        }
    }

    if (auto it = j.find("coupling"); it != j.end()) {
        if (!it->is_array()) fail("'game.coupling' must be an array");
        for (std::size_t e = 0; e < it->size(); ++e) {
            const json& entry = (*it)[e];
            const std::string where = "game.coupling[" + std::to_string(e) + "]";
            check_keys(entry, where, {"from", "to", "matrix"});
            const int from = get_as<int>(require(entry, where, "from"), where + ".from");
            const int to = get_as<int>(require(entry, where, "to"), where + ".to");
            auto key = std::make_pair(from, to);
            if (sc.coupling.count(key) != 0) fail("duplicate coupling entry in '" + where + "'");
            sc.coupling.emplace(key, parse_matrix(require(entry, where, "matrix"), where + ".matrix"));
        }
    }
}

void parse_topology_section(const json& j, Scenario& sc) {
    check_keys(j, "topology", {"nodes", "edges"});
    sc.node_count = get_as<int>(require(j, "topology", "nodes"), "topology.nodes");
    const json& edges = require(j, "topology", "edges");
    if (!edges.is_array()) fail("'topology.edges' must be an array");
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const json& entry = edges[e];
        const std::string where = "topology.edges[" + std::to_string(e) + "]";
        check_keys(entry, where, {"u", "v", "weight"});
        GraphEdge edge;
        edge.u = get_as<int>(require(entry, where, "u"), where + ".u");
        edge.v = get_as<int>(require(entry, where, "v"), where + ".v");
        if (auto w = entry.find("weight"); w != entry.end())
            edge.weight = get_as<double>(*w, where + ".weight");
        sc.edges.push_back(edge);
    }
}

void parse_schedule_section(const json& j, Scenario& sc) {
    check_keys(j, "schedule", {"prescribed_time", "q_initial", "gamma"});
    sc.schedule.prescribed_time =
        get_as<double>(require(j, "schedule", "prescribed_time"), "schedule.prescribed_time");
    sc.schedule.q_initial = get_as<double>(require(j, "schedule", "q_initial"), "schedule.q_initial");
    sc.schedule.gamma = parse_vector(require(j, "schedule", "gamma"), "schedule.gamma");
}

void parse_initial_section(const json& j, Scenario& sc) {
    check_keys(j, "initial", {"sigma", "omega", "estimates", "seed", "amplitude"});
    if (auto it = j.find("sigma"); it != j.end()) sc.sigma0 = parse_vector(*it, "initial.sigma");
    if (auto it = j.find("omega"); it != j.end()) sc.omega0 = parse_vector(*it, "initial.omega");
    if (auto it = j.find("estimates"); it != j.end() && !it->is_null())
        sc.initial_estimates = parse_vector(*it, "initial.estimates");
    if (auto it = j.find("seed"); it != j.end()) sc.seed = get_as<std::uint64_t>(*it, "initial.seed");
    if (auto it = j.find("amplitude"); it != j.end())
        sc.amplitude = get_as<double>(*it, "initial.amplitude");
}

void parse_integrator_section(const json& j, Scenario& sc) {
    check_keys(j, "integrator",
               {"rel_tol", "abs_tol", "s_max", "max_steps", "q_cap", "stop_on_q_cap", "converge_tol",
                "sample_count"});
    IntegratorConfig& cfg = sc.integrator;
    if (auto it = j.find("rel_tol"); it != j.end()) cfg.rel_tol = get_as<double>(*it, "integrator.rel_tol");
    if (auto it = j.find("abs_tol"); it != j.end()) cfg.abs_tol = get_as<double>(*it, "integrator.abs_tol");
    if (auto it = j.find("s_max"); it != j.end()) cfg.s_max = get_as<double>(*it, "integrator.s_max");
    if (auto it = j.find("max_steps"); it != j.end())
        cfg.max_steps = get_as<long>(*it, "integrator.max_steps");
    if (auto it = j.find("q_cap"); it != j.end()) cfg.q_cap = get_as<double>(*it, "integrator.q_cap");
    if (auto it = j.find("stop_on_q_cap"); it != j.end())
        cfg.stop_on_q_cap = get_as<bool>(*it, "integrator.stop_on_q_cap");
    if (auto it = j.find("converge_tol"); it != j.end())
        cfg.converge_tol = get_as<double>(*it, "integrator.converge_tol");
    if (auto it = j.find("sample_count"); it != j.end())
        cfg.sample_count = get_as<int>(*it, "integrator.sample_count");
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("parse error: ") + e.what());
    }
    check_keys(j, "", {"name", "game", "topology", "schedule", "initial", "integrator"});

    Scenario sc;
    if (auto it = j.find("name"); it != j.end()) sc.name = get_as<std::string>(*it, "name");
    parse_game_section(require(j, "", "game"), sc);
    parse_topology_section(require(j, "", "topology"), sc);
    parse_schedule_section(require(j, "", "schedule"), sc);
    if (auto it = j.find("initial"); it != j.end()) parse_initial_section(*it, sc);
    if (auto it = j.find("integrator"); it != j.end()) parse_integrator_section(*it, sc);

    const Eigen::Index N = static_cast<Eigen::Index>(sc.player_dims.size());
    if (sc.sigma0.size() == 0) sc.sigma0 = Eigen::VectorXd::Zero(N);
    if (sc.omega0.size() == 0) sc.omega0 = Eigen::VectorXd::Zero(N);

    validate_scenario(sc);
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str());
}

Scenario power5_scenario() {
    Scenario sc;
    sc.name = "power5";
    const int N = 5;
    for (int i = 1; i <= N; ++i) {
        const double coef = 1.0 + 0.1 * i;  // shared by all three appliance grades of plant i
        sc.player_dims.push_back(3);
        sc.quad.push_back(2.0 * coef * Eigen::Matrix3d::Identity());
        sc.linear.push_back(Eigen::Vector3d::Constant(-4.0));
        sc.constraints.push_back(PlayerConstraint{Eigen::Vector3d::Ones(), 6.0});
    }
    sc.node_count = N;
    for (int i = 0; i < N; ++i) sc.edges.push_back({i, (i + 1) % N, 1.0});  // ring
    sc.schedule.prescribed_time = 10.0;
    sc.schedule.q_initial = 0.001;
    sc.schedule.gamma = Eigen::VectorXd::Ones(N);
    sc.sigma0 = Eigen::VectorXd::Constant(N, 50.0);
    sc.omega0 = Eigen::VectorXd::Constant(N, 0.001);
    sc.seed = 1;
    sc.amplitude = 1.0;
    return sc;
}

Scenario power5_coupled_scenario() {
    Scenario sc = power5_scenario();
    sc.name = "power5-coupled";
    for (int i = 0; i < sc.node_count; ++i)
        for (int j = 0; j < sc.node_count; ++j)
            if (i != j) sc.coupling.emplace(std::make_pair(i, j), 0.1 * Eigen::Matrix3d::Identity());
    return sc;
}

std::optional<Scenario> builtin_scenario(const std::string& name) {
    if (name == "power5") return power5_scenario();
    if (name == "power5-coupled") return power5_coupled_scenario();
    return std::nullopt;
}

QuadraticGame make_game(const Scenario& scenario) {
    return QuadraticGame(scenario.player_dims, scenario.quad, scenario.linear, scenario.constraints,
                         scenario.coupling);
}

Graph make_graph(const Scenario& scenario) {
    Graph g = Graph::from_edges(scenario.node_count, scenario.edges);
    if (!g.is_connected()) throw std::invalid_argument("graph disconnected");
    return g;
}

GainSchedule make_schedule(const Scenario& scenario) {
    GainSchedule schedule = scenario.schedule;
    schedule.validate(static_cast<int>(scenario.player_dims.size()));
    return schedule;
}

SeekerState make_initial_state(const Scenario& scenario, const QuadraticGame& game) {
    const int N = game.player_count();
    const Eigen::Index nn = static_cast<Eigen::Index>(N) * game.total_dim();
    SeekerState state;
    if (scenario.sigma0.size() != N || scenario.omega0.size() != N)
        throw std::invalid_argument("scenario: initial sigma/omega must have one entry per player");
    if ((scenario.sigma0.array() < 0.0).any() || (scenario.omega0.array() < 0.0).any())
        throw std::invalid_argument("scenario: initial sigma/omega must be nonnegative");
    state.sigma = scenario.sigma0;
    state.omega = scenario.omega0;
    state.q = scenario.schedule.q_initial;
    if (scenario.initial_estimates) {
        if (scenario.initial_estimates->size() != nn)
            throw std::invalid_argument("scenario: explicit estimates must have length N * n");
        state.estimates = *scenario.initial_estimates;
    } else {
        if (scenario.amplitude < 0.0) throw std::invalid_argument("scenario: amplitude must be >= 0");
        std::mt19937_64 rng(scenario.seed);
        std::uniform_real_distribution<double> dist(-scenario.amplitude, scenario.amplitude);
        state.estimates.resize(nn);
        for (Eigen::Index k = 0; k < nn; ++k) state.estimates(k) = dist(rng);
    }
    return state;
}

void validate_scenario(const Scenario& scenario) {
    const QuadraticGame game = make_game(scenario);
    const Graph g = make_graph(scenario);
    if (g.size() != game.player_count())
        throw std::invalid_argument("scenario: topology size does not match player count");
    (void)make_schedule(scenario);
    (void)make_initial_state(scenario, game);
    scenario.integrator.validate();
}

}  // namespace neseek
