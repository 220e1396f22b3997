#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "neseek/dynamics.hpp"
#include "neseek/game.hpp"
#include "neseek/graph.hpp"
#include "support.hpp"

using namespace neseek;
using namespace neseek::testing;

namespace {

GainSchedule schedule_for(int players, double tp = 10.0, double q0 = 0.001, double gamma = 1.0) {
    GainSchedule s;
    s.prescribed_time = tp;
    s.q_initial = q0;
    s.gamma = Eigen::VectorXd::Constant(players, gamma);
    return s;
}

SeekerState random_state(std::mt19937_64& gen, const QuadraticGame& game, double tp) {
    SeekerState st;
    const int N = game.player_count();
    st.estimates = uniform_vector(gen, static_cast<Eigen::Index>(N) * game.total_dim(), -3.0, 3.0);
    st.sigma = uniform_vector(gen, N, 0.0, 5.0);
    st.omega = uniform_vector(gen, N, 0.0, 5.0);
    st.q = uniform(gen, 0.01, 10.0);
    st.t = uniform(gen, 0.0, 0.9 * tp);
    st.s = std::tan(std::numbers::pi * st.t / (2.0 * tp));
    return st;
}

}  // namespace

TEST_CASE("time_gain matches the secant-squared schedule") {
    const GainSchedule ten = schedule_for(1);
    CHECK(time_gain(ten, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(time_gain(ten, 5.0) == doctest::Approx(2.0).epsilon(1e-14));
    // Frozen high-precision value of 1 / cos^2(0.495 pi).
    CHECK(time_gain(ten, 9.9) == doctest::Approx(4053.180695476844).epsilon(1e-12));

    // Extended-precision cross-check on a grid.
    for (int idx = 0; idx <= 200; ++idx) {
        const double t = 9.99 * idx / 200.0;
        const long double c = std::cos(static_cast<long double>(std::numbers::pi) * t / 20.0L);
        const double reference = static_cast<double>(1.0L / (c * c));
        CHECK(time_gain(ten, t) == doctest::Approx(reference).epsilon(1e-12));
    }

    CHECK_THROWS_AS((void)time_gain(ten, -0.001), std::domain_error);
    CHECK_THROWS_AS((void)time_gain(ten, 10.0), std::domain_error);
    CHECK_THROWS_AS((void)time_gain(ten, 11.0), std::domain_error);
}

TEST_CASE("schedule validation rejects bad parameters") {
    GainSchedule s = schedule_for(2);
    CHECK_NOTHROW(s.validate(2));
    CHECK_THROWS_AS(s.validate(3), std::invalid_argument);
    s.prescribed_time = 0.0;
    CHECK_THROWS_AS(s.validate(2), std::invalid_argument);
    s = schedule_for(2);
    s.q_initial = -1.0;
    CHECK_THROWS_AS(s.validate(2), std::invalid_argument);
    s = schedule_for(2);
    s.gamma(1) = 0.0;
    CHECK_THROWS_AS(s.validate(2), std::invalid_argument);
}

TEST_CASE("local disagreement matches the stacked Laplacian product") {
    const Graph k2 = Graph::from_edges(2, {{0, 1, 1.0}});
    Eigen::VectorXd est(2);
    est << 1.0, 0.0;  // scalar estimates: player 0 holds 1, player 1 holds 0
    CHECK(local_disagreement(est, k2, 0)(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(local_disagreement(est, k2, 1)(0) == doctest::Approx(-1.0).epsilon(1e-14));

    auto gen = make_rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const int nodes = 2 + trial % 6;
        const int block = 1 + trial % 3;
        const Graph g = random_connected_graph(gen, nodes);
        const Eigen::VectorXd x = uniform_vector(gen, static_cast<Eigen::Index>(nodes) * block, -2.0, 2.0);

        // Row i of the matrix equals the per-player query.
        const Eigen::MatrixXd rows = disagreement_matrix(x, g);
        for (int i = 0; i < nodes; ++i)
            CHECK((rows.row(i).transpose() - local_disagreement(x, g, i)).norm() <= 1e-12);

        // The stack equals the Kronecker product (L kron I) x.
        Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(nodes * block, nodes * block);
        for (int i = 0; i < nodes; ++i)
            for (int j = 0; j < nodes; ++j)
                kron.block(i * block, j * block, block, block) =
                    g.laplacian()(i, j) * Eigen::MatrixXd::Identity(block, block);
        const Eigen::VectorXd stacked = kron * x;
        for (int i = 0; i < nodes; ++i)
            CHECK((rows.row(i).transpose() - stacked.segment(static_cast<Eigen::Index>(i) * block, block))
                      .norm() <= 1e-12);

        // Consensus input: identically zero.
        Eigen::VectorXd same(static_cast<Eigen::Index>(nodes) * block);
        const Eigen::VectorXd v = uniform_vector(gen, block, -2.0, 2.0);
        for (int i = 0; i < nodes; ++i) same.segment(static_cast<Eigen::Index>(i) * block, block) = v;
        CHECK(disagreement_matrix(same, g).norm() <= 1e-12);
    }
}

TEST_CASE("own/other selection partitions the profile") {
    const QuadraticGame game({1, 2, 1},
                             {2.0 * Eigen::MatrixXd::Identity(1, 1), 2.0 * Eigen::MatrixXd::Identity(2, 2),
                              2.0 * Eigen::MatrixXd::Identity(1, 1)},
                             {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1)},
                             std::vector<std::optional<PlayerConstraint>>(3));
    Eigen::VectorXd v(4);
    v << 1.0, 2.0, 3.0, 4.0;
    CHECK(select_own(game, 0, v)(0) == 1.0);
    CHECK((select_own(game, 1, v) - Eigen::Vector2d(2.0, 3.0)).norm() == 0.0);
    Eigen::VectorXd rest(2);
    rest << 1.0, 4.0;
    CHECK((select_others(game, 1, v) - rest).norm() == 0.0);

    // Indices preserved: scatter own and others back together recovers v.
    for (int i = 0; i < 3; ++i) {
        const Eigen::VectorXd own = select_own(game, i, v);
        const Eigen::VectorXd others = select_others(game, i, v);
        CHECK(own.size() + others.size() == v.size());
        Eigen::VectorXd rebuilt(4);
        int from_others = 0;
        for (int kpos = 0; kpos < 4; ++kpos) {
            const bool mine = kpos >= game.block_start(i) && kpos < game.block_start(i) + game.dim(i);
            rebuilt(kpos) = mine ? own(kpos - game.block_start(i)) : others(from_others++);
        }
        CHECK((rebuilt - v).norm() == 0.0);
    }
}

TEST_CASE("the field vanishes at a consensus equilibrium with zero penalty") {
    const QuadraticGame game = two_player_free_game();
    const Graph g = Graph::from_edges(2, {{0, 1, 1.0}});
    const GainSchedule sched = schedule_for(2);
    SeekerState st;
    Eigen::VectorXd star(2);
    star << 1.0, -1.0;
    st.estimates.resize(4);
    st.estimates << star, star;
    st.sigma = Eigen::VectorXd::Constant(2, 50.0);
    st.omega = Eigen::VectorXd::Constant(2, 0.001);
    st.q = 0.001;
    st.t = 0.0;
    st.s = 0.0;

    const SeekerDerivative d = gain_free_field(game, g, sched, st);
    CHECK(d.estimates.norm() <= 1e-14);
    CHECK(d.sigma.norm() <= 1e-14);
    CHECK(d.omega.norm() <= 1e-14);
    CHECK(d.q == doctest::Approx(st.q).epsilon(1e-15));  // q-dot = k q, gain-free q
}

TEST_CASE("single-player field descends the gradient") {
    const QuadraticGame game({1}, {Eigen::MatrixXd::Constant(1, 1, 2.0)},
                             {Eigen::VectorXd::Constant(1, -2.0)},
                             std::vector<std::optional<PlayerConstraint>>(1));
    const Graph solo = Graph::from_edges(1, {});
    const GainSchedule sched = schedule_for(1);
    SeekerState st;
    st.estimates = Eigen::VectorXd::Zero(1);
    st.sigma = Eigen::VectorXd::Zero(1);
    st.omega = Eigen::VectorXd::Zero(1);
    st.q = 1.0;
    st.t = 0.0;
    st.s = 0.0;
    // k(0) = 1 and grad J = 2x - 2 = -2 at the origin, so x-dot = +2.
    const SeekerDerivative d = vector_field(game, solo, sched, st);
    CHECK(d.estimates(0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("gain blocks follow the adaptive laws") {
    // Two scalar players on K2; player 0 carries constraint x <= 1/2.
    std::vector<std::optional<PlayerConstraint>> constraints(2);
    constraints[0] = PlayerConstraint{Eigen::VectorXd::Constant(1, 1.0), 0.5};
    const QuadraticGame game({1, 1},
                             {2.0 * Eigen::MatrixXd::Identity(1, 1), 2.0 * Eigen::MatrixXd::Identity(1, 1)},
                             {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)}, constraints);
    const Graph g = Graph::from_edges(2, {{0, 1, 1.0}});
    GainSchedule sched = schedule_for(2);
    sched.gamma << 2.0, 3.0;

    SeekerState st;
    st.estimates.resize(4);
    st.estimates << 2.0, 0.0, 0.0, 0.0;  // player 0 acts at 2 (violation 1.5)
    st.sigma = Eigen::VectorXd::Zero(2);
    st.omega.resize(2);
    st.omega << 0.5, 0.25;
    st.q = 7.0;
    st.t = 0.0;
    st.s = 0.0;

    const SeekerDerivative d = gain_free_field(game, g, sched, st);
    // sigma-dot = q G_i(own action): G_0 = 1.5, G_1 = 0.
    CHECK(d.sigma(0) == doctest::Approx(7.0 * 1.5).epsilon(1e-14));
    CHECK(d.sigma(1) == 0.0);
    // omega-dot = q gamma_i ||rho_i||^2 with rho_0 = (2, 0), rho_1 = (-2, 0).
    CHECK(d.omega(0) == doctest::Approx(7.0 * 2.0 * 4.0).epsilon(1e-14));
    CHECK(d.omega(1) == doctest::Approx(7.0 * 3.0 * 4.0).epsilon(1e-14));
    CHECK(d.q == doctest::Approx(7.0).epsilon(1e-15));

    // The full field is the gain-free field scaled by k(t).
    st.t = 5.0;
    st.s = 1.0;
    const SeekerDerivative full = vector_field(game, g, sched, st);
    const SeekerDerivative base = gain_free_field(game, g, sched, st);
    const double k = time_gain(sched, st.t);
    CHECK((full.estimates - k * base.estimates).norm() <= 1e-12 * (1.0 + full.estimates.norm()));
    CHECK((full.sigma - k * base.sigma).norm() <= 1e-12 * (1.0 + full.sigma.norm()));
    CHECK((full.omega - k * base.omega).norm() <= 1e-12 * (1.0 + full.omega.norm()));
    CHECK(full.q == doctest::Approx(k * base.q).epsilon(1e-13));

    st.t = 10.0;
    CHECK_THROWS_AS((void)vector_field(game, g, sched, st), std::domain_error);
}

TEST_CASE("consensus coupling mixes estimates with edge-gain weights") {
    // Two scalar players, profile dimension 2, zero linear terms; put player 1
    // at the origin so only the consensus force acts on it.
    const QuadraticGame game({1, 1},
                             {2.0 * Eigen::MatrixXd::Identity(1, 1), 2.0 * Eigen::MatrixXd::Identity(1, 1)},
                             {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)},
                             std::vector<std::optional<PlayerConstraint>>(2));
    const Graph g = Graph::from_edges(2, {{0, 1, 1.0}});
    const GainSchedule sched = schedule_for(2);
    SeekerState st;
    st.estimates.resize(4);
    st.estimates << 1.0, 1.0, 0.0, 0.0;
    st.sigma = Eigen::VectorXd::Zero(2);
    st.omega.resize(2);
    st.omega << 0.5, 0.25;
    st.q = 1.0;
    st.t = 0.0;
    st.s = 0.0;

    // rho_0 = (1,1); (L kron I) Z rho row 0 = (w0 + w1) rho_0 = 0.75 (1,1).
    const SeekerDerivative d = gain_free_field(game, g, sched, st);
    CHECK(d.estimates(0) == doctest::Approx(-(2.0 + 0.75)).epsilon(1e-14));
    CHECK(d.estimates(1) == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK(d.estimates(2) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(d.estimates(3) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("per-player assembly equals the compact matrix form") {
    auto gen = make_rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const QuadraticGame game = random_game(gen);
        const Graph g = random_connected_graph(gen, game.player_count());
        const GainSchedule sched = schedule_for(game.player_count());
        const SeekerState st = random_state(gen, game, sched.prescribed_time);
        const SeekerDerivative d = gain_free_field(game, g, sched, st);
        const Eigen::VectorXd compact = compact_estimate_field(game, g, st);
        CHECK((d.estimates - compact).norm() <= 1e-12 * (1.0 + compact.norm()));
    }
}

TEST_CASE("consensus decomposition is an orthogonal split") {
    Eigen::VectorXd two(2);
    two << 1.0, -1.0;
    const auto [par2, perp2] = consensus_decompose(two, 2);
    CHECK(par2.norm() <= 1e-14);
    CHECK((perp2 - two).norm() <= 1e-14);

    auto gen = make_rng(37);
    for (int trial = 0; trial < 100; ++trial) {
        const int nodes = 2 + trial % 6;
        const int block = 1 + trial % 3;
        const Eigen::VectorXd x = uniform_vector(gen, static_cast<Eigen::Index>(nodes) * block, -2.0, 2.0);
        const auto [par, perp] = consensus_decompose(x, nodes);
        CHECK((par + perp - x).norm() <= 1e-12);
        CHECK(std::abs(par.dot(perp)) <= 1e-12 * (1.0 + x.squaredNorm()));
        // The parallel part repeats one block.
        for (int i = 1; i < nodes; ++i)
            CHECK((par.segment(static_cast<Eigen::Index>(i) * block, block) - par.head(block)).norm() <=
                  1e-13);
        // Idempotence: decomposing the perpendicular part leaves it unchanged.
        const auto [par_again, perp_again] = consensus_decompose(perp, nodes);
        CHECK(par_again.norm() <= 1e-12);
        CHECK((perp_again - perp).norm() <= 1e-12);
    }

    CHECK_THROWS_AS(consensus_decompose(two, 0), std::invalid_argument);
    CHECK_THROWS_AS(consensus_decompose(Eigen::VectorXd::Zero(3), 2), std::invalid_argument);
}

TEST_CASE("equilibrium residual vanishes exactly at certified equilibria") {
    // Unconstrained pair at its equilibrium, any penalty gains.
    const QuadraticGame free = two_player_free_game();
    const Graph g = Graph::from_edges(2, {{0, 1, 1.0}});
    Eigen::VectorXd star(2);
    star << 1.0, -1.0;
    Eigen::VectorXd consensus(4);
    consensus << star, star;
    Eigen::VectorXd sigma(2);
    sigma << 3.0, 9.0;
    const EquilibriumResidual r0 = equilibrium_residual(free, g, consensus, sigma);
    CHECK(r0.stationarity <= 1e-12);
    CHECK(r0.feasibility == 0.0);
    CHECK(r0.consensus <= 1e-12);

    // Constrained pair: the active constraint needs sigma_0 = 1 to balance.
    const QuadraticGame kkt = two_player_kkt_game();
    Eigen::VectorXd xstar(2);
    xstar << 0.5, -1.0;
    Eigen::VectorXd both(4);
    both << xstar, xstar;
    Eigen::VectorXd multipliers(2);
    multipliers << 1.0, 0.0;
    const EquilibriumResidual r1 = equilibrium_residual(kkt, g, both, multipliers);
    CHECK(r1.stationarity <= 1e-12);
    CHECK(r1.feasibility <= 1e-12);
    CHECK(r1.consensus <= 1e-12);

    // An undersized penalty gain cannot balance the boundary gradient.
    Eigen::VectorXd weak(2);
    weak << 0.5, 0.0;
    CHECK(equilibrium_residual(kkt, g, both, weak).stationarity == doctest::Approx(0.5).epsilon(1e-12));

    // Away from the equilibrium all three parts light up.
    Eigen::VectorXd off(4);
    off << 2.0, 0.0, 0.0, 0.5;
    const EquilibriumResidual r2 = equilibrium_residual(kkt, g, off, Eigen::VectorXd::Zero(2));
    CHECK(r2.stationarity > 0.1);
    CHECK(r2.feasibility > 0.1);
    CHECK(r2.consensus > 0.1);

    CHECK_THROWS_AS(equilibrium_residual(kkt, g, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)),
                    std::invalid_argument);
}

TEST_CASE("weighted disagreement energy dominates the lambda2 bound") {
    // sum_i omega_i ||rho_i||^2 >= min(omega) lambda2^2 ||X_perp||^2 for
    // centered stacks: the algebraic core of the convergence-rate argument.
    auto gen = make_rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const int nodes = 2 + trial % 5;
        const int block = 1 + trial % 3;
        const Graph g = random_connected_graph(gen, nodes);
        const Eigen::VectorXd omega = uniform_vector(gen, nodes, 0.1, 4.0);
        const Eigen::VectorXd raw = uniform_vector(gen, static_cast<Eigen::Index>(nodes) * block, -2.0, 2.0);
        const auto [par, perp] = consensus_decompose(raw, nodes);
        const Eigen::MatrixXd rho = disagreement_matrix(perp, g);
        double energy = 0.0;
        for (int i = 0; i < nodes; ++i) energy += omega(i) * rho.row(i).squaredNorm();
        const double bound = omega.minCoeff() * g.lambda2() * g.lambda2() * perp.squaredNorm();
        CHECK(energy >= bound - 1e-9 * (1.0 + perp.squaredNorm()));
    }
}
