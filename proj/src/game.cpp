#include "neseek/game.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace neseek {

namespace {

bool is_symmetric(const Eigen::MatrixXd& a, double tol) {
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

}  // namespace

QuadraticGame::QuadraticGame(std::vector<int> player_dims,
                             std::vector<Eigen::MatrixXd> quad,
                             std::vector<Eigen::VectorXd> linear,
                             std::vector<std::optional<PlayerConstraint>> constraints,
                             const CouplingMap& coupling)
    : dims_(std::move(player_dims)), constraints_(std::move(constraints)) {
    const auto N = dims_.size();
    if (N == 0) throw std::invalid_argument("game: player_dims is empty");
    if (quad.size() != N || linear.size() != N || constraints_.size() != N)
        throw std::invalid_argument("game: per-player field counts do not match player_dims");

    offsets_.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        if (dims_[i] <= 0) throw std::invalid_argument("game: player dimension must be positive");
        offsets_[i] = total_dim_;
        total_dim_ += dims_[i];
    }

    M_ = Eigen::MatrixXd::Zero(total_dim_, total_dim_);
    m_ = Eigen::VectorXd::Zero(total_dim_);
    for (std::size_t i = 0; i < N; ++i) {
        const int ni = dims_[i];
        const int oi = offsets_[i];
        const Eigen::MatrixXd& Qi = quad[i];
        if (Qi.rows() != ni || Qi.cols() != ni)
            throw std::invalid_argument("game: quad matrix size mismatch for player " + std::to_string(i + 1));
        if (!is_symmetric(Qi, 1e-12))
            throw std::invalid_argument("game: quad matrix not symmetric for player " + std::to_string(i + 1));
        // A quad matrix with an eigenvalue <= 0 makes the symmetrized M
        // indefinite, so the mu check below rejects it; no per-player check.
        if (linear[i].size() != ni)
            throw std::invalid_argument("game: linear term size mismatch for player " + std::to_string(i + 1));
        M_.block(oi, oi, ni, ni) = Qi;
        m_.segment(oi, ni) = linear[i];

        const auto& c = constraints_[i];
        if (c) {
            if (c->coeff.size() != ni)
                throw std::invalid_argument("game: constraint coeff size mismatch for player " +
                                            std::to_string(i + 1));
            if (c->coeff.norm() == 0.0)
                throw std::invalid_argument("game: constraint coeff is zero for player " + std::to_string(i + 1));
        }
    }

    for (const auto& [key, Cij] : coupling) {
        const auto [i, j] = key;
        if (i < 0 || j < 0 || i >= static_cast<int>(N) || j >= static_cast<int>(N) || i == j)
            throw std::invalid_argument("game: coupling index pair out of range");
        if (Cij.rows() != dims_[static_cast<std::size_t>(i)] || Cij.cols() != dims_[static_cast<std::size_t>(j)])
            throw std::invalid_argument("game: coupling block size mismatch at (" + std::to_string(i + 1) + "," +
                                        std::to_string(j + 1) + ")");
        M_.block(offsets_[static_cast<std::size_t>(i)], offsets_[static_cast<std::size_t>(j)], Cij.rows(),
                 Cij.cols()) = Cij;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(0.5 * (M_ + M_.transpose()));
    mu_ = sym.eigenvalues().minCoeff();
    lipschitz_ = M_.jacobiSvd().singularValues().maxCoeff();
    if (mu_ <= 0.0) {
        std::ostringstream os;
        os << "game: mu <= 0 (pseudo-gradient not strongly monotone, mu = " << mu_ << ")";
        throw std::invalid_argument(os.str());
    }
}

int QuadraticGame::check_index(int i) const {
    if (i < 0 || i >= player_count())
        throw std::out_of_range("game: player index " + std::to_string(i) + " out of range");
    return i;
}

void QuadraticGame::check_profile(const Eigen::VectorXd& x) const {
    if (x.size() != total_dim_)
        throw std::invalid_argument("game: profile size " + std::to_string(x.size()) + " != " +
                                    std::to_string(total_dim_));
}

double QuadraticGame::cost(int i, const Eigen::VectorXd& x) const {
    check_index(i);
    check_profile(x);
    const int ni = dims_[static_cast<std::size_t>(i)];
    const int oi = offsets_[static_cast<std::size_t>(i)];
    const auto xi = x.segment(oi, ni);
    // x_i . (M x + m)_i  counts the own quadratic term twice, correct for it.
    const Eigen::VectorXd grad = M_.middleRows(oi, ni) * x + m_.segment(oi, ni);
    return xi.dot(grad) - 0.5 * xi.dot(M_.block(oi, oi, ni, ni) * xi);
}

Eigen::VectorXd QuadraticGame::partial_gradient(int i, const Eigen::VectorXd& x) const {
    check_index(i);
    check_profile(x);
    const int ni = dims_[static_cast<std::size_t>(i)];
    const int oi = offsets_[static_cast<std::size_t>(i)];
    return M_.middleRows(oi, ni) * x + m_.segment(oi, ni);
}

Eigen::VectorXd QuadraticGame::stacked_pseudo_gradient(const std::vector<Eigen::VectorXd>& estimates) const {
    if (static_cast<int>(estimates.size()) != player_count())
        throw std::invalid_argument("game: expected one estimate profile per player");
    Eigen::VectorXd out(total_dim_);
    for (int i = 0; i < player_count(); ++i) {
        check_profile(estimates[static_cast<std::size_t>(i)]);
        out.segment(offsets_[static_cast<std::size_t>(i)], dims_[static_cast<std::size_t>(i)]) =
            partial_gradient(i, estimates[static_cast<std::size_t>(i)]);
    }
    return out;
}

Eigen::VectorXd QuadraticGame::stacked_pseudo_gradient(const Eigen::VectorXd& flat_estimates) const {
    const int n = total_dim_;
    if (flat_estimates.size() != static_cast<Eigen::Index>(player_count()) * n)
        throw std::invalid_argument("game: flat estimate vector has wrong size");
    Eigen::VectorXd out(n);
    for (int i = 0; i < player_count(); ++i) {
        const int ni = dims_[static_cast<std::size_t>(i)];
        const int oi = offsets_[static_cast<std::size_t>(i)];
        out.segment(oi, ni) = M_.middleRows(oi, ni) * flat_estimates.segment(i * n, n) + m_.segment(oi, ni);
    }
    return out;
}

double QuadraticGame::constraint_value(int i, const Eigen::VectorXd& xi) const {
    check_index(i);
    if (xi.size() != dims_[static_cast<std::size_t>(i)])
        throw std::invalid_argument("game: action size mismatch for player " + std::to_string(i + 1));
    const auto& c = constraints_[static_cast<std::size_t>(i)];
    if (!c) return std::numeric_limits<double>::lowest();
    return c->coeff.dot(xi) - c->offset;
}

double QuadraticGame::penalty_value(int i, const Eigen::VectorXd& xi) const {
    if (!constraints_[static_cast<std::size_t>(check_index(i))]) {
        if (xi.size() != dims_[static_cast<std::size_t>(i)])
            throw std::invalid_argument("game: action size mismatch for player " + std::to_string(i + 1));
        return 0.0;
    }
    return std::max(0.0, constraint_value(i, xi));
}

Eigen::VectorXd QuadraticGame::penalty_subgradient(int i, const Eigen::VectorXd& xi) const {
    const auto& c = constraints_[static_cast<std::size_t>(check_index(i))];
    const int ni = dims_[static_cast<std::size_t>(i)];
    if (xi.size() != ni)
        throw std::invalid_argument("game: action size mismatch for player " + std::to_string(i + 1));
    if (!c || constraint_value(i, xi) <= 0.0) return Eigen::VectorXd::Zero(ni);
    return c->coeff;
}

Eigen::VectorXd QuadraticGame::player_block(int i, const Eigen::VectorXd& x) const {
    check_index(i);
    check_profile(x);
    return x.segment(offsets_[static_cast<std::size_t>(i)], dims_[static_cast<std::size_t>(i)]);
}

}  // namespace neseek
