#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace neseek {

/// Affine inequality constraint g(x_i) = coeff . x_i - offset <= 0 on one
/// player's action.
struct PlayerConstraint {
    Eigen::VectorXd coeff;
    double offset = 0.0;
};

/// N-player noncooperative game with quadratic costs
///
///   J_i(x) = 1/2 x_i' Q_i x_i + sum_{j != i} x_i' C_ij x_j + b_i . x_i
///
/// and at most one affine inequality constraint per player. The stacked
/// pseudo-gradient map is affine, F(x) = M x + m, where M carries Q_i on the
/// diagonal blocks and C_ij off the diagonal. Construction validates that
/// every Q_i is symmetric positive definite and that the symmetrized M has a
/// strictly positive smallest eigenvalue (strong monotonicity), which
/// guarantees a unique Nash equilibrium.
///
/// Immutable after construction; concurrent reads are safe.
class QuadraticGame {
public:
    using CouplingMap = std::map<std::pair<int, int>, Eigen::MatrixXd>;

    QuadraticGame(std::vector<int> player_dims,
                  std::vector<Eigen::MatrixXd> quad,
                  std::vector<Eigen::VectorXd> linear,
                  std::vector<std::optional<PlayerConstraint>> constraints,
                  const CouplingMap& coupling = {});

    [[nodiscard]] int player_count() const { return static_cast<int>(dims_.size()); }
    [[nodiscard]] int dim(int i) const { return dims_.at(static_cast<std::size_t>(check_index(i))); }
    [[nodiscard]] int total_dim() const { return total_dim_; }
    /// Start of player i's block in a stacked action vector.
    [[nodiscard]] int block_start(int i) const { return offsets_.at(static_cast<std::size_t>(check_index(i))); }

    /// J_i evaluated at the stacked profile x (size total_dim).
    [[nodiscard]] double cost(int i, const Eigen::VectorXd& x) const;

    /// grad_{x_i} J_i(x) = Q_i x_i + sum_{j != i} C_ij x_j + b_i.
    [[nodiscard]] Eigen::VectorXd partial_gradient(int i, const Eigen::VectorXd& x) const;

    /// Stacked pseudo-gradient where row block i is evaluated at player i's
    /// own estimate of the full profile. With identical estimates this is
    /// F(x) = M x + m.
    [[nodiscard]] Eigen::VectorXd stacked_pseudo_gradient(const std::vector<Eigen::VectorXd>& estimates) const;
    /// Same, with the N estimates stored contiguously (size N * total_dim).
    [[nodiscard]] Eigen::VectorXd stacked_pseudo_gradient(const Eigen::VectorXd& flat_estimates) const;

    /// Exact penalty G_i(x_i) = max(0, g_i(x_i)); zero for unconstrained players.
    [[nodiscard]] double penalty_value(int i, const Eigen::VectorXd& xi) const;

    /// Subgradient selection for G_i: the constraint normal when g_i > 0,
    /// zero otherwise (ties at g_i = 0 resolve to zero).
    [[nodiscard]] Eigen::VectorXd penalty_subgradient(int i, const Eigen::VectorXd& xi) const;

    /// Raw constraint value g_i(x_i); -inf conceptually for unconstrained
    /// players (returned as lowest double).
    [[nodiscard]] double constraint_value(int i, const Eigen::VectorXd& xi) const;

    /// (mu, l): smallest eigenvalue of the symmetrized M and largest singular
    /// value of M. mu > 0 is enforced at construction.
    [[nodiscard]] std::pair<double, double> monotonicity_constants() const { return {mu_, lipschitz_}; }

    [[nodiscard]] const Eigen::MatrixXd& pseudo_gradient_matrix() const { return M_; }
    [[nodiscard]] const Eigen::VectorXd& pseudo_gradient_offset() const { return m_; }
    [[nodiscard]] const std::optional<PlayerConstraint>& constraint(int i) const {
        return constraints_.at(static_cast<std::size_t>(check_index(i)));
    }
    [[nodiscard]] Eigen::Block<const Eigen::MatrixXd> quad_block(int i) const {
        const int o = block_start(i);
        return M_.block(o, o, dim(i), dim(i));
    }

    /// Player i's sub-vector of a stacked size-n profile.
    [[nodiscard]] Eigen::VectorXd player_block(int i, const Eigen::VectorXd& x) const;

private:
    int check_index(int i) const;
    void check_profile(const Eigen::VectorXd& x) const;

    std::vector<int> dims_;
    std::vector<int> offsets_;
    int total_dim_ = 0;
    Eigen::MatrixXd M_;
    Eigen::VectorXd m_;
    std::vector<std::optional<PlayerConstraint>> constraints_;
    double mu_ = 0.0;
    double lipschitz_ = 0.0;
};

}  // namespace neseek
