#pragma once

#include <Eigen/Dense>

#include <vector>

namespace neseek {

struct GraphEdge {
    int u = 0;
    int v = 0;
    double weight = 1.0;
};

/// Undirected weighted communication topology. The weight matrix must be
/// symmetric and nonnegative with a zero diagonal; connectivity is a separate
/// query so that validation layers can report it by name.
class Graph {
public:
    explicit Graph(Eigen::MatrixXd weights);
    static Graph from_edges(int node_count, const std::vector<GraphEdge>& edges);

    [[nodiscard]] int size() const { return static_cast<int>(weights_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& weights() const { return weights_; }

    /// L = D - A with D the diagonal of row sums.
    [[nodiscard]] const Eigen::MatrixXd& laplacian() const { return laplacian_; }

    /// True iff a breadth-first sweep from the first node reaches every node
    /// over positive-weight edges.
    [[nodiscard]] bool is_connected() const { return connected_; }

    /// Second-smallest Laplacian eigenvalue; throws if the graph is
    /// disconnected (where it would be zero).
    [[nodiscard]] double lambda2() const;

    [[nodiscard]] const std::vector<int>& neighbors(int i) const {
        return neighbors_.at(static_cast<std::size_t>(i));
    }

private:
    Eigen::MatrixXd weights_;
    Eigen::MatrixXd laplacian_;
    std::vector<std::vector<int>> neighbors_;
    bool connected_ = false;
};

}  // namespace neseek
