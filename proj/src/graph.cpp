#include "neseek/graph.hpp"

#include <queue>
#include <stdexcept>
#include <string>

namespace neseek {

Graph::Graph(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
    const auto n = weights_.rows();
    if (n == 0 || weights_.cols() != n) throw std::invalid_argument("graph: weight matrix must be square and nonempty");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (weights_(i, i) != 0.0) throw std::invalid_argument("graph: nonzero diagonal entry");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (weights_(i, j) < 0.0) throw std::invalid_argument("graph: negative edge weight");
            if (weights_(i, j) != weights_(j, i)) throw std::invalid_argument("graph: weight matrix not symmetric");
        }
    }

    laplacian_ = Eigen::MatrixXd(weights_.rowwise().sum().asDiagonal());
    laplacian_ -= weights_;

    neighbors_.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (weights_(i, j) > 0.0) neighbors_[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));

    // Breadth-first sweep from node 1 over positive-weight edges.
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    Eigen::Index reached = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : neighbors_[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = true;
                ++reached;
                frontier.push(v);
            }
        }
    }
    connected_ = (reached == n);
}

Graph Graph::from_edges(int node_count, const std::vector<GraphEdge>& edges) {
    if (node_count <= 0) throw std::invalid_argument("graph: node count must be positive");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(node_count, node_count);
    for (const auto& e : edges) {
        if (e.u < 0 || e.v < 0 || e.u >= node_count || e.v >= node_count)
            throw std::invalid_argument("graph: edge endpoint out of range");
        if (e.u == e.v) throw std::invalid_argument("graph: self-loop not allowed");
        if (e.weight <= 0.0) throw std::invalid_argument("graph: edge weight must be positive");
        w(e.u, e.v) = e.weight;
        w(e.v, e.u) = e.weight;
    }
    return Graph(std::move(w));
}

double Graph::lambda2() const {
    if (!connected_) throw std::invalid_argument("graph disconnected: lambda2 undefined");
    if (size() < 2) throw std::invalid_argument("graph: lambda2 needs at least two nodes");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian_, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(1);  // sorted ascending, index 0 is the zero mode
}

}  // namespace neseek
