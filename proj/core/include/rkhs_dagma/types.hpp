#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rkhs_dagma {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

/// n x d observation matrix; row i is sample x^i, column j is variable j.
using DataMatrix = Matrix;

/// Caller supplied malformed arguments (bad shapes, out-of-range indices,
/// non-positive bandwidths, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data is unusable (non-finite values, degenerate columns,
/// malformed files).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix left the domain {A : rho(A) < s} of the log-det constraint.
class OutOfDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Optimization could not continue (non-finite objective, repeated domain
/// violations).
class OptimizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Directed graph on d nodes; adjacency(k, j) == true means edge k -> j.
struct DirectedGraph {
    BoolMatrix adjacency;

    DirectedGraph() = default;
    explicit DirectedGraph(Index d) : adjacency(BoolMatrix::Constant(d, d, false)) {}
    explicit DirectedGraph(BoolMatrix adj) : adjacency(std::move(adj)) {}

    [[nodiscard]] Index size() const { return adjacency.rows(); }
    [[nodiscard]] bool has_edge(Index from, Index to) const { return adjacency(from, to); }
    void add_edge(Index from, Index to) { adjacency(from, to) = true; }
    [[nodiscard]] std::size_t edge_count() const {
        return static_cast<std::size_t>(adjacency.count());
    }

    friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
        return a.adjacency.rows() == b.adjacency.rows() && a.adjacency.cols() == b.adjacency.cols()
               && a.adjacency == b.adjacency;
    }
};

}  // namespace rkhs_dagma
