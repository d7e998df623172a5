#pragma once

#include "rkhs_dagma/kernel.hpp"
#include "rkhs_dagma/types.hpp"

#include <vector>

namespace rkhs_dagma {

/// Coefficients of one structural function
///   f_j(x) = sum_i alpha_i k(x, x^i) + sum_{i,a} beta(a, i) dk(x, s)/ds_a |_{s = x^i}
/// Row `node` of beta multiplies identically-zero features and stays zero.
struct NodeParams {
    Vector alpha;  // n
    Matrix beta;   // d x n

    NodeParams() = default;
    NodeParams(Index n, Index d) : alpha(Vector::Zero(n)), beta(Matrix::Zero(d, n)) {}
    NodeParams(Vector a, Matrix b) : alpha(std::move(a)), beta(std::move(b)) {}

    [[nodiscard]] Index n() const { return alpha.size(); }
    [[nodiscard]] Index d() const { return beta.rows(); }
};

/// theta = (theta_1, ..., theta_d).
struct ModelParams {
    std::vector<NodeParams> nodes;

    ModelParams() = default;
    explicit ModelParams(std::vector<NodeParams> n) : nodes(std::move(n)) {}

    static ModelParams zeros(Index n, Index d);

    [[nodiscard]] Index d() const { return static_cast<Index>(nodes.size()); }
    [[nodiscard]] Index parameter_count() const;

    /// Concatenation of (alpha, vec(beta)) per node, column-major beta.
    [[nodiscard]] Vector flatten() const;
    /// Inverse of flatten for a model of the same shape.
    void assign(const Vector& flat);
};

/// Throws InvalidArgument unless theta_j matches the bundle shape.
void check_shapes(const NodeParams& theta_j, const GramBundle& g);

/// f_j evaluated at every sample: K alpha + D1-contraction of beta.
Vector eval_node_on_data(const NodeParams& theta_j, const GramBundle& g);

/// f_j at an arbitrary point, using the training sample X.
double eval_node_at(const NodeParams& theta_j, const DataMatrix& X,
                    const Eigen::Ref<const Vector>& x_new, const KernelConfig& cfg, Index node);

/// n x d matrix of df_j(x^i)/dx_k; column `node` is zero.
Matrix node_partials_on_data(const NodeParams& theta_j, const GramBundle& g);

/// Squared RKHS norm of f_j:
///   alpha' K alpha + 2 alpha' D1 vec(beta) + vec(beta)' D2 vec(beta).
double rkhs_norm_sq(const NodeParams& theta_j, const GramBundle& g);

namespace detail {

/// Factorized evaluation. With X~ the masked data, c = 1/gamma^2,
/// r_l = sum_a X~(l, a) beta(a, l) and
///   S = X~ beta - 1 r'            (S(i,l) = sum_a delta_a(i,l) beta(a,l))
///   M = K o (1 alpha' + 2c S)
/// the predictions are f = M 1 and the partials are
///   P = 2c (K beta' - diag(f) X~ + M X~).
/// The n x n products are formed in column blocks and never stored whole.
struct NodeForward {
    Vector f;
    Matrix P;
    Matrix KB;     ///< K beta', column `node` zeroed
    Vector Ka;     ///< K alpha
    Vector KS;     ///< row sums of K o S
    double norm = 0.0;
};

/// Columns per block in the factorized sweeps.
inline constexpr Index kSweepBlock = 64;

NodeForward forward(const NodeParams& theta_j, const GramBundle& g);

}  // namespace detail

}  // namespace rkhs_dagma
