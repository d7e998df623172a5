#pragma once

#include "rkhs_dagma/types.hpp"

#include <vector>

namespace rkhs_dagma {

/// Bandwidth of the Gaussian kernel k(x, y) = exp(-|x - y|^2 / gamma^2).
struct KernelConfig {
    double gamma = 1.0;

    /// Default bandwidth 0.4 * d.
    static KernelConfig for_dimension(Index d) { return KernelConfig{0.4 * static_cast<double>(d)}; }

    /// 1 / gamma^2, the coefficient in the exponent.
    [[nodiscard]] double inv_sq() const { return 1.0 / (gamma * gamma); }
};

/// How a GramBundle stores the derivative tensors.
enum class TensorStorage {
    Auto,         ///< materialize when n^2 d^2 <= kMaterializeLimit
    Materialize,  ///< dense D1 and D2
    OnTheFly,     ///< closed form per entry, nothing beyond K stored
};

inline constexpr double kMaterializeLimit = 2e8;

/// ||x^i - x^l||^2 for every pair of rows.
Matrix squared_distance_matrix(const DataMatrix& X);

/// Restricted Gaussian kernel for node j (coordinate j ignored) and its
/// derivatives on the sample.
///
/// With c = 1 / gamma^2 and delta_a = x^i_a - x^l_a (zero for a == j):
///   K(i, l)         = exp(-c * sum_{a != j} delta_a^2)
///   D1(i, l, a)     = dk(x^i, s)/ds_a at s = x^l        =  2c delta_a K
///   D2(i, l, k, a)  = d^2 k(x^i, x^l)/dx^i_k dx^l_a     =  2c K (1[k == a] - 2c delta_k delta_a)
/// The derivative in the first argument is -D1 (translation invariance).
///
/// Immutable after construction.
class GramBundle {
public:
    /// `sq_dist` is the full squared distance matrix of X (shared across nodes).
    GramBundle(const DataMatrix& X, const Matrix& sq_dist, Index node, const KernelConfig& cfg,
               TensorStorage storage = TensorStorage::Auto);
    GramBundle(const DataMatrix& X, Index node, const KernelConfig& cfg,
               TensorStorage storage = TensorStorage::Auto);

    [[nodiscard]] Index node() const { return node_; }
    [[nodiscard]] Index n() const { return K_.rows(); }
    [[nodiscard]] Index d() const { return masked_.cols(); }
    [[nodiscard]] const KernelConfig& config() const { return cfg_; }
    [[nodiscard]] double inv_sq() const { return cfg_.inv_sq(); }

    [[nodiscard]] const Matrix& K() const { return K_; }
    /// Data with column `node` zeroed; differences of its rows are the
    /// restricted coordinate differences.
    [[nodiscard]] const Matrix& masked_data() const { return masked_; }

    [[nodiscard]] bool materialized() const { return D1_.size() != 0; }

    /// D1(i, l, a); always available.
    [[nodiscard]] double d1(Index i, Index l, Index a) const;
    /// D2(i, l, k, a); always available.
    [[nodiscard]] double d2(Index i, Index l, Index k, Index a) const;

    /// n x (d n) matrix with D1(i, l, a) at column a + l * d, so that
    /// D1 * vec(beta) contracts the d x n coefficient block. Requires
    /// materialization.
    [[nodiscard]] const Matrix& d1_matrix() const;
    /// (d n) x (d n) matrix with D2(i, l, k, a) at row k + i * d, column
    /// a + l * d. Requires materialization.
    [[nodiscard]] const Matrix& d2_matrix() const;

private:
    void materialize();

    Index node_ = 0;
    KernelConfig cfg_;
    Matrix K_;
    Matrix masked_;
    Matrix D1_;
    Matrix D2_;
};

/// One bundle per node, sharing a single squared distance computation.
std::vector<GramBundle> build_bundles(const DataMatrix& X, const KernelConfig& cfg,
                                      TensorStorage storage = TensorStorage::Auto);

/// Storage actually used for a problem of this size under `requested`.
TensorStorage resolve_storage(TensorStorage requested, Index n, Index d);

}  // namespace rkhs_dagma
