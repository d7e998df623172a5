#include "rkhs_dagma/kernel.hpp"

#include <cmath>
#include <string>

namespace rkhs_dagma {

namespace {

void require_finite(const DataMatrix& X) {
    if (!X.allFinite()) {
        throw DataError("data matrix contains non-finite values");
    }
}

}  // namespace

Matrix squared_distance_matrix(const DataMatrix& X) {
    require_finite(X);
    const Index n = X.rows();
    const Vector norms = X.rowwise().squaredNorm();
    Matrix D = -2.0 * (X * X.transpose());
    D.colwise() += norms;
    D.rowwise() += norms.transpose();
    // Gram-based expansion leaves rounding noise; exact zeros on the diagonal
    // and symmetry are part of the contract.
    for (Index i = 0; i < n; ++i) {
        D(i, i) = 0.0;
        for (Index l = i + 1; l < n; ++l) {
            const double v = std::max(0.0, 0.5 * (D(i, l) + D(l, i)));
            D(i, l) = v;
            D(l, i) = v;
        }
    }
    return D;
}

TensorStorage resolve_storage(TensorStorage requested, Index n, Index d) {
    if (requested != TensorStorage::Auto) {
        return requested;
    }
    const double scalars = static_cast<double>(n) * n * d * d;
    return scalars <= kMaterializeLimit ? TensorStorage::Materialize : TensorStorage::OnTheFly;
}

GramBundle::GramBundle(const DataMatrix& X, Index node, const KernelConfig& cfg,
                       TensorStorage storage)
    : GramBundle(X, squared_distance_matrix(X), node, cfg, storage) {}

GramBundle::GramBundle(const DataMatrix& X, const Matrix& sq_dist, Index node,
                       const KernelConfig& cfg, TensorStorage storage)
    : node_(node), cfg_(cfg) {
    if (!(cfg.gamma > 0.0) || !std::isfinite(cfg.gamma)) {
        throw InvalidArgument("kernel bandwidth gamma must be positive, got " +
                              std::to_string(cfg.gamma));
    }
    const Index n = X.rows();
    const Index d = X.cols();
    if (n < 1) {
        throw InvalidArgument("gram bundle needs at least one sample");
    }
    if (node < 0 || node >= d) {
        throw InvalidArgument("node index " + std::to_string(node) + " out of range for d = " +
                              std::to_string(d));
    }
    if (sq_dist.rows() != n || sq_dist.cols() != n) {
        throw InvalidArgument("squared distance matrix does not match data shape");
    }
    require_finite(X);

    masked_ = X;
    masked_.col(node).setZero();

    const double c = cfg.inv_sq();
    const auto& xj = X.col(node);
    K_.resize(n, n);
    for (Index l = 0; l < n; ++l) {
        K_(l, l) = 1.0;
        for (Index i = l + 1; i < n; ++i) {
            const double diff = xj(i) - xj(l);
            const double restricted = std::max(0.0, sq_dist(i, l) - diff * diff);
            const double v = std::exp(-c * restricted);
            K_(i, l) = v;
            K_(l, i) = v;
        }
    }

    if (resolve_storage(storage, n, d) == TensorStorage::Materialize) {
        materialize();
    }
}

double GramBundle::d1(Index i, Index l, Index a) const {
    if (a == node_) {
        return 0.0;
    }
    const double delta = masked_(i, a) - masked_(l, a);
    return 2.0 * inv_sq() * delta * K_(i, l);
}

double GramBundle::d2(Index i, Index l, Index k, Index a) const {
    if (a == node_ || k == node_) {
        return 0.0;
    }
    const double c = inv_sq();
    const double dk = masked_(i, k) - masked_(l, k);
    const double da = masked_(i, a) - masked_(l, a);
    return 2.0 * c * K_(i, l) * ((k == a ? 1.0 : 0.0) - 2.0 * c * dk * da);
}

const Matrix& GramBundle::d1_matrix() const {
    if (!materialized()) {
        throw InvalidArgument("derivative tensors were not materialized for this bundle");
    }
    return D1_;
}

const Matrix& GramBundle::d2_matrix() const {
    if (!materialized()) {
        throw InvalidArgument("derivative tensors were not materialized for this bundle");
    }
    return D2_;
}

void GramBundle::materialize() {
    const Index n = this->n();
    const Index d = this->d();
    D1_.resize(n, d * n);
    for (Index l = 0; l < n; ++l) {
        for (Index a = 0; a < d; ++a) {
            for (Index i = 0; i < n; ++i) {
                D1_(i, a + l * d) = d1(i, l, a);
            }
        }
    }
    D2_.resize(d * n, d * n);
    for (Index l = 0; l < n; ++l) {
        for (Index a = 0; a < d; ++a) {
            for (Index i = 0; i < n; ++i) {
                for (Index k = 0; k < d; ++k) {
                    D2_(k + i * d, a + l * d) = d2(i, l, k, a);
                }
            }
        }
    }
}

std::vector<GramBundle> build_bundles(const DataMatrix& X, const KernelConfig& cfg,
                                      TensorStorage storage) {
    const Matrix sq = squared_distance_matrix(X);
    std::vector<GramBundle> bundles;
    bundles.reserve(static_cast<std::size_t>(X.cols()));
    for (Index j = 0; j < X.cols(); ++j) {
        bundles.emplace_back(X, sq, j, cfg, storage);
    }
    return bundles;
}

}  // namespace rkhs_dagma
