#include "rkhs_dagma/representer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rkhs_dagma {

ModelParams ModelParams::zeros(Index n, Index d) {
    std::vector<NodeParams> nodes;
    nodes.reserve(static_cast<std::size_t>(d));
    for (Index j = 0; j < d; ++j) {
        nodes.emplace_back(n, d);
    }
    return ModelParams(std::move(nodes));
}

Index ModelParams::parameter_count() const {
    Index total = 0;
    for (const auto& p : nodes) {
        total += p.alpha.size() + p.beta.size();
    }
    return total;
}

Vector ModelParams::flatten() const {
    Vector flat(parameter_count());
    Index offset = 0;
    for (const auto& p : nodes) {
        flat.segment(offset, p.alpha.size()) = p.alpha;
        offset += p.alpha.size();
        flat.segment(offset, p.beta.size()) = p.beta.reshaped();
        offset += p.beta.size();
    }
    return flat;
}

void ModelParams::assign(const Vector& flat) {
    if (flat.size() != parameter_count()) {
        throw InvalidArgument("flat parameter vector has " + std::to_string(flat.size()) +
                              " entries, model expects " + std::to_string(parameter_count()));
    }
    Index offset = 0;
    for (auto& p : nodes) {
        p.alpha = flat.segment(offset, p.alpha.size());
        offset += p.alpha.size();
        p.beta.reshaped() = flat.segment(offset, p.beta.size());
        offset += p.beta.size();
    }
}

void check_shapes(const NodeParams& theta_j, const GramBundle& g) {
    if (theta_j.alpha.size() != g.n() || theta_j.beta.rows() != g.d() ||
        theta_j.beta.cols() != g.n()) {
        throw InvalidArgument("node parameters (n = " + std::to_string(theta_j.alpha.size()) +
                              ", beta " + std::to_string(theta_j.beta.rows()) + "x" +
                              std::to_string(theta_j.beta.cols()) + ") do not match bundle (n = " +
                              std::to_string(g.n()) + ", d = " + std::to_string(g.d()) + ")");
    }
}

namespace detail {

NodeForward forward(const NodeParams& theta_j, const GramBundle& g) {
    const Index n = g.n();
    const Index d = g.d();
    const double c = g.inv_sq();
    const Matrix& K = g.K();
    const Matrix& Xm = g.masked_data();
    const Vector& alpha = theta_j.alpha;
    const Matrix& beta = theta_j.beta;

    const Vector r = Xm.cwiseProduct(beta.transpose()).rowwise().sum();
    NodeForward fw;
    fw.f = Vector::Zero(n);
    fw.KB = Matrix::Zero(n, d);
    fw.Ka = Vector::Zero(n);
    fw.KS = Vector::Zero(n);
    Matrix MX = Matrix::Zero(n, d);
    double quad = 0.0;

    Matrix S(n, kSweepBlock);
    Matrix St(kSweepBlock, n);
    Matrix M(n, kSweepBlock);
    for (Index l0 = 0; l0 < n; l0 += kSweepBlock) {
        const Index b = std::min(kSweepBlock, n - l0);
        const auto Kb = K.middleCols(l0, b);
        auto Sb = S.leftCols(b);
        auto Stb = St.topRows(b);
        auto Mb = M.leftCols(b);

        // S(:, block) and S(block, :)
        Sb.noalias() = Xm * beta.middleCols(l0, b);
        Sb.rowwise() -= r.segment(l0, b).transpose();
        Stb.noalias() = Xm.middleRows(l0, b) * beta;
        Stb.rowwise() -= r.transpose();

        Sb.array() *= Kb.array();  // now K o S
        fw.KS += Sb.rowwise().sum();
        quad += Sb.cwiseProduct(Stb.transpose()).sum();

        Mb = (2.0 * c) * Sb;
        Mb.noalias() += Kb * alpha.segment(l0, b).asDiagonal();
        fw.f += Mb.rowwise().sum();
        MX.noalias() += Mb * Xm.middleRows(l0, b);
        fw.KB.noalias() += Kb * beta.middleCols(l0, b).transpose();
        fw.Ka.noalias() += Kb * alpha.segment(l0, b);
    }
    // beta row `node` multiplies zero features; drop it so stray values in
    // that row cannot leak into P or the norm.
    fw.KB.col(g.node()).setZero();

    fw.P = fw.KB + MX;
    fw.P -= fw.f.asDiagonal() * Xm;
    fw.P *= 2.0 * c;

    fw.norm = alpha.dot(fw.Ka) + 4.0 * c * alpha.dot(fw.KS) +
              2.0 * c * beta.transpose().cwiseProduct(fw.KB).sum() + 4.0 * c * c * quad;
    return fw;
}

}  // namespace detail

Vector eval_node_on_data(const NodeParams& theta_j, const GramBundle& g) {
    check_shapes(theta_j, g);
    if (g.materialized()) {
        return g.K() * theta_j.alpha + g.d1_matrix() * theta_j.beta.reshaped();
    }
    return detail::forward(theta_j, g).f;
}

double eval_node_at(const NodeParams& theta_j, const DataMatrix& X,
                    const Eigen::Ref<const Vector>& x_new, const KernelConfig& cfg, Index node) {
    const Index n = X.rows();
    const Index d = X.cols();
    if (theta_j.alpha.size() != n || theta_j.beta.rows() != d || theta_j.beta.cols() != n ||
        x_new.size() != d) {
        throw InvalidArgument("eval_node_at: shape mismatch");
    }
    if (node < 0 || node >= d) {
        throw InvalidArgument("eval_node_at: node index out of range");
    }
    if (!(cfg.gamma > 0.0)) {
        throw InvalidArgument("eval_node_at: gamma must be positive");
    }
    if (!x_new.allFinite()) {
        throw DataError("eval_node_at: evaluation point is not finite");
    }
    const double c = cfg.inv_sq();
    double value = 0.0;
    for (Index l = 0; l < n; ++l) {
        double dist = 0.0;
        double deriv = 0.0;
        for (Index a = 0; a < d; ++a) {
            if (a == node) {
                continue;
            }
            const double delta = x_new(a) - X(l, a);
            dist += delta * delta;
            deriv += theta_j.beta(a, l) * delta;
        }
        const double k = std::exp(-c * dist);
        value += k * (theta_j.alpha(l) + 2.0 * c * deriv);
    }
    return value;
}

Matrix node_partials_on_data(const NodeParams& theta_j, const GramBundle& g) {
    check_shapes(theta_j, g);
    if (!g.materialized()) {
        return detail::forward(theta_j, g).P;
    }
    const Index n = g.n();
    const Index d = g.d();
    const Matrix& D1 = g.d1_matrix();
    // d x n with entry (k, i) = sum_{l,a} D2(i, l, k, a) beta(a, l)
    const Vector second = g.d2_matrix() * theta_j.beta.reshaped();
    Matrix P = second.reshaped(d, n).transpose();
    for (Index k = 0; k < d; ++k) {
        // D1(i, l, k) for fixed k is an n x n slice with column stride d * n.
        const Eigen::Map<const Matrix, 0, Eigen::OuterStride<>> slice(
            D1.data() + k * n, n, n, Eigen::OuterStride<>(d * n));
        P.col(k).noalias() -= slice * theta_j.alpha;
    }
    return P;
}

double rkhs_norm_sq(const NodeParams& theta_j, const GramBundle& g) {
    check_shapes(theta_j, g);
    if (g.materialized()) {
        const auto vb = theta_j.beta.reshaped();
        const Vector& alpha = theta_j.alpha;
        return alpha.dot(g.K() * alpha) + 2.0 * alpha.dot(g.d1_matrix() * vb) +
               vb.dot(g.d2_matrix() * vb);
    }
    return detail::forward(theta_j, g).norm;
}

}  // namespace rkhs_dagma
