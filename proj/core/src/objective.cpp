#include "rkhs_dagma/objective.hpp"

#include "parallel.hpp"
#include "rkhs_dagma/acyclicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rkhs_dagma {

void ObjectiveConfig::validate() const {
    if (!(tau >= 0.0) || !(lambda >= 0.0)) {
        throw InvalidArgument("tau and lambda must be nonnegative");
    }
    if (!(s > 0.0)) {
        throw InvalidArgument("log-det parameter s must be positive");
    }
    if (!(norm_smoothing >= 0.0)) {
        throw InvalidArgument("norm smoothing must be nonnegative");
    }
}

namespace {

struct NodeTerms {
    detail::NodeForward fw;
    double fit = 0.0;
    double norm = 0.0;
};

void check_problem(const ModelParams& theta, const DataMatrix& X,
                   const std::vector<GramBundle>& bundles) {
    const Index d = X.cols();
    if (theta.d() != d || static_cast<Index>(bundles.size()) != d) {
        throw InvalidArgument("model has " + std::to_string(theta.d()) + " nodes and " +
                              std::to_string(bundles.size()) + " bundles for d = " +
                              std::to_string(d));
    }
    for (Index j = 0; j < d; ++j) {
        const auto& g = bundles[static_cast<std::size_t>(j)];
        if (g.node() != j || g.n() != X.rows() || g.d() != d) {
            throw InvalidArgument("bundle " + std::to_string(j) + " does not match the data");
        }
        check_shapes(theta.nodes[static_cast<std::size_t>(j)], g);
    }
}

std::vector<NodeTerms> forward_all(const ModelParams& theta, const DataMatrix& X,
                                   const std::vector<GramBundle>& bundles, unsigned threads) {
    const auto d = static_cast<std::size_t>(X.cols());
    const double n = static_cast<double>(X.rows());
    std::vector<NodeTerms> terms(d);
    detail::parallel_for(d, threads, [&](std::size_t j) {
        const auto& g = bundles[j];
        const auto& p = theta.nodes[j];
        auto& t = terms[j];
        t.fw = detail::forward(p, g);
        t.fit = (X.col(static_cast<Index>(j)) - t.fw.f).squaredNorm() / (2.0 * n);
        t.norm = t.fw.norm;
    });
    return terms;
}

/// W from partials with sqrt(mean + eps); diagonal forced to zero.
Matrix adjacency_from(const std::vector<NodeTerms>& terms, Index n, double eps) {
    const Index d = static_cast<Index>(terms.size());
    Matrix W = Matrix::Zero(d, d);
    for (Index j = 0; j < d; ++j) {
        const Matrix& P = terms[static_cast<std::size_t>(j)].fw.P;
        for (Index k = 0; k < d; ++k) {
            if (k != j) {
                W(k, j) = std::sqrt(P.col(k).squaredNorm() / static_cast<double>(n) + eps);
            }
        }
    }
    return W;
}

Matrix constraint_matrix(const Matrix& W, const ObjectiveConfig& cfg) {
    return cfg.constrain_unsquared ? W : Matrix(W.cwiseProduct(W));
}

}  // namespace

Matrix weighted_adjacency(const ModelParams& theta, const std::vector<GramBundle>& bundles) {
    const Index d = theta.d();
    if (static_cast<Index>(bundles.size()) != d) {
        throw InvalidArgument("weighted_adjacency: one bundle per node required");
    }
    Matrix W = Matrix::Zero(d, d);
    for (Index j = 0; j < d; ++j) {
        const auto& g = bundles[static_cast<std::size_t>(j)];
        if (g.node() != j || g.d() != d) {
            throw InvalidArgument("weighted_adjacency: bundle order does not match nodes");
        }
        const Matrix P = node_partials_on_data(theta.nodes[static_cast<std::size_t>(j)], g);
        for (Index k = 0; k < d; ++k) {
            if (k != j) {
                W(k, j) = std::sqrt(P.col(k).squaredNorm() / static_cast<double>(g.n()));
            }
        }
    }
    return W;
}

double sparsity_penalty(const Matrix& W, Index j) {
    if (j < 0 || j >= W.cols()) {
        throw InvalidArgument("sparsity_penalty: node index out of range");
    }
    return W.col(j).sum();
}

ObjectiveReport score(const ModelParams& theta, const DataMatrix& X,
                      const std::vector<GramBundle>& bundles, const ObjectiveConfig& cfg) {
    cfg.validate();
    check_problem(theta, X, bundles);
    const auto terms = forward_all(theta, X, bundles, cfg.threads);

    ObjectiveReport report;
    for (const auto& t : terms) {
        report.fit += t.fit;
        report.complexity += t.norm;
    }
    report.W = adjacency_from(terms, X.rows(), 0.0);
    report.sparsity = report.W.sum();
    report.penalized =
        report.fit + cfg.tau * (2.0 * report.sparsity + cfg.lambda * report.complexity);

    const auto fac = LdetFactorization::compute(constraint_matrix(report.W, cfg), cfg.s);
    if (fac) {
        report.h_value = -fac->log_det() + static_cast<double>(X.cols()) * std::log(cfg.s);
        report.in_domain = true;
    } else {
        report.h_value = std::numeric_limits<double>::quiet_NaN();
        report.in_domain = false;
    }

    if (!std::isfinite(report.fit) || !std::isfinite(report.complexity) ||
        !report.W.allFinite()) {
        throw OptimizationError("score: non-finite intermediate value");
    }
    return report;
}

double central_path_value(const ModelParams& theta, const DataMatrix& X,
                          const std::vector<GramBundle>& bundles, const ObjectiveConfig& cfg,
                          double mu, double smoothing) {
    cfg.validate();
    check_problem(theta, X, bundles);
    const auto terms = forward_all(theta, X, bundles, cfg.threads);
    const Matrix W = adjacency_from(terms, X.rows(), smoothing);
    double fit = 0.0;
    double complexity = 0.0;
    for (const auto& t : terms) {
        fit += t.fit;
        complexity += t.norm;
    }
    const double penalized = fit + cfg.tau * (2.0 * W.sum() + cfg.lambda * complexity);
    return mu * penalized + h_ldet(constraint_matrix(W, cfg), cfg.s);
}

CentralPathEvaluation central_path_gradient(const ModelParams& theta, const DataMatrix& X,
                                            const std::vector<GramBundle>& bundles,
                                            const ObjectiveConfig& cfg, double mu) {
    cfg.validate();
    check_problem(theta, X, bundles);
    const Index n = X.rows();
    const Index d = X.cols();
    const double inv_n = 1.0 / static_cast<double>(n);

    const auto terms = forward_all(theta, X, bundles, cfg.threads);
    const Matrix W = adjacency_from(terms, n, cfg.norm_smoothing);

    double fit = 0.0;
    double complexity = 0.0;
    for (const auto& t : terms) {
        fit += t.fit;
        complexity += t.norm;
    }
    const double penalized = fit + cfg.tau * (2.0 * W.sum() + cfg.lambda * complexity);

    LdetEvaluation h = cfg.constrain_unsquared ? h_ldet_with_gradient(W, cfg.s)
                                               : h_ldet_squared_with_gradient(W, cfg.s);

    // dF/dW off the diagonal.
    Matrix upstream = h.gradient;
    upstream.array() += 2.0 * mu * cfg.tau;
    upstream.diagonal().setZero();

    CentralPathEvaluation out;
    out.value = mu * penalized + h.value;
    out.gradient = ModelParams::zeros(n, d);

    const double norm_weight = mu * cfg.tau * cfg.lambda;
    detail::parallel_for(static_cast<std::size_t>(d), cfg.threads, [&](std::size_t js) {
        const Index j = static_cast<Index>(js);
        const auto& g = bundles[js];
        const auto& p = theta.nodes[js];
        const auto& fw = terms[js].fw;
        const Matrix& K = g.K();
        const Matrix& Xm = g.masked_data();
        const double c = g.inv_sq();

        // dF/dP
        Matrix Q = Matrix::Zero(n, d);
        for (Index k = 0; k < d; ++k) {
            if (k == j || W(k, j) == 0.0) {
                continue;
            }
            Q.col(k) = (upstream(k, j) * inv_n / W(k, j)) * fw.P.col(k);
        }

        // dF/df
        Vector df = (-2.0 * c) * Q.cwiseProduct(Xm).rowwise().sum();
        df += (mu * inv_n) * (fw.f - X.col(j));

        Vector g_alpha = norm_weight * (2.0 * fw.Ka + (4.0 * c) * fw.KS);
        Matrix g_beta = (norm_weight * 4.0 * c) * fw.KB.transpose();
        const Vector r = Xm.cwiseProduct(p.beta.transpose()).rowwise().sum();

        // Column blocks of dM = 2c Q Xm' + df 1' and
        // dS = 2c dM o K + w (4c diag(alpha) K + 8c^2 K o S').
        Matrix dM(n, detail::kSweepBlock);
        Matrix St(detail::kSweepBlock, n);
        for (Index l0 = 0; l0 < n; l0 += detail::kSweepBlock) {
            const Index b = std::min(detail::kSweepBlock, n - l0);
            const auto Kb = K.middleCols(l0, b);
            auto dMb = dM.leftCols(b);
            auto gb = g_beta.middleCols(l0, b);

            dMb.noalias() = (2.0 * c) * Q * Xm.middleRows(l0, b).transpose();
            dMb.colwise() += df;
            dMb.array() *= Kb.array();  // now dM o K
            g_alpha.segment(l0, b) += dMb.colwise().sum().transpose();
            gb.noalias() += (2.0 * c) * Q.transpose() * Kb;

            dMb *= 2.0 * c;  // now the fit part of dS
            if (norm_weight != 0.0) {
                auto Stb = St.topRows(b);
                Stb.noalias() = Xm.middleRows(l0, b) * p.beta;
                Stb.rowwise() -= r.transpose();
                dMb.array() += (norm_weight * 4.0 * c) * (p.alpha.asDiagonal() * Kb).array() +
                               (norm_weight * 8.0 * c * c) *
                                   (Kb.array() * Stb.transpose().array());
            }
            gb.noalias() += Xm.transpose() * dMb;
            const Vector dr = -dMb.colwise().sum().transpose();
            gb += (dr.asDiagonal() * Xm.middleRows(l0, b)).transpose();
        }
        g_beta.row(j).setZero();

        auto& gp = out.gradient.nodes[js];
        gp.alpha = std::move(g_alpha);
        gp.beta = std::move(g_beta);
    });

    if (!std::isfinite(out.value)) {
        throw OptimizationError("central path objective is not finite");
    }
    return out;
}

}  // namespace rkhs_dagma
