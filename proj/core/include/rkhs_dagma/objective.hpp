#pragma once

#include "rkhs_dagma/kernel.hpp"
#include "rkhs_dagma/representer.hpp"
#include "rkhs_dagma/types.hpp"

#include <vector>

namespace rkhs_dagma {

struct ObjectiveConfig {
    double tau = 1e-4;     ///< sparsity weight
    double lambda = 1e-3;  ///< complexity weight (inside tau)
    double s = 1.0;        ///< log-det parameter
    /// eps in W = sqrt(mean of squares + eps), used by gradients and the
    /// central-path value seen by the optimizer. Reported W always uses 0.
    double norm_smoothing = 1e-12;
    /// Apply h to W itself instead of W o W. Off by default.
    bool constrain_unsquared = false;
    /// Worker threads for per-node work; 0 = hardware concurrency.
    unsigned threads = 1;

    void validate() const;
};

/// Decomposition of the penalized score.
struct ObjectiveReport {
    double fit = 0.0;         ///< sum_j (1/2n) |X^j - f_j(X)|^2
    double sparsity = 0.0;    ///< sum_j Omega_1(f_j) = sum of W
    double complexity = 0.0;  ///< sum_j |f_j|_H^2
    double penalized = 0.0;   ///< fit + tau (2 sparsity + lambda complexity)
    double h_value = 0.0;     ///< h_ldet(W o W, s); NaN when out of domain
    bool in_domain = true;
    Matrix W;                 ///< empirical derivative norms, zero diagonal
};

/// Shared gradient container; same layout as ModelParams.
using ModelGradient = ModelParams;

/// W(k, j) = sqrt((1/n) sum_i (df_j(x^i)/dx_k)^2), W(j, j) = 0.
Matrix weighted_adjacency(const ModelParams& theta, const std::vector<GramBundle>& bundles);

/// Column sum of W at node j.
double sparsity_penalty(const Matrix& W, Index j);

ObjectiveReport score(const ModelParams& theta, const DataMatrix& X,
                      const std::vector<GramBundle>& bundles, const ObjectiveConfig& cfg);

/// mu * penalized + h(W o W). Uses `smoothing` inside the norms (0 gives the
/// exact unsmoothed objective). Throws OutOfDomainError outside the domain.
double central_path_value(const ModelParams& theta, const DataMatrix& X,
                          const std::vector<GramBundle>& bundles, const ObjectiveConfig& cfg,
                          double mu, double smoothing = 0.0);

struct CentralPathEvaluation {
    double value = 0.0;  ///< central path value with cfg.norm_smoothing
    ModelGradient gradient;
};

/// Exact gradient of the smoothed central path objective. Beta rows for each
/// node's own coordinate get zero gradient.
CentralPathEvaluation central_path_gradient(const ModelParams& theta, const DataMatrix& X,
                                            const std::vector<GramBundle>& bundles,
                                            const ObjectiveConfig& cfg, double mu);

}  // namespace rkhs_dagma
