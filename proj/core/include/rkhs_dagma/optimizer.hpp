#pragma once

#include "rkhs_dagma/kernel.hpp"
#include "rkhs_dagma/objective.hpp"
#include "rkhs_dagma/representer.hpp"
#include "rkhs_dagma/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace rkhs_dagma {

struct AdamSettings {
    double learning_rate = 3e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int max_iterations = 3000;
    /// Stop once max |grad| falls below this.
    double gradient_tolerance = 1e-7;
    /// Rejected steps (out-of-domain) tolerated before giving up.
    int max_rejections = 60;

    void validate() const;
};

/// Objective callback: returns the value at x and writes the gradient.
/// May throw OutOfDomainError; the minimizer then rejects the step.
using FlatObjective = std::function<double(const Vector& x, Vector& gradient)>;

struct AdamResult {
    Vector x;
    double value = 0.0;
    int iterations = 0;
    int rejections = 0;
    double final_learning_rate = 0.0;
};

/// ADAM with step rejection: an out-of-domain trial point is discarded, the
/// learning rate is halved for the rest of the call and the last accepted
/// point is kept. Deterministic.
AdamResult adam_minimize(const FlatObjective& objective, Vector x0, const AdamSettings& settings);

/// ModelParams overload; the callback sees parameters in ModelParams form.
using ModelObjective = std::function<double(const ModelParams& theta, ModelGradient& gradient)>;
ModelParams adam_minimize(const ModelObjective& objective, const ModelParams& theta0,
                          const AdamSettings& settings);

struct DagmaConfig {
    double mu0 = 1.0;
    double decay = 0.1;
    double tau = 1e-4;
    double lambda = 1e-3;
    double s = 1.0;
    int T = 6;
    /// One extra outer round when the thresholded graph after T rounds has a cycle.
    bool escalate_on_cycle = true;
    double omega = 0.1;
    /// Kernel bandwidth; 0.4 d when unset.
    std::optional<double> gamma;
    AdamSettings adam;
    /// Center and scale each column to unit variance before fitting.
    bool standardize = false;
    double norm_smoothing = 1e-12;
    bool constrain_unsquared = false;
    unsigned threads = 1;

    void validate() const;
    [[nodiscard]] double gamma_for(Index d) const { return gamma.value_or(0.4 * static_cast<double>(d)); }
    [[nodiscard]] ObjectiveConfig objective() const;
};

struct TraceEntry {
    int round = 0;
    double mu = 0.0;
    int iterations = 0;
    int rejections = 0;
    double final_learning_rate = 0.0;
    /// Squared norm of the flattened parameters at round start / end.
    double start_checksum = 0.0;
    double end_checksum = 0.0;
    double central_path_value = 0.0;
    ObjectiveReport report;
};

struct DiscoveryResult {
    Matrix W_raw;
    Matrix W_hat;
    DirectedGraph graph;
    ModelParams theta;
    std::vector<TraceEntry> trace;
    bool is_dag_flag = false;

    /// Data the model was fitted on (standardized when enabled) and the
    /// per-column transform that produced it.
    DataMatrix fitted_data;
    Vector column_mean;
    Vector column_scale;
    double gamma = 0.0;
};

struct Standardization {
    DataMatrix data;
    Vector mean;
    Vector scale;
};

/// Per-column mean 0, population variance 1. Constant columns are rejected.
Standardization standardize_columns(const DataMatrix& X);

/// W_hat = W o 1(W > omega); graph is the support of W_hat.
std::pair<Matrix, DirectedGraph> threshold(const Matrix& W_raw, double omega);

/// Central-path outer loop with warm-started ADAM inner solves.
DiscoveryResult discover(const DataMatrix& X, const DagmaConfig& cfg);

}  // namespace rkhs_dagma
