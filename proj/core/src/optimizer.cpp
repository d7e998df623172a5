#include "rkhs_dagma/optimizer.hpp"

#include "rkhs_dagma/acyclicity.hpp"

#include <cmath>
#include <string>

namespace rkhs_dagma {

void AdamSettings::validate() const {
    if (!(learning_rate > 0.0)) {
        throw InvalidArgument("ADAM learning rate must be positive");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw InvalidArgument("ADAM betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) {
        throw InvalidArgument("ADAM epsilon must be positive");
    }
    if (max_iterations < 0) {
        throw InvalidArgument("ADAM iteration budget must be nonnegative");
    }
    if (max_rejections < 0) {
        throw InvalidArgument("ADAM rejection budget must be nonnegative");
    }
}

AdamResult adam_minimize(const FlatObjective& objective, Vector x0, const AdamSettings& settings) {
    settings.validate();
    AdamResult result;
    result.x = std::move(x0);
    result.final_learning_rate = settings.learning_rate;

    Vector grad(result.x.size());
    result.value = objective(result.x, grad);
    if (!std::isfinite(result.value) || !grad.allFinite()) {
        throw OptimizationError("ADAM: objective not finite at the starting point");
    }

    Vector m = Vector::Zero(result.x.size());
    Vector v = Vector::Zero(result.x.size());
    Vector trial_grad(result.x.size());
    double lr = settings.learning_rate;
    double b1_pow = 1.0;
    double b2_pow = 1.0;

    for (int it = 1; it <= settings.max_iterations; ++it) {
        if (grad.size() == 0 || grad.cwiseAbs().maxCoeff() < settings.gradient_tolerance) {
            break;
        }
        m = settings.beta1 * m + (1.0 - settings.beta1) * grad;
        v = settings.beta2 * v + (1.0 - settings.beta2) * grad.cwiseAbs2();
        b1_pow *= settings.beta1;
        b2_pow *= settings.beta2;
        const Vector direction =
            (m / (1.0 - b1_pow)).array() / ((v / (1.0 - b2_pow)).array().sqrt() + settings.epsilon);

        while (true) {
            Vector trial = result.x - lr * direction;
            double value = 0.0;
            try {
                value = objective(trial, trial_grad);
            } catch (const OutOfDomainError&) {
                ++result.rejections;
                if (result.rejections > settings.max_rejections) {
                    throw OptimizationError("ADAM: iterate left the constraint domain " +
                                            std::to_string(result.rejections) +
                                            " times; last at iteration " + std::to_string(it));
                }
                lr *= 0.5;
                continue;
            }
            if (!std::isfinite(value) || !trial_grad.allFinite()) {
                throw OptimizationError("ADAM: non-finite objective at iteration " +
                                        std::to_string(it));
            }
            result.x = std::move(trial);
            result.value = value;
            grad.swap(trial_grad);
            break;
        }
        result.iterations = it;
    }
    result.final_learning_rate = lr;
    return result;
}

ModelParams adam_minimize(const ModelObjective& objective, const ModelParams& theta0,
                          const AdamSettings& settings) {
    ModelParams work = theta0;
    ModelGradient grad = theta0;
    const FlatObjective flat = [&](const Vector& x, Vector& g) {
        work.assign(x);
        const double value = objective(work, grad);
        g = grad.flatten();
        return value;
    };
    const AdamResult res = adam_minimize(flat, theta0.flatten(), settings);
    ModelParams out = theta0;
    out.assign(res.x);
    return out;
}

void DagmaConfig::validate() const {
    if (!(mu0 > 0.0)) {
        throw InvalidArgument("mu0 must be positive");
    }
    if (!(decay > 0.0 && decay < 1.0)) {
        throw InvalidArgument("decay must lie in (0, 1)");
    }
    if (!(tau >= 0.0) || !(lambda >= 0.0)) {
        throw InvalidArgument("tau and lambda must be nonnegative");
    }
    if (!(s > 0.0)) {
        throw InvalidArgument("s must be positive");
    }
    if (T < 1) {
        throw InvalidArgument("T must be at least 1");
    }
    if (!(omega >= 0.0)) {
        throw InvalidArgument("omega must be nonnegative");
    }
    if (gamma && !(*gamma > 0.0)) {
        throw InvalidArgument("gamma must be positive");
    }
    adam.validate();
    objective().validate();
}

ObjectiveConfig DagmaConfig::objective() const {
    ObjectiveConfig oc;
    oc.tau = tau;
    oc.lambda = lambda;
    oc.s = s;
    oc.norm_smoothing = norm_smoothing;
    oc.constrain_unsquared = constrain_unsquared;
    oc.threads = threads;
    return oc;
}

Standardization standardize_columns(const DataMatrix& X) {
    if (!X.allFinite()) {
        throw DataError("cannot standardize: data contains non-finite values");
    }
    if (X.rows() < 2) {
        throw DataError("cannot standardize fewer than two samples");
    }
    Standardization out;
    out.mean = X.colwise().mean().transpose();
    out.data = X.rowwise() - out.mean.transpose();
    out.scale = (out.data.colwise().squaredNorm() / static_cast<double>(X.rows()))
                    .cwiseSqrt()
                    .transpose();
    for (Index j = 0; j < X.cols(); ++j) {
        if (!(out.scale(j) > 0.0)) {
            throw DataError("column " + std::to_string(j + 1) + " has zero variance");
        }
        out.data.col(j) /= out.scale(j);
    }
    return out;
}

std::pair<Matrix, DirectedGraph> threshold(const Matrix& W_raw, double omega) {
    if (!(omega >= 0.0)) {
        throw InvalidArgument("threshold must be nonnegative");
    }
    Matrix W_hat = (W_raw.array() > omega).select(W_raw, 0.0);
    DirectedGraph g(BoolMatrix(W_hat.array() != 0.0));
    return {std::move(W_hat), std::move(g)};
}

namespace {

class OuterLoop {
public:
    OuterLoop(const DataMatrix& X, const DagmaConfig& cfg)
        : X_(X),
          cfg_(cfg),
          objective_cfg_(cfg.objective()),
          bundles_(build_bundles(X, KernelConfig{cfg.gamma_for(X.cols())}, TensorStorage::OnTheFly)),
          theta_(ModelParams::zeros(X.rows(), X.cols())) {}

    TraceEntry run_round(int round, double mu) {
        TraceEntry entry;
        entry.round = round;
        entry.mu = mu;
        entry.start_checksum = theta_.flatten().squaredNorm();

        ModelParams work = theta_;
        const FlatObjective flat = [&](const Vector& x, Vector& g) {
            work.assign(x);
            auto eval = central_path_gradient(work, X_, bundles_, objective_cfg_, mu);
            g = eval.gradient.flatten();
            return eval.value;
        };
        AdamResult res;
        try {
            res = adam_minimize(flat, theta_.flatten(), cfg_.adam);
        } catch (const OptimizationError& e) {
            throw OptimizationError("outer round " + std::to_string(round) + " (mu = " +
                                    std::to_string(mu) + "): " + e.what());
        }
        theta_.assign(res.x);

        entry.iterations = res.iterations;
        entry.rejections = res.rejections;
        entry.final_learning_rate = res.final_learning_rate;
        entry.end_checksum = res.x.squaredNorm();
        entry.central_path_value = res.value;
        entry.report = score(theta_, X_, bundles_, objective_cfg_);
        return entry;
    }

    [[nodiscard]] const ModelParams& theta() const { return theta_; }

private:
    const DataMatrix& X_;
    const DagmaConfig& cfg_;
    ObjectiveConfig objective_cfg_;
    std::vector<GramBundle> bundles_;
    ModelParams theta_;
};

}  // namespace

DiscoveryResult discover(const DataMatrix& X, const DagmaConfig& cfg) {
    cfg.validate();
    if (X.rows() < 2 || X.cols() < 2) {
        throw InvalidArgument("discover needs at least 2 samples and 2 variables, got " +
                              std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
    }
    if (!X.allFinite()) {
        throw DataError("data contains non-finite values");
    }

    DiscoveryResult result;
    if (cfg.standardize) {
        auto st = standardize_columns(X);
        result.fitted_data = std::move(st.data);
        result.column_mean = std::move(st.mean);
        result.column_scale = std::move(st.scale);
    } else {
        result.fitted_data = X;
        result.column_mean = Vector::Zero(X.cols());
        result.column_scale = Vector::Ones(X.cols());
    }
    result.gamma = cfg.gamma_for(X.cols());

    OuterLoop loop(result.fitted_data, cfg);
    const auto mu_at = [&](int t) { return cfg.mu0 * std::pow(cfg.decay, t); };
    for (int t = 0; t < cfg.T; ++t) {
        result.trace.push_back(loop.run_round(t, mu_at(t)));
    }

    auto finish = [&] {
        result.theta = loop.theta();
        result.W_raw = result.trace.back().report.W;
        auto [W_hat, graph] = threshold(result.W_raw, cfg.omega);
        result.W_hat = std::move(W_hat);
        result.graph = std::move(graph);
        result.is_dag_flag = is_dag(result.graph);
    };
    finish();

    if (!result.is_dag_flag && cfg.escalate_on_cycle) {
        result.trace.push_back(loop.run_round(cfg.T, mu_at(cfg.T)));
        finish();
    }
    return result;
}

}  // namespace rkhs_dagma
