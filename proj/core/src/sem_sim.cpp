#include "rkhs_dagma/sem_sim.hpp"

#include "rkhs_dagma/acyclicity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rkhs_dagma {

Mechanism parse_mechanism(std::string_view name) {
    if (name == "gp") {
        return Mechanism::Gp;
    }
    if (name == "gp-additive") {
        return Mechanism::GpAdditive;
    }
    if (name == "mlp") {
        return Mechanism::Mlp;
    }
    if (name == "combinatorial") {
        return Mechanism::Combinatorial;
    }
    throw InvalidArgument("unknown mechanism '" + std::string(name) +
                          "' (expected gp, gp-additive, mlp or combinatorial)");
}

std::string to_string(Mechanism m) {
    switch (m) {
        case Mechanism::Gp: return "gp";
        case Mechanism::GpAdditive: return "gp-additive";
        case Mechanism::Mlp: return "mlp";
        case Mechanism::Combinatorial: return "combinatorial";
    }
    return "unknown";
}

void SemSpec::validate() const {
    if (d < 2) {
        throw InvalidArgument("SEM needs d >= 2");
    }
    if (!(m >= 1.0)) {
        throw InvalidArgument("edge multiplier m must be >= 1");
    }
    if (n < 1) {
        throw InvalidArgument("SEM needs n >= 1");
    }
}

Rng node_stream(std::uint64_t seed, std::uint32_t stream, Index node) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), stream,
                      static_cast<std::uint32_t>(node)};
    return Rng(seq);
}

DirectedGraph er_dag(Index d, double m, Rng& rng) {
    if (d < 2) {
        throw InvalidArgument("er_dag needs d >= 2");
    }
    std::vector<Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);

    const double pairs = static_cast<double>(d) * static_cast<double>(d - 1) / 2.0;
    const double p = std::min(1.0, m * static_cast<double>(d) / pairs);
    std::bernoulli_distribution coin(p);

    DirectedGraph g(d);
    for (Index a = 0; a < d; ++a) {
        for (Index b = a + 1; b < d; ++b) {
            if (coin(rng)) {
                g.add_edge(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
            }
        }
    }
    return g;
}

Vector sample_gp(const Matrix& parents, double lengthscale, Rng& rng) {
    const Index n = parents.rows();
    if (parents.cols() < 1) {
        throw InvalidArgument("sample_gp needs at least one parent column");
    }
    if (!(lengthscale > 0.0)) {
        throw InvalidArgument("GP lengthscale must be positive");
    }
    Matrix cov(n, n);
    const double scale = 1.0 / (2.0 * lengthscale * lengthscale);
    for (Index a = 0; a < n; ++a) {
        cov(a, a) = 1.0;
        for (Index b = a + 1; b < n; ++b) {
            const double v = std::exp(-scale * (parents.row(a) - parents.row(b)).squaredNorm());
            cov(a, b) = v;
            cov(b, a) = v;
        }
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(n);
    for (Index i = 0; i < n; ++i) {
        z(i) = normal(rng);
    }

    const double mean_diag = cov.diagonal().mean();
    for (double jitter = 1e-8 * mean_diag; jitter <= 1e-2 * mean_diag * (1.0 + 1e-9);
         jitter *= 10.0) {
        Matrix jittered = cov;
        jittered.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(jittered);
        if (llt.info() == Eigen::Success) {
            return llt.matrixL() * z;
        }
    }
    throw DataError("GP covariance factorization failed even with maximal jitter");
}

double apply_link(LinkFunction f, double x) {
    switch (f) {
        case LinkFunction::NegExpAbs: return std::exp(-std::abs(x));
        case LinkFunction::Quadratic: return 0.05 * x * x;
        case LinkFunction::Sine: return std::sin(x);
    }
    return 0.0;
}

std::vector<Index> topological_order(const DirectedGraph& g) {
    const Index d = g.size();
    std::vector<Index> indegree(static_cast<std::size_t>(d), 0);
    for (Index k = 0; k < d; ++k) {
        for (Index j = 0; j < d; ++j) {
            indegree[static_cast<std::size_t>(j)] += g.adjacency(k, j) ? 1 : 0;
        }
    }
    std::vector<Index> order;
    std::vector<Index> ready;
    for (Index j = d - 1; j >= 0; --j) {
        if (indegree[static_cast<std::size_t>(j)] == 0) {
            ready.push_back(j);
        }
    }
    while (!ready.empty()) {
        const Index k = ready.back();
        ready.pop_back();
        order.push_back(k);
        for (Index j = d - 1; j >= 0; --j) {
            if (g.adjacency(k, j) && --indegree[static_cast<std::size_t>(j)] == 0) {
                ready.push_back(j);
            }
        }
    }
    if (static_cast<Index>(order.size()) != d) {
        throw InvalidArgument("graph has a cycle; no topological order");
    }
    return order;
}

Matrix draw_noise(Index n, Index d, std::uint64_t seed) {
    Matrix E(n, d);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index j = 0; j < d; ++j) {
        Rng rng = node_stream(seed, 1, j);
        for (Index i = 0; i < n; ++i) {
            E(i, j) = normal(rng);
        }
    }
    return E;
}

double mlp_weight(Rng& rng) {
    std::uniform_real_distribution<double> magnitude(0.5, 2.0);
    std::bernoulli_distribution negative(0.5);
    const double w = magnitude(rng);
    return negative(rng) ? -w : w;
}

MlpMechanism MlpMechanism::draw(Index parents, Rng& rng) {
    MlpMechanism mlp;
    mlp.w_in.resize(parents, kMlpHidden);
    for (Index h = 0; h < kMlpHidden; ++h) {
        for (Index k = 0; k < parents; ++k) {
            mlp.w_in(k, h) = mlp_weight(rng);
        }
    }
    mlp.w_out.resize(kMlpHidden);
    for (Index h = 0; h < kMlpHidden; ++h) {
        mlp.w_out(h) = mlp_weight(rng);
    }
    return mlp;
}

Vector MlpMechanism::operator()(const Matrix& parents) const {
    const Matrix hidden =
        (parents * w_in).unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
    return hidden * w_out;
}

namespace {

Vector mechanism_output(Mechanism mechanism, const Matrix& parents, Rng& rng) {
    const Index n = parents.rows();
    const Index p = parents.cols();
    switch (mechanism) {
        case Mechanism::Gp:
            return sample_gp(parents, 1.0, rng);
        case Mechanism::GpAdditive: {
            Vector total = Vector::Zero(n);
            for (Index k = 0; k < p; ++k) {
                total += sample_gp(parents.col(k), 1.0, rng);
            }
            return total;
        }
        case Mechanism::Mlp:
            return MlpMechanism::draw(p, rng)(parents);
        case Mechanism::Combinatorial: {
            std::uniform_int_distribution<int> pick(0, 2);
            Vector total = Vector::Zero(n);
            for (Index k = 0; k < p; ++k) {
                const auto link = static_cast<LinkFunction>(pick(rng));
                total += parents.col(k).unaryExpr([link](double x) { return apply_link(link, x); });
            }
            return total;
        }
    }
    return Vector::Zero(n);
}

}  // namespace

DataMatrix simulate_from_noise(const DirectedGraph& dag, Mechanism mechanism, const Matrix& noise,
                               std::uint64_t seed) {
    const Index d = dag.size();
    if (noise.cols() != d) {
        throw InvalidArgument("noise matrix has the wrong number of columns");
    }
    const Index n = noise.rows();
    DataMatrix X = noise;
    for (const Index j : topological_order(dag)) {
        std::vector<Index> parents;
        for (Index k = 0; k < d; ++k) {
            if (dag.adjacency(k, j)) {
                parents.push_back(k);
            }
        }
        if (parents.empty()) {
            continue;
        }
        Matrix parent_data(n, static_cast<Index>(parents.size()));
        for (std::size_t c = 0; c < parents.size(); ++c) {
            parent_data.col(static_cast<Index>(c)) = X.col(parents[c]);
        }
        Rng rng = node_stream(seed, 2, j);
        X.col(j) = mechanism_output(mechanism, parent_data, rng) + noise.col(j);
    }
    return X;
}

SimulatedDataset simulate_sem(const SemSpec& spec) {
    spec.validate();
    Rng graph_rng = node_stream(spec.seed, 0, 0);
    SimulatedDataset out;
    out.spec = spec;
    out.dag = er_dag(spec.d, spec.m, graph_rng);
    const Matrix noise = draw_noise(spec.n, spec.d, spec.seed);
    out.X = simulate_from_noise(out.dag, spec.mechanism, noise, spec.seed);
    return out;
}

}  // namespace rkhs_dagma
