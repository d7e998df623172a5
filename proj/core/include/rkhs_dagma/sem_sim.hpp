#pragma once

#include "rkhs_dagma/types.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace rkhs_dagma {

enum class Mechanism { Gp, GpAdditive, Mlp, Combinatorial };

/// "gp", "gp-additive", "mlp", "combinatorial"; throws InvalidArgument otherwise.
Mechanism parse_mechanism(std::string_view name);
std::string to_string(Mechanism m);

struct SemSpec {
    Index d = 10;
    double m = 4.0;  ///< ER-m: expected m * d edges
    Mechanism mechanism = Mechanism::GpAdditive;
    Index n = 500;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SimulatedDataset {
    DataMatrix X;
    DirectedGraph dag;
    SemSpec spec;
};

using Rng = std::mt19937_64;

/// Random topological order, then each order-respecting pair independently
/// with p = min(1, m d / (d (d - 1) / 2)).
DirectedGraph er_dag(Index d, double m, Rng& rng);

/// One draw of g ~ N(0, K) with K(a, b) = exp(-|x_a - x_b|^2 / (2 l^2)) over
/// the rows of `parents`.
Vector sample_gp(const Matrix& parents, double lengthscale, Rng& rng);

/// Weight law U((-2, -0.5) u (0.5, 2)) shared by both MLP layers.
double mlp_weight(Rng& rng);

inline constexpr Index kMlpHidden = 100;

/// One hidden layer of sigmoid units, no biases.
struct MlpMechanism {
    Matrix w_in;   // parents x hidden
    Vector w_out;  // hidden

    static MlpMechanism draw(Index parents, Rng& rng);
    Vector operator()(const Matrix& parents) const;
};

/// One of the three combinatorial link functions.
enum class LinkFunction { NegExpAbs, Quadratic, Sine };
double apply_link(LinkFunction f, double x);

/// X_j = g_j(X_pa(j)) + N(0, 1) in topological order; roots are pure noise.
SimulatedDataset simulate_sem(const SemSpec& spec);

/// Independent generator for (seed, stream, node); streams keep the noise
/// and the mechanism draws of each node decoupled from every other node.
Rng node_stream(std::uint64_t seed, std::uint32_t stream, Index node);

/// n x d standard normal noise, column j from node_stream(seed, 1, j).
Matrix draw_noise(Index n, Index d, std::uint64_t seed);

/// Structural equations on a fixed graph with the given additive noise.
/// Mechanism randomness for node j comes from node_stream(seed, 2, j), so a
/// column of X depends only on its ancestors' noise and its own.
DataMatrix simulate_from_noise(const DirectedGraph& dag, Mechanism mechanism, const Matrix& noise,
                               std::uint64_t seed);

/// A topological order of a DAG (throws InvalidArgument on cycles).
std::vector<Index> topological_order(const DirectedGraph& g);

}  // namespace rkhs_dagma
