#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace rkhs_dagma {
namespace {

TEST(ErDag, TwoNodesAlwaysOneEdge) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const DirectedGraph g = er_dag(2, 4.0, rng);
        EXPECT_EQ(g.edge_count(), 1u);
    }
}

TEST(ErDag, AlwaysAcyclic) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const DirectedGraph g = er_dag(7, 2.0, rng);
        EXPECT_TRUE(is_dag(g));
        EXPECT_TRUE(oracle::brute_force_is_dag(g));
    }
}

TEST(ErDag, EdgeCountConcentration) {
    // Each of the 45 pairs is present with p = 40 / 45, so the count is
    // Binomial(45, p) with mean 40.
    const double p = 40.0 / 45.0;
    const double sd = std::sqrt(45.0 * p * (1.0 - p));
    Rng rng(123);
    double total = 0.0;
    const int draws = 1000;
    for (int i = 0; i < draws; ++i) {
        total += static_cast<double>(er_dag(10, 4.0, rng).edge_count());
    }
    const double mean = total / draws;
    EXPECT_LE(std::abs(mean - 40.0), 3.0 * sd / std::sqrt(static_cast<double>(draws)));
}

TEST(ErDag, SparseRegimeMean) {
    const double p = 20.0 / 190.0;
    const double sd = std::sqrt(190.0 * p * (1.0 - p));
    Rng rng(7);
    double total = 0.0;
    for (int i = 0; i < 1000; ++i) {
        total += static_cast<double>(er_dag(20, 1.0, rng).edge_count());
    }
    EXPECT_LE(std::abs(total / 1000.0 - 20.0), 3.0 * sd / std::sqrt(1000.0));
}

TEST(SampleGp, IdenticalRowsAgree) {
    Matrix parents(3, 1);
    parents << 0.7, 0.7, -1.0;
    Rng rng(1);
    const Vector g = sample_gp(parents, 1.0, rng);
    EXPECT_NEAR(g(0), g(1), 1e-3);
}

TEST(SampleGp, SinglePointVariance) {
    Matrix one(1, 1);
    one << 0.3;
    Rng rng(2);
    const int draws = 2000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double v = sample_gp(one, 1.0, rng)(0);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / draws;
    const double var = sq / draws - mean * mean;
    // Var of the sample variance of N(0, 1) is about 2 / draws.
    EXPECT_LE(std::abs(var - 1.0), 3.0 * std::sqrt(2.0 / draws));
}

TEST(SampleGp, CovarianceFollowsDistance) {
    Matrix pts(3, 1);
    pts << 0.0, 0.0, 2.0;
    Rng rng(3);
    const int draws = 4000;
    double c_same = 0.0;
    double c_far = 0.0;
    for (int i = 0; i < draws; ++i) {
        const Vector g = sample_gp(pts, 1.0, rng);
        c_same += g(0) * g(1);
        c_far += g(0) * g(2);
    }
    c_same /= draws;
    c_far /= draws;
    // exp(-|x - y|^2 / 2) with |x - y| = 0 and 2.
    const double near_want = 1.0;
    const double far_want = std::exp(-2.0);
    const double se_near = std::sqrt(2.0 / draws);
    const double se_far = std::sqrt((1.0 + far_want * far_want) / draws);
    EXPECT_LE(std::abs(c_same - near_want), 3.0 * se_near);
    EXPECT_LE(std::abs(c_far - far_want), 3.0 * se_far);
}

TEST(SampleGp, RejectsBadInput) {
    Rng rng(4);
    EXPECT_THROW(sample_gp(Matrix(3, 0), 1.0, rng), InvalidArgument);
    EXPECT_THROW(sample_gp(Matrix::Zero(3, 1), 0.0, rng), InvalidArgument);
}

TEST(Mlp, WeightMagnitudes) {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const MlpMechanism mlp = MlpMechanism::draw(3, rng);
        ASSERT_EQ(mlp.w_in.rows(), 3);
        ASSERT_EQ(mlp.w_in.cols(), kMlpHidden);
        ASSERT_EQ(mlp.w_out.size(), kMlpHidden);
        for (const double w : mlp.w_in.reshaped()) {
            EXPECT_GE(std::abs(w), 0.5);
            EXPECT_LE(std::abs(w), 2.0);
        }
        for (const double w : mlp.w_out) {
            EXPECT_GE(std::abs(w), 0.5);
            EXPECT_LE(std::abs(w), 2.0);
        }
    }
}

TEST(Mlp, BothSignsOccur) {
    Rng rng(6);
    int negative = 0;
    for (int i = 0; i < 1000; ++i) {
        negative += mlp_weight(rng) < 0.0 ? 1 : 0;
    }
    EXPECT_GT(negative, 400);
    EXPECT_LT(negative, 600);
}

TEST(Simulate, EmptyGraphIsNoise) {
    const Index n = 2000;
    const Matrix noise = draw_noise(n, 3, 9);
    const DataMatrix X = simulate_from_noise(DirectedGraph(3), Mechanism::Gp, noise, 9);
    EXPECT_EQ(X, noise);
    for (Index j = 0; j < 3; ++j) {
        EXPECT_LE(std::abs(X.col(j).mean()), 3.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST(Simulate, SineReplay) {
    DirectedGraph g(2);
    g.add_edge(0, 1);
    int found = 0;
    for (std::uint64_t seed = 0; seed < 40 && found < 3; ++seed) {
        Rng replay = node_stream(seed, 2, 1);
        std::uniform_int_distribution<int> pick(0, 2);
        if (static_cast<LinkFunction>(pick(replay)) != LinkFunction::Sine) {
            continue;
        }
        ++found;
        const Matrix noise = draw_noise(50, 2, seed);
        const DataMatrix X = simulate_from_noise(g, Mechanism::Combinatorial, noise, seed);
        for (Index i = 0; i < 50; ++i) {
            EXPECT_EQ(X(i, 1), std::sin(X(i, 0)) + noise(i, 1));
        }
        EXPECT_EQ(X, simulate_from_noise(g, Mechanism::Combinatorial, noise, seed));
    }
    EXPECT_EQ(found, 3);
}

TEST(Simulate, MlpReplay) {
    DirectedGraph g(3);
    g.add_edge(0, 2);
    g.add_edge(1, 2);
    const Matrix noise = draw_noise(30, 3, 4);
    const DataMatrix X = simulate_from_noise(g, Mechanism::Mlp, noise, 4);
    Rng replay = node_stream(4, 2, 2);
    const MlpMechanism mlp = MlpMechanism::draw(2, replay);
    Matrix parents(30, 2);
    parents << X.col(0), X.col(1);
    EXPECT_LE((X.col(2) - mlp(parents) - noise.col(2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Simulate, SameSeedBitwiseIdentical) {
    for (const auto mech :
         {Mechanism::Gp, Mechanism::GpAdditive, Mechanism::Mlp, Mechanism::Combinatorial}) {
        SemSpec spec;
        spec.d = 5;
        spec.m = 1.0;
        spec.n = 40;
        spec.mechanism = mech;
        spec.seed = 77;
        const auto a = simulate_sem(spec);
        const auto b = simulate_sem(spec);
        EXPECT_EQ(a.X, b.X);
        EXPECT_EQ(a.dag, b.dag);
        EXPECT_TRUE(is_dag(a.dag));
        EXPECT_TRUE(a.X.allFinite());
        spec.seed = 78;
        EXPECT_NE(simulate_sem(spec).X, a.X);
    }
}

TEST(Simulate, RootResampleChangesOnlyDescendants) {
    for (const auto mech :
         {Mechanism::Gp, Mechanism::GpAdditive, Mechanism::Mlp, Mechanism::Combinatorial}) {
        SemSpec spec;
        spec.d = 6;
        spec.m = 1.0;
        spec.n = 30;
        spec.mechanism = mech;
        spec.seed = 2024;
        const auto base = simulate_sem(spec);
        const auto order = topological_order(base.dag);
        const Index root = order.front();

        Matrix noise = draw_noise(spec.n, spec.d, spec.seed);
        Rng other(99);
        std::normal_distribution<double> normal;
        for (Index i = 0; i < spec.n; ++i) {
            noise(i, root) = normal(other);
        }
        const DataMatrix X = simulate_from_noise(base.dag, mech, noise, spec.seed);

        // Reachability from the root.
        std::vector<bool> reach(static_cast<std::size_t>(spec.d), false);
        reach[static_cast<std::size_t>(root)] = true;
        for (const Index k : order) {
            if (!reach[static_cast<std::size_t>(k)]) {
                continue;
            }
            for (Index j = 0; j < spec.d; ++j) {
                if (base.dag.has_edge(k, j)) {
                    reach[static_cast<std::size_t>(j)] = true;
                }
            }
        }
        for (Index j = 0; j < spec.d; ++j) {
            if (reach[static_cast<std::size_t>(j)]) {
                EXPECT_NE(X.col(j), base.X.col(j)) << to_string(mech) << " node " << j;
            } else {
                EXPECT_EQ(X.col(j), base.X.col(j)) << to_string(mech) << " node " << j;
            }
        }
    }
}

TEST(Simulate, RootsArePureNoise) {
    SemSpec spec;
    spec.d = 6;
    spec.n = 25;
    spec.seed = 3;
    const auto data = simulate_sem(spec);
    const Matrix noise = draw_noise(spec.n, spec.d, spec.seed);
    for (Index j = 0; j < spec.d; ++j) {
        if (data.dag.adjacency.col(j).any()) {
            continue;
        }
        EXPECT_EQ(data.X.col(j), noise.col(j));
    }
}

TEST(Mechanism, ParseAndPrint) {
    for (const auto* name : {"gp", "gp-additive", "mlp", "combinatorial"}) {
        EXPECT_EQ(to_string(parse_mechanism(name)), name);
    }
    EXPECT_THROW(parse_mechanism("linear"), InvalidArgument);
    SemSpec bad;
    bad.d = 1;
    EXPECT_THROW(simulate_sem(bad), InvalidArgument);
}

TEST(TopologicalOrder, RespectsEdgesAndRejectsCycles) {
    Rng rng(8);
    const DirectedGraph g = er_dag(8, 2.0, rng);
    const auto order = topological_order(g);
    std::vector<Index> pos(8);
    for (std::size_t i = 0; i < order.size(); ++i) {
        pos[static_cast<std::size_t>(order[i])] = static_cast<Index>(i);
    }
    for (Index k = 0; k < 8; ++k) {
        for (Index j = 0; j < 8; ++j) {
            if (g.has_edge(k, j)) {
                EXPECT_LT(pos[static_cast<std::size_t>(k)], pos[static_cast<std::size_t>(j)]);
            }
        }
    }
    DirectedGraph cyc(2);
    cyc.add_edge(0, 1);
    cyc.add_edge(1, 0);
    EXPECT_THROW(topological_order(cyc), InvalidArgument);
}

}  // namespace
}  // namespace rkhs_dagma
