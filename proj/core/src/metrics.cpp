#include "rkhs_dagma/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rkhs_dagma {

EvalReport shd(const DirectedGraph& estimated, const DirectedGraph& truth) {
    const Index d = truth.size();
    if (estimated.size() != d) {
        throw InvalidArgument("shd: graphs have different numbers of nodes (" +
                              std::to_string(estimated.size()) + " vs " + std::to_string(d) + ")");
    }
    EvalReport r;
    r.predicted_edges = estimated.edge_count();
    r.true_edges = truth.edge_count();
    for (Index u = 0; u < d; ++u) {
        if (estimated.has_edge(u, u) && !truth.has_edge(u, u)) {
            ++r.extra;
        } else if (!estimated.has_edge(u, u) && truth.has_edge(u, u)) {
            ++r.missing;
        }
        for (Index v = u + 1; v < d; ++v) {
            const bool e_uv = estimated.has_edge(u, v);
            const bool e_vu = estimated.has_edge(v, u);
            const bool t_uv = truth.has_edge(u, v);
            const bool t_vu = truth.has_edge(v, u);
            if (e_uv != e_vu && t_uv != t_vu && e_uv == t_vu) {
                ++r.reversed;
                continue;
            }
            r.extra += static_cast<std::size_t>(e_uv && !t_uv) + static_cast<std::size_t>(e_vu && !t_vu);
            r.missing += static_cast<std::size_t>(t_uv && !e_uv) + static_cast<std::size_t>(t_vu && !e_vu);
        }
    }
    r.shd = r.extra + r.missing + r.reversed;
    return r;
}

std::string to_string(Direction d) {
    switch (d) {
        case Direction::AtoB: return "a->b";
        case Direction::BtoA: return "b->a";
        case Direction::Undecided: return "undecided";
    }
    return "undecided";
}

namespace {

Vector standardized(const Vector& x, const char* name) {
    if (x.size() < 2 || !x.allFinite()) {
        throw DataError(std::string("pair variable ") + name + " needs at least two finite values");
    }
    const Vector centered = x.array() - x.mean();
    const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(x.size()));
    if (!(sd > 0.0)) {
        throw DataError(std::string("pair variable ") + name + " is constant");
    }
    return centered / sd;
}

}  // namespace

PairDataset pairs_preprocess(const PairDataset& pair) {
    if (pair.a.size() != pair.b.size()) {
        throw DataError("pair variables have different lengths");
    }
    PairDataset out = pair;
    out.a = standardized(pair.a, "a");
    out.b = standardized(pair.b, "b");

    const Index n = out.a.size();
    if (n <= kPairsGridCutoff) {
        return out;
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index x, Index y) { return out.a(x) < out.a(y); });

    const Index base = n / kPairsGridCount;
    const Index larger = n % kPairsGridCount;
    Vector a(kPairsGridCount);
    Vector b(kPairsGridCount);
    Index start = 0;
    for (Index g = 0; g < kPairsGridCount; ++g) {
        const Index size = base + (g < larger ? 1 : 0);
        const Index row = order[static_cast<std::size_t>(start + (size - 1) / 2)];
        a(g) = out.a(row);
        b(g) = out.b(row);
        start += size;
    }
    out.a = std::move(a);
    out.b = std::move(b);
    return out;
}

Orientation orientation_from(const Matrix& W_raw, double omega) {
    if (W_raw.rows() != 2 || W_raw.cols() != 2) {
        throw InvalidArgument("orientation needs a 2 x 2 weight matrix");
    }
    Orientation o;
    o.W_raw = W_raw;
    o.W_hat = threshold(W_raw, omega).first;
    const bool ab = o.W_hat(0, 1) > 0.0;
    const bool ba = o.W_hat(1, 0) > 0.0;
    if (ab && !ba) {
        o.direction = Direction::AtoB;
    } else if (ba && !ab) {
        o.direction = Direction::BtoA;
    } else if (ab && ba) {
        o.tiebreak = true;
        if (W_raw(0, 1) > W_raw(1, 0)) {
            o.direction = Direction::AtoB;
        } else if (W_raw(1, 0) > W_raw(0, 1)) {
            o.direction = Direction::BtoA;
        }
    }
    return o;
}

Orientation orient_pair(const PairDataset& pair, const DagmaConfig& cfg) {
    if (pair.a.size() != pair.b.size()) {
        throw DataError("pair variables have different lengths");
    }
    DataMatrix X(pair.a.size(), 2);
    X.col(0) = pair.a;
    X.col(1) = pair.b;
    const DiscoveryResult res = discover(X, cfg);
    return orientation_from(res.W_raw, cfg.omega);
}

}  // namespace rkhs_dagma
