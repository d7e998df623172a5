#pragma once

#include "rkhs_dagma/optimizer.hpp"
#include "rkhs_dagma/types.hpp"

#include <string>

namespace rkhs_dagma {

struct EvalReport {
    std::size_t shd = 0;
    std::size_t extra = 0;
    std::size_t missing = 0;
    std::size_t reversed = 0;
    std::size_t predicted_edges = 0;
    std::size_t true_edges = 0;
};

/// Structural Hamming distance: additions, deletions and reversals needed
/// to turn `estimated` into `truth`. A reversal costs 1.
EvalReport shd(const DirectedGraph& estimated, const DirectedGraph& truth);

enum class Direction { AtoB, BtoA, Undecided };
std::string to_string(Direction d);

struct PairDataset {
    Vector a;
    Vector b;
    Direction label = Direction::AtoB;
    double weight = 1.0;
};

/// Maximum rows kept before grid reduction.
inline constexpr Index kPairsGridCutoff = 400;
inline constexpr Index kPairsGridCount = 300;

/// Standardizes both variables; above 400 rows, sorts by the first
/// variable, splits into 300 near-equal contiguous grids and keeps the
/// lower-median row of each.
PairDataset pairs_preprocess(const PairDataset& pair);

struct Orientation {
    Direction direction = Direction::Undecided;
    /// Both entries survived the threshold and the larger raw weight decided.
    bool tiebreak = false;
    Matrix W_raw;
    Matrix W_hat;
};

/// Runs discover() on the two-column matrix [a b] and reads the direction
/// off the thresholded 2 x 2 adjacency.
Orientation orient_pair(const PairDataset& pair, const DagmaConfig& cfg);

/// Direction decision from a raw 2 x 2 weight matrix at threshold omega.
Orientation orientation_from(const Matrix& W_raw, double omega);

}  // namespace rkhs_dagma
