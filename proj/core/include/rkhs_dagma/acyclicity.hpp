#pragma once

#include "rkhs_dagma/types.hpp"

#include <optional>

namespace rkhs_dagma {

/// Values treated as zero by h_ldet-based DAG checks.
inline constexpr double kDagTolerance = 1e-9;

/// LU factorization (no pivoting) of s I - A for nonnegative A.
///
/// s I - A is a Z-matrix, so all pivots are positive exactly when it is a
/// nonsingular M-matrix, i.e. when rho(A) < s. The factorization doubles as
/// the domain test and feeds both the log-determinant and the inverse.
class LdetFactorization {
public:
    /// Returns std::nullopt when a non-positive pivot appears.
    static std::optional<LdetFactorization> compute(const Matrix& A, double s);

    [[nodiscard]] double log_det() const;
    /// (s I - A)^{-1}
    [[nodiscard]] Matrix inverse() const;

private:
    explicit LdetFactorization(Matrix lu) : lu_(std::move(lu)) {}
    Matrix lu_;  // unit-lower L below the diagonal, U on and above
};

/// true iff rho(A) < s, decided by pivot positivity.
bool in_domain(const Matrix& A, double s);

/// -log det(s I - A) + d log s. Throws OutOfDomainError outside the domain.
double h_ldet(const Matrix& A, double s);

/// (s I - A)^{-T}.
Matrix grad_h_ldet(const Matrix& A, double s);

struct LdetEvaluation {
    double value;
    Matrix gradient;
};

/// Value and gradient from one factorization.
LdetEvaluation h_ldet_with_gradient(const Matrix& A, double s);

/// Gradient of W -> h_ldet(W o W, s): 2 (s I - W o W)^{-T} o W.
Matrix grad_h_ldet_wrt_W(const Matrix& W, double s);

/// Value and W-gradient of h_ldet(W o W, s) from one factorization.
LdetEvaluation h_ldet_squared_with_gradient(const Matrix& W, double s);

/// Kahn's algorithm. Self-loops make a graph cyclic.
bool is_dag(const DirectedGraph& g);

}  // namespace rkhs_dagma
