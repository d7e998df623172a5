#include "rkhs_dagma/acyclicity.hpp"

#include <cmath>
#include <deque>
#include <string>

namespace rkhs_dagma {

namespace {

void check_square(const Matrix& A, const char* what) {
    if (A.rows() != A.cols()) {
        throw InvalidArgument(std::string(what) + ": matrix must be square");
    }
}

void check_s(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw InvalidArgument("log-det parameter s must be positive");
    }
}

LdetFactorization factor_or_throw(const Matrix& A, double s) {
    check_square(A, "h_ldet");
    check_s(s);
    auto fac = LdetFactorization::compute(A, s);
    if (!fac) {
        throw OutOfDomainError("matrix outside log-det domain: spectral radius >= s = " +
                               std::to_string(s));
    }
    return *std::move(fac);
}

}  // namespace

std::optional<LdetFactorization> LdetFactorization::compute(const Matrix& A, double s) {
    const Index d = A.rows();
    Matrix lu = -A;
    lu.diagonal().array() += s;
    for (Index p = 0; p < d; ++p) {
        const double pivot = lu(p, p);
        if (!(pivot > 0.0) || !std::isfinite(pivot)) {
            return std::nullopt;
        }
        for (Index i = p + 1; i < d; ++i) {
            const double factor = lu(i, p) / pivot;
            lu(i, p) = factor;
            if (factor == 0.0) {
                continue;
            }
            for (Index k = p + 1; k < d; ++k) {
                lu(i, k) -= factor * lu(p, k);
            }
        }
    }
    return LdetFactorization(std::move(lu));
}

double LdetFactorization::log_det() const {
    double total = 0.0;
    for (Index p = 0; p < lu_.rows(); ++p) {
        total += std::log(lu_(p, p));
    }
    return total;
}

Matrix LdetFactorization::inverse() const {
    const Index d = lu_.rows();
    Matrix inv = Matrix::Identity(d, d);
    lu_.triangularView<Eigen::UnitLower>().solveInPlace(inv);
    lu_.triangularView<Eigen::Upper>().solveInPlace(inv);
    return inv;
}

bool in_domain(const Matrix& A, double s) {
    check_square(A, "in_domain");
    check_s(s);
    return LdetFactorization::compute(A, s).has_value();
}

double h_ldet(const Matrix& A, double s) {
    const auto fac = factor_or_throw(A, s);
    return -fac.log_det() + static_cast<double>(A.rows()) * std::log(s);
}

Matrix grad_h_ldet(const Matrix& A, double s) {
    return factor_or_throw(A, s).inverse().transpose();
}

LdetEvaluation h_ldet_with_gradient(const Matrix& A, double s) {
    const auto fac = factor_or_throw(A, s);
    return {-fac.log_det() + static_cast<double>(A.rows()) * std::log(s),
            fac.inverse().transpose()};
}

LdetEvaluation h_ldet_squared_with_gradient(const Matrix& W, double s) {
    const Matrix A = W.cwiseProduct(W);
    auto eval = h_ldet_with_gradient(A, s);
    eval.gradient = 2.0 * eval.gradient.cwiseProduct(W);
    return eval;
}

Matrix grad_h_ldet_wrt_W(const Matrix& W, double s) {
    return h_ldet_squared_with_gradient(W, s).gradient;
}

bool is_dag(const DirectedGraph& g) {
    const Index d = g.size();
    std::vector<Index> indegree(static_cast<std::size_t>(d), 0);
    for (Index k = 0; k < d; ++k) {
        for (Index j = 0; j < d; ++j) {
            if (g.adjacency(k, j)) {
                ++indegree[static_cast<std::size_t>(j)];
            }
        }
    }
    std::deque<Index> ready;
    for (Index j = 0; j < d; ++j) {
        if (indegree[static_cast<std::size_t>(j)] == 0) {
            ready.push_back(j);
        }
    }
    Index visited = 0;
    while (!ready.empty()) {
        const Index k = ready.front();
        ready.pop_front();
        ++visited;
        for (Index j = 0; j < d; ++j) {
            if (g.adjacency(k, j) && --indegree[static_cast<std::size_t>(j)] == 0) {
                ready.push_back(j);
            }
        }
    }
    return visited == d;
}

}  // namespace rkhs_dagma
