#pragma once

#include <vector>

#include "dyntex/matrix.hpp"

namespace dyntex::solver {

// Cholesky factor of (lambda*I + omega + jitter*I). jitter_applied is 0
// when the plain factorization succeeds and escalates through two retry
// levels otherwise (1e-10 and 1e-8 times mean diagonal mass).
struct SpdFactorization {
    std::size_t n = 0;
    DenseMatrix factor; // lower triangular, row-major
    double jitter_applied = 0.0;
};

SpdFactorization spd_factorize(const DenseMatrix& omega, double lambda);

// Solves (lambda*I + omega) X = rhs through an existing factorization.
DenseMatrix spd_backsolve(const SpdFactorization& f, const DenseMatrix& rhs);

// One-shot solve; optionally reports the jitter that was applied.
DenseMatrix spd_solve(const DenseMatrix& omega, double lambda,
                      const DenseMatrix& rhs, double* jitter_applied = nullptr);

struct SvdResult {
    DenseMatrix u;         // p x r
    std::vector<double> s; // r, non-negative, non-increasing
    DenseMatrix v;         // q x r
};

// Thin SVD of a general p x q matrix via one-sided Jacobi, r = min(p, q).
SvdResult svd(const DenseMatrix& a);

// Ridge regression output weights: minimizes |h*beta - y|^2 + lambda*|beta|^2.
// Uses the N x N system when N <= T, the T x T system otherwise (h is N x T).
DenseMatrix pinv_solve(const DenseMatrix& h, const DenseMatrix& y, double lambda);

// Row-major products built on the SIMD primitives.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);         // A*B
DenseMatrix matmul_at(const DenseMatrix& a, const DenseMatrix& b);      // A^T * B

double frobenius_norm(const DenseMatrix& a);

} // namespace dyntex::solver
