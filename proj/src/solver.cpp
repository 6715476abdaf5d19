#include "dyntex/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dyntex/error.hpp"
#include "dyntex/simd/vec_ops.hpp"

namespace dyntex::solver {

namespace {

// In-place lower Cholesky of (omega + shift*I). Returns false when a
// pivot is non-positive or non-finite.
bool try_cholesky(const DenseMatrix& omega, double shift, DenseMatrix& l) {
    const std::size_t n = omega.rows();
    l = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row_i = l.row_ptr(i);
        for (std::size_t j = 0; j < i; ++j) {
            const double* row_j = l.row_ptr(j);
            const double s = simd::dot(row_i, row_j, j);
            l(i, j) = (omega(i, j) - s) / l(j, j);
        }
        const double s = simd::dot(row_i, row_i, i);
        const double d = omega(i, i) + shift - s;
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        l(i, i) = std::sqrt(d);
    }
    return true;
}

void check_spd_inputs(const DenseMatrix& omega, double lambda, const DenseMatrix& rhs) {
    if (omega.rows() != omega.cols())
        throw DataError("spd_solve: omega must be square");
    if (rhs.rows() != omega.rows())
        throw DataError("spd_solve: rhs row count does not match omega order");
    if (lambda < 0.0)
        throw DataError("spd_solve: lambda must be non-negative");
}

} // namespace

SpdFactorization spd_factorize(const DenseMatrix& omega, double lambda) {
    if (omega.rows() != omega.cols())
        throw DataError("spd_factorize: omega must be square");
    const std::size_t n = omega.rows();
    double trace = n * lambda;
    for (std::size_t i = 0; i < n; ++i) trace += omega(i, i);
    const double base = n ? trace / static_cast<double>(n) : 0.0;

    SpdFactorization f;
    f.n = n;
    for (const double level : {0.0, 1e-10, 1e-8}) {
        const double jitter = level * base;
        if (try_cholesky(omega, lambda + jitter, f.factor)) {
            f.jitter_applied = jitter;
            return f;
        }
    }
    throw NumericError("matrix not positive definite; increase lambda");
}

DenseMatrix spd_backsolve(const SpdFactorization& f, const DenseMatrix& rhs) {
    const std::size_t n = f.n;
    const std::size_t m = rhs.cols();
    if (rhs.rows() != n)
        throw DataError("spd_backsolve: rhs row count does not match factorization");
    DenseMatrix x = rhs;
    // forward: L z = rhs
    for (std::size_t i = 0; i < n; ++i) {
        double* xi = x.row_ptr(i);
        for (std::size_t k = 0; k < i; ++k)
            simd::axpy(-f.factor(i, k), x.row_ptr(k), xi, m);
        simd::scale(1.0 / f.factor(i, i), xi, m);
    }
    // backward: L^T x = z
    for (std::size_t ii = n; ii-- > 0;) {
        double* xi = x.row_ptr(ii);
        for (std::size_t k = ii + 1; k < n; ++k)
            simd::axpy(-f.factor(k, ii), x.row_ptr(k), xi, m);
        simd::scale(1.0 / f.factor(ii, ii), xi, m);
    }
    return x;
}

DenseMatrix spd_solve(const DenseMatrix& omega, double lambda,
                      const DenseMatrix& rhs, double* jitter_applied) {
    check_spd_inputs(omega, lambda, rhs);
    const SpdFactorization f = spd_factorize(omega, lambda);
    if (jitter_applied) *jitter_applied = f.jitter_applied;
    return spd_backsolve(f, rhs);
}

namespace {

// Column-major working buffer for the Jacobi sweeps: columns contiguous
// so the rotation kernel streams.
struct ColMat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;
    ColMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double* col(std::size_t c) { return data.data() + c * rows; }
    const double* col(std::size_t c) const { return data.data() + c * rows; }
};

// Deterministic orthonormal completion for null columns: take the canonical
// basis vector with the largest residual against the accepted columns, then
// re-orthogonalize once more before normalizing.
void complete_column(ColMat& u, std::size_t target,
                     const std::vector<bool>& valid) {
    const std::size_t m = u.rows;
    auto orthogonalize = [&](std::vector<double>& vec) {
        for (std::size_t c = 0; c < u.cols; ++c) {
            if (!valid[c]) continue;
            const double proj = simd::dot(vec.data(), u.col(c), m);
            simd::axpy(-proj, u.col(c), vec.data(), m);
        }
    };
    std::vector<double> cand(m), best(m);
    double best_norm2 = -1.0;
    for (std::size_t basis = 0; basis < m; ++basis) {
        std::fill(cand.begin(), cand.end(), 0.0);
        cand[basis] = 1.0;
        orthogonalize(cand);
        const double norm2 = simd::dot(cand.data(), cand.data(), m);
        if (norm2 > best_norm2) {
            best_norm2 = norm2;
            best = cand;
        }
        if (norm2 > 0.5) break; // good enough, stop probing
    }
    if (best_norm2 <= 1e-12)
        throw NumericError("svd: failed to complete orthonormal basis");
    orthogonalize(best);
    const double norm2 = simd::dot(best.data(), best.data(), m);
    simd::scale(1.0 / std::sqrt(norm2), best.data(), m);
    std::copy(best.begin(), best.end(), u.col(target));
}

} // namespace

// One-sided Jacobi on w (m x k, m >= k). Outputs orthonormal u (m x k,
// null directions completed), orthonormal v (k x k), and s sorted
// non-increasing.
void jacobi_svd_core(ColMat& w, ColMat& u, ColMat& v, std::vector<double>& s) {
    const std::size_t m = w.rows;
    const std::size_t k = w.cols;

    v = ColMat(k, k);
    for (std::size_t c = 0; c < k; ++c) v.col(c)[c] = 1.0;

    std::vector<double> sqnorm(k);
    auto refresh_norms = [&] {
        for (std::size_t c = 0; c < k; ++c)
            sqnorm[c] = simd::dot(w.col(c), w.col(c), m);
    };
    refresh_norms();

    constexpr double kTol = 1e-15;
    constexpr int kMaxSweeps = 60;
    // Columns whose mass has collapsed to rounding noise (relative to the
    // rotation-invariant Frobenius norm) stop participating; otherwise
    // rank-deficient inputs cycle forever on noise-vs-noise rotations.
    const double frob2 = std::accumulate(sqnorm.begin(), sqnorm.end(), 0.0);
    const double null_floor = frob2 * 1e-26;
    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                const double aii = sqnorm[i];
                const double ajj = sqnorm[j];
                if (aii <= null_floor || ajj <= null_floor) continue;
                const double aij = simd::dot(w.col(i), w.col(j), m);
                if (std::abs(aij) <= kTol * std::sqrt(aii * ajj)) continue;
                converged = false;
                const double tau = (ajj - aii) / (2.0 * aij);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                // cols (i, j) <- (cs*i - sn*j, sn*i + cs*j)
                simd::rot(cs, -sn, w.col(i), w.col(j), m);
                simd::rot(cs, -sn, v.col(i), v.col(j), k);
                sqnorm[i] = aii - t * aij;
                sqnorm[j] = ajj + t * aij;
            }
        }
        refresh_norms();
    }
    if (!converged)
        throw NumericError("svd: Jacobi sweeps did not converge");

    std::vector<double> sigma(k);
    for (std::size_t c = 0; c < k; ++c) sigma[c] = std::sqrt(sqnorm[c]);

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    u = ColMat(m, k);
    ColMat vs(k, k);
    std::vector<bool> valid(k, false);
    std::vector<std::size_t> null_cols;
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t src = order[c];
        std::copy(v.col(src), v.col(src) + k, vs.col(c));
        // columns excluded from the sweeps get a completed basis vector
        // instead of a normalized noise direction
        if (sqnorm[src] > null_floor) {
            std::copy(w.col(src), w.col(src) + m, u.col(c));
            simd::scale(1.0 / sigma[src], u.col(c), m);
            valid[c] = true;
        } else {
            null_cols.push_back(c);
        }
    }
    for (const std::size_t c : null_cols) {
        complete_column(u, c, valid);
        valid[c] = true;
    }

    s.resize(k);
    for (std::size_t c = 0; c < k; ++c) s[c] = sigma[order[c]];
    v = std::move(vs);
}

// Thin Householder QR of w (m x k, m >= k): on return the top k rows of w
// hold R; reflectors live in refl (zeros above the diagonal, v_j below)
// with their beta factors.
void householder_qr(ColMat& w, ColMat& refl, std::vector<double>& betas) {
    const std::size_t m = w.rows;
    const std::size_t k = w.cols;
    refl = ColMat(m, k);
    betas.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double* colj = w.col(j);
        const std::size_t len = m - j;
        const double normx = std::sqrt(simd::dot(colj + j, colj + j, len));
        if (normx == 0.0) continue;
        const double alpha = colj[j] >= 0.0 ? -normx : normx;
        double* v = refl.col(j) + j;
        v[0] = colj[j] - alpha;
        for (std::size_t i = 1; i < len; ++i) v[i] = colj[j + i];
        const double vtv = simd::dot(v, v, len);
        if (vtv == 0.0) continue;
        const double beta = 2.0 / vtv;
        betas[j] = beta;
        colj[j] = alpha;
        for (std::size_t i = 1; i < len; ++i) colj[j + i] = 0.0;
        for (std::size_t c = j + 1; c < k; ++c) {
            double* colc = w.col(c) + j;
            const double proj = simd::dot(v, colc, len);
            simd::axpy(-beta * proj, v, colc, len);
        }
    }
}

SvdResult svd(const DenseMatrix& a) {
    const std::size_t p = a.rows();
    const std::size_t q = a.cols();
    if (p == 0 || q == 0) throw DataError("svd: empty matrix");
    for (const double v : a.data())
        if (!std::isfinite(v)) throw DataError("svd: non-finite entry");

    const bool transposed = p < q;
    const std::size_t m = transposed ? q : p; // working rows
    const std::size_t k = transposed ? p : q; // working cols, m >= k

    ColMat w(m, k);
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < q; ++c) {
            if (transposed)
                w.col(r)[c] = a(r, c);
            else
                w.col(c)[r] = a(r, c);
        }

    ColMat u(0, 0);
    ColMat vs(0, 0);
    std::vector<double> s_sorted;
    if (m >= 3 * k) {
        // tall case: QR first, then Jacobi on the small k x k factor, then
        // map U back through the reflectors; turns O(sweeps * k^2 * m)
        // rotations into one O(m * k^2) factorization
        ColMat refl(0, 0);
        std::vector<double> betas;
        householder_qr(w, refl, betas);
        ColMat r(k, k);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t row = 0; row <= std::min(c, k - 1); ++row)
                r.col(c)[row] = w.col(c)[row];
        ColMat ur(0, 0);
        jacobi_svd_core(r, ur, vs, s_sorted);
        // u = Q [ur; 0]
        u = ColMat(m, k);
        for (std::size_t c = 0; c < k; ++c)
            std::copy(ur.col(c), ur.col(c) + k, u.col(c));
        for (std::size_t j = k; j-- > 0;) {
            if (betas[j] == 0.0) continue;
            const double* v = refl.col(j) + j;
            const std::size_t len = m - j;
            for (std::size_t c = 0; c < k; ++c) {
                double* colc = u.col(c) + j;
                const double proj = simd::dot(v, colc, len);
                simd::axpy(-betas[j] * proj, v, colc, len);
            }
        }
    } else {
        jacobi_svd_core(w, u, vs, s_sorted);
    }

    SvdResult out;
    out.s = std::move(s_sorted);
    if (!transposed) {
        out.u = DenseMatrix(p, k);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t r = 0; r < p; ++r) out.u(r, c) = u.col(c)[r];
        out.v = DenseMatrix(q, k);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t r = 0; r < q; ++r) out.v(r, c) = vs.col(c)[r];
    } else {
        // a = (u s v^T)^T of the transposed problem
        out.u = DenseMatrix(p, k);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t r = 0; r < p; ++r) out.u(r, c) = vs.col(c)[r];
        out.v = DenseMatrix(q, k);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t r = 0; r < q; ++r) out.v(r, c) = u.col(c)[r];
    }
    return out;
}

DenseMatrix pinv_solve(const DenseMatrix& h, const DenseMatrix& y, double lambda) {
    const std::size_t n = h.rows();
    const std::size_t t = h.cols();
    if (y.rows() != n)
        throw DataError("pinv_solve: response row count does not match h");
    if (lambda < 0.0) throw DataError("pinv_solve: lambda must be non-negative");

    if (n <= t) {
        // beta = H^T (lambda I + H H^T)^{-1} Y
        DenseMatrix gram(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const double v = simd::dot(h.row_ptr(i), h.row_ptr(j), t);
                gram(i, j) = v;
                gram(j, i) = v;
            }
        }
        const DenseMatrix alpha = spd_solve(gram, lambda, y);
        return matmul_at(h, alpha);
    }
    // beta = (lambda I + H^T H)^{-1} H^T Y
    DenseMatrix gram(t, t);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = h.row_ptr(i);
        for (std::size_t c = 0; c < t; ++c)
            simd::axpy(row[c], row, gram.row_ptr(c), t);
    }
    const DenseMatrix rhs = matmul_at(h, y);
    return spd_solve(gram, lambda, rhs);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw DataError("matmul: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row_ptr(i);
        for (std::size_t k = 0; k < a.cols(); ++k)
            simd::axpy(a(i, k), b.row_ptr(k), ci, b.cols());
    }
    return c;
}

DenseMatrix matmul_at(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw DataError("matmul_at: row counts differ");
    DenseMatrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row_ptr(i);
        const double* bi = b.row_ptr(i);
        for (std::size_t k = 0; k < a.cols(); ++k)
            simd::axpy(ai[k], bi, c.row_ptr(k), b.cols());
    }
    return c;
}

double frobenius_norm(const DenseMatrix& a) {
    return std::sqrt(simd::dot(a.data().data(), a.data().data(), a.data().size()));
}

} // namespace dyntex::solver
