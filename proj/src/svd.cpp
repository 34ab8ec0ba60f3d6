#include "anygraph/svd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "anygraph/common.hpp"

namespace anygraph {

namespace {

double row_dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

// Replace row j of `a` with a unit vector orthogonal to rows 0..j-1.
// Scans canonical basis vectors and keeps the one with the largest residual
// after projection, which is deterministic and always well conditioned.
void complete_row(DenseMatrix& a, std::size_t j) {
    const std::size_t n = a.cols;
    std::vector<double> best(n, 0.0), cand(n);
    double best_norm = -1.0;
    for (std::size_t t = 0; t < n; ++t) {
        std::fill(cand.begin(), cand.end(), 0.0);
        cand[t] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < j; ++i) {
                const double c = row_dot(a.row(i), cand.data(), n);
                const double* qi = a.row(i);
                for (std::size_t k = 0; k < n; ++k) cand[k] -= c * qi[k];
            }
        }
        const double nv = std::sqrt(row_dot(cand.data(), cand.data(), n));
        if (nv > best_norm) {
            best_norm = nv;
            best = cand;
        }
        if (best_norm > 0.7) break;
    }
    if (best_norm <= 0.0)
        throw ValidationError("orthonormalize_rows: cannot complete basis");
    double* rj = a.row(j);
    for (std::size_t k = 0; k < n; ++k) rj[k] = best[k] / best_norm;
}

struct JacobiResult {
    DenseMatrix u;           // k x k
    std::vector<double> s;   // k, descending
    DenseMatrix v;           // k x k
};

}  // namespace

void orthonormalize_rows(DenseMatrix& a, DenseMatrix* r) {
    const std::size_t k = a.rows, n = a.cols;
    if (k > n)
        throw ValidationError("orthonormalize_rows: more rows than columns");
    if (r) *r = DenseMatrix(k, k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double* v = a.row(j);
        const double norm0 = std::sqrt(row_dot(v, v, n));
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < j; ++i) {
                const double* qi = a.row(i);
                const double c = row_dot(qi, v, n);
                if (r) (*r)(i, j) += c;
                for (std::size_t t = 0; t < n; ++t) v[t] -= c * qi[t];
            }
        }
        const double norm = std::sqrt(row_dot(v, v, n));
        if (norm0 == 0.0 || norm <= 1e-10 * norm0) {
            if (r) (*r)(j, j) = 0.0;
            complete_row(a, j);
        } else {
            if (r) (*r)(j, j) = norm;
            const double inv = 1.0 / norm;
            for (std::size_t t = 0; t < n; ++t) v[t] *= inv;
        }
    }
}

void jacobi_svd_square(const DenseMatrix& a, DenseMatrix& u,
                       std::vector<double>& s, DenseMatrix& v) {
    if (a.rows != a.cols)
        throw ValidationError("jacobi_svd_square: matrix must be square");
    const std::size_t k = a.rows;
    // Work on the transpose so each column of the working matrix is a
    // contiguous row; same for the accumulated V.
    DenseMatrix gt = transpose(a);   // row j == column j of g
    DenseMatrix vt(k, k, 0.0);
    for (std::size_t i = 0; i < k; ++i) vt(i, i) = 1.0;

    double max_norm2 = 0.0;
    for (std::size_t j = 0; j < k; ++j)
        max_norm2 = std::max(max_norm2, row_dot(gt.row(j), gt.row(j), k));
    const double tol = 1e-15;

    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                double* gp = gt.row(p);
                double* gq = gt.row(q);
                const double app = row_dot(gp, gp, k);
                const double aqq = row_dot(gq, gq, k);
                const double apq = row_dot(gp, gq, k);
                if (std::abs(apq) <= tol * std::sqrt(app * aqq) ||
                    apq == 0.0)
                    continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                double* vp = vt.row(p);
                double* vq = vt.row(q);
                for (std::size_t i = 0; i < k; ++i) {
                    const double gp_i = gp[i], gq_i = gq[i];
                    gp[i] = cs * gp_i - sn * gq_i;
                    gq[i] = sn * gp_i + cs * gq_i;
                    const double vp_i = vp[i], vq_i = vq[i];
                    vp[i] = cs * vp_i - sn * vq_i;
                    vq[i] = sn * vp_i + cs * vq_i;
                }
            }
        }
        if (!rotated) break;
    }

    // Column norms are the singular values; sort descending (stable).
    std::vector<double> norms(k);
    for (std::size_t j = 0; j < k; ++j)
        norms[j] = std::sqrt(row_dot(gt.row(j), gt.row(j), k));
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    v = DenseMatrix(k, k, 0.0);
    s.assign(k, 0.0);
    const double smax = norms.empty() ? 0.0 : norms[order[0]];
    // Transposed scratch for u so completion can run on rows, flipped at end.
    DenseMatrix ut(k, k, 0.0);
    std::vector<std::size_t> degenerate;
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t src = order[j];
        for (std::size_t i = 0; i < k; ++i) v(i, j) = vt(src, i);
        if (norms[src] > smax * 1e-14 && norms[src] > 0.0) {
            s[j] = norms[src];
            const double inv = 1.0 / norms[src];
            double* ur = ut.row(j);
            const double* gr = gt.row(src);
            for (std::size_t i = 0; i < k; ++i) ur[i] = gr[i] * inv;
        } else {
            s[j] = 0.0;
            degenerate.push_back(j);
        }
    }
    // Degenerate columns sort last, so completing them in order against all
    // earlier rows keeps u orthonormal.
    for (std::size_t j : degenerate) complete_row(ut, j);
    u = transpose(ut);
}

namespace {

SvdFactors truncated_svd_impl(
    std::size_t rows, std::size_t cols, std::size_t rank,
    std::size_t power_iters, std::size_t oversample, RngStream& rng,
    const std::function<DenseMatrix(const DenseMatrix&)>& mul,
    const std::function<DenseMatrix(const DenseMatrix&)>& mul_t) {
    if (rank < 1) throw ValidationError("truncated_svd: rank must be >= 1");
    if (rank > std::min(rows, cols))
        throw ValidationError("truncated_svd: rank exceeds min(rows, cols)");

    const std::size_t l = std::min(rank + oversample, std::min(rows, cols));

    DenseMatrix omega(cols, l);
    for (std::size_t i = 0; i < cols; ++i)
        for (std::size_t j = 0; j < l; ++j) omega(i, j) = rng.next_normal();

    DenseMatrix qt = transpose(mul(omega));  // l x rows, rows orthonormal
    orthonormalize_rows(qt);
    for (std::size_t it = 0; it < power_iters; ++it) {
        DenseMatrix wt = transpose(mul_t(transpose(qt)));  // l x cols
        orthonormalize_rows(wt);
        qt = transpose(mul(transpose(wt)));
        orthonormalize_rows(qt);
    }

    // B = Q^T M. QR-factor B^T = Q2 R, then an exact SVD of the small R
    // gives B = V_r S (Q2 U_r)^T, hence M ~= (Q V_r) S (Q2 U_r)^T.
    DenseMatrix bt = mul_t(transpose(qt));  // cols x l
    DenseMatrix btt = transpose(bt);        // l x cols
    DenseMatrix r;
    orthonormalize_rows(btt, &r);           // btt now holds Q2^T
    DenseMatrix ur, vr;
    std::vector<double> sigma;
    jacobi_svd_square(r, ur, sigma, vr);

    DenseMatrix u_full = matmul(transpose(qt), vr);   // rows x l
    DenseMatrix v_full = matmul(transpose(btt), ur);  // cols x l

    SvdFactors f;
    f.u = DenseMatrix(rows, rank);
    f.v = DenseMatrix(cols, rank);
    f.s.assign(sigma.begin(), sigma.begin() + static_cast<std::ptrdiff_t>(rank));
    for (std::size_t j = 0; j < rank; ++j) {
        // Deterministic sign: largest-magnitude entry of each u column made
        // non-negative, v flipped in tandem.
        std::size_t imax = 0;
        double amax = -1.0;
        for (std::size_t i = 0; i < rows; ++i) {
            const double av = std::abs(u_full(i, j));
            if (av > amax) {
                amax = av;
                imax = i;
            }
        }
        const double flip = u_full(imax, j) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < rows; ++i) f.u(i, j) = flip * u_full(i, j);
        for (std::size_t i = 0; i < cols; ++i) f.v(i, j) = flip * v_full(i, j);
    }
    return f;
}

}  // namespace

SvdFactors truncated_svd(const DenseMatrix& m, std::size_t rank,
                         std::size_t power_iters, std::size_t oversample,
                         RngStream& rng) {
    if (!all_finite(m))
        throw ValidationError("truncated_svd: matrix has a non-finite entry");
    return truncated_svd_impl(
        m.rows, m.cols, rank, power_iters, oversample, rng,
        [&](const DenseMatrix& x) { return matmul(m, x); },
        [&](const DenseMatrix& x) { return matmul_tn(m, x); });
}

SvdFactors truncated_svd(const CsrMatrix& m, std::size_t rank,
                         std::size_t power_iters, std::size_t oversample,
                         RngStream& rng) {
    for (double v : m.values)
        if (!std::isfinite(v))
            throw ValidationError("truncated_svd: matrix has a non-finite entry");
    const CsrMatrix mt = csr_transpose(m);
    return truncated_svd_impl(
        m.rows, m.cols, rank, power_iters, oversample, rng,
        [&](const DenseMatrix& x) { return spmm(m, x); },
        [&](const DenseMatrix& x) { return spmm(mt, x); });
}

}  // namespace anygraph
