#pragma once

#include <cstddef>
#include <vector>

#include "anygraph/csr.hpp"
#include "anygraph/dense.hpp"
#include "anygraph/rng.hpp"

namespace anygraph {

// Result of a truncated SVD: m ~= u * diag(s) * v^T with u (n x r),
// v (m x r), s non-negative and non-increasing. Columns of u and v are
// orthonormal. Sign convention: the largest-magnitude entry of each u
// column is non-negative (v flipped in tandem) so results are reproducible.
struct SvdFactors {
    DenseMatrix u;
    std::vector<double> s;
    DenseMatrix v;
};

// Randomized truncated SVD (Halko-style range finder with Gaussian sketch,
// `power_iters` subspace iterations re-orthonormalized each pass, then an
// exact Jacobi SVD of the small projected matrix). Deterministic given the
// rng stream state. Requires 1 <= rank <= min(rows, cols).
SvdFactors truncated_svd(const DenseMatrix& m, std::size_t rank,
                         std::size_t power_iters, std::size_t oversample,
                         RngStream& rng);
SvdFactors truncated_svd(const CsrMatrix& m, std::size_t rank,
                         std::size_t power_iters, std::size_t oversample,
                         RngStream& rng);

// Exact SVD of a small square matrix via one-sided (Hestenes) Jacobi:
// a = u * diag(s) * v^T, s descending. Exposed for tests.
void jacobi_svd_square(const DenseMatrix& a, DenseMatrix& u,
                       std::vector<double>& s, DenseMatrix& v);

// In-place modified Gram-Schmidt over the ROWS of `a` (two passes per row
// for stability). Rows that turn out linearly dependent are replaced by a
// deterministic orthonormal completion and get a zero diagonal in `r`.
// If `r` is non-null it receives the (rows x rows) coefficient matrix with
// original_row_j = sum_i r(i, j) * new_row_i.
void orthonormalize_rows(DenseMatrix& a, DenseMatrix* r = nullptr);

}  // namespace anygraph
