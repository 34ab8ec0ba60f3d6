#include "anygraph/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "anygraph/common.hpp"

namespace anygraph {

namespace {
int g_workers = 0;  // 0 = library default
}

void set_worker_threads(int n) {
    g_workers = n > 0 ? n : 0;
#ifdef _OPENMP
    if (g_workers > 0) omp_set_num_threads(g_workers);
#endif
}

int worker_threads() {
#ifdef _OPENMP
    return g_workers > 0 ? g_workers : omp_get_max_threads();
#else
    return 1;
#endif
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) throw ValidationError("matmul: dimension mismatch");
    DenseMatrix c(a.rows, b.cols, 0.0);
    const std::size_t n = a.rows, k = a.cols, m = b.cols;
    // ikj order: each output row is accumulated left-to-right in k, so the
    // summation order per row is fixed regardless of thread count.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* crow = c.row(i);
        const double* arow = a.row(i);
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = b.row(kk);
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.cols) throw ValidationError("matmul_nt: dimension mismatch");
    DenseMatrix c(a.rows, b.rows, 0.0);
    const std::size_t k = a.cols;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(a.rows); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
            crow[j] = acc;
        }
    }
    return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows) throw ValidationError("matmul_tn: dimension mismatch");
    DenseMatrix c(a.cols, b.cols, 0.0);
    const std::size_t n = a.rows, m = b.cols;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(a.cols); ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        double* crow = c.row(j);
        for (std::size_t i = 0; i < n; ++i) {
            const double av = a(i, j);
            if (av == 0.0) continue;
            const double* brow = b.row(i);
            for (std::size_t kk = 0; kk < m; ++kk) crow[kk] += av * brow[kk];
        }
    }
    return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

void add_inplace(DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) throw ValidationError("add_inplace: shape mismatch");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void scale_inplace(DenseMatrix& a, double s) {
    for (double& v : a.data) v *= s;
}

double frobenius_norm(const DenseMatrix& a) {
    double acc = 0.0;
    for (double v : a.data) acc += v * v;
    return std::sqrt(acc);
}

bool all_finite(const DenseMatrix& a) {
    return std::all_of(a.data.begin(), a.data.end(),
                       [](double v) { return std::isfinite(v); });
}

DenseMatrix row_layernorm(const DenseMatrix& x, double eps) {
    if (x.cols < 1) throw ValidationError("row_layernorm: need at least one column");
    DenseMatrix y(x.rows, x.cols);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(x.rows); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* xr = x.row(i);
        double* yr = y.row(i);
        double mean = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) mean += xr[j];
        mean /= static_cast<double>(x.cols);
        double var = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double d = xr[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(x.cols);
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < x.cols; ++j) yr[j] = (xr[j] - mean) * inv;
    }
    return y;
}

}  // namespace anygraph
