#pragma once

#include <cstddef>
#include <vector>

namespace anygraph {

/// Row-major dense matrix of doubles. All internal compute is 64-bit;
/// 32-bit precision appears only in on-disk matrix payloads.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
    bool empty() const { return rows == 0 || cols == 0; }
};

/// c = a * b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// c = a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
/// c = a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

void add_inplace(DenseMatrix& a, const DenseMatrix& b);
void scale_inplace(DenseMatrix& a, double s);

double frobenius_norm(const DenseMatrix& a);
bool all_finite(const DenseMatrix& a);

/// Per-row normalization y = (x - mean) / sqrt(var + eps) with population
/// variance and no learned scale or shift. Constant rows map to zeros.
DenseMatrix row_layernorm(const DenseMatrix& x, double eps = 1e-6);

/// Number of worker threads used by row-parallel kernels. Output values are
/// identical for any setting; this only caps parallelism.
void set_worker_threads(int n);
int worker_threads();

}  // namespace anygraph
