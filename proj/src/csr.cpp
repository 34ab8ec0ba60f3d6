#include "anygraph/csr.hpp"

#include <algorithm>
#include <numeric>

#include "anygraph/common.hpp"

namespace anygraph {

CsrMatrix CsrMatrix::from_coo(std::size_t rows, std::size_t cols,
                              const std::vector<std::uint32_t>& ri,
                              const std::vector<std::uint32_t>& ci,
                              const std::vector<double>& vals) {
    if (ri.size() != ci.size() || ri.size() != vals.size())
        throw ValidationError("from_coo: triplet arrays differ in length");
    for (std::size_t t = 0; t < ri.size(); ++t) {
        if (ri[t] >= rows || ci[t] >= cols)
            throw ValidationError("from_coo: index out of range");
    }

    // Counting sort by row, then sort each row's slice by column and coalesce.
    CsrMatrix m(rows, cols);
    std::vector<std::size_t> counts(rows, 0);
    for (std::uint32_t r : ri) counts[r]++;
    std::vector<std::size_t> offsets(rows + 1, 0);
    for (std::size_t r = 0; r < rows; ++r) offsets[r + 1] = offsets[r] + counts[r];

    std::vector<std::uint32_t> tmp_col(ri.size());
    std::vector<double> tmp_val(ri.size());
    {
        std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
        for (std::size_t t = 0; t < ri.size(); ++t) {
            const std::size_t p = cursor[ri[t]]++;
            tmp_col[p] = ci[t];
            tmp_val[p] = vals[t];
        }
    }

    m.col_idx.reserve(ri.size());
    m.values.reserve(ri.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t lo = offsets[r], hi = offsets[r + 1];
        std::vector<std::size_t> order(hi - lo);
        std::iota(order.begin(), order.end(), lo);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return tmp_col[a] < tmp_col[b]; });
        for (std::size_t p : order) {
            const bool same_as_prev =
                m.col_idx.size() > m.row_ptr[r] && m.col_idx.back() == tmp_col[p];
            if (same_as_prev) {
                m.values.back() += tmp_val[p];
            } else {
                m.col_idx.push_back(tmp_col[p]);
                m.values.push_back(tmp_val[p]);
            }
        }
        m.row_ptr[r + 1] = m.col_idx.size();
    }
    return m;
}

DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) throw ValidationError("spmm: dimension mismatch");
    DenseMatrix c(a.rows, b.cols, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(a.rows); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double* crow = c.row(i);
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            const double av = a.values[p];
            const double* brow = b.row(a.col_idx[p]);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

CsrMatrix csr_transpose(const CsrMatrix& a) {
    CsrMatrix t(a.cols, a.rows);
    t.col_idx.resize(a.nnz());
    t.values.resize(a.nnz());
    std::vector<std::size_t> counts(a.cols, 0);
    for (std::uint32_t c : a.col_idx) counts[c]++;
    for (std::size_t c = 0; c < a.cols; ++c) t.row_ptr[c + 1] = t.row_ptr[c] + counts[c];
    std::vector<std::size_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
    // Walking rows in order writes each transposed row's columns ascending.
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
            const std::size_t q = cursor[a.col_idx[p]]++;
            t.col_idx[q] = static_cast<std::uint32_t>(r);
            t.values[q] = a.values[p];
        }
    }
    return t;
}

std::vector<double> spmv(const CsrMatrix& a, const std::vector<double>& x) {
    if (a.cols != x.size()) throw ValidationError("spmv: dimension mismatch");
    std::vector<double> y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double acc = 0.0;
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            acc += a.values[p] * x[a.col_idx[p]];
        y[i] = acc;
    }
    return y;
}

}  // namespace anygraph
