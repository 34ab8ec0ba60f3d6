#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "anygraph/dense.hpp"

namespace anygraph {

// Compressed sparse row matrix. Column indices within each row are kept
// sorted ascending and duplicate (row, col) entries are coalesced by
// summation when building from COO triplets.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr;   // size rows + 1
    std::vector<std::uint32_t> col_idx; // size nnz
    std::vector<double> values;         // size nnz

    CsrMatrix() = default;
    CsrMatrix(std::size_t r, std::size_t c)
        : rows(r), cols(c), row_ptr(r + 1, 0) {}

    std::size_t nnz() const { return values.size(); }

    static CsrMatrix from_coo(std::size_t rows, std::size_t cols,
                              const std::vector<std::uint32_t>& ri,
                              const std::vector<std::uint32_t>& ci,
                              const std::vector<double>& vals);
};

// Dense product  C = A * B  with A sparse. Row-parallel; each output row is
// accumulated in the CSR storage order, so results are independent of the
// number of worker threads.
DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& b);

CsrMatrix csr_transpose(const CsrMatrix& a);

// y = A * x for a single dense vector.
std::vector<double> spmv(const CsrMatrix& a, const std::vector<double>& x);

}  // namespace anygraph
