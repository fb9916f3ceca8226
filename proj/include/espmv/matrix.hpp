#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace espmv {

using Index = std::int32_t;
using Offset = std::int64_t;

/// Coordinate-triplet storage. Indices are 0-based.
struct CooMatrix {
  Index n_rows = 0;
  Index n_cols = 0;
  std::vector<Index> row_idx;
  std::vector<Index> col_idx;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }

  friend bool operator==(const CooMatrix&, const CooMatrix&) = default;
};

/// Compressed sparse row storage; columns are strictly increasing inside a row.
struct CsrMatrix {
  Index n_rows = 0;
  Index n_cols = 0;
  std::vector<Offset> row_ptr;
  std::vector<Index> col_idx;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

/// Throws espmv::Error if array lengths, index bounds or the no-duplicate
/// rule are violated.
void validate(const CooMatrix& m);
void validate(const CsrMatrix& m);

/// Sorts entries row-major. Duplicate (row, col) pairs raise espmv::Error;
/// they are never summed.
CsrMatrix coo_to_csr(const CooMatrix& m);

/// Emits entries in CSR (row-major) order.
CooMatrix csr_to_coo(const CsrMatrix& m);

/// True when both matrices hold the same set of (row, col, value) triplets,
/// ignoring storage order.
bool same_entries(const CooMatrix& a, const CooMatrix& b);

CooMatrix identity_coo(Index n);

}  // namespace espmv
