#include "espmv/matrix.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <tuple>

#include "espmv/error.hpp"

namespace espmv {

namespace {

void check_index(Index i, Index extent, const char* axis, std::size_t k) {
  if (i < 0 || i >= extent) {
    throw Error(std::string(axis) + " index " + std::to_string(i) +
                " of entry " + std::to_string(k) + " outside [0, " +
                std::to_string(extent) + ")");
  }
}

}  // namespace

void validate(const CooMatrix& m) {
  if (m.n_rows < 0 || m.n_cols < 0) throw Error("negative matrix dimension");
  if (m.row_idx.size() != m.values.size() || m.col_idx.size() != m.values.size()) {
    throw Error("COO arrays differ in length");
  }
  for (std::size_t k = 0; k < m.nnz(); ++k) {
    check_index(m.row_idx[k], m.n_rows, "row", k);
    check_index(m.col_idx[k], m.n_cols, "column", k);
  }
  // Duplicates are caught by the sort inside coo_to_csr.
  (void)coo_to_csr(m);
}

void validate(const CsrMatrix& m) {
  if (m.n_rows < 0 || m.n_cols < 0) throw Error("negative matrix dimension");
  if (m.row_ptr.size() != static_cast<std::size_t>(m.n_rows) + 1) {
    throw Error("CSR row_ptr must have n_rows + 1 entries");
  }
  if (m.col_idx.size() != m.values.size()) throw Error("CSR arrays differ in length");
  if (m.row_ptr.front() != 0 || m.row_ptr.back() != static_cast<Offset>(m.nnz())) {
    throw Error("CSR row_ptr must start at 0 and end at nnz");
  }
  for (Index i = 0; i < m.n_rows; ++i) {
    const Offset begin = m.row_ptr[i];
    const Offset end = m.row_ptr[i + 1];
    if (end < begin) throw Error("CSR row_ptr decreases at row " + std::to_string(i));
    for (Offset k = begin; k < end; ++k) {
      check_index(m.col_idx[k], m.n_cols, "column", static_cast<std::size_t>(k));
      if (k > begin && m.col_idx[k] <= m.col_idx[k - 1]) {
        throw Error("CSR columns not strictly increasing in row " + std::to_string(i));
      }
    }
  }
}

CsrMatrix coo_to_csr(const CooMatrix& m) {
  if (m.row_idx.size() != m.values.size() || m.col_idx.size() != m.values.size()) {
    throw Error("COO arrays differ in length");
  }
  CsrMatrix out;
  out.n_rows = m.n_rows;
  out.n_cols = m.n_cols;
  out.row_ptr.assign(static_cast<std::size_t>(m.n_rows) + 1, 0);
  for (std::size_t k = 0; k < m.nnz(); ++k) {
    check_index(m.row_idx[k], m.n_rows, "row", k);
    check_index(m.col_idx[k], m.n_cols, "column", k);
    ++out.row_ptr[m.row_idx[k] + 1];
  }
  std::partial_sum(out.row_ptr.begin(), out.row_ptr.end(), out.row_ptr.begin());

  // Stable counting sort by row, then sort each row slice by column.
  std::vector<std::size_t> order(m.nnz());
  std::vector<Offset> cursor(out.row_ptr.begin(), out.row_ptr.end() - 1);
  for (std::size_t k = 0; k < m.nnz(); ++k) {
    order[static_cast<std::size_t>(cursor[m.row_idx[k]]++)] = k;
  }
  for (Index i = 0; i < m.n_rows; ++i) {
    auto first = order.begin() + out.row_ptr[i];
    auto last = order.begin() + out.row_ptr[i + 1];
    std::sort(first, last, [&](std::size_t a, std::size_t b) {
      return m.col_idx[a] < m.col_idx[b];
    });
    for (auto it = first; it != last && it + 1 != last; ++it) {
      if (m.col_idx[*it] == m.col_idx[*(it + 1)]) {
        throw Error("duplicate entry at (" + std::to_string(i) + ", " +
                    std::to_string(m.col_idx[*it]) + ")");
      }
    }
  }

  out.col_idx.resize(m.nnz());
  out.values.resize(m.nnz());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.col_idx[k] = m.col_idx[order[k]];
    out.values[k] = m.values[order[k]];
  }
  return out;
}

CooMatrix csr_to_coo(const CsrMatrix& m) {
  CooMatrix out;
  out.n_rows = m.n_rows;
  out.n_cols = m.n_cols;
  out.row_idx.reserve(m.nnz());
  for (Index i = 0; i < m.n_rows; ++i) {
    for (Offset k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) out.row_idx.push_back(i);
  }
  out.col_idx = m.col_idx;
  out.values = m.values;
  return out;
}

bool same_entries(const CooMatrix& a, const CooMatrix& b) {
  if (a.n_rows != b.n_rows || a.n_cols != b.n_cols || a.nnz() != b.nnz()) return false;
  using Triplet = std::tuple<Index, Index, double>;
  auto triplets = [](const CooMatrix& m) {
    std::vector<Triplet> t(m.nnz());
    for (std::size_t k = 0; k < m.nnz(); ++k) t[k] = {m.row_idx[k], m.col_idx[k], m.values[k]};
    std::sort(t.begin(), t.end());
    return t;
  };
  return triplets(a) == triplets(b);
}

CooMatrix identity_coo(Index n) {
  CooMatrix m;
  m.n_rows = n;
  m.n_cols = n;
  m.row_idx.resize(static_cast<std::size_t>(n));
  std::iota(m.row_idx.begin(), m.row_idx.end(), 0);
  m.col_idx = m.row_idx;
  m.values.assign(static_cast<std::size_t>(n), 1.0);
  return m;
}

}  // namespace espmv
