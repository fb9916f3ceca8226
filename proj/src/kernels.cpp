#include "espmv/kernels.hpp"

#include <algorithm>
#include <string>

#include "espmv/error.hpp"

namespace espmv {

namespace {

void check_shapes(Index n_rows, Index n_cols, std::size_t x_len, std::size_t y_len) {
  if (x_len != static_cast<std::size_t>(n_cols)) {
    throw DimensionError("input vector has length " + std::to_string(x_len) + ", matrix has " +
                         std::to_string(n_cols) + " columns");
  }
  if (y_len != static_cast<std::size_t>(n_rows)) {
    throw DimensionError("output vector has length " + std::to_string(y_len) +
                         ", matrix has " + std::to_string(n_rows) + " rows");
  }
}

inline void csr_rows(const CsrMatrix& m, const double* x, double* y, Index first, Index last) {
  const Offset* row_ptr = m.row_ptr.data();
  const Index* col = m.col_idx.data();
  const double* val = m.values.data();
  for (Index i = first; i < last; ++i) {
    double sum = 0.0;
    for (Offset k = row_ptr[i]; k < row_ptr[i + 1]; ++k) sum += val[k] * x[col[k]];
    y[i] = sum;
  }
}

void check_partition(const CsrMatrix& m, const RowPartition& partition) {
  if (partition.boundaries.size() < 2 || partition.boundaries.front() != 0 ||
      partition.boundaries.back() != m.n_rows) {
    throw DimensionError("row partition does not cover the matrix rows");
  }
}

}  // namespace

RowPartition make_row_partition(Index n_rows, std::size_t workers) {
  if (workers == 0) throw Error("worker count must be at least 1");
  if (n_rows < 0 || workers > static_cast<std::size_t>(n_rows)) {
    throw Error("worker count " + std::to_string(workers) + " exceeds row count " +
                std::to_string(n_rows));
  }
  const auto p = static_cast<Index>(workers);
  const Index base = n_rows / p;
  const Index extra = n_rows % p;
  RowPartition out;
  out.boundaries.resize(workers + 1);
  out.boundaries[0] = 0;
  for (Index w = 0; w < p; ++w) {
    out.boundaries[w + 1] = out.boundaries[w] + base + (w < extra ? 1 : 0);
  }
  return out;
}

WorkerPool::WorkerPool(std::size_t workers) {
  if (workers == 0) throw Error("worker pool needs at least one worker");
  threads_.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    threads_.emplace_back([this, w] { loop(w); });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::run(std::size_t tasks, const std::function<void(std::size_t)>& task) {
  if (tasks > size()) throw Error("more tasks than pool workers");
  if (tasks == 0) return;
  if (tasks > 1) {
    std::lock_guard lock(mutex_);
    task_ = &task;
    tasks_ = tasks;
    pending_ = tasks - 1;
    ++generation_;
  }
  if (tasks > 1) start_cv_.notify_all();
  task(0);
  if (tasks > 1) {
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    task_ = nullptr;
  }
}

void WorkerPool::loop(std::size_t worker) {
  std::size_t seen = 0;
  for (;;) {
    const std::function<void(std::size_t)>* task = nullptr;
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
      if (worker >= tasks_) continue;
      task = task_;
    }
    (*task)(worker);
    {
      std::lock_guard lock(mutex_);
      if (--pending_ == 0) done_cv_.notify_one();
    }
  }
}

void spmv_csr(const CsrMatrix& m, std::span<const double> x, std::span<double> y) {
  check_shapes(m.n_rows, m.n_cols, x.size(), y.size());
  csr_rows(m, x.data(), y.data(), 0, m.n_rows);
}

DenseVector spmv_csr(const CsrMatrix& m, std::span<const double> x) {
  DenseVector y(static_cast<std::size_t>(m.n_rows));
  spmv_csr(m, x, y);
  return y;
}

void spmv_coo(const CooMatrix& m, std::span<const double> x, std::span<double> y) {
  check_shapes(m.n_rows, m.n_cols, x.size(), y.size());
  std::fill(y.begin(), y.end(), 0.0);
  const Index* row = m.row_idx.data();
  const Index* col = m.col_idx.data();
  const double* val = m.values.data();
  const std::size_t nnz = m.nnz();
  for (std::size_t k = 0; k < nnz; ++k) y[row[k]] += val[k] * x[col[k]];
}

DenseVector spmv_coo(const CooMatrix& m, std::span<const double> x) {
  DenseVector y(static_cast<std::size_t>(m.n_rows));
  spmv_coo(m, x, y);
  return y;
}

void spmv_csr_parallel(const CsrMatrix& m, std::span<const double> x, std::span<double> y,
                       const RowPartition& partition, WorkerPool& pool) {
  check_shapes(m.n_rows, m.n_cols, x.size(), y.size());
  check_partition(m, partition);
  const double* xp = x.data();
  double* yp = y.data();
  pool.run(partition.workers(), [&](std::size_t w) {
    csr_rows(m, xp, yp, partition.begin(w), partition.end(w));
  });
}

void spmv_csr_parallel(const CsrMatrix& m, std::span<const double> x, std::span<double> y,
                       const RowPartition& partition) {
  check_shapes(m.n_rows, m.n_cols, x.size(), y.size());
  check_partition(m, partition);
  const double* xp = x.data();
  double* yp = y.data();
  std::vector<std::thread> threads;
  threads.reserve(partition.workers() - 1);
  for (std::size_t w = 1; w < partition.workers(); ++w) {
    threads.emplace_back(
        [&, w] { csr_rows(m, xp, yp, partition.begin(w), partition.end(w)); });
  }
  csr_rows(m, xp, yp, partition.begin(0), partition.end(0));
  for (auto& t : threads) t.join();
}

DenseVector spmv_csr_parallel(const CsrMatrix& m, std::span<const double> x,
                              std::size_t workers) {
  const RowPartition partition = make_row_partition(m.n_rows, workers);
  DenseVector y(static_cast<std::size_t>(m.n_rows));
  WorkerPool pool(workers);
  spmv_csr_parallel(m, x, y, partition, pool);
  return y;
}

}  // namespace espmv
