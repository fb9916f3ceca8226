#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "espmv/matrix.hpp"

namespace espmv {

using DenseVector = std::vector<double>;

/// Contiguous row ranges [boundaries[w], boundaries[w+1]) per worker.
struct RowPartition {
  std::vector<Index> boundaries;

  std::size_t workers() const noexcept { return boundaries.size() - 1; }
  Index begin(std::size_t w) const { return boundaries[w]; }
  Index end(std::size_t w) const { return boundaries[w + 1]; }

  friend bool operator==(const RowPartition&, const RowPartition&) = default;
};

/// Even split by row count, ignoring nonzeros: the first n_rows % p parts
/// get one extra row. Requires 1 <= p <= n_rows.
RowPartition make_row_partition(Index n_rows, std::size_t workers);

/// Fixed set of threads that execute fork-join jobs. The calling thread acts
/// as worker 0, so a pool of size p owns p - 1 threads.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const noexcept { return threads_.size() + 1; }

  /// Calls task(w) for w in [0, tasks) and returns once all have finished.
  /// tasks must not exceed size().
  void run(std::size_t tasks, const std::function<void(std::size_t)>& task);

 private:
  void loop(std::size_t worker);

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::size_t tasks_ = 0;
  std::size_t pending_ = 0;
  std::size_t generation_ = 0;
  bool stopping_ = false;
};

// All kernels accumulate row sums in storage order, so results are
// deterministic for a given matrix layout. They throw DimensionError when
// x.size() != n_cols or y.size() != n_rows.

void spmv_csr(const CsrMatrix& m, std::span<const double> x, std::span<double> y);
DenseVector spmv_csr(const CsrMatrix& m, std::span<const double> x);

void spmv_coo(const CooMatrix& m, std::span<const double> x, std::span<double> y);
DenseVector spmv_coo(const CooMatrix& m, std::span<const double> x);

/// Row-partitioned CSR. Each worker writes only its own slice of y, which
/// makes the result bitwise equal to spmv_csr. Runs on `pool`, which must
/// have at least partition.workers() workers.
void spmv_csr_parallel(const CsrMatrix& m, std::span<const double> x, std::span<double> y,
                       const RowPartition& partition, WorkerPool& pool);

/// Same, but spawns and joins `workers - 1` fresh threads on every call.
void spmv_csr_parallel(const CsrMatrix& m, std::span<const double> x, std::span<double> y,
                       const RowPartition& partition);

DenseVector spmv_csr_parallel(const CsrMatrix& m, std::span<const double> x,
                              std::size_t workers);

}  // namespace espmv
