#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "espmv/entropy.hpp"
#include "espmv/kernels.hpp"
#include "espmv/matrix.hpp"
#include "espmv/permute.hpp"

namespace espmv {

inline constexpr std::size_t kMinIterations = 1000;
inline constexpr std::size_t kMaxIterations = 5000;
inline constexpr std::size_t kPilotCalls = 10;
inline constexpr double kCorrectnessTolerance = 1e-12;

/// A timed SpMV workload. prepare() runs outside the timed region.
class Kernel {
 public:
  virtual ~Kernel() = default;
  /// Identifier in the raw trial log, e.g. "CPU PAR p=4".
  virtual std::string name() const = 0;
  virtual void prepare(const CooMatrix& coo, const CsrMatrix& csr) = 0;
  virtual void run(std::span<const double> x, std::span<double> y) = 0;
};

class CooKernel final : public Kernel {
 public:
  std::string name() const override { return "CPU COO"; }
  void prepare(const CooMatrix& coo, const CsrMatrix&) override { m_ = &coo; }
  void run(std::span<const double> x, std::span<double> y) override { spmv_coo(*m_, x, y); }

 private:
  const CooMatrix* m_ = nullptr;
};

class CsrKernel final : public Kernel {
 public:
  std::string name() const override { return "CPU CSR"; }
  void prepare(const CooMatrix&, const CsrMatrix& csr) override { m_ = &csr; }
  void run(std::span<const double> x, std::span<double> y) override { spmv_csr(*m_, x, y); }

 private:
  const CsrMatrix* m_ = nullptr;
};

/// Row-partitioned CSR on `workers` threads. By default the threads live in
/// a pool for the kernel's lifetime; with spawn_per_call they are created
/// and joined inside every call.
class ParallelCsrKernel final : public Kernel {
 public:
  ParallelCsrKernel(std::size_t workers, bool spawn_per_call);
  std::string name() const override;
  void prepare(const CooMatrix& coo, const CsrMatrix& csr) override;
  void run(std::span<const double> x, std::span<double> y) override;

 private:
  std::size_t workers_;
  bool spawn_per_call_;
  std::unique_ptr<WorkerPool> pool_;
  RowPartition partition_;
  const CsrMatrix* m_ = nullptr;
};

/// "CPU PAR p=N" -> N.
std::optional<std::size_t> parallel_workers(const std::string& kernel_name);

/// Worker counts tried for the parallel kernel: powers of two up to
/// cap = min(max_workers, n_rows), plus cap itself.
std::vector<std::size_t> worker_counts(std::size_t max_workers, Index n_rows);

struct BenchConfig {
  std::size_t repeats = 32;
  std::uint64_t master_seed = 0;
  double target_seconds = 2.0;
  std::size_t bins_1d = 0;  ///< 0 = min(dim, 512)
  std::size_t bins_r = kDefaultBins2D;
  std::size_t bins_c = kDefaultBins2D;
  LogBase entropy_base = LogBase::Two;
  ColumnGradientMode column_gradient = ColumnGradientMode::RowsAndColumns;
  std::size_t max_workers = 16;
  bool spawn_per_call = false;
};

using KernelSet = std::vector<std::unique_ptr<Kernel>>;

/// COO, CSR and one parallel CSR kernel per worker count.
KernelSet default_kernels(const BenchConfig& config, Index n_rows);

/// One timed (repeat, kernel) measurement. Field names match the JSON Lines log.
struct TrialResult {
  std::string matrix;
  StrategyKind strategy = StrategyKind::Regular;
  std::string kernel;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  double seconds_per_call = 0.0;
  double gflops = 0.0;
  double entropy_bits = 0.0;
  bool correctness_ok = false;

  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

/// round(target / estimate) clamped to [1000, 5000]. Throws unless
/// estimate > 0 and target > 0.
std::size_t choose_iterations(double estimated_seconds_per_call, double target_seconds = 2.0);

/// 2 * nnz / seconds / 1e9. Throws unless seconds > 0.
double gflops(std::size_t nnz, double seconds_per_call);

/// Wall time of `iterations` back-to-back calls (first call included)
/// divided by `iterations`. y holds the last call's output. Kernel
/// exceptions propagate.
double time_kernel(Kernel& kernel, std::span<const double> x, std::span<double> y,
                   std::size_t iterations);

/// max |a - b| / max |b| (or the absolute difference when b is all zero).
double relative_error(std::span<const double> a, std::span<const double> b);

/// Deterministic input vector in [0, 1) for a matrix with n_cols columns.
DenseVector bench_input(Index n_cols, std::uint64_t master_seed);

/// Seed of repeat r.
std::uint64_t repeat_seed(std::uint64_t master_seed, std::size_t repeat);

struct ExperimentResult {
  std::vector<TrialResult> trials;
  std::vector<StrategyPlan> plans;  ///< one per repeat
  std::vector<std::string> failures;

  bool all_correct() const;
};

using KernelFactory = std::function<KernelSet(const BenchConfig&, Index n_rows)>;

/// Repeats `config.repeats` times: permute with a fresh seed, check the
/// permuted product against the unpermuted one, time every kernel, and
/// record the 2D entropy of the permuted matrix. A failed check yields
/// zero-rate trials for that repeat; a kernel that throws or returns a
/// wrong result yields a zero-rate trial.
ExperimentResult run_experiment(const CooMatrix& m, const std::string& matrix_name,
                                StrategyKind strategy, const BenchConfig& config,
                                const KernelFactory& kernels = default_kernels);

}  // namespace espmv
