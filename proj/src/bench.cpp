#include "espmv/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>

#include "espmv/error.hpp"
#include "espmv/rng.hpp"

namespace espmv {

namespace {

constexpr std::string_view kParallelPrefix = "CPU PAR p=";
constexpr std::uint64_t kInputStream = 0x78;  // 'x'

using Clock = std::chrono::steady_clock;

}  // namespace

ParallelCsrKernel::ParallelCsrKernel(std::size_t workers, bool spawn_per_call)
    : workers_(workers), spawn_per_call_(spawn_per_call) {
  if (workers == 0) throw Error("parallel kernel needs at least one worker");
  if (!spawn_per_call_) pool_ = std::make_unique<WorkerPool>(workers);
}

std::string ParallelCsrKernel::name() const {
  return std::string(kParallelPrefix) + std::to_string(workers_);
}

void ParallelCsrKernel::prepare(const CooMatrix&, const CsrMatrix& csr) {
  m_ = &csr;
  partition_ = make_row_partition(csr.n_rows, workers_);
}

void ParallelCsrKernel::run(std::span<const double> x, std::span<double> y) {
  if (spawn_per_call_) {
    spmv_csr_parallel(*m_, x, y, partition_);
  } else {
    spmv_csr_parallel(*m_, x, y, partition_, *pool_);
  }
}

std::optional<std::size_t> parallel_workers(const std::string& kernel_name) {
  if (!kernel_name.starts_with(kParallelPrefix)) return std::nullopt;
  const std::string digits = kernel_name.substr(kParallelPrefix.size());
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
  return static_cast<std::size_t>(std::stoull(digits));
}

std::vector<std::size_t> worker_counts(std::size_t max_workers, Index n_rows) {
  const std::size_t cap = std::min(max_workers, static_cast<std::size_t>(std::max<Index>(n_rows, 0)));
  std::vector<std::size_t> out;
  for (std::size_t p = 1; p <= cap; p *= 2) out.push_back(p);
  if (cap > 0 && out.back() != cap) out.push_back(cap);
  return out;
}

KernelSet default_kernels(const BenchConfig& config, Index n_rows) {
  KernelSet kernels;
  kernels.push_back(std::make_unique<CooKernel>());
  kernels.push_back(std::make_unique<CsrKernel>());
  for (std::size_t p : worker_counts(config.max_workers, n_rows)) {
    kernels.push_back(std::make_unique<ParallelCsrKernel>(p, config.spawn_per_call));
  }
  return kernels;
}

std::size_t choose_iterations(double estimated_seconds_per_call, double target_seconds) {
  if (!(estimated_seconds_per_call > 0.0)) throw Error("iteration estimate must be positive");
  if (!(target_seconds > 0.0)) throw Error("target time must be positive");
  const double want = std::round(target_seconds / estimated_seconds_per_call);
  return static_cast<std::size_t>(
      std::clamp(want, static_cast<double>(kMinIterations), static_cast<double>(kMaxIterations)));
}

double gflops(std::size_t nnz, double seconds_per_call) {
  if (!(seconds_per_call > 0.0)) throw Error("time per call must be positive");
  return 2.0 * static_cast<double>(nnz) / seconds_per_call / 1e9;
}

double time_kernel(Kernel& kernel, std::span<const double> x, std::span<double> y,
                   std::size_t iterations) {
  if (iterations == 0) throw Error("iterations must be at least 1");
  const auto start = Clock::now();
  for (std::size_t i = 0; i < iterations; ++i) kernel.run(x, y);
  const std::chrono::duration<double> elapsed = Clock::now() - start;
  return elapsed.count() / static_cast<double>(iterations);
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("relative_error on vectors of different length");
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  if (std::isnan(diff)) return diff;
  return scale > 0.0 ? diff / scale : diff;
}

DenseVector bench_input(Index n_cols, std::uint64_t master_seed) {
  Rng rng(derive_seed(master_seed, kInputStream));
  DenseVector x(static_cast<std::size_t>(n_cols));
  for (double& v : x) v = rng.unit();
  return x;
}

std::uint64_t repeat_seed(std::uint64_t master_seed, std::size_t repeat) {
  return derive_seed(master_seed, repeat);
}

bool ExperimentResult::all_correct() const {
  return std::all_of(trials.begin(), trials.end(),
                     [](const TrialResult& t) { return t.correctness_ok; });
}

ExperimentResult run_experiment(const CooMatrix& m, const std::string& matrix_name,
                                StrategyKind strategy, const BenchConfig& config,
                                const KernelFactory& make_kernels) {
  if (config.repeats == 0) throw Error("repeats must be at least 1");
  const CsrMatrix reference_csr = coo_to_csr(m);
  const DenseVector x = bench_input(m.n_cols, config.master_seed);
  const DenseVector y_ref = spmv_csr(reference_csr, x);
  KernelSet kernels = make_kernels(config, m.n_rows);

  StrategyOptions options;
  options.bins = config.bins_1d;
  options.column_gradient = config.column_gradient;

  ExperimentResult result;
  for (std::size_t r = 0; r < config.repeats; ++r) {
    const std::uint64_t seed = repeat_seed(config.master_seed, r);
    StrategyPlan plan = build_strategy(m, strategy, seed, options);
    const CooMatrix permuted = apply_strategy(m, plan);
    const CsrMatrix permuted_csr = coo_to_csr(permuted);
    const DenseVector x_perm = permute_vector(x, plan.cols);
    const Permutation rows_back = plan.rows.inverse();
    const double entropy =
        m.nnz() == 0 ? 0.0 : matrix_entropy(permuted, config.bins_r, config.bins_c, config.entropy_base);

    auto trial_for = [&](const Kernel& k) {
      TrialResult t;
      t.matrix = matrix_name;
      t.strategy = strategy;
      t.kernel = k.name();
      t.repeat = r;
      t.seed = seed;
      t.entropy_bits = entropy;
      return t;
    };

    // Permuted product, mapped back, must reproduce the reference.
    const double err =
        relative_error(permute_vector(spmv_csr(permuted_csr, x_perm), rows_back), y_ref);
    if (!(err <= kCorrectnessTolerance)) {
      result.failures.push_back(matrix_name + " " + std::string(strategy_name(strategy)) +
                                " repeat " + std::to_string(r) +
                                ": permuted product differs (relative error " +
                                std::to_string(err) + ")");
      for (const auto& k : kernels) result.trials.push_back(trial_for(*k));
      result.plans.push_back(std::move(plan));
      continue;
    }

    DenseVector y(static_cast<std::size_t>(m.n_rows));
    for (const auto& k : kernels) {
      TrialResult t = trial_for(*k);
      try {
        k->prepare(permuted, permuted_csr);
        const double pilot = time_kernel(*k, x_perm, y, kPilotCalls);
        t.iterations = choose_iterations(std::max(pilot, 1e-12), config.target_seconds);
        std::fill(y.begin(), y.end(), 0.0);
        t.seconds_per_call = time_kernel(*k, x_perm, y, t.iterations);
        const double kernel_err = relative_error(permute_vector(y, rows_back), y_ref);
        if (!(kernel_err <= kCorrectnessTolerance)) {
          throw Error("result differs from reference (relative error " +
                      std::to_string(kernel_err) + ")");
        }
        t.gflops = m.nnz() == 0 ? 0.0 : gflops(m.nnz(), std::max(t.seconds_per_call, 1e-12));
        t.correctness_ok = true;
      } catch (const std::exception& e) {
        t.gflops = 0.0;
        t.correctness_ok = false;
        result.failures.push_back(matrix_name + " " + std::string(strategy_name(strategy)) + " " +
                                  t.kernel + " repeat " + std::to_string(r) + ": " + e.what());
      }
      result.trials.push_back(std::move(t));
    }
    result.plans.push_back(std::move(plan));
  }
  return result;
}

}  // namespace espmv
