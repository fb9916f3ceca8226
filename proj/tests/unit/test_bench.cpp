#include <doctest.h>

#include <algorithm>
#include <random>
#include <stdexcept>

#include "espmv/bench.hpp"
#include "espmv/error.hpp"
#include "oracles.hpp"

using namespace espmv;

namespace {

class ThrowingKernel final : public Kernel {
 public:
  std::string name() const override { return "STUB throw"; }
  void prepare(const CooMatrix&, const CsrMatrix&) override {}
  void run(std::span<const double>, std::span<double>) override {
    throw std::runtime_error("device lost");
  }
};

class WrongKernel final : public Kernel {
 public:
  std::string name() const override { return "STUB wrong"; }
  void prepare(const CooMatrix&, const CsrMatrix& csr) override { m_ = &csr; }
  void run(std::span<const double> x, std::span<double> y) override {
    spmv_csr(*m_, x, y);
    y[0] += 1.0;
  }

 private:
  const CsrMatrix* m_ = nullptr;
};

class CountingKernel final : public Kernel {
 public:
  std::string name() const override { return "STUB count"; }
  void prepare(const CooMatrix&, const CsrMatrix&) override {}
  void run(std::span<const double>, std::span<double> y) override {
    ++calls;
    y[0] = static_cast<double>(calls);
  }
  std::size_t calls = 0;
};

BenchConfig quick_config(std::size_t repeats) {
  BenchConfig c;
  c.repeats = repeats;
  c.master_seed = 17;
  c.target_seconds = 1e-4;  // always clamps to 1000 iterations
  c.max_workers = 2;
  c.bins_r = 16;
  c.bins_c = 16;
  return c;
}

KernelSet serial_kernels(const BenchConfig&, Index) {
  KernelSet k;
  k.push_back(std::make_unique<CooKernel>());
  k.push_back(std::make_unique<CsrKernel>());
  return k;
}

std::vector<double> column(const ExperimentResult& r, const std::string& kernel,
                           double TrialResult::*field) {
  std::vector<double> out;
  for (const auto& t : r.trials)
    if (t.kernel == kernel) out.push_back(t.*field);
  return out;
}

}  // namespace

TEST_CASE("choose_iterations") {
  CHECK(choose_iterations(1e-3, 2.0) == 2000);
  CHECK(choose_iterations(10e-3, 2.0) == 1000);
  CHECK(choose_iterations(0.1e-3, 2.0) == 5000);
  CHECK(choose_iterations(1e-3) == 2000);
  CHECK(choose_iterations(0.8e-3, 2.0) == 2500);
  CHECK_THROWS_AS(choose_iterations(0.0, 2.0), Error);
  CHECK_THROWS_AS(choose_iterations(-1.0, 2.0), Error);
}

TEST_CASE("gflops") {
  CHECK(gflops(1'000'000, 1e-3) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(gflops(0, 1e-3) == 0.0);
  CHECK(gflops(500'000, 0.5e-3) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(gflops(10, 0.0), Error);
  CHECK_THROWS_AS(gflops(10, -1.0), Error);
}

TEST_CASE("time_kernel counts every call") {
  CountingKernel k;
  DenseVector x(1), y(1);
  const double one = time_kernel(k, x, y, 1);
  CHECK(one >= 0.0);
  CHECK(k.calls == 1);
  time_kernel(k, x, y, 25);
  CHECK(k.calls == 26);
  CHECK(y[0] == 26.0);
  ThrowingKernel t;
  CHECK_THROWS(time_kernel(t, x, y, 3));
}

TEST_CASE("relative_error") {
  CHECK(relative_error(DenseVector{1, 2}, DenseVector{1, 2}) == 0.0);
  CHECK(relative_error(DenseVector{1, 2.5}, DenseVector{1, 2}) == doctest::Approx(0.25));
  CHECK(relative_error(DenseVector{0.5, 0}, DenseVector{0, 0}) == doctest::Approx(0.5));
}

TEST_CASE("worker counts and kernel names") {
  CHECK(worker_counts(16, 1000) == std::vector<std::size_t>{1, 2, 4, 8, 16});
  CHECK(worker_counts(6, 1000) == std::vector<std::size_t>{1, 2, 4, 6});
  CHECK(worker_counts(16, 5) == std::vector<std::size_t>{1, 2, 4, 5});
  CHECK(worker_counts(16, 0).empty());
  CHECK(worker_counts(1, 5) == std::vector<std::size_t>{1});

  ParallelCsrKernel k(4, false);
  CHECK(k.name() == "CPU PAR p=4");
  CHECK(parallel_workers("CPU PAR p=4") == 4u);
  CHECK_FALSE(parallel_workers("CPU CSR").has_value());

  BenchConfig c;
  c.max_workers = 2;
  const KernelSet set = default_kernels(c, 100);
  REQUIRE(set.size() == 4);
  CHECK(set[0]->name() == "CPU COO");
  CHECK(set[1]->name() == "CPU CSR");
  CHECK(set[2]->name() == "CPU PAR p=1");
  CHECK(set[3]->name() == "CPU PAR p=2");
}

TEST_CASE("bench_input and repeat seeds are deterministic") {
  const DenseVector a = bench_input(100, 3);
  CHECK(a == bench_input(100, 3));
  CHECK(a != bench_input(100, 4));
  CHECK(std::all_of(a.begin(), a.end(), [](double v) { return v >= 0.0 && v < 1.0; }));
  CHECK(repeat_seed(3, 0) != repeat_seed(3, 1));
  CHECK(repeat_seed(3, 5) == repeat_seed(3, 5));
}

TEST_CASE("run_experiment records every kernel and repeat") {
  std::mt19937_64 gen(2);
  const CooMatrix m = oracle::random_matrix(60, 60, 0.1, gen);
  const ExperimentResult r = run_experiment(m, "rand60", StrategyKind::RowColumnPermute,
                                            quick_config(3));
  CHECK(r.all_correct());
  CHECK(r.failures.empty());
  CHECK(r.plans.size() == 3);
  REQUIRE(r.trials.size() == 3 * 4);
  for (const auto& t : r.trials) {
    CHECK(t.matrix == "rand60");
    CHECK(t.strategy == StrategyKind::RowColumnPermute);
    CHECK(t.correctness_ok);
    CHECK(t.iterations >= kMinIterations);
    CHECK(t.iterations <= kMaxIterations);
    CHECK(t.gflops > 0.0);
    CHECK(t.gflops == doctest::Approx(2.0 * static_cast<double>(m.nnz()) / t.seconds_per_call / 1e9));
    CHECK(t.seed == repeat_seed(17, t.repeat));
    CHECK(t.entropy_bits ==
          doctest::Approx(matrix_entropy(apply_strategy(m, r.plans[t.repeat]), 16, 16)));
  }
}

TEST_CASE("Regular has no entropy spread") {
  std::mt19937_64 gen(3);
  const CooMatrix m = oracle::clustered_matrix(80, 10, 20, 15, 0.01, gen);
  const ExperimentResult r =
      run_experiment(m, "c", StrategyKind::Regular, quick_config(2), serial_kernels);
  const auto h = column(r, "CPU CSR", &TrialResult::entropy_bits);
  REQUIRE(h.size() == 2);
  CHECK(h[0] == h[1]);
}

TEST_CASE("same master seed, same permutations and entropies") {
  std::mt19937_64 gen(4);
  const CooMatrix m = oracle::random_matrix(50, 40, 0.1, gen);
  const BenchConfig c = quick_config(3);
  for (StrategyKind kind : kAllStrategies) {
    const ExperimentResult a = run_experiment(m, "m", kind, c, serial_kernels);
    const ExperimentResult b = run_experiment(m, "m", kind, c, serial_kernels);
    CHECK(column(a, "CPU COO", &TrialResult::entropy_bits) ==
          column(b, "CPU COO", &TrialResult::entropy_bits));
    for (std::size_t i = 0; i < a.plans.size(); ++i) {
      CHECK(a.plans[i].rows == b.plans[i].rows);
      CHECK(a.plans[i].cols == b.plans[i].cols);
    }
  }
}

TEST_CASE("failing kernels score zero without stopping the run") {
  std::mt19937_64 gen(5);
  const CooMatrix m = oracle::random_matrix(30, 30, 0.2, gen);
  const KernelFactory stubs = [](const BenchConfig&, Index) {
    KernelSet k;
    k.push_back(std::make_unique<ThrowingKernel>());
    k.push_back(std::make_unique<WrongKernel>());
    k.push_back(std::make_unique<CsrKernel>());
    return k;
  };
  const ExperimentResult r = run_experiment(m, "m", StrategyKind::RowPermute, quick_config(2), stubs);
  CHECK_FALSE(r.all_correct());
  CHECK(r.failures.size() == 4);
  REQUIRE(r.trials.size() == 6);
  for (const auto& t : r.trials) {
    if (t.kernel == "CPU CSR") {
      CHECK(t.correctness_ok);
      CHECK(t.gflops > 0.0);
    } else {
      CHECK_FALSE(t.correctness_ok);
      CHECK(t.gflops == 0.0);
    }
  }
}

TEST_CASE("zero repeats is rejected") {
  CHECK_THROWS_AS(run_experiment(identity_coo(4), "i", StrategyKind::Regular, quick_config(0)),
                  Error);
}
