#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "espmv/entropy.hpp"
#include "espmv/error.hpp"
#include "espmv/permute.hpp"
#include "oracles.hpp"

using namespace espmv;

namespace {

DenseVector iota_vector(std::size_t n) {
  DenseVector v(n);
  std::iota(v.begin(), v.end(), 0.0);
  return v;
}

Histogram1D histogram_of(std::vector<std::uint64_t> counts, Index width) {
  Histogram1D h;
  h.width = width;
  h.extent = static_cast<Index>(counts.size()) * width;
  h.counts = std::move(counts);
  return h;
}

}  // namespace

TEST_CASE("Permutation rejects non-bijections") {
  CHECK_THROWS_AS(Permutation({0, 0}), Error);
  CHECK_THROWS_AS(Permutation({0, 2}), Error);
  CHECK_THROWS_AS(Permutation({-1, 0}), Error);
  CHECK_NOTHROW(Permutation({1, 0}));
}

TEST_CASE("random_permutation basics") {
  CHECK(random_permutation(1, 12345).forward()[0] == 0);
  CHECK(random_permutation(50, 7) == random_permutation(50, 7));
  CHECK(random_permutation(50, 7) != random_permutation(50, 8));
  CHECK_THROWS_AS(random_permutation(0, 1), Error);
}

TEST_CASE("random_permutation is uniform over S4") {
  constexpr int kDraws = 10000;
  std::map<std::vector<Index>, int> freq;
  for (int s = 0; s < kDraws; ++s) {
    const Permutation p = random_permutation(4, static_cast<std::uint64_t>(s));
    freq[std::vector<Index>(p.forward().begin(), p.forward().end())]++;
  }
  REQUIRE(freq.size() == 24);
  const double expected = kDraws / 24.0;
  const double sigma = std::sqrt(kDraws * (1.0 / 24.0) * (23.0 / 24.0));
  double chi2 = 0.0;
  for (const auto& [perm, count] : freq) {
    CHECK(std::abs(count - expected) <= 3.0 * sigma);
    chi2 += (count - expected) * (count - expected) / expected;
  }
  // 23 degrees of freedom, 0.1% critical value.
  CHECK(chi2 < 49.73);
}

TEST_CASE("inverse") {
  CHECK(Permutation::identity(4).inverse() == Permutation::identity(4));
  const Permutation p({2, 0, 1});
  CHECK(p.inverse() == Permutation({1, 2, 0}));
  const Permutation r = random_permutation(30, 3);
  CHECK(compose(r, r.inverse()).is_identity());
  CHECK(compose(r.inverse(), r).is_identity());
  CHECK(r.inverse().inverse() == r);
}

TEST_CASE("permute_vector") {
  const DenseVector x{1.5, 2.5, 3.5};
  CHECK(permute_vector(x, Permutation::identity(3)) == x);
  CHECK(permute_vector(DenseVector{10, 20, 30}, Permutation({2, 0, 1})) == DenseVector{20, 30, 10});
  const Permutation r = random_permutation(3, 9);
  CHECK(permute_vector(permute_vector(x, r), r.inverse()) == x);
  CHECK_THROWS_AS(permute_vector(DenseVector(2), r), DimensionError);
}

TEST_CASE("permute_rows and permute_cols") {
  const CooMatrix diag{2, 2, {0, 1}, {0, 1}, {3.0, 4.0}};
  CHECK(permute_rows(diag, Permutation::identity(2)) == diag);
  CHECK(permute_cols(diag, Permutation::identity(2)) == diag);

  const CooMatrix anti_rows = permute_rows(diag, Permutation({1, 0}));
  CHECK(same_entries(anti_rows, CooMatrix{2, 2, {1, 0}, {0, 1}, {3.0, 4.0}}));
  const CooMatrix anti_cols = permute_cols(diag, Permutation({1, 0}));
  CHECK(same_entries(anti_cols, CooMatrix{2, 2, {0, 1}, {1, 0}, {3.0, 4.0}}));

  CHECK_THROWS_AS(permute_rows(diag, Permutation::identity(3)), DimensionError);
  CHECK_THROWS_AS(permute_cols(diag, Permutation::identity(3)), DimensionError);
}

TEST_CASE("row and column counts move with the permutation") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    const CooMatrix m = oracle::random_matrix(25, 18, 0.2, gen);
    const Permutation pr = random_permutation(25, gen());
    const Permutation pc = random_permutation(18, gen());
    const CooMatrix rows = permute_rows(m, pr);
    const CooMatrix cols = permute_cols(m, pc);

    // Recount: new row pr[i] holds exactly the entries old row i held.
    std::vector<std::size_t> before(25, 0), after(25, 0);
    for (Index r : m.row_idx) ++before[r];
    for (Index r : rows.row_idx) ++after[r];
    for (Index i = 0; i < 25; ++i) CHECK(after[pr[i]] == before[i]);
    CHECK(oracle::col_count_multiset(cols) == oracle::col_count_multiset(m));
    CHECK(oracle::sorted_values(rows) == oracle::sorted_values(m));
  }
}

TEST_CASE("gradient_pivot") {
  CHECK(gradient_pivot_bin(std::vector<std::uint64_t>{0, 0, 10, 10}) == 2);
  CHECK(gradient_pivot_bin(std::vector<std::uint64_t>{7, 7, 7, 7}) == 1);
  CHECK(gradient_pivot_bin(std::vector<std::uint64_t>{5, 1, 9, 2}) == 2);
  CHECK_THROWS_AS(gradient_pivot_bin(std::vector<std::uint64_t>{5}), Error);

  // Scaled back to index space: start of the bin after the steepest rise.
  CHECK(gradient_pivot(histogram_of({0, 0, 10, 10}, 3)) == 6);
  CHECK(gradient_pivot(histogram_of({4, 4, 4}, 5)) == 5);
}

TEST_CASE("riffle interleave") {
  SUBCASE("n = 2, pivot = 1 is the identity") {
    CHECK(riffle_shuffle_permutation(2, 1, 77).is_identity());
  }
  SUBCASE("equal halves alternate") {
    const Permutation p = riffle_interleave(Permutation::identity(3), Permutation::identity(3));
    CHECK(permute_vector(iota_vector(6), p) == DenseVector{0, 3, 1, 4, 2, 5});
  }
  SUBCASE("the longer half's remainder is appended") {
    const Permutation low_heavy = riffle_interleave(Permutation::identity(4), Permutation::identity(2));
    CHECK(permute_vector(iota_vector(6), low_heavy) == DenseVector{0, 4, 1, 5, 2, 3});
    const Permutation high_heavy = riffle_interleave(Permutation::identity(1), Permutation::identity(3));
    CHECK(permute_vector(iota_vector(4), high_heavy) == DenseVector{0, 1, 2, 3});
  }
  SUBCASE("local orders are applied before interleaving") {
    const Permutation p = riffle_interleave(Permutation({1, 0}), Permutation({0, 1}));
    CHECK(permute_vector(iota_vector(4), p) == DenseVector{1, 2, 0, 3});
  }
  SUBCASE("pivot out of range") {
    CHECK_THROWS_AS(riffle_shuffle_permutation(5, 0, 1), Error);
    CHECK_THROWS_AS(riffle_shuffle_permutation(5, 5, 1), Error);
  }
}

TEST_CASE("riffle output is always a bijection and deterministic") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = 2 + static_cast<Index>(gen() % 200);
    const Index pivot = 1 + static_cast<Index>(gen() % static_cast<std::uint64_t>(n - 1));
    const std::uint64_t seed = gen();
    const Permutation p = riffle_shuffle_permutation(n, pivot, seed);
    std::vector<Index> sorted(p.forward().begin(), p.forward().end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<Index> expect(static_cast<std::size_t>(n));
    std::iota(expect.begin(), expect.end(), 0);
    REQUIRE(sorted == expect);
    CHECK(riffle_shuffle_permutation(n, pivot, seed) == p);
  }
}

TEST_CASE("strategy names round-trip") {
  CHECK(kAllStrategies.size() == 5);
  for (StrategyKind k : kAllStrategies) {
    CHECK(parse_strategy(strategy_name(k)) == k);
    CHECK(parse_strategy(strategy_code(k)) == k);
  }
  CHECK_FALSE(parse_strategy("nope").has_value());
}

TEST_CASE("build_strategy shapes") {
  std::mt19937_64 gen(21);
  const CooMatrix m = oracle::random_matrix(40, 30, 0.1, gen);

  const StrategyPlan reg = build_strategy(m, StrategyKind::Regular, 5);
  CHECK(reg.rows.is_identity());
  CHECK(reg.cols.is_identity());
  CHECK(apply_strategy(m, reg) == m);

  const StrategyPlan r1 = build_strategy(m, StrategyKind::RowPermute, 5);
  const StrategyPlan r2 = build_strategy(m, StrategyKind::RowPermute, 5);
  CHECK(r1.rows == r2.rows);
  CHECK_FALSE(r1.rows.is_identity());
  CHECK(r1.cols.is_identity());

  const StrategyPlan rc = build_strategy(m, StrategyKind::RowColumnPermute, 5);
  CHECK_FALSE(rc.rows.is_identity());
  CHECK_FALSE(rc.cols.is_identity());

  const StrategyPlan gr = build_strategy(m, StrategyKind::RowGradient, 5);
  CHECK(gr.row_pivot.has_value());
  CHECK_FALSE(gr.col_pivot.has_value());
  CHECK(gr.cols.is_identity());

  const StrategyPlan gc = build_strategy(m, StrategyKind::ColumnGradient, 5);
  CHECK(gc.row_pivot.has_value());
  CHECK(gc.col_pivot.has_value());
  CHECK(gc.rows == gr.rows);

  StrategyOptions columns_only;
  columns_only.column_gradient = ColumnGradientMode::ColumnsOnly;
  const StrategyPlan gco = build_strategy(m, StrategyKind::ColumnGradient, 5, columns_only);
  CHECK(gco.rows.is_identity());
  CHECK(gco.cols == gc.cols);
}

TEST_CASE("gradient pivot lands on a sharp density step") {
  // Rows [0, 60) hold one nonzero each, rows [60, 100) hold ten.
  CooMatrix m;
  m.n_rows = 100;
  m.n_cols = 100;
  for (Index i = 0; i < 100; ++i) {
    const Index per_row = i < 60 ? 1 : 10;
    for (Index j = 0; j < per_row; ++j) {
      m.row_idx.push_back(i);
      m.col_idx.push_back((i + 7 * j) % 100);
      m.values.push_back(1.0);
    }
  }
  StrategyOptions options;
  options.bins = 10;
  const StrategyPlan plan = build_strategy(m, StrategyKind::ColumnGradient, 3, options);
  REQUIRE(plan.row_pivot.has_value());
  CHECK(*plan.row_pivot == 60);
  // Oracle: brute-force first difference on the 10-bin row histogram.
  const Histogram1D h = row_histogram(m, 10);
  std::size_t best = 0;
  for (std::size_t i = 1; i + 1 < h.counts.size(); ++i) {
    if (static_cast<long>(h.counts[i + 1]) - static_cast<long>(h.counts[i]) >
        static_cast<long>(h.counts[best + 1]) - static_cast<long>(h.counts[best])) {
      best = i;
    }
  }
  CHECK(h.bin_start(best + 1) == 60);
}

TEST_CASE("strategies preserve counts and satisfy the permuted product identity") {
  std::mt19937_64 gen(555);
  for (int trial = 0; trial < 40; ++trial) {
    const Index rows = 1 + static_cast<Index>(gen() % 40);
    const Index cols = 1 + static_cast<Index>(gen() % 40);
    const CooMatrix m = oracle::random_matrix(rows, cols, 0.15, gen);
    const DenseVector x = oracle::random_vector(static_cast<std::size_t>(cols), gen);
    const DenseVector y = oracle::dense_matvec(m, x);
    for (StrategyKind kind : kAllStrategies) {
      const StrategyPlan plan = build_strategy(m, kind, gen());
      REQUIRE(is_bijection(plan.rows.forward()));
      REQUIRE(is_bijection(plan.cols.forward()));
      const CooMatrix p = apply_strategy(m, plan);
      CHECK(p.nnz() == m.nnz());
      CHECK(oracle::row_count_multiset(p) == oracle::row_count_multiset(m));
      CHECK(oracle::col_count_multiset(p) == oracle::col_count_multiset(m));
      CHECK(oracle::sorted_values(p) == oracle::sorted_values(m));
      const DenseVector yp = spmv_csr(coo_to_csr(p), permute_vector(x, plan.cols));
      CHECK(oracle::rel_error(permute_vector(yp, plan.rows.inverse()), y) <= 1e-12);
    }
  }
}

TEST_CASE("permutation text format") {
  const Permutation p({2, 0, 1});
  std::ostringstream out;
  write_permutation(p, out);
  CHECK(out.str() == "3\n2\n0\n1\n");
  std::istringstream in(out.str());
  CHECK(read_permutation(in) == p);

  std::istringstream bad("3\n0\n0\n1\n");
  CHECK_THROWS_AS(read_permutation(bad), ParseError);
  std::istringstream short_input("3\n0\n1\n");
  CHECK_THROWS_AS(read_permutation(short_input), ParseError);
}
