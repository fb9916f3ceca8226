#include "espmv/permute.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "espmv/entropy.hpp"
#include "espmv/error.hpp"
#include "espmv/rng.hpp"

namespace espmv {

namespace {

constexpr std::uint64_t kRowStream = 1;
constexpr std::uint64_t kColStream = 2;
constexpr std::uint64_t kLowHalfStream = 11;
constexpr std::uint64_t kHighHalfStream = 12;

// Riffle along one axis, pivoting on the steepest rise of its histogram.
Permutation gradient_riffle(const Histogram1D& h, std::uint64_t seed, std::optional<Index>& pivot) {
  if (h.extent < 2 || h.bins() < 2) {
    pivot.reset();
    return Permutation::identity(h.extent);
  }
  pivot = gradient_pivot(h);
  return riffle_shuffle_permutation(h.extent, *pivot, seed);
}

std::size_t gradient_bins(std::size_t requested, Index extent) {
  return std::max<std::size_t>(clamp_bins(requested, extent, kDefaultBins1D),
                               std::min<std::size_t>(2, static_cast<std::size_t>(extent)));
}

}  // namespace

bool is_bijection(std::span<const Index> forward) {
  std::vector<bool> hit(forward.size(), false);
  for (Index v : forward) {
    if (v < 0 || static_cast<std::size_t>(v) >= forward.size() || hit[v]) return false;
    hit[v] = true;
  }
  return true;
}

Permutation::Permutation(std::vector<Index> forward) : forward_(std::move(forward)) {
  if (!is_bijection(forward_)) throw Error("not a permutation");
}

Permutation Permutation::identity(Index n) {
  std::vector<Index> f(static_cast<std::size_t>(n));
  std::iota(f.begin(), f.end(), 0);
  return Permutation(std::move(f));
}

Permutation Permutation::inverse() const {
  std::vector<Index> inv(forward_.size());
  for (std::size_t i = 0; i < forward_.size(); ++i) inv[forward_[i]] = static_cast<Index>(i);
  return Permutation(std::move(inv));
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < forward_.size(); ++i) {
    if (forward_[i] != static_cast<Index>(i)) return false;
  }
  return true;
}

Permutation compose(const Permutation& first, const Permutation& second) {
  if (first.size() != second.size()) throw DimensionError("composing permutations of different size");
  std::vector<Index> f(static_cast<std::size_t>(first.size()));
  for (Index i = 0; i < first.size(); ++i) f[i] = second[first[i]];
  return Permutation(std::move(f));
}

Permutation random_permutation(Index n, std::uint64_t seed) {
  if (n < 1) throw Error("random permutation needs n >= 1");
  std::vector<Index> f(static_cast<std::size_t>(n));
  std::iota(f.begin(), f.end(), 0);
  Rng rng(seed);
  for (std::size_t i = f.size() - 1; i > 0; --i) {
    std::swap(f[i], f[rng.below(i + 1)]);
  }
  return Permutation(std::move(f));
}

CooMatrix permute_rows(const CooMatrix& m, const Permutation& p) {
  if (p.size() != m.n_rows) {
    throw DimensionError("row permutation of size " + std::to_string(p.size()) +
                         " for a matrix with " + std::to_string(m.n_rows) + " rows");
  }
  CooMatrix out = m;
  for (Index& r : out.row_idx) r = p[r];
  return out;
}

CooMatrix permute_cols(const CooMatrix& m, const Permutation& p) {
  if (p.size() != m.n_cols) {
    throw DimensionError("column permutation of size " + std::to_string(p.size()) +
                         " for a matrix with " + std::to_string(m.n_cols) + " columns");
  }
  CooMatrix out = m;
  for (Index& c : out.col_idx) c = p[c];
  return out;
}

DenseVector permute_vector(std::span<const double> x, const Permutation& p) {
  if (x.size() != static_cast<std::size_t>(p.size())) {
    throw DimensionError("vector of length " + std::to_string(x.size()) +
                         " for a permutation of size " + std::to_string(p.size()));
  }
  DenseVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[p[static_cast<Index>(i)]] = x[i];
  return out;
}

std::size_t gradient_pivot_bin(std::span<const std::uint64_t> counts) {
  if (counts.size() < 2) throw Error("gradient pivot needs at least two bins");
  std::size_t best = 0;
  auto rise = [&](std::size_t i) {
    return static_cast<long double>(counts[i + 1]) - static_cast<long double>(counts[i]);
  };
  for (std::size_t i = 1; i + 1 < counts.size(); ++i) {
    if (rise(i) > rise(best)) best = i;
  }
  return best + 1;
}

Index gradient_pivot(const Histogram1D& h) { return h.bin_start(gradient_pivot_bin(h.counts)); }

Permutation riffle_interleave(const Permutation& local_low, const Permutation& local_high) {
  const Index low = local_low.size();
  const Index high = local_high.size();
  const Index paired = std::min(low, high);
  auto low_slot = [&](Index s) { return s < paired ? 2 * s : 2 * paired + (s - paired); };
  auto high_slot = [&](Index s) { return s < paired ? 2 * s + 1 : 2 * paired + (s - paired); };

  std::vector<Index> f(static_cast<std::size_t>(low + high));
  for (Index i = 0; i < low; ++i) f[i] = low_slot(local_low[i]);
  for (Index i = 0; i < high; ++i) f[low + i] = high_slot(local_high[i]);
  return Permutation(std::move(f));
}

Permutation riffle_shuffle_permutation(Index n, Index pivot, std::uint64_t seed) {
  if (pivot <= 0 || pivot >= n) {
    throw Error("riffle pivot " + std::to_string(pivot) + " outside (0, " + std::to_string(n) + ")");
  }
  return riffle_interleave(random_permutation(pivot, derive_seed(seed, kLowHalfStream)),
                           random_permutation(n - pivot, derive_seed(seed, kHighHalfStream)));
}

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Regular: return "Regular";
    case StrategyKind::RowPermute: return "Row-Permute";
    case StrategyKind::RowGradient: return "Row-Gradient";
    case StrategyKind::ColumnGradient: return "Column-Gradient";
    case StrategyKind::RowColumnPermute: return "Row-Column-Permute";
  }
  return "?";
}

std::string_view strategy_code(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Regular: return "reg";
    case StrategyKind::RowPermute: return "r";
    case StrategyKind::RowGradient: return "gr";
    case StrategyKind::ColumnGradient: return "gc";
    case StrategyKind::RowColumnPermute: return "rc";
  }
  return "?";
}

std::optional<StrategyKind> parse_strategy(std::string_view text) {
  for (StrategyKind k : kAllStrategies) {
    if (text == strategy_name(k) || text == strategy_code(k)) return k;
  }
  return std::nullopt;
}

StrategyPlan build_strategy(const CooMatrix& m, StrategyKind kind, std::uint64_t seed,
                            const StrategyOptions& options) {
  StrategyPlan plan;
  plan.rows = Permutation::identity(m.n_rows);
  plan.cols = Permutation::identity(m.n_cols);
  const std::uint64_t row_seed = derive_seed(seed, kRowStream);
  const std::uint64_t col_seed = derive_seed(seed, kColStream);

  auto row_gradient = [&] {
    if (m.n_rows < 2) return;
    plan.rows = gradient_riffle(row_histogram(m, gradient_bins(options.bins, m.n_rows)), row_seed,
                                plan.row_pivot);
  };
  auto col_gradient = [&] {
    if (m.n_cols < 2) return;
    plan.cols = gradient_riffle(col_histogram(m, gradient_bins(options.bins, m.n_cols)), col_seed,
                                plan.col_pivot);
  };

  switch (kind) {
    case StrategyKind::Regular:
      break;
    case StrategyKind::RowPermute:
      if (m.n_rows > 0) plan.rows = random_permutation(m.n_rows, row_seed);
      break;
    case StrategyKind::RowColumnPermute:
      if (m.n_rows > 0) plan.rows = random_permutation(m.n_rows, row_seed);
      if (m.n_cols > 0) plan.cols = random_permutation(m.n_cols, col_seed);
      break;
    case StrategyKind::RowGradient:
      row_gradient();
      break;
    case StrategyKind::ColumnGradient:
      if (options.column_gradient == ColumnGradientMode::RowsAndColumns) row_gradient();
      col_gradient();
      break;
  }
  return plan;
}

CooMatrix apply_strategy(const CooMatrix& m, const StrategyPlan& plan) {
  return permute_cols(permute_rows(m, plan.rows), plan.cols);
}

void write_permutation(const Permutation& p, std::ostream& out) {
  out << p.size() << '\n';
  for (Index v : p.forward()) out << v << '\n';
  if (!out) throw Error("write failed");
}

void write_permutation(const Permutation& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  write_permutation(p, out);
}

Permutation read_permutation(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_value = [&](const char* what) -> long long {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto first = line.find_first_not_of(" \t");
      const auto last = line.find_last_not_of(" \t\r");
      long long v = 0;
      const char* b = line.data() + first;
      const char* e = line.data() + last + 1;
      auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || ptr != e) throw ParseError(std::string("bad ") + what, line_no);
      return v;
    }
    throw ParseError(std::string("missing ") + what, line_no);
  };
  const long long n = next_value("permutation size");
  if (n < 0) throw ParseError("negative permutation size", line_no);
  std::vector<Index> f(static_cast<std::size_t>(n));
  for (auto& v : f) v = static_cast<Index>(next_value("permutation entry"));
  if (!is_bijection(f)) throw ParseError("entries do not form a permutation", 0);
  return Permutation(std::move(f));
}

Permutation read_permutation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open file");
  return read_permutation(in);
}

}  // namespace espmv
