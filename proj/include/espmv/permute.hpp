#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "espmv/kernels.hpp"
#include "espmv/matrix.hpp"

namespace espmv {

struct Histogram1D;

/// Bijection on [0, n). forward()[i] is the new position of element i.
class Permutation {
 public:
  Permutation() = default;
  /// Throws espmv::Error unless `forward` is a bijection on [0, size).
  explicit Permutation(std::vector<Index> forward);

  static Permutation identity(Index n);

  Index size() const noexcept { return static_cast<Index>(forward_.size()); }
  std::span<const Index> forward() const noexcept { return forward_; }
  Index operator[](Index i) const { return forward_[static_cast<std::size_t>(i)]; }

  Permutation inverse() const;
  bool is_identity() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<Index> forward_;
};

/// True when `forward` maps [0, n) onto itself one-to-one.
bool is_bijection(std::span<const Index> forward);

/// Applies `first`, then `second`: result[i] = second[first[i]].
Permutation compose(const Permutation& first, const Permutation& second);

/// Fisher-Yates over Rng. Identical (n, seed) gives an identical result on
/// every platform. n must be at least 1.
Permutation random_permutation(Index n, std::uint64_t seed);

/// Entry (i, j, v) moves to (p[i], j, v).
CooMatrix permute_rows(const CooMatrix& m, const Permutation& p);
/// Entry (i, j, v) moves to (i, p[j], v).
CooMatrix permute_cols(const CooMatrix& m, const Permutation& p);
/// out[p[i]] = x[i].
DenseVector permute_vector(std::span<const double> x, const Permutation& p);

/// Boundary of the steepest rise in a binned histogram, in index space: if
/// h[i+1] - h[i] is maximal (smallest i on ties), the start of bin i + 1.
/// Needs at least two bins.
Index gradient_pivot(const Histogram1D& h);
/// Bin-space variant: the i + 1 above.
std::size_t gradient_pivot_bin(std::span<const std::uint64_t> counts);

/// The interleave step of the riffle, with explicit local orders for the
/// two halves [0, pivot) and [pivot, n). The output arrangement alternates
/// one element from each half until the shorter runs out, then appends the
/// rest; `local_low`/`local_high` give each element's slot within its half.
Permutation riffle_interleave(const Permutation& local_low, const Permutation& local_high);

/// Riffle shuffle around `pivot`: each half is randomly permuted on its own,
/// then the halves are interleaved. Requires 0 < pivot < n.
Permutation riffle_shuffle_permutation(Index n, Index pivot, std::uint64_t seed);

enum class StrategyKind {
  Regular,
  RowPermute,
  RowGradient,
  ColumnGradient,
  RowColumnPermute,
};

/// Report/table order.
inline constexpr std::array<StrategyKind, 5> kAllStrategies = {
    StrategyKind::Regular, StrategyKind::RowPermute, StrategyKind::RowGradient,
    StrategyKind::ColumnGradient, StrategyKind::RowColumnPermute};

/// Table label, e.g. "Row-Column-Permute".
std::string_view strategy_name(StrategyKind kind);
/// Short CLI code: reg, r, gr, gc, rc.
std::string_view strategy_code(StrategyKind kind);
/// Accepts either the table label or the short code.
std::optional<StrategyKind> parse_strategy(std::string_view text);

/// How ColumnGradient treats rows.
enum class ColumnGradientMode {
  RowsAndColumns,  ///< gradient riffle on both axes (default)
  ColumnsOnly,     ///< gradient riffle on columns, rows untouched
};

struct StrategyOptions {
  /// Bins of the 1D histograms that feed the gradient pivot, clamped to the
  /// axis length. 0 selects min(length, 512).
  std::size_t bins = 0;
  ColumnGradientMode column_gradient = ColumnGradientMode::RowsAndColumns;
};

struct StrategyPlan {
  Permutation rows;
  Permutation cols;
  std::optional<Index> row_pivot;
  std::optional<Index> col_pivot;
};

/// Row and column permutations for `kind`. Same inputs, same plan.
StrategyPlan build_strategy(const CooMatrix& m, StrategyKind kind, std::uint64_t seed,
                            const StrategyOptions& options = {});

/// Applies the plan: rows by plan.rows, columns by plan.cols.
CooMatrix apply_strategy(const CooMatrix& m, const StrategyPlan& plan);

/// Text form: first line n, then one 0-based image per line.
void write_permutation(const Permutation& p, std::ostream& out);
void write_permutation(const Permutation& p, const std::filesystem::path& path);
Permutation read_permutation(std::istream& in);
Permutation read_permutation(const std::filesystem::path& path);

}  // namespace espmv
