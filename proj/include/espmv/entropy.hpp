#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "espmv/matrix.hpp"

namespace espmv {

/// Nonzero counts over near-equal bins of one axis. With B bins over
/// [0, extent), the first B - extent % B bins hold `width` = extent / B
/// indices and the remaining ones hold width + 1.
struct Histogram1D {
  Index extent = 0;
  Index width = 1;
  std::vector<std::uint64_t> counts;

  std::size_t bins() const noexcept { return counts.size(); }
  std::size_t bin_of(Index i) const noexcept;
  Index bin_start(std::size_t b) const noexcept;
  std::uint64_t total() const noexcept;
};

/// Nonzero counts over a bins_r x bins_c grid, row-major.
struct Histogram2D {
  Histogram1D row_axis;  ///< binning only; its counts hold the row marginal
  Histogram1D col_axis;
  std::vector<std::uint64_t> counts;

  std::size_t bins_r() const noexcept { return row_axis.bins(); }
  std::size_t bins_c() const noexcept { return col_axis.bins(); }
  std::uint64_t at(std::size_t br, std::size_t bc) const { return counts[br * bins_c() + bc]; }
  std::uint64_t total() const noexcept;
};

enum class LogBase { Two, E };

std::string_view log_base_name(LogBase base);

/// Throws unless 1 <= bins <= extent.
Histogram1D row_histogram(const CooMatrix& m, std::size_t bins);
Histogram1D col_histogram(const CooMatrix& m, std::size_t bins);
Histogram2D histogram_2d(const CooMatrix& m, std::size_t bins_r, std::size_t bins_c);

/// -sum p_i log p_i over nonzero bins, p_i = counts_i / total.
/// Throws if the total is zero.
double shannon_entropy(std::span<const std::uint64_t> counts, LogBase base = LogBase::Two);

/// Jensen-Shannon divergence: H(mix) - H(p)/2 - H(q)/2 with mix the average
/// of the two normalized distributions. In [0, 1] for base 2.
double js_divergence(std::span<const std::uint64_t> p, std::span<const std::uint64_t> q,
                     LogBase base = LogBase::Two);

/// One level of the hierarchical view: an L x L grid over the fine 2D
/// histogram, each cell holding the entropy of the fine bins inside it.
struct EntropyGrid {
  std::size_t level = 0;
  std::vector<double> cells;  ///< row-major, level * level values
  std::vector<std::uint64_t> cell_counts;

  double at(std::size_t a, std::size_t b) const { return cells[a * level + b]; }
};

struct EntropySummary {
  double h = 0.0;           ///< entropy of the whole fine histogram
  std::size_t b_total = 0;  ///< number of fine bins
  LogBase base = LogBase::Two;
  std::vector<EntropyGrid> levels;
};

inline constexpr std::size_t kDefaultBins2D = 128;
inline constexpr std::size_t kDefaultBins1D = 512;

/// min(extent, requested), with requested == 0 meaning `fallback`.
std::size_t clamp_bins(std::size_t requested, Index extent, std::size_t fallback);

/// Headline number: entropy of histogram_2d at the (clamped) resolution.
double matrix_entropy(const CooMatrix& m, std::size_t bins_r = kDefaultBins2D,
                      std::size_t bins_c = kDefaultBins2D, LogBase base = LogBase::Two);

/// Per-cell entropies of the fine 2D histogram on L x L grids. Cells group
/// whole fine bins, split like the bins themselves; empty cells hold 0. Levels
/// larger than the fine grid are dropped. Throws on an empty level list or a
/// zero level.
EntropySummary hierarchical_entropy(const CooMatrix& m, std::span<const std::size_t> levels,
                                    std::size_t bins_r = kDefaultBins2D,
                                    std::size_t bins_c = kDefaultBins2D,
                                    LogBase base = LogBase::Two);

// CSV exports, no header line.
/// "bin,count"
void write_histogram_csv(const Histogram1D& h, std::ostream& out);
/// "row_bin,col_bin,count"
void write_histogram_csv(const Histogram2D& h, std::ostream& out);
/// "level,row_cell,col_cell,entropy"
void write_grids_csv(const EntropySummary& s, std::ostream& out);

}  // namespace espmv
