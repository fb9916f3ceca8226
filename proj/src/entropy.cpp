#include "espmv/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "espmv/error.hpp"

namespace espmv {

namespace {

Histogram1D make_axis(Index extent, std::size_t bins, const char* axis) {
  if (bins == 0) throw Error(std::string(axis) + " bin count must be at least 1");
  if (extent <= 0 || bins > static_cast<std::size_t>(extent)) {
    throw Error(std::string(axis) + " bin count " + std::to_string(bins) +
                " exceeds dimension " + std::to_string(extent));
  }
  Histogram1D h;
  h.extent = extent;
  h.width = extent / static_cast<Index>(bins);
  h.counts.assign(bins, 0);
  return h;
}

// Part of [0, n) split into `parts` runs: the first parts - n % parts runs
// have length n / parts, the rest one more.
std::size_t part_of(std::size_t i, std::size_t n, std::size_t parts) {
  const std::size_t w = n / parts;
  const std::size_t narrow = parts - n % parts;
  const std::size_t split = narrow * w;
  return i < split ? i / w : narrow + (i - split) / (w + 1);
}

std::size_t part_start(std::size_t b, std::size_t n, std::size_t parts) {
  const std::size_t w = n / parts;
  const std::size_t narrow = parts - n % parts;
  return b <= narrow ? b * w : narrow * w + (b - narrow) * (w + 1);
}

double log_in(double x, LogBase base) { return base == LogBase::Two ? std::log2(x) : std::log(x); }

double entropy_of(std::span<const double> p, LogBase base) {
  double h = 0.0;
  for (double pi : p) {
    if (pi > 0.0) h -= pi * log_in(pi, base);
  }
  return h;
}

std::vector<double> normalize(std::span<const std::uint64_t> counts, const char* what) {
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw Error(std::string(what) + " histogram is empty");
  std::vector<double> p(counts.size());
  const auto s = static_cast<double>(total);
  for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / s;
  return p;
}

void put_double(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

std::size_t Histogram1D::bin_of(Index i) const noexcept {
  return part_of(static_cast<std::size_t>(i), static_cast<std::size_t>(extent), counts.size());
}

Index Histogram1D::bin_start(std::size_t b) const noexcept {
  return static_cast<Index>(part_start(b, static_cast<std::size_t>(extent), counts.size()));
}

std::uint64_t Histogram1D::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::uint64_t Histogram2D::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::string_view log_base_name(LogBase base) { return base == LogBase::Two ? "2" : "e"; }

Histogram1D row_histogram(const CooMatrix& m, std::size_t bins) {
  Histogram1D h = make_axis(m.n_rows, bins, "row");
  for (Index r : m.row_idx) ++h.counts[h.bin_of(r)];
  return h;
}

Histogram1D col_histogram(const CooMatrix& m, std::size_t bins) {
  Histogram1D h = make_axis(m.n_cols, bins, "column");
  for (Index c : m.col_idx) ++h.counts[h.bin_of(c)];
  return h;
}

Histogram2D histogram_2d(const CooMatrix& m, std::size_t bins_r, std::size_t bins_c) {
  Histogram2D h;
  h.row_axis = make_axis(m.n_rows, bins_r, "row");
  h.col_axis = make_axis(m.n_cols, bins_c, "column");
  h.counts.assign(bins_r * bins_c, 0);
  for (std::size_t k = 0; k < m.nnz(); ++k) {
    const std::size_t br = h.row_axis.bin_of(m.row_idx[k]);
    const std::size_t bc = h.col_axis.bin_of(m.col_idx[k]);
    ++h.row_axis.counts[br];
    ++h.col_axis.counts[bc];
    ++h.counts[br * bins_c + bc];
  }
  return h;
}

double shannon_entropy(std::span<const std::uint64_t> counts, LogBase base) {
  const std::vector<double> p = normalize(counts, "entropy of");
  return entropy_of(p, base);
}

double js_divergence(std::span<const std::uint64_t> p, std::span<const std::uint64_t> q,
                     LogBase base) {
  if (p.size() != q.size()) {
    throw Error("Jensen-Shannon inputs have " + std::to_string(p.size()) + " and " +
                std::to_string(q.size()) + " bins");
  }
  const std::vector<double> pp = normalize(p, "first");
  const std::vector<double> qq = normalize(q, "second");
  std::vector<double> mix(pp.size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.5 * (pp[i] + qq[i]);
  const double jsd = entropy_of(mix, base) - 0.5 * entropy_of(pp, base) - 0.5 * entropy_of(qq, base);
  return std::max(jsd, 0.0);
}

std::size_t clamp_bins(std::size_t requested, Index extent, std::size_t fallback) {
  const std::size_t want = requested == 0 ? fallback : requested;
  return std::min(want, static_cast<std::size_t>(std::max<Index>(extent, 1)));
}

double matrix_entropy(const CooMatrix& m, std::size_t bins_r, std::size_t bins_c, LogBase base) {
  const Histogram2D h = histogram_2d(m, clamp_bins(bins_r, m.n_rows, kDefaultBins2D),
                                     clamp_bins(bins_c, m.n_cols, kDefaultBins2D));
  return shannon_entropy(h.counts, base);
}

EntropySummary hierarchical_entropy(const CooMatrix& m, std::span<const std::size_t> levels,
                                    std::size_t bins_r, std::size_t bins_c, LogBase base) {
  if (levels.empty()) throw Error("hierarchical entropy needs at least one level");
  if (std::find(levels.begin(), levels.end(), std::size_t{0}) != levels.end()) {
    throw Error("hierarchical level must be at least 1");
  }
  const Histogram2D fine = histogram_2d(m, clamp_bins(bins_r, m.n_rows, kDefaultBins2D),
                                        clamp_bins(bins_c, m.n_cols, kDefaultBins2D));
  EntropySummary out;
  out.base = base;
  out.b_total = fine.counts.size();
  out.h = fine.total() == 0 ? 0.0 : shannon_entropy(fine.counts, base);

  const std::size_t fr = fine.bins_r();
  const std::size_t fc = fine.bins_c();
  for (std::size_t level : levels) {
    if (level > fr || level > fc) continue;
    auto cell_r = [&](std::size_t b) { return part_of(b, fr, level); };
    auto cell_c = [&](std::size_t b) { return part_of(b, fc, level); };

    // Gather each cell's fine-bin counts, then take their entropy.
    std::vector<std::vector<std::uint64_t>> members(level * level);
    for (std::size_t br = 0; br < fr; ++br) {
      for (std::size_t bc = 0; bc < fc; ++bc) {
        members[cell_r(br) * level + cell_c(bc)].push_back(fine.at(br, bc));
      }
    }
    EntropyGrid grid;
    grid.level = level;
    grid.cells.resize(level * level);
    grid.cell_counts.resize(level * level);
    for (std::size_t c = 0; c < members.size(); ++c) {
      const auto& counts = members[c];
      const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
      grid.cell_counts[c] = total;
      grid.cells[c] = total == 0 ? 0.0 : shannon_entropy(counts, base);
    }
    out.levels.push_back(std::move(grid));
  }
  return out;
}

void write_histogram_csv(const Histogram1D& h, std::ostream& out) {
  for (std::size_t b = 0; b < h.bins(); ++b) out << b << ',' << h.counts[b] << '\n';
}

void write_histogram_csv(const Histogram2D& h, std::ostream& out) {
  for (std::size_t br = 0; br < h.bins_r(); ++br) {
    for (std::size_t bc = 0; bc < h.bins_c(); ++bc) {
      out << br << ',' << bc << ',' << h.at(br, bc) << '\n';
    }
  }
}

void write_grids_csv(const EntropySummary& s, std::ostream& out) {
  for (const EntropyGrid& g : s.levels) {
    for (std::size_t a = 0; a < g.level; ++a) {
      for (std::size_t b = 0; b < g.level; ++b) {
        out << g.level << ',' << a << ',' << b << ',';
        put_double(out, g.at(a, b));
        out << '\n';
      }
    }
  }
}

}  // namespace espmv
