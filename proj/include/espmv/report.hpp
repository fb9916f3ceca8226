#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "espmv/bench.hpp"
#include "espmv/permute.hpp"

namespace espmv {

struct Stats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;

  friend bool operator==(const Stats&, const Stats&) = default;
};

/// min/max/mean over all values, mean kept inside [min, max]. Throws on empty input.
Stats summarize_values(std::span<const double> values);

/// Row label used in tables for the entropy line.
inline constexpr std::string_view kEntropyLabel = "H";

struct KernelSummary {
  std::string label;  ///< "CPU COO", "CPU CSR", "CPU PAR", or a custom kernel name
  Stats gflops;
  bool best = false;
  std::optional<std::size_t> workers;  ///< chosen worker count for CPU PAR
};

/// Per (matrix, strategy) summary over all repeats.
struct BenchRecord {
  std::string matrix;
  StrategyKind strategy = StrategyKind::Regular;
  std::vector<KernelSummary> kernels;
  Stats entropy;
  bool entropy_best = false;
  std::size_t repeats = 0;
};

/// Marks, for each kernel label, the record with the largest max GFLOPS
/// (earlier table order wins ties), and likewise the largest max entropy.
/// All records must belong to one matrix. Throws on empty input.
void best_mark(std::span<BenchRecord> records);

/// Groups trials by matrix (first-appearance order) and strategy (table
/// order), keeps the best worker count for the parallel kernel, and applies
/// best_mark. Pure: the same trials always give the same records.
std::vector<BenchRecord> summarize_trials(std::span<const TrialResult> trials);

/// matrix -> strategy -> kernel -> {min, max, mean, best}.
nlohmann::ordered_json summary_json(std::span<const BenchRecord> records);
std::string summary_text(std::span<const BenchRecord> records);

/// Table layout with three decimals and a '*' after "max" on the best row.
std::string render_table(std::span<const BenchRecord> records);

nlohmann::ordered_json trial_to_json(const TrialResult& t);
TrialResult trial_from_json(const nlohmann::json& j);

void write_trials_jsonl(std::span<const TrialResult> trials, std::ostream& out);
/// Throws ParseError naming the offending line.
std::vector<TrialResult> read_trials_jsonl(std::istream& in);

}  // namespace espmv
