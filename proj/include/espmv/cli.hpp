#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "espmv/bench.hpp"
#include "espmv/entropy.hpp"
#include "espmv/permute.hpp"

namespace espmv {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Everything a run depends on. Its JSON echo reproduces the run.
struct RunConfig {
  std::vector<std::string> matrix_paths;
  std::vector<StrategyKind> strategies{kAllStrategies.begin(), kAllStrategies.end()};
  std::size_t repeats = 32;
  std::uint64_t master_seed = 0;
  std::size_t bins_1d = 0;  ///< 0 = min(dim, 512)
  std::size_t bins_r = kDefaultBins2D;
  std::size_t bins_c = kDefaultBins2D;
  std::vector<std::size_t> levels{2, 4, 8};
  double target_seconds = 2.0;
  std::size_t max_workers = 16;
  bool spawn_per_call = false;
  ColumnGradientMode column_gradient = ColumnGradientMode::RowsAndColumns;
  std::filesystem::path output_dir = "espmv-out";
  LogBase entropy_base = LogBase::Two;
};

/// Throws espmv::Error on violated invariants (no matrices, zero repeats, zero bins...).
void validate(const RunConfig& config);

nlohmann::ordered_json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);
BenchConfig bench_config(const RunConfig& config);

/// Host description recorded next to timings.
nlohmann::ordered_json host_metadata();

/// Names of the SuiteSparse matrices behind the published tables.
const std::vector<std::string>& study_matrices();

// Commands return the process exit status: 0 on success, 1 when a
// correctness check failed or an input could not be read. Progress and
// errors go to `log`.

/// Histograms (CSV), hierarchical grids (CSV) and entropy values (JSON) per
/// matrix, plus a before/after comparison for every configured strategy.
int cmd_analyze(const RunConfig& config, std::ostream& log);

/// Permuted .mtx, row/column .perm files and a JSON sidecar per
/// (matrix, strategy), seeded with config.master_seed.
int cmd_permute(const RunConfig& config, std::ostream& log);

/// Raw trials (trials.jsonl), summary.json, table.txt and report.json.
int cmd_bench(const RunConfig& config, std::ostream& log,
              const KernelFactory& kernels = default_kernels);

/// Re-summarizes a raw trial log into out_dir/summary.json and table.txt.
int cmd_report(const std::filesystem::path& raw_log, const std::filesystem::path& out_dir,
               std::ostream& log);

void cmd_matrices(std::ostream& out);

/// Entry point behind the `espmv` executable.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace espmv
