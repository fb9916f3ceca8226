#include "espmv/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "espmv/error.hpp"
#include "espmv/matio.hpp"
#include "espmv/report.hpp"
#include "espmv/rng.hpp"

namespace espmv {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }
std::string name_of(const std::string& path) { return fs::path(path).filename().string(); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw Error(path.string() + ": write failed");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_config_echo(const RunConfig& config, const std::string& command) {
  ojson j;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["config"] = config_to_json(config);
  write_text(config.output_dir / "config.json", j.dump(2) + "\n");
}

template <typename Write>
std::string to_string_with(Write&& write) {
  std::ostringstream out;
  write(out);
  return out.str();
}

std::size_t bins_1d_for(const RunConfig& c, Index extent) {
  return clamp_bins(c.bins_1d, extent, kDefaultBins1D);
}

ojson pivot_json(const std::optional<Index>& pivot) {
  return pivot ? ojson(*pivot) : ojson(nullptr);
}

StrategyOptions strategy_options(const RunConfig& c) {
  StrategyOptions o;
  o.bins = c.bins_1d;
  o.column_gradient = c.column_gradient;
  return o;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

std::size_t to_count(const std::string& s, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || s[0] == '-') {
    throw Error(std::string("invalid ") + what + " '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

std::vector<StrategyKind> parse_strategies(const std::string& text) {
  std::vector<StrategyKind> out;
  for (const auto& token : split(text, ',')) {
    auto kind = parse_strategy(token);
    if (!kind) throw Error("unknown strategy '" + token + "' (use reg,r,gr,gc,rc)");
    if (std::find(out.begin(), out.end(), *kind) == out.end()) out.push_back(*kind);
  }
  if (out.empty()) throw Error("empty strategy list");
  // Table order regardless of how they were listed.
  std::sort(out.begin(), out.end(), [](StrategyKind a, StrategyKind b) {
    return std::find(kAllStrategies.begin(), kAllStrategies.end(), a) <
           std::find(kAllStrategies.begin(), kAllStrategies.end(), b);
  });
  return out;
}

LogBase parse_base(const std::string& s) {
  if (s == "2") return LogBase::Two;
  if (s == "e") return LogBase::E;
  throw Error("entropy base must be 2 or e");
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.matrix_paths.empty()) throw Error("at least one matrix path is required");
  if (c.strategies.empty()) throw Error("at least one strategy is required");
  if (c.repeats < 1) throw Error("repeats must be at least 1");
  if (c.bins_r < 1 || c.bins_c < 1) throw Error("2D bin counts must be at least 1");
  if (c.levels.empty()) throw Error("at least one hierarchical level is required");
  if (std::find(c.levels.begin(), c.levels.end(), std::size_t{0}) != c.levels.end()) {
    throw Error("hierarchical levels must be at least 1");
  }
  if (!(c.target_seconds > 0.0)) throw Error("target seconds must be positive");
  if (c.max_workers < 1) throw Error("max workers must be at least 1");
}

ojson config_to_json(const RunConfig& c) {
  ojson j;
  j["matrix_paths"] = c.matrix_paths;
  std::vector<std::string> codes;
  for (StrategyKind k : c.strategies) codes.emplace_back(strategy_code(k));
  j["strategies"] = codes;
  j["repeats"] = c.repeats;
  j["master_seed"] = c.master_seed;
  j["bins_1d"] = c.bins_1d;
  j["bins_2d"] = {c.bins_r, c.bins_c};
  j["levels"] = c.levels;
  j["target_seconds"] = c.target_seconds;
  j["max_workers"] = c.max_workers;
  j["spawn_per_call"] = c.spawn_per_call;
  j["column_gradient"] =
      c.column_gradient == ColumnGradientMode::RowsAndColumns ? "rows-and-columns" : "columns-only";
  j["output_dir"] = c.output_dir.string();
  j["entropy_base"] = std::string(log_base_name(c.entropy_base));
  j["entropy_histogram"] = "2d";
  j["rng"] = std::string(Rng::kName);
  return j;
}

RunConfig config_from_json(const nlohmann::json& doc) {
  // Accepts the bare config object or the config.json echo around it.
  const nlohmann::json& j = doc.is_object() && doc.contains("config") ? doc.at("config") : doc;
  RunConfig c;
  try {
    c.matrix_paths = j.at("matrix_paths").get<std::vector<std::string>>();
    c.strategies.clear();
    for (const auto& code : j.at("strategies")) {
      auto kind = parse_strategy(code.get<std::string>());
      if (!kind) throw Error("unknown strategy in config");
      c.strategies.push_back(*kind);
    }
    c.repeats = j.at("repeats").get<std::size_t>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    c.bins_1d = j.at("bins_1d").get<std::size_t>();
    c.bins_r = j.at("bins_2d").at(0).get<std::size_t>();
    c.bins_c = j.at("bins_2d").at(1).get<std::size_t>();
    c.levels = j.at("levels").get<std::vector<std::size_t>>();
    c.target_seconds = j.at("target_seconds").get<double>();
    c.max_workers = j.at("max_workers").get<std::size_t>();
    c.spawn_per_call = j.at("spawn_per_call").get<bool>();
    c.column_gradient = j.at("column_gradient").get<std::string>() == "columns-only"
                            ? ColumnGradientMode::ColumnsOnly
                            : ColumnGradientMode::RowsAndColumns;
    c.output_dir = j.at("output_dir").get<std::string>();
    c.entropy_base = parse_base(j.at("entropy_base").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid config: ") + e.what());
  }
  return c;
}

BenchConfig bench_config(const RunConfig& c) {
  BenchConfig b;
  b.repeats = c.repeats;
  b.master_seed = c.master_seed;
  b.target_seconds = c.target_seconds;
  b.bins_1d = c.bins_1d;
  b.bins_r = c.bins_r;
  b.bins_c = c.bins_c;
  b.entropy_base = c.entropy_base;
  b.column_gradient = c.column_gradient;
  b.max_workers = c.max_workers;
  b.spawn_per_call = c.spawn_per_call;
  return b;
}

ojson host_metadata() {
  ojson j;
  std::string model = "unknown";
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) model = line.substr(line.find_first_not_of(" \t", colon + 1));
      break;
    }
  }
  j["cpu_model"] = model;
  j["logical_cores"] = std::thread::hardware_concurrency();
  return j;
}

const std::vector<std::string>& study_matrices() {
  static const std::vector<std::string> names = {
      "mult_dcop_01", "mult_dcop_02", "mult_dcop_03", "lp_fit2d",  "bloweya",
      "lp_osa_07",    "ex19",         "brainpc2",     "shermanACb", "cvxqp3",
      "case9",        "TSOPF_FS_b9_c6", "OPF_6000",   "OPF_3754",  "c-47",
      "mhd4800a",     "gen4",         "Maragal_6",    "aft01",     "TSOPF_RS_b39_c7"};
  return names;
}

void cmd_matrices(std::ostream& out) {
  for (const auto& name : study_matrices()) out << name << '\n';
}

int cmd_analyze(const RunConfig& config, std::ostream& log) {
  validate(config);
  fs::create_directories(config.output_dir);
  write_config_echo(config, "analyze");
  int status = 0;
  for (const auto& path : config.matrix_paths) {
    try {
      const CooMatrix m = read_matrix_market(path);
      if (m.nnz() == 0) throw Error(path + ": matrix has no nonzeros");
      const fs::path dir = config.output_dir / stem_of(path);
      fs::create_directories(dir);

      const std::size_t br = bins_1d_for(config, m.n_rows);
      const std::size_t bc = bins_1d_for(config, m.n_cols);
      const std::size_t r2 = clamp_bins(config.bins_r, m.n_rows, kDefaultBins2D);
      const std::size_t c2 = clamp_bins(config.bins_c, m.n_cols, kDefaultBins2D);
      const LogBase base = config.entropy_base;

      const Histogram1D rows = row_histogram(m, br);
      const Histogram1D cols = col_histogram(m, bc);
      const Histogram2D grid = histogram_2d(m, r2, c2);
      const EntropySummary hier = hierarchical_entropy(m, config.levels, r2, c2, base);

      write_text(dir / "row_histogram.csv", to_string_with([&](auto& o) { write_histogram_csv(rows, o); }));
      write_text(dir / "col_histogram.csv", to_string_with([&](auto& o) { write_histogram_csv(cols, o); }));
      write_text(dir / "histogram_2d.csv", to_string_with([&](auto& o) { write_histogram_csv(grid, o); }));
      write_text(dir / "hierarchical.csv", to_string_with([&](auto& o) { write_grids_csv(hier, o); }));

      ojson j;
      j["matrix"] = name_of(path);
      j["n_rows"] = m.n_rows;
      j["n_cols"] = m.n_cols;
      j["nnz"] = m.nnz();
      j["entropy_base"] = std::string(log_base_name(base));
      j["bins"] = {{"rows", br}, {"cols", bc}, {"2d", {r2, c2}}};
      j["entropy"] = {{"rows", shannon_entropy(rows.counts, base)},
                      {"cols", shannon_entropy(cols.counts, base)},
                      {"2d", shannon_entropy(grid.counts, base)}};
      ojson levels = ojson::array();
      for (const auto& g : hier.levels) levels.push_back({{"level", g.level}, {"cells", g.cells}});
      j["hierarchical"] = levels;

      ojson strategies = ojson::object();
      for (StrategyKind kind : config.strategies) {
        const StrategyPlan plan = build_strategy(m, kind, config.master_seed, strategy_options(config));
        const CooMatrix p = apply_strategy(m, plan);
        const Histogram1D prows = row_histogram(p, br);
        const Histogram1D pcols = col_histogram(p, bc);
        const Histogram2D pgrid = histogram_2d(p, r2, c2);
        const EntropySummary phier = hierarchical_entropy(p, config.levels, r2, c2, base);
        write_text(dir / ("hierarchical_" + std::string(strategy_code(kind)) + ".csv"),
                   to_string_with([&](auto& o) { write_grids_csv(phier, o); }));
        ojson s;
        s["seed"] = config.master_seed;
        s["row_pivot"] = pivot_json(plan.row_pivot);
        s["col_pivot"] = pivot_json(plan.col_pivot);
        s["entropy"] = {{"rows", shannon_entropy(prows.counts, base)},
                        {"cols", shannon_entropy(pcols.counts, base)},
                        {"2d", shannon_entropy(pgrid.counts, base)}};
        s["jsd"] = {{"rows", js_divergence(rows.counts, prows.counts)},
                    {"cols", js_divergence(cols.counts, pcols.counts)},
                    {"2d", js_divergence(grid.counts, pgrid.counts)}};
        strategies[std::string(strategy_name(kind))] = s;
      }
      j["strategies"] = strategies;
      write_text(dir / "entropy.json", j.dump(2) + "\n");
      log << path << ": entropy " << j["entropy"]["2d"].get<double>() << " (" << r2 << "x" << c2
          << " bins)\n";
    } catch (const std::exception& e) {
      log << "error: " << e.what() << '\n';
      status = 1;
    }
  }
  return status;
}

int cmd_permute(const RunConfig& config, std::ostream& log) {
  validate(config);
  fs::create_directories(config.output_dir);
  write_config_echo(config, "permute");
  int status = 0;
  for (const auto& path : config.matrix_paths) {
    try {
      const CooMatrix m = read_matrix_market(path);
      const std::size_t r2 = clamp_bins(config.bins_r, m.n_rows, kDefaultBins2D);
      const std::size_t c2 = clamp_bins(config.bins_c, m.n_cols, kDefaultBins2D);
      for (StrategyKind kind : config.strategies) {
        const StrategyPlan plan = build_strategy(m, kind, config.master_seed, strategy_options(config));
        const CooMatrix p = apply_strategy(m, plan);
        const std::string base = stem_of(path) + "." + std::string(strategy_code(kind));
        write_text(config.output_dir / (base + ".mtx"),
                   to_string_with([&](auto& o) { write_matrix_market(p, o); }));
        write_text(config.output_dir / (base + ".row.perm"),
                   to_string_with([&](auto& o) { write_permutation(plan.rows, o); }));
        write_text(config.output_dir / (base + ".col.perm"),
                   to_string_with([&](auto& o) { write_permutation(plan.cols, o); }));
        ojson j;
        j["matrix"] = name_of(path);
        j["strategy"] = std::string(strategy_name(kind));
        j["seed"] = config.master_seed;
        j["row_pivot"] = pivot_json(plan.row_pivot);
        j["col_pivot"] = pivot_json(plan.col_pivot);
        j["bins_2d"] = {r2, c2};
        j["entropy_base"] = std::string(log_base_name(config.entropy_base));
        if (m.nnz() > 0) {
          j["entropy_before"] = matrix_entropy(m, r2, c2, config.entropy_base);
          j["entropy_after"] = matrix_entropy(p, r2, c2, config.entropy_base);
        }
        write_text(config.output_dir / (base + ".json"), j.dump(2) + "\n");
        log << "wrote " << (config.output_dir / (base + ".mtx")).string() << '\n';
      }
    } catch (const std::exception& e) {
      log << "error: " << e.what() << '\n';
      status = 1;
    }
  }
  return status;
}

namespace {

// Summary, table and exit status shared by bench and report.
int write_summary(const std::vector<TrialResult>& trials, const fs::path& out_dir,
                  std::ostream& log, ojson* summary_out = nullptr) {
  const std::vector<BenchRecord> records = summarize_trials(trials);
  write_text(out_dir / "summary.json", summary_text(records));
  write_text(out_dir / "table.txt", render_table(records));
  if (summary_out) *summary_out = summary_json(records);
  const bool ok = std::all_of(trials.begin(), trials.end(),
                              [](const TrialResult& t) { return t.correctness_ok; });
  if (!ok) log << "some trials failed; see correctness_ok in the raw log\n";
  return ok ? 0 : 1;
}

}  // namespace

int cmd_bench(const RunConfig& config, std::ostream& log, const KernelFactory& kernels) {
  validate(config);
  fs::create_directories(config.output_dir);
  write_config_echo(config, "bench");
  const BenchConfig bench = bench_config(config);

  std::vector<TrialResult> trials;
  std::vector<std::string> failures;
  for (const auto& path : config.matrix_paths) {
    CooMatrix m;
    try {
      m = read_matrix_market(path);
    } catch (const std::exception& e) {
      failures.push_back(e.what());
      log << "error: " << e.what() << '\n';
      continue;
    }
    for (StrategyKind kind : config.strategies) {
      log << name_of(path) << " " << strategy_name(kind) << '\n';
      ExperimentResult r = run_experiment(m, name_of(path), kind, bench, kernels);
      for (const auto& f : r.failures) log << "failed: " << f << '\n';
      failures.insert(failures.end(), r.failures.begin(), r.failures.end());
      trials.insert(trials.end(), r.trials.begin(), r.trials.end());
    }
  }

  write_text(config.output_dir / "trials.jsonl",
             to_string_with([&](auto& o) { write_trials_jsonl(trials, o); }));
  if (trials.empty()) {
    log << "error: no trials\n";
    return 1;
  }
  ojson summary;
  int status = write_summary(trials, config.output_dir, log, &summary);
  if (!failures.empty()) status = 1;

  ojson report;
  report["tool_version"] = kToolVersion;
  report["config"] = config_to_json(config);
  report["host"] = host_metadata();
  report["summary"] = summary;
  report["failures"] = failures;
  write_text(config.output_dir / "report.json", report.dump(2) + "\n");
  log << read_text(config.output_dir / "table.txt");
  return status;
}

int cmd_report(const fs::path& raw_log, const fs::path& out_dir, std::ostream& log) {
  std::ifstream in(raw_log);
  if (!in) {
    log << "error: " << raw_log.string() << ": cannot open file\n";
    return 1;
  }
  std::vector<TrialResult> trials;
  try {
    trials = read_trials_jsonl(in);
  } catch (const ParseError& e) {
    log << "error: " << raw_log.string() << ": " << e.what() << '\n';
    return 1;
  }
  if (trials.empty()) {
    log << "error: no trials\n";
    return 1;
  }
  fs::create_directories(out_dir);
  return write_summary(trials, out_dir, log);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy-guided permutation analysis and SpMV benchmarking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::vector<std::string> paths;
  std::string bins_1d, bins_2d, levels, strategies, entropy_base, config_file, resummarize;
  std::string repeats, seed, target_seconds, max_workers, out_dir;
  bool spawn_per_call = false;
  bool columns_only = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("matrices", paths, "Matrix Market files");
    sub->add_option("--bins-1d", bins_1d, "1D histogram bins (default min(dim, 512))");
    sub->add_option("--bins-2d", bins_2d, "2D histogram bins, RxC or N (default 128x128)");
    sub->add_option("--levels", levels, "hierarchical grid sizes (default 2,4,8)");
    sub->add_option("--strategies", strategies, "subset of reg,r,gr,gc,rc (default all)");
    sub->add_option("--seed", seed, "master seed (default 0)");
    sub->add_option("--entropy-base", entropy_base, "2 or e (default 2)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--gc-columns-only", columns_only,
                  "Column-Gradient shuffles columns only instead of rows and columns");
    sub->add_option("--config", config_file, "config.json echo of an earlier run");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "histograms and entropy of matrices");
  add_common(analyze);
  CLI::App* permute = app.add_subcommand("permute", "write permuted matrices and permutations");
  add_common(permute);
  CLI::App* bench = app.add_subcommand("bench", "time SpMV kernels under each strategy");
  add_common(bench);
  bench->add_option("--repeats", repeats, "repeats per strategy (default 32)");
  bench->add_option("--target-seconds", target_seconds, "target loop time per trial (default 2)");
  bench->add_option("--max-workers", max_workers, "largest parallel worker count (default 16)");
  bench->add_flag("--spawn-per-call", spawn_per_call, "create threads inside every parallel call");
  bench->add_option("--resummarize", resummarize, "re-summarize a raw trial log instead of timing");
  CLI::App* report = app.add_subcommand("report", "summarize a raw trial log");
  std::string report_log;
  report->add_option("log", report_log, "trials.jsonl")->required();
  report->add_option("--out", out_dir, "output directory");
  CLI::App* matrices = app.add_subcommand("matrices", "list the SuiteSparse matrices of the study");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (matrices->parsed()) {
      cmd_matrices(out);
      return 0;
    }
    if (report->parsed()) {
      return cmd_report(report_log, out_dir.empty() ? fs::path(".") : fs::path(out_dir), err);
    }

    RunConfig config;
    if (!config_file.empty()) config = config_from_json(nlohmann::json::parse(read_text(config_file)));
    if (!paths.empty()) config.matrix_paths = paths;
    if (!bins_1d.empty()) config.bins_1d = to_count(bins_1d, "--bins-1d");
    if (!bins_2d.empty()) {
      auto parts = split(bins_2d, 'x');
      if (parts.size() == 1) parts.push_back(parts[0]);
      if (parts.size() != 2) throw Error("--bins-2d expects RxC");
      config.bins_r = to_count(parts[0], "--bins-2d");
      config.bins_c = to_count(parts[1], "--bins-2d");
    }
    if (!levels.empty()) {
      config.levels.clear();
      for (const auto& l : split(levels, ',')) config.levels.push_back(to_count(l, "--levels"));
    }
    if (!strategies.empty()) config.strategies = parse_strategies(strategies);
    if (!seed.empty()) config.master_seed = to_count(seed, "--seed");
    if (!entropy_base.empty()) config.entropy_base = parse_base(entropy_base);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (columns_only) config.column_gradient = ColumnGradientMode::ColumnsOnly;
    if (!repeats.empty()) config.repeats = to_count(repeats, "--repeats");
    if (!target_seconds.empty()) {
      try {
        config.target_seconds = std::stod(target_seconds);
      } catch (const std::exception&) {
        throw Error("invalid --target-seconds '" + target_seconds + "'");
      }
    }
    if (!max_workers.empty()) config.max_workers = to_count(max_workers, "--max-workers");
    if (spawn_per_call) config.spawn_per_call = true;

    if (analyze->parsed()) return cmd_analyze(config, err);
    if (permute->parsed()) return cmd_permute(config, err);
    if (bench->parsed()) {
      if (!resummarize.empty()) {
        return cmd_report(resummarize, out_dir.empty() ? config.output_dir : fs::path(out_dir), err);
      }
      return cmd_bench(config, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace espmv
