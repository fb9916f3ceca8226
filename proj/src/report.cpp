#include "espmv/report.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "espmv/error.hpp"

namespace espmv {

namespace {

constexpr std::string_view kParallelLabel = "CPU PAR";

std::size_t table_rank(StrategyKind kind) {
  return static_cast<std::size_t>(
      std::find(kAllStrategies.begin(), kAllStrategies.end(), kind) - kAllStrategies.begin());
}

std::size_t label_rank(const std::string& label) {
  if (label == "CPU COO") return 0;
  if (label == "CPU CSR") return 1;
  if (label == kParallelLabel) return 2;
  return 3;
}

std::string format_row(std::string_view label, const Stats& s, bool best) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%26s%-10s min %6.3f max%s%6.3f mean %6.3f", "",
                std::string(label).c_str(), s.min, best ? "*" : " ", s.max, s.mean);
  return buf;
}

nlohmann::ordered_json stats_json(const Stats& s, bool best) {
  nlohmann::ordered_json j;
  j["min"] = s.min;
  j["max"] = s.max;
  j["mean"] = s.mean;
  j["best"] = best;
  return j;
}

}  // namespace

Stats summarize_values(std::span<const double> values) {
  if (values.empty()) throw Error("no values to summarize");
  Stats s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  // Offsets from the minimum keep identical inputs exactly equal to their mean.
  double offset = 0.0;
  for (double v : values) offset += v - s.min;
  s.mean = std::clamp(s.min + offset / static_cast<double>(values.size()), s.min, s.max);
  return s;
}

void best_mark(std::span<BenchRecord> records) {
  if (records.empty()) throw Error("best_mark needs at least one record");
  std::vector<BenchRecord*> ordered;
  for (auto& r : records) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](const BenchRecord* a, const BenchRecord* b) {
    return table_rank(a->strategy) < table_rank(b->strategy);
  });

  std::map<std::string, KernelSummary*> best;
  std::vector<std::string> labels;
  BenchRecord* best_entropy = nullptr;
  for (BenchRecord* r : ordered) {
    for (KernelSummary& k : r->kernels) {
      k.best = false;
      auto it = best.find(k.label);
      if (it == best.end()) {
        best.emplace(k.label, &k);
        labels.push_back(k.label);
      } else if (k.gflops.max > it->second->gflops.max) {
        it->second = &k;
      }
    }
    r->entropy_best = false;
    if (best_entropy == nullptr || r->entropy.max > best_entropy->entropy.max) best_entropy = r;
  }
  for (const auto& label : labels) best[label]->best = true;
  best_entropy->entropy_best = true;
}

std::vector<BenchRecord> summarize_trials(std::span<const TrialResult> trials) {
  if (trials.empty()) throw Error("no trials");

  std::vector<std::string> matrices;
  for (const auto& t : trials) {
    if (std::find(matrices.begin(), matrices.end(), t.matrix) == matrices.end()) {
      matrices.push_back(t.matrix);
    }
  }

  std::vector<BenchRecord> out;
  for (const auto& matrix : matrices) {
    const std::size_t first_record = out.size();
    for (StrategyKind kind : kAllStrategies) {
      // kernel name -> gflops in trial order; repeat -> entropy
      std::vector<std::string> names;
      std::map<std::string, std::vector<double>> rates;
      std::map<std::size_t, double> entropy_by_repeat;
      for (const auto& t : trials) {
        if (t.matrix != matrix || t.strategy != kind) continue;
        if (!rates.count(t.kernel)) names.push_back(t.kernel);
        rates[t.kernel].push_back(t.gflops);
        entropy_by_repeat.emplace(t.repeat, t.entropy_bits);
      }
      if (names.empty()) continue;

      BenchRecord rec;
      rec.matrix = matrix;
      rec.strategy = kind;
      rec.repeats = entropy_by_repeat.size();
      std::vector<double> entropies;
      for (const auto& [repeat, h] : entropy_by_repeat) entropies.push_back(h);
      rec.entropy = summarize_values(entropies);

      std::optional<KernelSummary> parallel;
      for (const auto& name : names) {
        KernelSummary k;
        k.gflops = summarize_values(rates[name]);
        if (auto p = parallel_workers(name)) {
          // Keep the worker count with the highest max; fewer workers win ties.
          k.label = std::string(kParallelLabel);
          k.workers = p;
          if (!parallel || k.gflops.max > parallel->gflops.max ||
              (k.gflops.max == parallel->gflops.max && *k.workers < *parallel->workers)) {
            parallel = k;
          }
          continue;
        }
        k.label = name;
        rec.kernels.push_back(std::move(k));
      }
      if (parallel) rec.kernels.push_back(*parallel);
      std::stable_sort(rec.kernels.begin(), rec.kernels.end(),
                       [](const KernelSummary& a, const KernelSummary& b) {
                         return label_rank(a.label) < label_rank(b.label);
                       });
      out.push_back(std::move(rec));
    }
    best_mark(std::span<BenchRecord>(out).subspan(first_record));
  }
  return out;
}

nlohmann::ordered_json summary_json(std::span<const BenchRecord> records) {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  for (const auto& r : records) {
    nlohmann::ordered_json& node = root[r.matrix][std::string(strategy_name(r.strategy))];
    for (const auto& k : r.kernels) {
      nlohmann::ordered_json j = stats_json(k.gflops, k.best);
      if (k.workers) j["workers"] = *k.workers;
      node[k.label] = std::move(j);
    }
    node[std::string(kEntropyLabel)] = stats_json(r.entropy, r.entropy_best);
  }
  return root;
}

std::string summary_text(std::span<const BenchRecord> records) {
  return summary_json(records).dump(2) + "\n";
}

std::string render_table(std::span<const BenchRecord> records) {
  std::ostringstream out;
  std::string current;
  for (const auto& r : records) {
    if (r.matrix != current) {
      out << r.matrix << '\n';
      current = r.matrix;
    }
    out << ' ' << strategy_name(r.strategy) << '\n';
    for (const auto& k : r.kernels) out << format_row(k.label, k.gflops, k.best) << '\n';
    out << format_row(kEntropyLabel, r.entropy, r.entropy_best) << '\n';
  }
  return out.str();
}

nlohmann::ordered_json trial_to_json(const TrialResult& t) {
  nlohmann::ordered_json j;
  j["matrix"] = t.matrix;
  j["strategy"] = std::string(strategy_name(t.strategy));
  j["kernel"] = t.kernel;
  j["repeat"] = t.repeat;
  j["seed"] = t.seed;
  j["iterations"] = t.iterations;
  j["seconds_per_call"] = t.seconds_per_call;
  j["gflops"] = t.gflops;
  j["entropy_bits"] = t.entropy_bits;
  j["correctness_ok"] = t.correctness_ok;
  return j;
}

TrialResult trial_from_json(const nlohmann::json& j) {
  TrialResult t;
  t.matrix = j.at("matrix").get<std::string>();
  const auto strategy = parse_strategy(j.at("strategy").get<std::string>());
  if (!strategy) throw Error("unknown strategy '" + j.at("strategy").get<std::string>() + "'");
  t.strategy = *strategy;
  t.kernel = j.at("kernel").get<std::string>();
  t.repeat = j.at("repeat").get<std::size_t>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.iterations = j.at("iterations").get<std::size_t>();
  t.seconds_per_call = j.at("seconds_per_call").get<double>();
  t.gflops = j.at("gflops").get<double>();
  t.entropy_bits = j.at("entropy_bits").get<double>();
  t.correctness_ok = j.at("correctness_ok").get<bool>();
  return t;
}

void write_trials_jsonl(std::span<const TrialResult> trials, std::ostream& out) {
  for (const auto& t : trials) out << trial_to_json(t).dump() << '\n';
  if (!out) throw Error("write failed");
}

std::vector<TrialResult> read_trials_jsonl(std::istream& in) {
  std::vector<TrialResult> trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      trials.push_back(trial_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed trial: ") + e.what(), line_no);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return trials;
}

}  // namespace espmv
