#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kplex/graph.hpp"
#include "kplex/model.hpp"
#include "kplex/search.hpp"

namespace kplex {

enum class Strategy { basic, learned, none };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

/// A benchmark grid: every dataset x k x lb x time limit x strategy.
struct BenchSpec {
  std::vector<std::filesystem::path> datasets;
  std::vector<int> k_values{2};
  std::vector<int> lb_values{5};
  /// Seconds; 0 runs to exhaustion.
  std::vector<double> time_limits{0};
  std::vector<Strategy> strategies{Strategy::basic, Strategy::learned};
  std::optional<std::filesystem::path> model_path;
  std::filesystem::path output = "bench.csv";
  std::uint64_t seed = 0;
  int jobs = 1;
  /// Timed repetitions per row; the median wall time is reported.
  int repeats = 1;
  /// Learned rows run to exhaustion on graphs with at most this many
  /// preprocessed vertices also get a bound accuracy.
  std::size_t accuracy_vertex_limit = 64;

  void validate() const;
};

/// Relative dataset/model/output paths resolve against `base`.
BenchSpec bench_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
BenchSpec load_bench_spec(const std::filesystem::path& path);

struct BenchRow {
  std::string dataset;
  int k = 0;
  int lb = 0;
  double time_limit = 0;
  Strategy strategy = Strategy::basic;
  std::size_t n = 0, m = 0, reduced_n = 0, reduced_m = 0;
  std::size_t best_size = 0;
  double wall_ms = 0;
  double preprocess_ms = 0;
  std::uint64_t nodes = 0, bound_calls = 0, bound_prunes = 0;
  bool timed_out = false;
  std::optional<double> accuracy;
  std::optional<std::uint64_t> wrong_prunes;
};

/// CSV columns, in order.
const std::vector<std::string>& bench_columns();
std::string csv_line(const BenchRow& r);

/// Learned-prune accuracy against an exhaustive unbounded reference: a prune
/// of (V_S, V_A) is wrong when some maximum k-plex S* has V_S ⊊ S* ⊆ V_S ∪ V_A,
/// i.e. the pruned subtree held a maximum solution.
struct AccuracyReport {
  std::uint64_t prunes = 0;
  std::uint64_t wrong = 0;
  std::size_t maximum_size = 0;
  std::size_t maximum_solutions = 0;
  /// 1 when nothing was pruned.
  double accuracy() const { return prunes == 0 ? 1.0 : double(prunes - wrong) / double(prunes); }
};

AccuracyReport bound_accuracy(const Graph& g, const SearchConfig& cfg);

/// Runs every row not already present in spec.output (keyed by dataset, k,
/// lb, time limit, strategy) and appends it. Returns the rows run now.
/// Throws before running anything if a learned row lacks a model.
std::vector<BenchRow> run_bench(const BenchSpec& spec, std::ostream* log = nullptr);

}  // namespace kplex
