#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "kplex/graph.hpp"
#include "kplex/milp.hpp"
#include "kplex/model.hpp"
#include "kplex/search.hpp"

namespace kplex {

/// What to train on and for how long. Defaults reproduce the reference
/// protocol: 8 random graphs, k in {2, 4}, lb = 5, 60 s per run, 300 s solve.
struct TrainingPlan {
  std::vector<int> graph_sizes{100, 150, 200, 250};
  int graphs_per_size = 2;
  std::vector<int> k_values{2, 4};
  std::vector<int> lb_values{5};
  std::chrono::milliseconds per_run_budget{60'000};
  std::chrono::milliseconds solver_budget{300'000};
  double edge_probability = 0.15;
  std::uint64_t seed = 1;
  /// Optional node cap per run, for reproducible (time-independent) traces.
  std::uint64_t per_run_node_limit = 0;
  /// Concurrent collection runs.
  int jobs = 1;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

nlohmann::json to_json(const TrainingPlan& plan);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainingPlan plan_from_json(const nlohmann::json& j);
TrainingPlan load_plan(const std::filesystem::path& path);

/// Erdős–Rényi G(n, p), deterministic in `seed`.
Graph gen_random_graph(std::size_t n, double edge_probability, std::uint64_t seed);

class DegenerateTraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunReport {
  std::int64_t graph_id = 0;
  std::size_t n = 0, m = 0;
  int k = 0, lb = 0;
  std::size_t reduced_n = 0, reduced_m = 0;
  std::size_t best_size = 0;
  SearchStats stats;
  std::uint64_t positives = 0, negatives = 0;  // visits, with multiplicity
  std::size_t distinct = 0;
};

struct TrainingData {
  /// Identical (features, label) pairs within a run are folded into one
  /// example carrying their count.
  std::vector<Example> examples;
  std::vector<RunReport> runs;
  std::uint64_t positives = 0, negatives = 0;
  nlohmann::json diagnostics() const;
};

/// Runs the familiarity-bounded search on every (graph, k, lb) combination and
/// records the bound's decisions. Throws DegenerateTraceError without negatives.
TrainingData collect_training_data(const TrainingPlan& plan);

struct TrainResult {
  ConstraintModel model;
  CoverageReport report;
  TrainingData data;
  std::chrono::nanoseconds collect_time{0};
  std::chrono::nanoseconds solve_time{0};
};

/// collect_training_data, encode with one constraint, solve. Meta records the
/// plan, run diagnostics and coverage. Saves the model when `model_out` is set
/// and the trace when `trace_out` is set.
TrainResult train(const TrainingPlan& plan, const std::optional<std::filesystem::path>& model_out = {},
                  const std::optional<std::filesystem::path>& trace_out = {});

/// Search with the model as the bound. Checks the model against the feature
/// schema before searching.
SearchResult learned_search(const Graph& g, int k, int lb, std::chrono::nanoseconds time_limit,
                            std::shared_ptr<const ConstraintModel> model);

}  // namespace kplex
