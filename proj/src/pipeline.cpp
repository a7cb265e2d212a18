#include "kplex/pipeline.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>
#include <unordered_map>

#include "kplex/preprocess.hpp"
#include "kplex/trace.hpp"

namespace kplex {

void TrainingPlan::validate() const {
  auto positive_all = [](const std::vector<int>& v) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [](int x) { return x >= 1; });
  };
  if (!positive_all(graph_sizes)) throw std::invalid_argument("plan: graph_sizes must be positive");
  if (graphs_per_size < 1) throw std::invalid_argument("plan: graphs_per_size must be positive");
  if (!positive_all(k_values)) throw std::invalid_argument("plan: k_values must be positive");
  if (!positive_all(lb_values)) throw std::invalid_argument("plan: lb_values must be positive");
  if (per_run_budget.count() <= 0 || solver_budget.count() <= 0) {
    throw std::invalid_argument("plan: budgets must be positive");
  }
  if (!(edge_probability > 0.0 && edge_probability < 1.0)) {
    throw std::invalid_argument("plan: edge_probability must lie in (0, 1)");
  }
  if (jobs < 1) throw std::invalid_argument("plan: jobs must be positive");
}

nlohmann::json to_json(const TrainingPlan& p) {
  return {{"graph_sizes", p.graph_sizes},
          {"graphs_per_size", p.graphs_per_size},
          {"k_values", p.k_values},
          {"lb_values", p.lb_values},
          {"per_run_budget_ms", p.per_run_budget.count()},
          {"solver_budget_ms", p.solver_budget.count()},
          {"edge_probability", p.edge_probability},
          {"seed", p.seed},
          {"per_run_node_limit", p.per_run_node_limit},
          {"jobs", p.jobs}};
}

TrainingPlan plan_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("plan must be a JSON object");
  TrainingPlan p;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "graph_sizes") p.graph_sizes = v.get<std::vector<int>>();
      else if (key == "graphs_per_size") p.graphs_per_size = v.get<int>();
      else if (key == "k_values") p.k_values = v.get<std::vector<int>>();
      else if (key == "lb_values") p.lb_values = v.get<std::vector<int>>();
      else if (key == "per_run_budget_ms") p.per_run_budget = std::chrono::milliseconds(v.get<std::int64_t>());
      else if (key == "solver_budget_ms") p.solver_budget = std::chrono::milliseconds(v.get<std::int64_t>());
      else if (key == "edge_probability") p.edge_probability = v.get<double>();
      else if (key == "seed") p.seed = v.get<std::uint64_t>();
      else if (key == "per_run_node_limit") p.per_run_node_limit = v.get<std::uint64_t>();
      else if (key == "jobs") p.jobs = v.get<int>();
      else throw std::invalid_argument("plan: unknown key \"" + key + "\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("plan: ") + e.what());
  }
  p.validate();
  return p;
}

TrainingPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read plan: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("plan is not valid JSON: ") + e.what());
  }
  return plan_from_json(j);
}

Graph gen_random_graph(std::size_t n, double p, std::uint64_t seed) {
  if (n < 1) throw ContractViolation("gen_random_graph: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = u + 1; v < n; ++v) {
      const double r = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (r < p) edges.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, edges);
}

namespace {

struct ExampleKey {
  std::array<std::uint64_t, kFeatureCount> bits;
  bool label;
  bool operator==(const ExampleKey&) const = default;
};

struct ExampleKeyHash {
  std::size_t operator()(const ExampleKey& k) const noexcept {
    std::uint64_t h = k.label ? 0x9e3779b97f4a7c15ULL : 0;
    for (auto b : k.bits) {
      h ^= b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

struct RunSpec {
  std::int64_t graph_id;
  std::size_t n;
  std::uint64_t graph_seed;
  int k;
  int lb;
};

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct RunOutput {
  RunReport report;
  std::vector<Example> examples;
};

RunOutput collect_run(const TrainingPlan& plan, const RunSpec& spec) {
  RunOutput out;
  RunReport& r = out.report;
  const Graph g = gen_random_graph(spec.n, plan.edge_probability, spec.graph_seed);
  r.graph_id = spec.graph_id;
  r.n = g.vertex_count();
  r.m = g.edge_count();
  r.k = spec.k;
  r.lb = spec.lb;
  const PreprocessReport pre = preprocess(g, {spec.k, spec.lb});
  r.reduced_n = pre.result.vertex_count();
  r.reduced_m = pre.result.edge_count();
  if (pre.result.vertex_count() == 0) return out;

  std::unordered_map<ExampleKey, std::size_t, ExampleKeyHash> seen;
  SearchConfig cfg;
  cfg.k = spec.k;
  cfg.lb = spec.lb;
  cfg.time_limit = plan.per_run_budget;
  cfg.node_limit = plan.per_run_node_limit;
  cfg.bound = BoundKind::familiarity;
  cfg.record_trace = true;
  cfg.graph_id = spec.graph_id;
  cfg.trace_sink = [&](const Example& e) {
    ExampleKey key{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) key.bits[i] = std::bit_cast<std::uint64_t>(e.features[i]);
    key.label = e.label;
    auto [it, fresh] = seen.try_emplace(key, out.examples.size());
    if (fresh) {
      out.examples.push_back(e);
    } else {
      ++out.examples[it->second].count;
    }
    (e.label ? r.positives : r.negatives) += 1;
  };
  const SearchResult res = search(pre.result, cfg);
  r.stats = res.stats;
  r.best_size = res.best ? res.best->size : 0;
  r.distinct = out.examples.size();
  return out;
}

nlohmann::json run_json(const RunReport& r) {
  return {{"graph", r.graph_id},
          {"n", r.n},
          {"m", r.m},
          {"k", r.k},
          {"lb", r.lb},
          {"reduced_n", r.reduced_n},
          {"reduced_m", r.reduced_m},
          {"best_size", r.best_size},
          {"nodes", r.stats.nodes},
          {"bound_calls", r.stats.bound_calls},
          {"bound_prunes", r.stats.bound_prunes},
          {"timed_out", r.stats.timed_out},
          {"positives", r.positives},
          {"negatives", r.negatives},
          {"distinct_examples", r.distinct},
          {"elapsed_ms", std::chrono::duration<double, std::milli>(r.stats.elapsed).count()}};
}

}  // namespace

nlohmann::json TrainingData::diagnostics() const {
  nlohmann::json runs_json = nlohmann::json::array();
  std::size_t reaching_lb = 0;
  for (const auto& r : runs) {
    runs_json.push_back(run_json(r));
    if (r.best_size >= static_cast<std::size_t>(r.lb)) ++reaching_lb;
  }
  return {{"runs", runs_json},
          {"positives", positives},
          {"negatives", negatives},
          {"distinct_examples", examples.size()},
          {"runs_reaching_lb", reaching_lb}};
}

TrainingData collect_training_data(const TrainingPlan& plan) {
  plan.validate();
  std::vector<RunSpec> specs;
  std::int64_t graph_id = 0;
  for (int n : plan.graph_sizes) {
    for (int i = 0; i < plan.graphs_per_size; ++i, ++graph_id) {
      const std::uint64_t gseed = mix(plan.seed ^ mix(static_cast<std::uint64_t>(graph_id)));
      for (int k : plan.k_values) {
        for (int lb : plan.lb_values) specs.push_back({graph_id, static_cast<std::size_t>(n), gseed, k, lb});
      }
    }
  }
  std::vector<RunOutput> outputs(specs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < specs.size();) {
      try {
        outputs[i] = collect_run(plan, specs[i]);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int jobs = std::min<int>(plan.jobs, static_cast<int>(specs.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  TrainingData data;
  for (auto& o : outputs) {
    data.positives += o.report.positives;
    data.negatives += o.report.negatives;
    data.runs.push_back(o.report);
    data.examples.insert(data.examples.end(), o.examples.begin(), o.examples.end());
  }
  if (data.negatives == 0) {
    throw DegenerateTraceError("degenerate trace: no negative examples were recorded (" +
                               std::to_string(data.positives) + " positives over " +
                               std::to_string(data.runs.size()) + " runs); diagnostics: " +
                               data.diagnostics().dump());
  }
  return data;
}

TrainResult train(const TrainingPlan& plan, const std::optional<std::filesystem::path>& model_out,
                  const std::optional<std::filesystem::path>& trace_out) {
  using Clock = std::chrono::steady_clock;
  TrainResult out;
  const auto t0 = Clock::now();
  out.data = collect_training_data(plan);
  const auto t1 = Clock::now();
  out.collect_time = t1 - t0;
  if (trace_out) write_trace(out.data.examples, *trace_out);
  const MilpProblem problem = encode_milp(out.data.examples, 1);
  LearnResult learned = solve(problem, plan.solver_budget, plan.seed);
  out.solve_time = Clock::now() - t1;
  out.model = std::move(learned.model);
  out.report = learned.report;
  auto& meta = out.model.meta();
  meta["plan"] = to_json(plan);
  meta["random_graph_model"] = {{"model", "G(n, p)"}, {"edge_probability", plan.edge_probability}};
  meta["training"] = out.data.diagnostics();
  meta["collect_ms"] = std::chrono::duration<double, std::milli>(out.collect_time).count();
  meta["solve_ms"] = std::chrono::duration<double, std::milli>(out.solve_time).count();
  if (trace_out) meta["trace_files"] = {trace_out->string()};
  if (model_out) save_model(out.model, *model_out);
  return out;
}

SearchResult learned_search(const Graph& g, int k, int lb, std::chrono::nanoseconds time_limit,
                            std::shared_ptr<const ConstraintModel> model) {
  if (!model) throw ContractViolation("learned_search: no model");
  check_feature_schema(*model);
  SearchConfig cfg;
  cfg.k = k;
  cfg.lb = lb;
  cfg.time_limit = time_limit;
  cfg.bound = BoundKind::learned;
  cfg.model = std::move(model);
  return search(g, cfg);
}

}  // namespace kplex
