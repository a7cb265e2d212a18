// kplex: maximum k-plex search with a learned bound.
#include <chrono>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "kplex/bench.hpp"
#include "kplex/graph.hpp"
#include "kplex/milp.hpp"
#include "kplex/model.hpp"
#include "kplex/pipeline.hpp"
#include "kplex/preprocess.hpp"
#include "kplex/search.hpp"
#include "kplex/trace.hpp"

namespace {

using namespace kplex;
using Ms = std::chrono::duration<double, std::milli>;

std::chrono::nanoseconds seconds(double s) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::duration<double>(s));
}

void print(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

struct SolveArgs {
  std::string graph;
  int k = 1;
  int lb = 1;
  double time_limit = 0;
  std::string strategy = "basic";
  std::string model;
  std::string trace_out;
};

int run_solve(const SolveArgs& a) {
  const Strategy strategy = strategy_from_string(a.strategy);
  std::shared_ptr<const ConstraintModel> model;
  if (strategy == Strategy::learned) {
    if (a.model.empty()) throw std::invalid_argument("--strategy learned requires --model");
    model = std::make_shared<ConstraintModel>(load_model(a.model));
    check_feature_schema(*model);
  }
  const Graph g = load_edge_list(a.graph);
  const auto t0 = std::chrono::steady_clock::now();
  const PreprocessReport pre = preprocess(g, {a.k, a.lb});
  const auto preprocess_time = std::chrono::steady_clock::now() - t0;

  SearchConfig cfg;
  cfg.k = a.k;
  cfg.lb = a.lb;
  cfg.time_limit = seconds(a.time_limit);
  cfg.bound = strategy == Strategy::basic     ? BoundKind::familiarity
              : strategy == Strategy::learned ? BoundKind::learned
                                              : BoundKind::none;
  cfg.model = model;
  std::optional<TraceWriter> writer;
  if (!a.trace_out.empty()) {
    writer.emplace(a.trace_out);
    cfg.record_trace = true;
    cfg.trace_sink = [&](const Example& e) { writer->write(e); };
  }
  const SearchResult r = search(pre.result, cfg);
  if (writer) writer->flush();

  nlohmann::json out = solution_json(pre.result, r.best, r.stats.elapsed);
  out["k"] = a.k;
  out["lb"] = a.lb;
  out["strategy"] = a.strategy;
  out["reduced_n"] = pre.result.vertex_count();
  out["reduced_m"] = pre.result.edge_count();
  out["preprocess_ms"] = Ms(preprocess_time).count();
  out["nodes"] = r.stats.nodes;
  out["bound_calls"] = r.stats.bound_calls;
  out["bound_prunes"] = r.stats.bound_prunes;
  out["timed_out"] = r.stats.timed_out;
  if (writer) out["trace_examples"] = writer->written();
  print(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum k-plex search with a learned bound"};
  app.require_subcommand(1);

  std::string graph_path;
  int k = 1, lb = 1;

  auto* pre = app.add_subcommand("preprocess", "Coreness and cliqueness reduction; prints a JSON report");
  pre->add_option("graph", graph_path, "Edge-list file")->required()->check(CLI::ExistingFile);
  pre->add_option("--k", k, "k of the k-plex")->required()->check(CLI::PositiveNumber);
  pre->add_option("--lb", lb, "Minimum solution size")->required()->check(CLI::PositiveNumber);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Search for a maximum k-plex; prints the best solution as JSON");
  solve_cmd->add_option("graph", sa.graph, "Edge-list file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--k", sa.k, "k of the k-plex")->required()->check(CLI::PositiveNumber);
  solve_cmd->add_option("--lb", sa.lb, "Minimum solution size")->required()->check(CLI::PositiveNumber);
  solve_cmd->add_option("--time-limit", sa.time_limit, "Seconds; 0 runs to exhaustion")
      ->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--strategy", sa.strategy, "basic, learned or none")
      ->check(CLI::IsMember({"basic", "learned", "none"}));
  solve_cmd->add_option("--model", sa.model, "Model JSON (learned strategy)")->check(CLI::ExistingFile);
  solve_cmd->add_option("--trace-out", sa.trace_out, "Append the bound decisions to this JSONL trace");

  std::string plan_path, model_out, trace_out;
  int train_jobs = 0;
  auto* train_cmd = app.add_subcommand("train", "Collect traces on random graphs and learn a bound model");
  train_cmd->add_option("--plan", plan_path, "Training plan JSON (defaults when omitted)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--model-out", model_out, "Where to write the model")->required();
  train_cmd->add_option("--trace-out", trace_out, "Also write the collected trace");
  train_cmd->add_option("--jobs", train_jobs, "Concurrent collection runs (overrides the plan)")
      ->check(CLI::PositiveNumber);

  std::string trace_in, lp_out, objective = "feasibility";
  int constraints = 1;
  double big_m = kDefaultBigM, epsilon = kDefaultEpsilon;
  auto* export_cmd = app.add_subcommand("export-lp", "Write the big-M encoding of a trace as an LP file");
  export_cmd->add_option("--trace", trace_in, "Trace JSONL")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--out", lp_out, "LP file to write")->required();
  export_cmd->add_option("--constraints", constraints, "Number of constraints")->check(CLI::PositiveNumber);
  export_cmd->add_option("--objective", objective, "feasibility or coverage")
      ->check(CLI::IsMember({"feasibility", "coverage"}));
  export_cmd->add_option("--big-m", big_m, "Big-M constant")->check(CLI::PositiveNumber);
  export_cmd->add_option("--epsilon", epsilon, "Strictness margin for negatives")->check(CLI::PositiveNumber);

  std::string model_in;
  auto* eval_cmd = app.add_subcommand("eval-model", "Replay a model on a trace");
  eval_cmd->add_option("--model", model_in, "Model JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--trace", trace_in, "Trace JSONL")->required()->check(CLI::ExistingFile);

  std::string spec_path;
  int bench_jobs = 0;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark grid and append rows to its CSV");
  bench_cmd->add_option("--spec", spec_path, "Bench spec JSON")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--jobs", bench_jobs, "Concurrent rows (overrides the spec)")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pre) {
      print(to_json(preprocess(load_edge_list(graph_path), {k, lb})));
    } else if (*solve_cmd) {
      return run_solve(sa);
    } else if (*train_cmd) {
      TrainingPlan plan = plan_path.empty() ? TrainingPlan{} : load_plan(plan_path);
      if (train_jobs > 0) plan.jobs = train_jobs;
      const TrainResult r =
          train(plan, model_out, trace_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(trace_out));
      print({{"model", model_out},
             {"mode", r.model.meta().value("mode", "")},
             {"positives", r.report.positives},
             {"negatives", r.report.negatives},
             {"negatives_covered", r.report.covered},
             {"coverage", r.report.coverage()},
             {"collect_ms", Ms(r.collect_time).count()},
             {"solve_ms", Ms(r.solve_time).count()},
             {"runs_reaching_lb", r.data.diagnostics()["runs_reaching_lb"]}});
    } else if (*export_cmd) {
      const auto examples = read_trace(trace_in);
      const MilpProblem p = encode_milp(examples, constraints, big_m, epsilon);
      export_lp(p, lp_out, objective == "coverage" ? LpObjective::coverage : LpObjective::feasibility);
      print({{"out", lp_out},
             {"rows", p.row_count()},
             {"continuous", p.continuous_vars()},
             {"binary", p.binary_vars()}});
    } else if (*eval_cmd) {
      const ConstraintModel m = load_model(model_in);
      const auto examples = read_trace(trace_in);
      const MilpProblem p = encode_milp(examples, 1);
      const CoverageReport r = evaluate_model(m, p);
      print({{"positive_violations", r.positive_violations},
             {"positives", r.positives},
             {"negatives", r.negatives},
             {"negatives_covered", r.covered},
             {"coverage", r.coverage()}});
    } else if (*bench_cmd) {
      BenchSpec spec = load_bench_spec(spec_path);
      if (bench_jobs > 0) spec.jobs = bench_jobs;
      const auto rows = run_bench(spec, &std::cerr);
      print({{"output", spec.output.string()}, {"rows_run", rows.size()}});
    }
  } catch (const ParseError& e) {
    std::cerr << "error: line " << e.line() << ": " << e.what() << '\n';
    return 1;
  } catch (const TraceError& e) {
    std::cerr << "error: trace line " << e.line() << ": " << e.what() << '\n';
    return 1;
  } catch (const LpParseError& e) {
    std::cerr << "error: line " << e.line() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
