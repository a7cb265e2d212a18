#include "kplex/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "kplex/preprocess.hpp"

namespace kplex {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::basic: return "basic";
    case Strategy::learned: return "learned";
    case Strategy::none: return "none";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "basic") return Strategy::basic;
  if (s == "learned") return Strategy::learned;
  if (s == "none") return Strategy::none;
  throw std::invalid_argument("unknown strategy \"" + s + "\" (expected basic, learned or none)");
}

void BenchSpec::validate() const {
  if (datasets.empty()) throw std::invalid_argument("bench: no datasets");
  if (k_values.empty() || lb_values.empty() || time_limits.empty() || strategies.empty()) {
    throw std::invalid_argument("bench: k_values, lb_values, time_limits and strategies must be non-empty");
  }
  for (int k : k_values) {
    if (k < 1) throw std::invalid_argument("bench: k must be positive");
  }
  for (int lb : lb_values) {
    if (lb < 1) throw std::invalid_argument("bench: lb must be positive");
  }
  for (double t : time_limits) {
    if (!(t >= 0)) throw std::invalid_argument("bench: time limits must be >= 0");
  }
  if (jobs < 1 || repeats < 1) throw std::invalid_argument("bench: jobs and repeats must be positive");
  if (std::find(strategies.begin(), strategies.end(), Strategy::learned) != strategies.end() && !model_path) {
    throw std::invalid_argument("bench: strategy \"learned\" requires model_path");
  }
}

BenchSpec bench_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw std::invalid_argument("bench spec must be a JSON object");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
  };
  BenchSpec s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "datasets") {
        s.datasets.clear();
        for (const auto& d : v) s.datasets.push_back(resolve(d.get<std::string>()));
      } else if (key == "k_values") {
        s.k_values = v.get<std::vector<int>>();
      } else if (key == "lb_values") {
        s.lb_values = v.get<std::vector<int>>();
      } else if (key == "time_limits") {
        s.time_limits = v.get<std::vector<double>>();
      } else if (key == "strategies") {
        s.strategies.clear();
        for (const auto& x : v) s.strategies.push_back(strategy_from_string(x.get<std::string>()));
      } else if (key == "model_path") {
        if (!v.is_null()) s.model_path = resolve(v.get<std::string>());
      } else if (key == "output") {
        s.output = resolve(v.get<std::string>());
      } else if (key == "seed") {
        s.seed = v.get<std::uint64_t>();
      } else if (key == "jobs") {
        s.jobs = v.get<int>();
      } else if (key == "repeats") {
        s.repeats = v.get<int>();
      } else if (key == "accuracy_vertex_limit") {
        s.accuracy_vertex_limit = v.get<std::size_t>();
      } else {
        throw std::invalid_argument("bench: unknown key \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bench: ") + e.what());
  }
  s.validate();
  return s;
}

BenchSpec load_bench_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read bench spec: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("bench spec is not valid JSON: ") + e.what());
  }
  return bench_spec_from_json(j, path.parent_path());
}

const std::vector<std::string>& bench_columns() {
  static const std::vector<std::string> cols = {
      "dataset",   "k",           "lb",          "time_limit_s", "strategy",     "n",
      "m",         "reduced_n",   "reduced_m",   "best_size",    "wall_ms",      "preprocess_ms",
      "nodes",     "bound_calls", "bound_prunes", "timed_out",   "accuracy",     "wrong_prunes"};
  return cols;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

using RowKey = std::tuple<std::string, std::string, std::string, std::string, std::string>;

RowKey key_of(const std::string& dataset, int k, int lb, double t, Strategy s) {
  return {dataset, std::to_string(k), std::to_string(lb), fmt(t), to_string(s)};
}

std::set<RowKey> completed_rows(const std::filesystem::path& path) {
  std::set<RowKey> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != bench_columns().size()) continue;  // torn line from an interrupted run
    done.insert({f[0], f[1], f[2], f[3], f[4]});
  }
  return done;
}

struct Task {
  std::size_t dataset;
  int k;
  int lb;
  double time_limit;
  Strategy strategy;
};

}  // namespace

std::string csv_line(const BenchRow& r) {
  std::ostringstream o;
  o << quote(r.dataset) << ',' << r.k << ',' << r.lb << ',' << fmt(r.time_limit) << ','
    << to_string(r.strategy) << ',' << r.n << ',' << r.m << ',' << r.reduced_n << ',' << r.reduced_m << ','
    << r.best_size << ',' << fmt(r.wall_ms) << ',' << fmt(r.preprocess_ms) << ',' << r.nodes << ','
    << r.bound_calls << ',' << r.bound_prunes << ',' << (r.timed_out ? 1 : 0) << ','
    << (r.accuracy ? fmt(*r.accuracy) : "") << ',' << (r.wrong_prunes ? std::to_string(*r.wrong_prunes) : "");
  return o.str();
}

AccuracyReport bound_accuracy(const Graph& g, const SearchConfig& cfg) {
  AccuracyReport rep;
  const std::size_t words = (g.vertex_count() + 63) / 64;
  SearchConfig ref;
  ref.k = cfg.k;
  ref.lb = cfg.lb;
  ref.bound = BoundKind::none;
  ref.collect = Collect::maximum;
  const SearchResult reference = search(g, ref);
  std::vector<std::vector<std::uint64_t>> maxima;
  for (const auto& s : reference.all) {
    std::vector<std::uint64_t> bits(words, 0);
    for (VertexId v : s.vertices) bits[v >> 6] |= std::uint64_t{1} << (v & 63);
    maxima.push_back(std::move(bits));
  }
  rep.maximum_size = reference.best ? reference.best->size : 0;
  rep.maximum_solutions = maxima.size();

  SearchConfig run = cfg;
  run.time_limit = std::chrono::nanoseconds(0);
  run.node_limit = 0;
  run.record_trace = false;
  std::vector<std::uint64_t> vs(words), reach(words);
  run.on_prune = [&](const SearchState& st) {
    ++rep.prunes;
    std::fill(vs.begin(), vs.end(), 0);
    for (VertexId v : st.vs()) vs[v >> 6] |= std::uint64_t{1} << (v & 63);
    reach = vs;
    for (VertexId v : st.va()) reach[v >> 6] |= std::uint64_t{1} << (v & 63);
    // Only a strictly larger maximum solution can be lost; V_S itself was recorded.
    if (rep.maximum_size <= st.vs_size()) return;
    for (const auto& s : maxima) {
      bool inside = true;
      for (std::size_t w = 0; w < words && inside; ++w) {
        inside = (vs[w] & ~s[w]) == 0 && (s[w] & ~reach[w]) == 0;
      }
      if (inside) {
        ++rep.wrong;
        break;
      }
    }
  };
  search(g, run);
  return rep;
}

std::vector<BenchRow> run_bench(const BenchSpec& spec, std::ostream* log) {
  spec.validate();
  std::shared_ptr<const ConstraintModel> model;
  if (std::find(spec.strategies.begin(), spec.strategies.end(), Strategy::learned) != spec.strategies.end()) {
    if (!std::filesystem::exists(*spec.model_path)) {
      throw std::runtime_error("bench: model not found: " + spec.model_path->string());
    }
    model = std::make_shared<const ConstraintModel>(load_model(*spec.model_path));
    check_feature_schema(*model);
  }
  for (const auto& d : spec.datasets) {
    if (!std::filesystem::exists(d)) throw std::runtime_error("bench: dataset not found: " + d.string());
  }

  const std::set<RowKey> done = completed_rows(spec.output);
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < spec.datasets.size(); ++d) {
    for (int k : spec.k_values) {
      for (int lb : spec.lb_values) {
        for (double t : spec.time_limits) {
          for (Strategy s : spec.strategies) {
            if (done.count(key_of(spec.datasets[d].string(), k, lb, t, s))) continue;
            tasks.push_back({d, k, lb, t, s});
          }
        }
      }
    }
  }

  const bool fresh = !std::filesystem::exists(spec.output) || std::filesystem::file_size(spec.output) == 0;
  bool torn_tail = false;
  if (!fresh) {
    std::ifstream tail(spec.output, std::ios::binary);
    tail.seekg(-1, std::ios::end);
    torn_tail = tail.get() != '\n';
  }
  std::ofstream out(spec.output, std::ios::app);
  if (torn_tail) out << '\n';
  if (!out) throw std::runtime_error("bench: cannot write " + spec.output.string());
  if (fresh) {
    const auto& cols = bench_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n' << std::flush;
  }

  // Graphs load lazily, once per dataset.
  std::vector<std::optional<Graph>> graphs(spec.datasets.size());
  std::vector<std::once_flag> loaded(spec.datasets.size());
  std::mutex out_mu;
  std::vector<BenchRow> rows;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;

  auto run_task = [&](const Task& t) {
    std::call_once(loaded[t.dataset], [&] { graphs[t.dataset] = load_edge_list(spec.datasets[t.dataset]); });
    const Graph& g = *graphs[t.dataset];
    BenchRow row;
    row.dataset = spec.datasets[t.dataset].string();
    row.k = t.k;
    row.lb = t.lb;
    row.time_limit = t.time_limit;
    row.strategy = t.strategy;
    row.n = g.vertex_count();
    row.m = g.edge_count();
    const auto p0 = std::chrono::steady_clock::now();
    const PreprocessReport pre = preprocess(g, {t.k, t.lb});
    row.preprocess_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - p0).count();
    row.reduced_n = pre.result.vertex_count();
    row.reduced_m = pre.result.edge_count();

    SearchConfig cfg;
    cfg.k = t.k;
    cfg.lb = t.lb;
    cfg.time_limit = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::duration<double>(t.time_limit));
    cfg.bound = t.strategy == Strategy::basic     ? BoundKind::familiarity
                : t.strategy == Strategy::learned ? BoundKind::learned
                                                  : BoundKind::none;
    cfg.model = model;
    std::vector<double> walls;
    SearchResult res;
    for (int r = 0; r < spec.repeats; ++r) {
      res = search(pre.result, cfg);
      walls.push_back(std::chrono::duration<double, std::milli>(res.stats.elapsed).count());
    }
    std::sort(walls.begin(), walls.end());
    row.wall_ms = walls[walls.size() / 2];
    row.best_size = res.best ? res.best->size : 0;
    row.nodes = res.stats.nodes;
    row.bound_calls = res.stats.bound_calls;
    row.bound_prunes = res.stats.bound_prunes;
    row.timed_out = res.stats.timed_out;
    if (t.strategy == Strategy::learned && t.time_limit == 0 &&
        pre.result.vertex_count() <= spec.accuracy_vertex_limit) {
      const AccuracyReport acc = bound_accuracy(pre.result, cfg);
      row.accuracy = acc.accuracy();
      row.wrong_prunes = acc.wrong;
    }
    std::lock_guard lock(out_mu);
    out << csv_line(row) << '\n' << std::flush;
    if (log) *log << csv_line(row) << '\n';
    rows.push_back(std::move(row));
  };

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      try {
        run_task(tasks[i]);
      } catch (...) {
        std::lock_guard lock(out_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int jobs = std::min<int>(spec.jobs, std::max<int>(1, static_cast<int>(tasks.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

}  // namespace kplex
