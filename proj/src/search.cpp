#include "kplex/search.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

#include "kplex/model.hpp"
#include "kplex/trace.hpp"

namespace kplex {

bool is_kplex(const Graph& g, std::span<const VertexId> s, int k) {
  const std::size_t n = g.vertex_count();
  std::vector<char> member(n, 0);
  for (VertexId v : s) {
    if (v >= n) throw ContractViolation("is_kplex: vertex id out of range");
    member[v] = 1;
  }
  const auto need = static_cast<std::int64_t>(s.size()) - k;
  for (VertexId v : s) {
    std::int64_t inside = 0;
    for (VertexId w : g.neighbors(v)) inside += member[w];
    if (inside < need) return false;
  }
  return true;
}

BranchScore branch_score(const Graph& g, VertexId u) {
  if (u >= g.vertex_count()) throw ContractViolation("branch_score: vertex id out of range");
  BranchScore s;
  for (VertexId v : g.neighbors(u)) s.num += g.degree(v);
  s.den = g.degree(u);
  return s;
}

// ---------------------------------------------------------------------------
// SearchState

namespace {
constexpr std::size_t kDenseMatrixLimit = 16384;
}

SearchState::SearchState(const Graph& g, int k, bool track_va_degrees)
    : g_(&g), k_(k), track_va_(track_va_degrees) {
  if (k < 1) throw ContractViolation("k must be >= 1");
  const std::size_t n = g.vertex_count();
  if (n >= std::numeric_limits<std::uint32_t>::max()) {
    throw ContractViolation("graph too large for 32-bit vertex ids");
  }
  items_.resize(n);
  pos_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    items_[v] = static_cast<VertexId>(v);
    pos_[v] = static_cast<std::uint32_t>(v);
  }
  va_size_ = n;
  in_vs_.assign(n, 0);
  deg_vs_.assign(n, 0);
  if (track_va_) {
    deg_va_.resize(n);
    for (VertexId v = 0; v < n; ++v) deg_va_[v] = static_cast<std::uint32_t>(g.degree(v));
  }
  if (n <= kDenseMatrixLimit) {
    row_words_ = (n + 63) / 64;
    matrix_.assign(n * row_words_, 0);
    for (VertexId v = 0; v < n; ++v) {
      for (VertexId w : g.neighbors(v)) matrix_[v * row_words_ + (w >> 6)] |= std::uint64_t{1} << (w & 63);
    }
  }
  vs_.reserve(n);
  trail_.reserve(2 * n);
}

bool SearchState::adj(VertexId a, VertexId b) const {
  KPLEX_COUNT_READ();
  if (row_words_ != 0) return (matrix_[a * row_words_ + (b >> 6)] >> (b & 63)) & 1U;
  return g_->adjacent(a, b);
}

std::uint32_t SearchState::max_deg_in_va() const {
  assert(track_va_);
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < va_size_; ++i) m = std::max(m, deg_va_[items_[i]]);
  return m;
}

bool SearchState::can_add(VertexId v) const {
  const auto s = static_cast<std::int64_t>(vs_.size());
  if (static_cast<std::int64_t>(deg_vs_[v]) < s + 1 - k_) return false;
  for (VertexId w : vs_) {
    // w is saturated when it already misses k members (itself included).
    if (static_cast<std::int64_t>(deg_vs_[w]) == s - k_ && !adj(v, w)) return false;
  }
  return true;
}

void SearchState::remove_from_va(VertexId v) {
  const std::uint32_t p = pos_[v];
  const VertexId last = items_[va_size_ - 1];
  items_[p] = last;
  pos_[last] = p;
  items_[va_size_ - 1] = v;
  pos_[v] = static_cast<std::uint32_t>(va_size_ - 1);
  --va_size_;
  inter_edges_ -= deg_vs_[v];
  if (track_va_) {
    for (VertexId w : g_->neighbors(v)) --deg_va_[w];
  }
}

void SearchState::restore_to_va(VertexId v) {
  assert(items_[va_size_] == v);
  (void)v;
  ++va_size_;
  inter_edges_ += deg_vs_[v];
  if (track_va_) {
    for (VertexId w : g_->neighbors(v)) ++deg_va_[w];
  }
}

void SearchState::include(VertexId u) {
  assert(in_va(u));
  remove_from_va(u);
  const std::uint32_t saved = max_deg_vs_;
  std::uint32_t new_max = max_deg_vs_;
  std::uint64_t to_va = 0;
  for (VertexId w : g_->neighbors(u)) {
    ++deg_vs_[w];
    if (in_va(w)) {
      ++to_va;
    } else if (in_vs_[w]) {
      new_max = std::max(new_max, deg_vs_[w]);
    }
  }
  new_max = std::max(new_max, deg_vs_[u]);
  sum_deg_vs_ += 2ULL * deg_vs_[u];
  inter_edges_ += to_va;
  vs_.push_back(u);
  in_vs_[u] = 1;
  max_deg_vs_ = new_max;
  trail_.push_back({u, saved, true});
}

void SearchState::undo_include(const Op& op) {
  const VertexId u = op.v;
  vs_.pop_back();
  in_vs_[u] = 0;
  std::uint64_t to_va = 0;
  for (VertexId w : g_->neighbors(u)) {
    --deg_vs_[w];
    if (in_va(w)) ++to_va;
  }
  sum_deg_vs_ -= 2ULL * deg_vs_[u];
  inter_edges_ -= to_va;
  max_deg_vs_ = op.saved_max;
  restore_to_va(u);
}

void SearchState::drop(VertexId v) {
  assert(in_va(v));
  remove_from_va(v);
  trail_.push_back({v, 0, false});
}

void SearchState::filter_candidates() {
  const auto s = static_cast<std::int64_t>(vs_.size());
  scratch_.clear();
  for (VertexId w : vs_) {
    if (static_cast<std::int64_t>(deg_vs_[w]) == s - k_) scratch_.push_back(w);
  }
  const std::int64_t need = s + 1 - k_;
  // Iterate backwards: dropping swaps the victim past the active end, and
  // every element at a lower index is still unvisited.
  for (std::size_t i = va_size_; i-- > 0;) {
    const VertexId v = items_[i];
    bool ok = static_cast<std::int64_t>(deg_vs_[v]) >= need;
    if (ok) {
      for (VertexId w : scratch_) {
        if (!adj(v, w)) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) drop(v);
  }
}

void SearchState::rollback(Mark m) {
  while (trail_.size() > m) {
    const Op op = trail_.back();
    trail_.pop_back();
    if (op.include) {
      undo_include(op);
    } else {
      restore_to_va(op.v);
    }
  }
}

bool SearchState::consistent() const {
  const std::size_t n = g_->vertex_count();
  std::uint64_t sum = 0, inter = 0;
  std::uint32_t mx = 0;
  for (VertexId v = 0; v < n; ++v) {
    if (in_vs_[v] && in_va(v)) return false;
    std::uint32_t dvs = 0, dva = 0;
    for (VertexId w : g_->neighbors(v)) {
      dvs += in_vs_[w] ? 1U : 0U;
      dva += in_va(w) ? 1U : 0U;
    }
    if (dvs != deg_vs_[v]) return false;
    if (track_va_ && dva != deg_va_[v]) return false;
    if (in_vs_[v]) {
      sum += dvs;
      inter += dva;
      mx = std::max(mx, dvs);
    }
  }
  return sum == sum_deg_vs_ && inter == inter_edges_ && mx == max_deg_vs_;
}

VertexId select_branch_vertex(const SearchState& st, std::span<const BranchScore> scores) {
  auto va = st.va();
  if (va.empty()) throw ContractViolation("select_branch_vertex: empty candidate set");
  VertexId best = va[0];
  if (st.vs_size() == 0) {
    auto score = [&](VertexId v) {
      return scores.empty() ? branch_score(st.graph(), v) : scores[v];
    };
    BranchScore best_score = score(best);
    for (VertexId v : va.subspan(1)) {
      const BranchScore sc = score(v);
      const auto cmp = sc <=> best_score;
      if (cmp > 0 || (cmp == 0 && v < best)) {
        best = v;
        best_score = sc;
      }
    }
  } else {
    std::uint32_t best_deg = st.deg_in_vs(best);
    for (VertexId v : va.subspan(1)) {
      const std::uint32_t d = st.deg_in_vs(v);
      if (d > best_deg || (d == best_deg && v < best)) {
        best = v;
        best_deg = d;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Familiarity bound

bool familiarity_prunes(std::int64_t vs_size, std::int64_t sum_deg_vs, std::int64_t inter_edges,
                        std::int64_t max_deg_va, std::int64_t k, std::int64_t lb, std::int64_t ub) {
  const std::int64_t lo = std::max<std::int64_t>({lb, vs_size + 1, 1});
  if (ub < lo) return true;
  // Scaled by p > 0: prune at p iff f(p) = p(p-k-1) - (p-|V_S|)m - (sum + 2 inter) > 0.
  // f is a convex quadratic in p, so its minimum over the integers of
  // [lo, ub] sits at the clamped floor or ceiling of its vertex (k+1+m)/2.
  const std::int64_t fixed = sum_deg_vs + 2 * inter_edges;
  auto f = [&](std::int64_t p) { return p * (p - k - 1) - (p - vs_size) * max_deg_va - fixed; };
  const std::int64_t b = k + 1 + max_deg_va;
  const std::int64_t p_lo = std::clamp(b / 2, lo, ub);
  const std::int64_t p_hi = std::clamp((b + 1) / 2, lo, ub);
  return f(p_lo) > 0 && f(p_hi) > 0;
}

bool familiarity_bound(const SearchState& st, const SearchConfig& cfg, std::int64_t ub) {
  if (ub < static_cast<std::int64_t>(st.vs_size())) {
    throw ContractViolation("familiarity_bound: ub below |V_S|");
  }
  const std::int64_t max_va = st.va_size() == 0 ? 0 : st.max_deg_in_va();
  return familiarity_prunes(static_cast<std::int64_t>(st.vs_size()),
                            static_cast<std::int64_t>(st.sum_deg_in_vs()),
                            static_cast<std::int64_t>(st.inter_edge_total()), max_va, cfg.k, cfg.lb,
                            ub);
}

// ---------------------------------------------------------------------------
// Search

namespace {

class Searcher {
 public:
  Searcher(const Graph& g, const SearchConfig& cfg)
      : g_(g),
        cfg_(cfg),
        state_(g, cfg.k, cfg.bound == BoundKind::familiarity),
        ctx_(FeatureContext::make(g, cfg.k, cfg.lb)),
        want_features_(cfg.record_trace || cfg.bound == BoundKind::learned) {
    if (cfg.lb < 1) throw ContractViolation("lb must be >= 1");
    if (cfg.bound == BoundKind::learned && !cfg.model) {
      throw ContractViolation("learned bound requested without a model");
    }
    scores_.resize(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) scores_[v] = branch_score(g, v);
    if (cfg.record_trace && !cfg.trace_sink) result_.trace.emplace();
  }

  SearchResult run() {
    start_ = Clock::now();
    if (cfg_.time_limit.count() > 0) deadline_ = start_ + cfg_.time_limit;
    expand();
    result_.stats.elapsed = Clock::now() - start_;
    if (cfg_.collect == Collect::maximum && result_.best) {
      std::erase_if(result_.all, [&](const Solution& s) { return s.size != result_.best->size; });
    }
    return std::move(result_);
  }

 private:
  using Clock = std::chrono::steady_clock;

  bool out_of_budget() {
    if (stop_) return true;
    ++steps_;
    if (cfg_.node_limit != 0 && result_.stats.nodes >= cfg_.node_limit) {
      result_.stats.node_limited = true;
      stop_ = true;
    } else if (deadline_ && (steps_ & 1023) == 0 && Clock::now() >= *deadline_) {
      result_.stats.timed_out = true;
      stop_ = true;
    }
    return stop_;
  }

  void record_solution() {
    const std::size_t size = state_.vs_size();
    const bool improves = !result_.best || size > result_.best->size;
    const bool want = improves || cfg_.collect == Collect::all ||
                      (cfg_.collect == Collect::maximum && size == result_.best->size);
    if (!want) return;
    Solution s;
    s.vertices.assign(state_.vs().begin(), state_.vs().end());
    std::sort(s.vertices.begin(), s.vertices.end());
    s.size = size;
    s.found_at = Clock::now() - start_;
    if (cfg_.collect == Collect::maximum && improves) result_.all.clear();
    result_.all.push_back(s);
    if (improves) result_.best = std::move(s);
  }

  bool evaluate_bound() {
    auto& st = result_.stats;
    ++st.bound_calls;
    FeatureVector f{};
    if (want_features_) f = extract_features(ctx_, state_);
    bool prune = false;
    switch (cfg_.bound) {
      case BoundKind::none:
        break;
      case BoundKind::familiarity:
        prune = familiarity_bound(state_, cfg_,
                                  static_cast<std::int64_t>(state_.vs_size() + state_.va_size()));
        break;
      case BoundKind::learned:
        prune = model_bounds(*cfg_.model, f);
        break;
    }
    if (cfg_.record_trace) {
      Example e;
      e.features = f;
      e.label = !prune;
      e.meta = {cfg_.graph_id, cfg_.k, cfg_.lb, st.bound_calls - 1};
      if (cfg_.trace_sink) {
        cfg_.trace_sink(e);
      } else {
        result_.trace->push_back(e);
      }
    }
    if (prune) {
      ++st.bound_prunes;
      if (cfg_.on_prune) cfg_.on_prune(state_);
    }
    return prune;
  }

  void expand() {
    ++result_.stats.nodes;
    while (state_.va_size() > 0) {
      if (out_of_budget()) return;
      const VertexId u = select_branch_vertex(state_, scores_);
      const auto m = state_.mark();
      state_.include(u);
      state_.filter_candidates();
      assert(state_.consistent());
      if (static_cast<std::int64_t>(state_.vs_size()) >= cfg_.lb) record_solution();
      if (!evaluate_bound()) expand();
      state_.rollback(m);
      state_.drop(u);
    }
  }

  const Graph& g_;
  const SearchConfig& cfg_;
  SearchState state_;
  FeatureContext ctx_;
  bool want_features_;
  std::vector<BranchScore> scores_;
  SearchResult result_;
  Clock::time_point start_;
  std::optional<Clock::time_point> deadline_;
  std::uint64_t steps_ = 0;
  bool stop_ = false;
};

}  // namespace

SearchResult search(const Graph& g, const SearchConfig& cfg) {
  Searcher s(g, cfg);
  return s.run();
}

nlohmann::json solution_json(const Graph& g, const std::optional<Solution>& s,
                             std::chrono::nanoseconds elapsed) {
  nlohmann::json vertices = nlohmann::json::array();
  std::size_t size = 0;
  if (s) {
    size = s->size;
    for (VertexId v : s->vertices) vertices.push_back(g.label(v));
  }
  const double ms = std::chrono::duration<double, std::milli>(elapsed).count();
  return {{"size", size}, {"vertices", vertices}, {"elapsed_ms", ms}};
}

}  // namespace kplex
