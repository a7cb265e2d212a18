#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "kplex/features.hpp"
#include "kplex/graph.hpp"

namespace kplex {

class ConstraintModel;

/// True iff every v in s has at least |s| - k neighbours inside s.
bool is_kplex(const Graph& g, std::span<const VertexId> s, int k);

/// Average degree of u's neighbours, kept as an exact fraction so that
/// comparisons during branch selection are tie-exact.
struct BranchScore {
  std::uint64_t num = 0;  // sum of neighbour degrees
  std::uint64_t den = 0;  // deg(u); 0 encodes an isolated vertex (score 0)

  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

  friend std::strong_ordering operator<=>(const BranchScore& a, const BranchScore& b) {
    // a.num/a.den vs b.num/b.den with 0/0 treated as 0.
    const unsigned __int128 lhs = static_cast<unsigned __int128>(a.num) * (b.den == 0 ? 1 : b.den);
    const unsigned __int128 rhs = static_cast<unsigned __int128>(b.num) * (a.den == 0 ? 1 : a.den);
    return lhs <=> rhs;
  }
  friend bool operator==(const BranchScore& a, const BranchScore& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }
};

BranchScore branch_score(const Graph& g, VertexId u);

/// Search node: V_S (partial solution), V_A (candidates) and the running
/// degree aggregates the bounds and features read.
///
/// All mutations are recorded on an undo trail; rollback(mark) restores the
/// exact earlier state. V_A is a sparse set, so drops must be undone in LIFO
/// order, which the trail guarantees.
class SearchState {
 public:
  using Mark = std::size_t;

  /// Starts at V_S = {}, V_A = V(g). With track_va_degrees the per-vertex
  /// |N(v) ∩ V_A| counts are maintained too (needed by the familiarity bound).
  SearchState(const Graph& g, int k, bool track_va_degrees = true);

  const Graph& graph() const { return *g_; }
  int k() const { return k_; }

  std::span<const VertexId> vs() const { return vs_; }
  std::span<const VertexId> va() const { return {items_.data(), va_size_}; }
  std::size_t vs_size() const { return vs_.size(); }
  std::size_t va_size() const { return va_size_; }
  bool in_vs(VertexId v) const { return in_vs_[v] != 0; }
  bool in_va(VertexId v) const { return pos_[v] < va_size_; }

  /// |N(v) ∩ V_S| for any vertex v.
  std::uint32_t deg_in_vs(VertexId v) const { return deg_vs_[v]; }
  /// |N(v) ∩ V_A|; requires track_va_degrees.
  std::uint32_t deg_in_va(VertexId v) const { return deg_va_[v]; }
  bool tracks_va_degrees() const { return track_va_; }

  std::uint64_t sum_deg_in_vs() const { return sum_deg_vs_; }
  std::uint64_t inter_edge_total() const { return inter_edges_; }
  std::uint32_t max_deg_in_vs() const { return max_deg_vs_; }
  /// max over V_A of |N(v) ∩ V_A| (0 when V_A is empty). O(|V_A|).
  std::uint32_t max_deg_in_va() const;

  /// Whether V_S ∪ {v} is still a k-plex (v must not be in V_S).
  bool can_add(VertexId v) const;

  Mark mark() const { return trail_.size(); }
  void include(VertexId u);  // moves u from V_A into V_S
  void drop(VertexId v);     // removes v from V_A
  /// Drops every candidate that would break the k-plex property.
  void filter_candidates();
  void rollback(Mark m);

  /// Recomputes every aggregate from the adjacency lists and compares.
  bool consistent() const;

 private:
  struct Op {
    VertexId v;
    std::uint32_t saved_max;
    bool include;
  };

  bool adj(VertexId a, VertexId b) const;
  void remove_from_va(VertexId v);
  void restore_to_va(VertexId v);
  void undo_include(const Op& op);

  const Graph* g_;
  int k_;
  bool track_va_;
  std::vector<std::uint64_t> matrix_;  // dense adjacency rows when small enough
  std::size_t row_words_ = 0;

  std::vector<VertexId> vs_;
  std::vector<VertexId> items_;  // V_A occupies [0, va_size_)
  std::vector<std::uint32_t> pos_;
  std::size_t va_size_ = 0;
  std::vector<char> in_vs_;
  std::vector<std::uint32_t> deg_vs_;
  std::vector<std::uint32_t> deg_va_;
  std::uint64_t sum_deg_vs_ = 0;
  std::uint64_t inter_edges_ = 0;
  std::uint32_t max_deg_vs_ = 0;
  std::vector<Op> trail_;
  std::vector<VertexId> scratch_;
};

/// V_A if V_S is empty: max branch_score; otherwise most neighbours in V_S.
/// Ties go to the smallest id. `scores` may hold precomputed branch scores.
VertexId select_branch_vertex(const SearchState& st, std::span<const BranchScore> scores = {});

enum class BoundKind { none, familiarity, learned };

enum class Collect {
  improving,  // each solution that beats the incumbent
  maximum,    // every solution of the final best size
  all         // every visited V_S with |V_S| >= lb
};

struct SearchConfig {
  int k = 1;
  int lb = 1;
  /// Zero means no limit.
  std::chrono::nanoseconds time_limit{0};
  BoundKind bound = BoundKind::familiarity;
  std::shared_ptr<const ConstraintModel> model;  // when bound == learned
  bool record_trace = false;
  Collect collect = Collect::improving;
  std::int64_t graph_id = 0;  // stamped into trace metadata
  std::uint64_t node_limit = 0;  // zero means none; deterministic budget
  /// Streams examples instead of collecting them in SearchResult::trace.
  std::function<void(const Example&)> trace_sink;
  /// Called on every pruned child state, before it is rolled back.
  std::function<void(const SearchState&)> on_prune;
};

/// Familiarity test for a child state: prune (true) iff for every target
/// size p in [max(lb, |V_S|+1), ub] the averaged-degree estimate of a
/// p-vertex extension stays below p - k - 1. An empty range prunes.
bool familiarity_bound(const SearchState& st, const SearchConfig& cfg, std::int64_t ub);

/// Same decision from the raw aggregates (exposed for tests).
bool familiarity_prunes(std::int64_t vs_size, std::int64_t sum_deg_vs, std::int64_t inter_edges,
                        std::int64_t max_deg_va, std::int64_t k, std::int64_t lb, std::int64_t ub);

struct Solution {
  std::vector<VertexId> vertices;  // sorted internal ids of the searched graph
  std::size_t size = 0;
  std::chrono::nanoseconds found_at{0};
};

struct SearchStats {
  std::uint64_t nodes = 0;        // expanded nodes
  std::uint64_t bound_calls = 0;  // child states evaluated
  std::uint64_t bound_prunes = 0;
  std::chrono::nanoseconds elapsed{0};
  bool timed_out = false;
  bool node_limited = false;
};

struct SearchResult {
  std::optional<Solution> best;
  std::vector<Solution> all;
  std::optional<std::vector<Example>> trace;
  SearchStats stats;
};

/// Anytime branch-and-bound over g (expected to be preprocessed). Binary
/// include/exclude branching on the selected vertex.
SearchResult search(const Graph& g, const SearchConfig& cfg);

/// {size, vertices (labels of g), elapsed_ms}. A missing solution is size 0.
nlohmann::json solution_json(const Graph& g, const std::optional<Solution>& s,
                             std::chrono::nanoseconds elapsed);

}  // namespace kplex
