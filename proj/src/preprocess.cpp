#include "kplex/preprocess.hpp"

#include <algorithm>
#include <bit>
#include <deque>

namespace kplex {

std::vector<VertexId> core_vertices(const Graph& g, int min_degree) {
  const std::size_t n = g.vertex_count();
  std::vector<VertexId> out;
  if (min_degree <= 0) {
    out.resize(n);
    for (std::size_t v = 0; v < n; ++v) out[v] = static_cast<VertexId>(v);
    return out;
  }
  const auto need = static_cast<std::size_t>(min_degree);
  std::vector<std::size_t> deg(n);
  std::vector<char> removed(n, 0);
  std::deque<VertexId> queue;
  for (VertexId v = 0; v < n; ++v) {
    deg[v] = g.degree(v);
    if (deg[v] < need) {
      removed[v] = 1;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    for (VertexId w : g.neighbors(v)) {
      if (removed[w]) continue;
      if (--deg[w] < need) {
        removed[w] = 1;
        queue.push_back(w);
      }
    }
  }
  for (VertexId v = 0; v < n; ++v) {
    if (!removed[v]) out.push_back(v);
  }
  return out;
}

namespace {

// Dense bitset over a vertex's neighborhood, used for bounded clique search.
using Bits = std::vector<std::uint64_t>;

inline bool test(const Bits& b, std::size_t i) { return (b[i >> 6] >> (i & 63)) & 1U; }
inline void set(Bits& b, std::size_t i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }
inline void reset(Bits& b, std::size_t i) { b[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

std::size_t popcount(const Bits& b) {
  std::size_t c = 0;
  for (auto w : b) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

class CliqueFinder {
 public:
  CliqueFinder(std::size_t m, std::vector<Bits> adj) : m_(m), adj_(std::move(adj)) {}

  // Searches for a clique of `target` vertices; fills `witness` on success.
  bool find(std::size_t target, std::vector<std::size_t>& witness) {
    target_ = target;
    current_.clear();
    Bits p((m_ + 63) / 64, 0);
    for (std::size_t i = 0; i < m_; ++i) set(p, i);
    if (expand(p)) {
      witness = current_;
      return true;
    }
    return false;
  }

 private:
  // Greedy sequential colouring; order/colour are parallel arrays.
  void colour(const Bits& p, std::vector<std::size_t>& order, std::vector<std::size_t>& col) {
    Bits uncoloured = p;
    std::size_t c = 0;
    std::size_t left = popcount(p);
    while (left > 0) {
      ++c;
      Bits q = uncoloured;
      for (std::size_t wi = 0; wi < q.size(); ++wi) {
        while (q[wi] != 0) {
          const std::size_t v = wi * 64 + static_cast<std::size_t>(std::countr_zero(q[wi]));
          reset(q, v);
          reset(uncoloured, v);
          --left;
          for (std::size_t k = 0; k < q.size(); ++k) q[k] &= ~adj_[v][k];
          order.push_back(v);
          col.push_back(c);
        }
      }
    }
  }

  bool expand(Bits p) {
    if (current_.size() >= target_) return true;
    std::vector<std::size_t> order, col;
    colour(p, order, col);
    for (std::size_t idx = order.size(); idx-- > 0;) {
      if (current_.size() + col[idx] < target_) return false;
      const std::size_t v = order[idx];
      current_.push_back(v);
      Bits np(p.size());
      for (std::size_t k = 0; k < p.size(); ++k) np[k] = p[k] & adj_[v][k];
      if (expand(std::move(np))) return true;
      current_.pop_back();
      reset(p, v);
    }
    return false;
  }

  std::size_t m_;
  std::vector<Bits> adj_;
  std::size_t target_ = 0;
  std::vector<std::size_t> current_;
};

}  // namespace

std::vector<VertexId> clique_member_vertices(const Graph& g, int clique_size) {
  const std::size_t n = g.vertex_count();
  std::vector<VertexId> out;
  if (clique_size <= 1) {
    out.resize(n);
    for (std::size_t v = 0; v < n; ++v) out[v] = static_cast<VertexId>(v);
    return out;
  }
  const auto need = static_cast<std::size_t>(clique_size - 1);  // neighbours required
  std::vector<char> member(n, 0);
  std::vector<VertexId> local;
  std::vector<std::size_t> witness;

  for (VertexId v = 0; v < n; ++v) {
    if (member[v] || g.degree(v) < need) continue;
    local.clear();
    for (VertexId w : g.neighbors(v)) {
      if (g.degree(w) >= need) local.push_back(w);
    }
    if (local.size() < need) continue;

    const std::size_t m = local.size();
    std::vector<Bits> adj(m, Bits((m + 63) / 64, 0));
    for (std::size_t i = 0; i < m; ++i) {
      // Sorted-list merge against the (sorted) local array.
      auto nb = g.neighbors(local[i]);
      std::size_t a = 0, b = 0;
      while (a < nb.size() && b < m) {
        if (nb[a] < local[b]) {
          ++a;
        } else if (nb[a] > local[b]) {
          ++b;
        } else {
          set(adj[i], b);
          ++a;
          ++b;
        }
      }
    }
    CliqueFinder finder(m, std::move(adj));
    if (finder.find(need, witness)) {
      member[v] = 1;
      for (std::size_t i : witness) member[local[i]] = 1;
    }
  }
  for (VertexId v = 0; v < n; ++v) {
    if (member[v]) out.push_back(v);
  }
  return out;
}

Graph coreness_prune(const Graph& g, const PreprocessParams& p) {
  if (p.lb - p.k <= 0) return g;
  auto keep = core_vertices(g, p.lb - p.k);
  return induced_subgraph(g, keep);
}

namespace {
int ceil_div(int a, int b) { return (a + b - 1) / b; }
}  // namespace

Graph cliqueness_prune(const Graph& g, const PreprocessParams& p) {
  const int c = ceil_div(p.lb, p.k);
  if (c <= 1) return g;
  auto keep = clique_member_vertices(g, c);
  return induced_subgraph(g, keep);
}

PreprocessReport preprocess(const Graph& g, const PreprocessParams& p) {
  if (p.k < 1 || p.lb < 1) throw ContractViolation("preprocess: k and lb must be >= 1");
  PreprocessReport r;
  const std::size_t n = g.vertex_count();

  auto core = core_vertices(g, p.lb - p.k);
  Graph g_core = induced_subgraph(g, core);
  r.removed_by_coreness = n - core.size();

  auto members = clique_member_vertices(g_core, ceil_div(p.lb, p.k));
  r.removed_by_cliqueness = core.size() - members.size();
  r.kept.reserve(members.size());
  for (VertexId local : members) r.kept.push_back(core[local]);
  r.result = induced_subgraph(g_core, members);
  return r;
}

nlohmann::json to_json(const PreprocessReport& r) {
  return {{"removed_by_coreness", r.removed_by_coreness},
          {"removed_by_cliqueness", r.removed_by_cliqueness},
          {"vertices", r.result.vertex_count()},
          {"edges", r.result.edge_count()}};
}

}  // namespace kplex
