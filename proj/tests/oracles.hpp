// Slow, obviously-correct reference implementations used only by tests.
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "kplex/graph.hpp"

namespace oracle {

using kplex::Graph;
using kplex::VertexId;

inline std::vector<std::uint32_t> adjacency_masks(const Graph& g) {
  std::vector<std::uint32_t> adj(g.vertex_count(), 0);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    for (VertexId w : g.neighbors(v)) adj[v] |= 1u << w;
  }
  return adj;
}

inline bool mask_is_kplex(const std::vector<std::uint32_t>& adj, std::uint32_t s, int k) {
  const int size = std::popcount(s);
  for (std::uint32_t rest = s; rest; rest &= rest - 1) {
    const int v = std::countr_zero(rest);
    if (std::popcount(adj[v] & s) < size - k) return false;
  }
  return true;
}

/// Size of a maximum k-plex by enumerating every subset (n <= 20).
inline int max_kplex_size(const Graph& g, int k) {
  const auto adj = adjacency_masks(g);
  const std::uint32_t n = static_cast<std::uint32_t>(g.vertex_count());
  int best = 0;
  for (std::uint32_t s = 1; s < (1u << n); ++s) {
    const int size = std::popcount(s);
    if (size > best && mask_is_kplex(adj, s, k)) best = size;
  }
  return best;
}

/// Vertices lying in some k-plex of size >= lb (n <= 20).
inline std::vector<bool> kplex_members(const Graph& g, int k, int lb) {
  const auto adj = adjacency_masks(g);
  const std::uint32_t n = static_cast<std::uint32_t>(g.vertex_count());
  std::uint32_t members = 0;
  for (std::uint32_t s = 1; s < (1u << n); ++s) {
    if ((s & ~members) == 0 || std::popcount(s) < lb) continue;
    if (mask_is_kplex(adj, s, k)) members |= s;
  }
  std::vector<bool> out(n);
  for (std::uint32_t v = 0; v < n; ++v) out[v] = (members >> v) & 1u;
  return out;
}

/// Survivors of repeated full sweeps that delete every vertex of degree < d.
inline std::vector<bool> core_members(const Graph& g, int d) {
  const std::size_t n = g.vertex_count();
  std::vector<bool> alive(n, true);
  for (bool changed = true; changed;) {
    changed = false;
    for (VertexId v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      int deg = 0;
      for (VertexId w : g.neighbors(v)) deg += alive[w];
      if (deg < d) {
        alive[v] = false;
        changed = true;
      }
    }
  }
  return alive;
}

/// Vertices in some clique of exactly `size` vertices, by subset enumeration.
inline std::vector<bool> clique_members(const Graph& g, int size) {
  const auto adj = adjacency_masks(g);
  const std::uint32_t n = static_cast<std::uint32_t>(g.vertex_count());
  std::vector<bool> out(n, size <= 1);
  if (size <= 1) return out;
  for (std::uint32_t s = 1; s < (1u << n); ++s) {
    if (std::popcount(s) != size || !mask_is_kplex(adj, s, 1)) continue;
    for (std::uint32_t v = 0; v < n; ++v) {
      if ((s >> v) & 1u) out[v] = true;
    }
  }
  return out;
}

/// Familiarity decision by scanning every target size p and comparing the
/// averaged degree estimate with p - k - 1 in long double.
inline bool familiarity_prunes_loop(std::int64_t vs, std::int64_t sum_vs, std::int64_t inter, std::int64_t max_va,
                                    std::int64_t k, std::int64_t lb, std::int64_t ub) {
  std::int64_t lo = std::max(lb, vs + 1);
  if (lo < 1) lo = 1;
  for (std::int64_t p = lo; p <= ub; ++p) {
    const long double estimate =
        (static_cast<long double>(sum_vs) + 2.0L * inter + static_cast<long double>(p - vs) * max_va) / p;
    if (estimate >= static_cast<long double>(p - k - 1)) return false;
  }
  return true;
}

/// G(n, p) built with an independent generator, for test inputs.
inline Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937 rng(static_cast<std::uint32_t>(seed * 2654435761u + 12345u));
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = u + 1; v < n; ++v) {
      if (coin(rng)) edges.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, edges);
}

inline Graph from_pairs(std::size_t n, std::initializer_list<std::pair<VertexId, VertexId>> e) {
  std::vector<std::pair<VertexId, VertexId>> edges(e);
  return Graph::from_edges(n, edges);
}

inline Graph complete(std::size_t n) {
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  }
  return Graph::from_edges(n, edges);
}

}  // namespace oracle
