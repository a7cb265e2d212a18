#pragma once

#include "json.hpp"

#include "kplex/graph.hpp"

namespace kplex {

struct PreprocessParams {
  int k = 1;   // k of k-plex, >= 1
  int lb = 1;  // required minimum solution size, >= 1
};

struct PreprocessReport {
  std::size_t removed_by_coreness = 0;
  std::size_t removed_by_cliqueness = 0;
  Graph result;
  // Ids of the surviving vertices in the input graph, ascending.
  std::vector<VertexId> kept;
};

/// (lb-k)-core of g via bucket-queue peeling. Returns g unchanged when lb-k <= 0.
Graph coreness_prune(const Graph& g, const PreprocessParams& p);

/// Keeps the vertices that lie in at least one clique of size ceil(lb/k).
Graph cliqueness_prune(const Graph& g, const PreprocessParams& p);

/// Coreness then cliqueness (cliqueness tested in the core), one pass each.
PreprocessReport preprocess(const Graph& g, const PreprocessParams& p);

/// Vertex ids (in g) that survive the respective phase.
std::vector<VertexId> core_vertices(const Graph& g, int min_degree);
std::vector<VertexId> clique_member_vertices(const Graph& g, int clique_size);

nlohmann::json to_json(const PreprocessReport& r);

}  // namespace kplex
