#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kplex {

using VertexId = std::uint32_t;

/// Raised for malformed edge-list input. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Raised when a caller breaks an API precondition (bad vertex id, size mismatch).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

#ifdef KPLEX_COUNT_ADJACENCY
/// Adjacency reads on this thread (instrumented builds only).
inline thread_local std::uint64_t adjacency_reads = 0;
#define KPLEX_COUNT_READ() (++::kplex::adjacency_reads)
#else
#define KPLEX_COUNT_READ() ((void)0)
#endif

struct GraphStats {
  double avg_degree = 0.0;  // 2|E| / |V|
  std::size_t max_degree = 0;
};

/// Immutable undirected simple graph in compressed adjacency form.
///
/// Neighbor lists are sorted ascending and free of self-loops and duplicates.
/// Each vertex optionally carries the external label it was read with.
class Graph {
 public:
  Graph() : offsets_{0} {}

  /// Builds from an edge list over vertices 0..n-1. Loops and duplicate
  /// edges are dropped. Throws ContractViolation on out-of-range ids.
  static Graph from_edges(std::size_t n, std::span<const std::pair<VertexId, VertexId>> edges,
                          std::vector<std::string> labels = {});

  std::size_t vertex_count() const noexcept { return offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }

  std::span<const VertexId> neighbors(VertexId v) const {
    KPLEX_COUNT_READ();
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::size_t degree(VertexId v) const {
    KPLEX_COUNT_READ();
    return offsets_[v + 1] - offsets_[v];
  }

  /// O(log min-degree) membership test on the sorted lists.
  bool adjacent(VertexId u, VertexId v) const;

  /// External label of v; the decimal internal id when the graph has none.
  std::string label(VertexId v) const;
  bool has_labels() const noexcept { return !labels_.empty(); }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.offsets_ == b.offsets_ && a.neighbors_ == b.neighbors_;
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<VertexId> neighbors_;
  std::vector<std::string> labels_;
};

/// Reads a whitespace-separated edge list. Lines starting with '#' or '%'
/// and blank lines are skipped. Tokens are arbitrary strings and are
/// remapped densely in order of first appearance.
Graph load_edge_list(const std::filesystem::path& path);
Graph parse_edge_list(std::string_view text);

/// Writes one "u v" line per edge (u < v in internal order) using labels.
void write_edge_list(const Graph& g, const std::filesystem::path& path);

GraphStats stats(const Graph& g);

/// Subgraph induced by `keep`; vertices are renumbered in ascending order
/// of their old ids and keep their labels.
Graph induced_subgraph(const Graph& g, std::span<const VertexId> keep);

}  // namespace kplex
