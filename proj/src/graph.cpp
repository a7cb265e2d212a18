#include "kplex/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace kplex {

Graph Graph::from_edges(std::size_t n, std::span<const std::pair<VertexId, VertexId>> edges,
                        std::vector<std::string> labels) {
  if (!labels.empty() && labels.size() != n) {
    throw ContractViolation("label count does not match vertex count");
  }
  std::vector<std::size_t> deg(n, 0);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) {
      throw ContractViolation("edge endpoint out of range");
    }
    if (u == v) continue;
    ++deg[u];
    ++deg[v];
  }

  Graph g;
  g.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  std::vector<VertexId> raw(g.offsets_[n]);
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : edges) {
    if (u == v) continue;
    raw[fill[u]++] = v;
    raw[fill[v]++] = u;
  }

  // Sort and dedupe each list, then compact.
  std::vector<std::size_t> compact(n + 1, 0);
  std::size_t out = 0;
  for (std::size_t v = 0; v < n; ++v) {
    auto first = raw.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
    auto last = raw.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
    std::sort(first, last);
    last = std::unique(first, last);
    compact[v] = out;
    for (auto it = first; it != last; ++it) raw[out++] = *it;
  }
  compact[n] = out;
  raw.resize(out);
  raw.shrink_to_fit();
  g.offsets_ = std::move(compact);
  g.neighbors_ = std::move(raw);
  g.labels_ = std::move(labels);
  return g;
}

bool Graph::adjacent(VertexId u, VertexId v) const {
  if (degree(u) > degree(v)) std::swap(u, v);
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::string Graph::label(VertexId v) const {
  if (labels_.empty()) return std::to_string(v);
  return labels_[v];
}

namespace {

bool is_comment_or_blank(std::string_view line) {
  auto pos = line.find_first_not_of(" \t\r");
  if (pos == std::string_view::npos) return true;
  return line[pos] == '#' || line[pos] == '%';
}

}  // namespace

Graph parse_edge_list(std::string_view text) {
  std::unordered_map<std::string, VertexId> ids;
  std::vector<std::string> labels;
  std::vector<std::pair<VertexId, VertexId>> edges;

  auto intern = [&](const std::string& tok) {
    auto [it, inserted] = ids.try_emplace(tok, static_cast<VertexId>(labels.size()));
    if (inserted) labels.push_back(tok);
    return it->second;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (is_comment_or_blank(line)) {
      if (eol == text.size()) break;
      continue;
    }
    std::istringstream in{std::string(line)};
    std::string a, b, extra;
    if (!(in >> a >> b) || (in >> extra)) {
      throw ParseError("edge list line " + std::to_string(line_no) +
                           ": expected exactly two vertex tokens",
                       line_no);
    }
    VertexId u = intern(a);
    VertexId v = intern(b);
    edges.emplace_back(u, v);
    if (eol == text.size()) break;
  }
  const std::size_t n = labels.size();
  return Graph::from_edges(n, edges, std::move(labels));
}

Graph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open graph file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_edge_list(buf.str());
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path.string());
  out << "# vertices " << g.vertex_count() << " edges " << g.edge_count() << '\n';
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    for (VertexId v : g.neighbors(u)) {
      if (u < v) out << g.label(u) << ' ' << g.label(v) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

GraphStats stats(const Graph& g) {
  GraphStats s;
  const std::size_t n = g.vertex_count();
  if (n == 0) return s;
  s.avg_degree = 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(n);
  for (VertexId v = 0; v < n; ++v) s.max_degree = std::max(s.max_degree, g.degree(v));
  return s;
}

Graph induced_subgraph(const Graph& g, std::span<const VertexId> keep) {
  const std::size_t n = g.vertex_count();
  std::vector<VertexId> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  constexpr VertexId kAbsent = ~VertexId{0};
  std::vector<VertexId> remap(n, kAbsent);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] >= n) throw ContractViolation("induced_subgraph: vertex id out of range");
    remap[sorted[i]] = static_cast<VertexId>(i);
  }

  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<std::string> labels;
  labels.reserve(sorted.size());
  for (VertexId old : sorted) {
    labels.push_back(g.label(old));
    for (VertexId w : g.neighbors(old)) {
      if (old < w && remap[w] != kAbsent) edges.emplace_back(remap[old], remap[w]);
    }
  }
  return Graph::from_edges(sorted.size(), edges, std::move(labels));
}

}  // namespace kplex
