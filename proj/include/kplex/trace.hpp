#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <vector>

#include "kplex/features.hpp"
#include "kplex/search.hpp"

namespace kplex {

/// Graph-level feature components, computed once per searched graph.
struct FeatureContext {
  double lb = 0;
  double ub = 0;  // |V(G')|
  double k = 0;
  double avg_deg = 0;
  double max_deg = 0;

  static FeatureContext make(const Graph& g_prime, int k, int lb);
};

/// O(1): reads only the cached aggregates of `st`, never the adjacency.
FeatureVector extract_features(const FeatureContext& ctx, const SearchState& st);
FeatureVector extract_features(const Graph& g_prime, const SearchState& st, const SearchConfig& cfg);

class TraceError : public std::runtime_error {
 public:
  TraceError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Appending JSONL writer. Writes the schema header when the file is new or
/// empty. One line per example:
///   {"f":[10 numbers],"y":0|1,"g":id,"k":k,"lb":lb}
/// plus "m":count when the example folds more than one identical state.
class TraceWriter {
 public:
  explicit TraceWriter(const std::filesystem::path& path);
  void write(const Example& e);
  std::size_t written() const { return written_; }
  void flush();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t written_ = 0;
};

std::size_t write_trace(std::span<const Example> examples, const std::filesystem::path& path);
std::vector<Example> read_trace(const std::filesystem::path& path);

}  // namespace kplex
