#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace kplex {

/// Per-state variables the bound is learned over. The order is part of the
/// trace and model schema; bump kFeatureSchemaVersion when it changes.
enum Feature : std::size_t {
  kLb = 0,
  kUb,         // |V(G')|
  kK,
  kVsSize,     // |V_S|
  kNvsMax,     // max_{v in V_S} |N(v) ∩ V_S|
  kNvsSum,     // sum_{v in V_S} |N(v) ∩ V_S|
  kVaSize,     // |V_A|
  kInterEdge,  // edges between V_S and V_A
  kAvgDeg,     // of G'
  kMaxDeg,     // of G'
  kFeatureCount
};

inline constexpr int kFeatureSchemaVersion = 1;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "lb", "ub", "k", "vs_size", "n_vs_max", "n_vs_sum", "va_size", "inter_edge", "avg_deg",
    "max_deg"};

using FeatureVector = std::array<double, kFeatureCount>;

struct ExampleMeta {
  std::int64_t graph_id = 0;
  int k = 0;
  int lb = 0;
  std::uint64_t node = 0;  // bound-call index within its run; not serialized
};

/// A labelled search state. label == true means the recording strategy kept
/// exploring (positive); false means it bounded the state (negative).
/// `count` is the multiplicity of identical states folded into this entry.
struct Example {
  FeatureVector features{};
  bool label = true;
  ExampleMeta meta;
  std::uint64_t count = 1;

  friend bool operator==(const Example& a, const Example& b) {
    return a.features == b.features && a.label == b.label && a.meta.graph_id == b.meta.graph_id &&
           a.meta.k == b.meta.k && a.meta.lb == b.meta.lb && a.count == b.count;
  }
};

}  // namespace kplex
