#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "kplex/trace.hpp"
#include "oracles.hpp"

using namespace kplex;

namespace {

std::filesystem::path fresh_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "kplex_test_trace";
  std::filesystem::create_directories(dir);
  auto p = dir / name;
  std::filesystem::remove(p);
  return p;
}

// Features 3..7 recomputed from V_S and V_A alone.
std::array<double, 5> recount(const Graph& g, const SearchState& st) {
  std::array<double, 5> out{};
  out[0] = static_cast<double>(st.vs_size());
  double max_in = 0, sum_in = 0, inter = 0;
  for (VertexId v : st.vs()) {
    double in = 0;
    for (VertexId w : st.vs()) in += g.adjacent(v, w);
    for (VertexId w : st.va()) inter += g.adjacent(v, w);
    max_in = std::max(max_in, in);
    sum_in += in;
  }
  out[1] = max_in;
  out[2] = sum_in;
  out[3] = static_cast<double>(st.va_size());
  out[4] = inter;
  return out;
}

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("feature examples") {
  const Graph k5 = oracle::complete(5);
  SearchConfig cfg;
  cfg.k = 1;
  cfg.lb = 3;
  SearchState st(k5, 1);
  CHECK(extract_features(k5, st, cfg) == FeatureVector{3, 5, 1, 0, 0, 0, 5, 0, 4, 4});
  st.include(0);
  st.include(1);
  CHECK(extract_features(k5, st, cfg) == FeatureVector{3, 5, 1, 2, 1, 2, 3, 6, 4, 4});
}

TEST_CASE("features match a recount at every visited state") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = oracle::random_graph(16, 0.45, seed);
    SearchConfig cfg;
    cfg.k = 1 + static_cast<int>(seed % 3);
    cfg.lb = 3;
    const FeatureContext ctx = FeatureContext::make(g, cfg.k, cfg.lb);
    SearchState st(g, cfg.k);
    std::mt19937 rng(static_cast<std::uint32_t>(seed));
    for (int step = 0; step < 60 && st.va_size() > 0; ++step) {
      if (rng() % 3) {
        st.include(st.va()[rng() % st.va_size()]);
        st.filter_candidates();
      } else {
        st.drop(st.va()[rng() % st.va_size()]);
      }
      const FeatureVector f = extract_features(ctx, st);
      const auto want = recount(g, st);
      for (std::size_t i = 0; i < 5; ++i) CHECK(f[kVsSize + i] == want[i]);
      CHECK(f[kNvsMax] <= std::max(0.0, f[kVsSize] - 1));
      CHECK(f[kNvsSum] <= f[kVsSize] * f[kNvsMax]);
      CHECK(f[kInterEdge] <= f[kVsSize] * f[kVaSize]);
      CHECK(std::all_of(f.begin(), f.end(), [](double x) { return x >= 0; }));
    }
  }
}

TEST_CASE("feature extraction never touches the adjacency") {
  const Graph g = oracle::random_graph(40, 0.3, 1);
  const FeatureContext ctx = FeatureContext::make(g, 2, 4);
  SearchState st(g, 2);
  st.include(3);
  st.include(7);
  st.filter_candidates();
  const auto before = adjacency_reads;
  FeatureVector f{};
  for (int i = 0; i < 1000; ++i) f = extract_features(ctx, st);
  CHECK(adjacency_reads == before);
  CHECK(f[kVsSize] == 2);
  // The counter is live: a neighbour scan does register.
  (void)g.neighbors(0);
  CHECK(adjacency_reads == before + 1);
}

TEST_CASE("trace round trip") {
  SUBCASE("empty list") {
    const auto p = fresh_file("empty.jsonl");
    CHECK(write_trace({}, p) == 0);
    CHECK(line_count(p) == 1);  // schema header only
    CHECK(read_trace(p).empty());
  }
  SUBCASE("mixed labels, fractions and multiplicities") {
    std::vector<Example> ex(3);
    ex[0].features = {5, 100, 2, 3, 2, 6, 40, 50, 14.97, 27};
    ex[0].label = true;
    ex[1].features = {5, 100, 2, 0, 0, 0, 100, 0, 1.0 / 3.0, 27};
    ex[1].label = false;
    ex[1].count = 17;
    ex[2].features = {5, 250, 4, 1, 0, 0, 3, 1, 37.212, 60};
    ex[2].label = false;
    ex[2].meta = {9, 4, 5, 0};
    const auto p = fresh_file("three.jsonl");
    CHECK(write_trace(ex, p) == 3);
    CHECK(line_count(p) == 4);
    CHECK(read_trace(p) == ex);
  }
  SUBCASE("appending keeps a single header") {
    std::vector<Example> ex(2);
    ex[1].label = false;
    const auto p = fresh_file("append.jsonl");
    write_trace(ex, p);
    write_trace(ex, p);
    CHECK(line_count(p) == 5);
    CHECK(read_trace(p).size() == 4);
  }
  SUBCASE("search trace written through the sink is parseable") {
    const Graph g = oracle::random_graph(40, 0.3, 5);
    const auto p = fresh_file("search.jsonl");
    TraceWriter w(p);
    SearchConfig cfg;
    cfg.k = 2;
    cfg.lb = 4;
    cfg.record_trace = true;
    cfg.trace_sink = [&](const Example& e) { w.write(e); };
    const auto r = search(g, cfg);
    w.flush();
    const auto back = read_trace(p);
    CHECK(back.size() == r.stats.bound_calls);
    CHECK(static_cast<std::uint64_t>(std::count_if(back.begin(), back.end(), [](const Example& e) {
            return !e.label;
          })) == r.stats.bound_prunes);
  }
}

TEST_CASE("trace schema errors carry the line number") {
  auto expect_line = [](const std::string& body, std::size_t line) {
    const auto p = fresh_file("bad.jsonl");
    std::ofstream(p) << body;
    try {
      (void)read_trace(p);
      FAIL("expected TraceError");
    } catch (const TraceError& e) {
      CHECK(e.line() == line);
    }
  };
  const std::string ok = R"({"f":[1,2,3,4,5,6,7,8,9,10],"y":1,"g":0,"k":2,"lb":5})";
  expect_line(ok + "\n" + R"({"f":[1,2,3,4,5,6,7,8,9],"y":1,"g":0,"k":2,"lb":5})" + "\n", 2);
  expect_line(ok + "\n" + ok + "\n" + R"({"f":[1,2,3,4,5,6,7,8,9,10],"y":2,"g":0,"k":2,"lb":5})", 3);
  expect_line("not json\n", 1);
  expect_line(R"({"schema":2,"order":[]})", 1);
  expect_line(R"({"f":[1,2,3,4,5,6,7,8,9,10],"g":0,"k":2,"lb":5})", 1);
  expect_line(ok + "\n" + R"({"f":[1,2,3,4,5,6,7,8,9,10],"y":0,"g":0,"k":2,"lb":5,"m":0})", 2);
  CHECK_THROWS(read_trace(fresh_file("missing.jsonl")));
}
