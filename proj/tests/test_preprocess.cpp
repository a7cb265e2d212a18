#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kplex/preprocess.hpp"
#include "oracles.hpp"

using namespace kplex;

namespace {

std::vector<bool> as_mask(std::size_t n, const std::vector<VertexId>& ids) {
  std::vector<bool> m(n, false);
  for (VertexId v : ids) m[v] = true;
  return m;
}

}  // namespace

TEST_CASE("coreness examples") {
  const Graph k5 = oracle::complete(5);
  CHECK(coreness_prune(k5, {1, 5}) == k5);
  const Graph star = oracle::from_pairs(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  CHECK(coreness_prune(star, {1, 3}).vertex_count() == 0);
  const Graph g = oracle::random_graph(12, 0.3, 3);
  CHECK(coreness_prune(g, {4, 4}) == g);
  CHECK(coreness_prune(g, {5, 3}) == g);
}

TEST_CASE("cliqueness examples") {
  const Graph g = oracle::from_pairs(6, {{0, 1}, {1, 2}, {3, 4}});
  CHECK(cliqueness_prune(g, {3, 3}) == g);
  const Graph two = cliqueness_prune(g, {2, 4});
  CHECK(two.vertex_count() == 5);
  CHECK(two.edge_count() == 3);

  // K4 on 0..3 plus pendant 4 attached to 0; ceil(5/2) = 3.
  const Graph k4p = oracle::from_pairs(5, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {0, 4}});
  const Graph kept = cliqueness_prune(k4p, {2, 5});
  CHECK(kept == oracle::complete(4));
  CHECK(as_mask(5, clique_member_vertices(k4p, 3)) == oracle::clique_members(k4p, 3));
}

TEST_CASE("preprocess examples") {
  SUBCASE("K6 survives") {
    const auto r = preprocess(oracle::complete(6), {2, 6});
    CHECK(r.result == oracle::complete(6));
    CHECK(r.removed_by_coreness == 0);
    CHECK(r.removed_by_cliqueness == 0);
  }
  SUBCASE("two triangles vanish") {
    const Graph g = oracle::from_pairs(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    const auto r = preprocess(g, {1, 4});
    CHECK(r.result.vertex_count() == 0);
    CHECK(r.removed_by_coreness == 6);
  }
  SUBCASE("K4 plus a path of five") {
    const Graph g = oracle::from_pairs(
        9, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {4, 5}, {5, 6}, {6, 7}, {7, 8}});
    const auto r = preprocess(g, {2, 5});
    CHECK(r.result == oracle::complete(4));
    CHECK(r.kept == std::vector<VertexId>{0, 1, 2, 3});
  }
  SUBCASE("bad parameters") {
    CHECK_THROWS_AS(preprocess(oracle::complete(3), {0, 3}), ContractViolation);
  }
}

TEST_CASE("core and clique phases agree with sweep and enumeration oracles") {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const std::size_t n = 6 + seed % 9;
    const Graph g = oracle::random_graph(n, seed % 2 ? 0.35 : 0.55, seed);
    for (int d = 0; d <= 5; ++d) {
      CHECK(as_mask(n, core_vertices(g, d)) == oracle::core_members(g, d));
    }
    for (int c = 1; c <= 5; ++c) {
      CHECK(as_mask(n, clique_member_vertices(g, c)) == oracle::clique_members(g, c));
    }
  }
}

TEST_CASE("soundness: members of large k-plexes survive") {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t n = 5 + seed % 11;
    const Graph g = oracle::random_graph(n, 0.3 + 0.05 * static_cast<double>(seed % 7), 1000 + seed);
    for (int k = 1; k <= 3; ++k) {
      for (int lb = 3; lb <= 5; ++lb) {
        const auto r = preprocess(g, {k, lb});
        const auto kept = as_mask(n, r.kept);
        const auto members = oracle::kplex_members(g, k, lb);
        for (std::size_t v = 0; v < n; ++v) {
          if (members[v]) CHECK_MESSAGE(kept[v], "seed ", seed, " k ", k, " lb ", lb, " vertex ", v);
        }
        ++checked;
      }
    }
  }
  CHECK(checked == 200 * 9);
}

TEST_CASE("coreness is idempotent and monotone in lb") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Graph g = oracle::random_graph(30, 0.2, seed);
    for (int k = 1; k <= 3; ++k) {
      const Graph once = coreness_prune(g, {k, 6});
      CHECK(coreness_prune(once, {k, 6}) == once);
      std::size_t prev = g.vertex_count();
      for (int lb = 1; lb <= 10; ++lb) {
        const std::size_t now = preprocess(g, {k, lb}).result.vertex_count();
        CHECK(now <= prev);
        prev = now;
      }
    }
  }
}
