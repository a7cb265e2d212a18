#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "kplex/graph.hpp"
#include "kplex/model.hpp"

using namespace kplex;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "kplex_test_model";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ConstraintModel random_model(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-kWeightBound, kWeightBound);
  const TermSpec spec = TermSpec::quadratic(n);
  std::vector<double> w(spec.size());
  for (auto& v : w) v = u(rng);
  return ConstraintModel(spec, w, u(rng));
}

}  // namespace

TEST_CASE("term expansion") {
  const TermSpec two = TermSpec::quadratic(2);
  const std::vector<double> x{2, 3};
  CHECK(expand_terms(two, x) == std::vector<double>{2, 3, 4, 6, 9});
  CHECK(two.names() == std::vector<std::string>{"x0", "x1", "x0*x0", "x0*x1", "x1*x1"});

  const TermSpec ten = TermSpec::quadratic(10);
  CHECK(ten.size() == 65);
  const std::vector<double> zeros(10, 0.0);
  for (double t : expand_terms(ten, zeros)) CHECK(t == 0.0);
  const std::vector<double> nine(9, 1.0);
  CHECK_THROWS_AS(expand_terms(ten, nine), ContractViolation);
}

TEST_CASE("finite-difference gradient matches the term indexing") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const TermSpec spec = TermSpec::quadratic(10);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(spec.size()), x(10);
    for (auto& v : w) v = u(rng);
    for (auto& v : x) v = u(rng);
    auto f = [&](const std::vector<double>& at) {
      const auto t = expand_terms(spec, at);
      double s = 0;
      for (std::size_t j = 0; j < t.size(); ++j) s += w[j] * t[j];
      return s;
    };
    for (int i = 0; i < 10; ++i) {
      // Analytic derivative written from the lexicographic pair order.
      double grad = w[static_cast<std::size_t>(i)];
      std::size_t idx = 10;
      for (int a = 0; a < 10; ++a) {
        for (int b = a; b < 10; ++b, ++idx) {
          if (a == i && b == i) grad += 2 * w[idx] * x[static_cast<std::size_t>(i)];
          else if (a == i) grad += w[idx] * x[static_cast<std::size_t>(b)];
          else if (b == i) grad += w[idx] * x[static_cast<std::size_t>(a)];
        }
      }
      const double h = 1e-5;
      auto xp = x, xm = x;
      xp[static_cast<std::size_t>(i)] += h;
      xm[static_cast<std::size_t>(i)] -= h;
      CHECK((f(xp) - f(xm)) / (2 * h) == doctest::Approx(grad).epsilon(1e-6));
    }
  }
}

TEST_CASE("score equals the dot product with the expansion") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 300.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ConstraintModel m = random_model(10, seed);
    std::vector<double> x(10);
    for (auto& v : x) v = u(rng);
    const auto t = expand_terms(m.term_spec(), x);
    long double dot = 0;
    for (std::size_t j = 0; j < t.size(); ++j) dot += static_cast<long double>(m.weights()[j]) * t[j];
    const double scale = std::max(1.0, static_cast<double>(std::fabs(dot)));
    CHECK(std::fabs(m.score(x) - static_cast<double>(dot)) <= 1e-12 * scale * 65);
  }
  const std::vector<double> short_x(9, 1.0);
  CHECK_THROWS_AS(random_model(10, 0).score(short_x), ContractViolation);
}

TEST_CASE("model_bounds") {
  const FeatureVector x{5, 100, 2, 3, 2, 6, 40, 50, 14.9, 27};
  CHECK_FALSE(model_bounds(ConstraintModel::zero(10), x));

  // score = x_3 = 3; equal to the offset continues, above it prunes.
  std::vector<double> w(65, 0.0);
  w[3] = 1.0;
  CHECK_FALSE(model_bounds(ConstraintModel(TermSpec::quadratic(10), w, 3.0), x));
  CHECK(model_bounds(ConstraintModel(TermSpec::quadratic(10), w, 2.5), x));
}

TEST_CASE("construction validates the box") {
  std::vector<double> w(65, 0.0);
  w[7] = 1000.5;
  CHECK_THROWS_AS(ConstraintModel(TermSpec::quadratic(10), w, 0.0), ModelError);
  w[7] = 0.0;
  CHECK_THROWS_AS(ConstraintModel(TermSpec::quadratic(10), w, -1001.0), ModelError);
  w.pop_back();
  CHECK_THROWS_AS(ConstraintModel(TermSpec::quadratic(10), w, 0.0), ModelError);
}

TEST_CASE("model JSON round trip is exact") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ConstraintModel m = random_model(10, seed);
    m.meta()["seed"] = seed;
    const auto p = temp_file("m.json");
    save_model(m, p);
    const ConstraintModel back = load_model(p);
    CHECK(back.weights() == m.weights());
    CHECK(back.offset() == m.offset());
    CHECK(back.meta() == m.meta());
    const auto p2 = temp_file("m2.json");
    save_model(back, p2);
    CHECK(slurp(p) == slurp(p2));
  }
}

TEST_CASE("model JSON errors") {
  const nlohmann::json good = to_json(random_model(10, 1));
  CHECK_NOTHROW(model_from_json(good));
  for (const char* key : {"schema", "n", "term_order", "terms", "weights", "c0"}) {
    nlohmann::json j = good;
    j.erase(key);
    CHECK_THROWS_AS(model_from_json(j), ModelError);
  }
  nlohmann::json edited = good;
  edited["weights"][4] = 1200.0;
  CHECK_THROWS_AS(model_from_json(edited), ModelError);
  edited = good;
  edited["term_order"] = "something-else";
  CHECK_THROWS_AS(model_from_json(edited), ModelError);
  edited = good;
  edited["schema"] = 2;
  CHECK_THROWS_AS(model_from_json(edited), ModelError);
  edited = good;
  edited["weights"].erase(0);
  CHECK_THROWS_AS(model_from_json(edited), ModelError);

  const auto p = temp_file("broken.json");
  std::ofstream(p) << "{ not json";
  CHECK_THROWS_AS(load_model(p), ModelError);
}

TEST_CASE("feature schema check") {
  CHECK_NOTHROW(check_feature_schema(ConstraintModel::zero(10)));
  CHECK_THROWS_AS(check_feature_schema(ConstraintModel::zero(9)), ModelError);
}
