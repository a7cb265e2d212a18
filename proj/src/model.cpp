#include "kplex/model.hpp"

#include <fstream>
#include <sstream>

#include "kplex/graph.hpp"

namespace kplex {

TermSpec TermSpec::quadratic(int n) {
  if (n < 0) throw ContractViolation("term spec dimension must be non-negative");
  TermSpec s;
  s.n_ = n;
  s.terms_.reserve(static_cast<std::size_t>(n + n * (n + 1) / 2));
  for (int i = 0; i < n; ++i) s.terms_.push_back({i, -1});
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) s.terms_.push_back({i, j});
  }
  return s;
}

std::vector<std::string> TermSpec::names() const {
  std::vector<std::string> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) {
    out.push_back(t.linear() ? "x" + std::to_string(t.i)
                             : "x" + std::to_string(t.i) + "*x" + std::to_string(t.j));
  }
  return out;
}

std::vector<double> expand_terms(const TermSpec& spec, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(spec.n())) {
    throw ContractViolation("expand_terms: expected " + std::to_string(spec.n()) + " values, got " +
                            std::to_string(x.size()));
  }
  std::vector<double> t;
  t.reserve(spec.size());
  for (const auto& m : spec.terms()) t.push_back(m.linear() ? x[m.i] : x[m.i] * x[m.j]);
  return t;
}

ConstraintModel::ConstraintModel(TermSpec spec, std::vector<double> weights, double offset,
                                 nlohmann::json meta)
    : spec_(std::move(spec)), weights_(std::move(weights)), offset_(offset), meta_(std::move(meta)) {
  if (weights_.size() != spec_.size()) {
    throw ModelError("model has " + std::to_string(weights_.size()) + " weights for " +
                     std::to_string(spec_.size()) + " terms");
  }
  for (double w : weights_) {
    if (!(w >= -kWeightBound && w <= kWeightBound)) throw ModelError("weight outside [-1000, 1000]");
  }
  if (!(offset_ >= -kWeightBound && offset_ <= kWeightBound)) {
    throw ModelError("offset outside [-1000, 1000]");
  }
  build_dense();
}

void ConstraintModel::build_dense() {
  const auto n = static_cast<std::size_t>(spec_.n());
  linear_.assign(n, 0.0);
  upper_.assign(n * n, 0.0);
  const auto& terms = spec_.terms();
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const Monomial& m = terms[j];
    if (m.linear()) {
      linear_[m.i] += weights_[j];
    } else {
      upper_[m.i * n + m.j] += weights_[j];
    }
  }
}

ConstraintModel ConstraintModel::zero(int n) {
  TermSpec s = TermSpec::quadratic(n);
  std::vector<double> w(s.size(), 0.0);
  return ConstraintModel(std::move(s), std::move(w), 0.0);
}

double ConstraintModel::score(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(spec_.n())) {
    throw ContractViolation("model expects " + std::to_string(spec_.n()) + " features, got " +
                            std::to_string(x.size()));
  }
  const auto n = static_cast<std::size_t>(spec_.n());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = upper_.data() + i * n;
    double inner = linear_[i];
    for (std::size_t j = i; j < n; ++j) inner += row[j] * x[j];
    sum += x[i] * inner;
  }
  return sum;
}

bool model_bounds(const ConstraintModel& m, std::span<const double> x) {
  return m.score(x) > m.offset();
}

namespace {

nlohmann::ordered_json ordered(const ConstraintModel& m) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["n"] = m.term_spec().n();
  j["term_order"] = TermSpec::kOrderId;
  j["terms"] = m.term_spec().names();
  j["weights"] = m.weights();
  j["c0"] = m.offset();
  j["meta"] = m.meta();
  return j;
}

}  // namespace

nlohmann::json to_json(const ConstraintModel& m) { return nlohmann::json::parse(ordered(m).dump()); }

namespace {

template <class J>
const J& require(const J& j, const char* key) {
  if (!j.contains(key)) throw ModelError(std::string("model is missing field \"") + key + "\"");
  return j.at(key);
}

}  // namespace

ConstraintModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ModelError("model must be a JSON object");
  const auto& schema = require(j, "schema");
  if (!schema.is_number_integer() || schema.get<int>() != 1) throw ModelError("unsupported model schema");
  const auto& n = require(j, "n");
  if (!n.is_number_integer() || n.get<int>() < 0) throw ModelError("invalid feature dimension");
  const auto& order = require(j, "term_order");
  if (!order.is_string() || order.get<std::string>() != TermSpec::kOrderId) {
    throw ModelError("unsupported term order");
  }
  TermSpec spec = TermSpec::quadratic(n.get<int>());
  if (require(j, "terms") != nlohmann::json(spec.names())) {
    throw ModelError("term list does not match the term order");
  }
  const auto& w = require(j, "weights");
  if (!w.is_array()) throw ModelError("weights must be an array");
  std::vector<double> weights;
  for (const auto& v : w) {
    if (!v.is_number()) throw ModelError("non-numeric weight");
    weights.push_back(v.get<double>());
  }
  const auto& c0 = require(j, "c0");
  if (!c0.is_number()) throw ModelError("c0 must be a number");
  return ConstraintModel(std::move(spec), std::move(weights), c0.get<double>(),
                         j.value("meta", nlohmann::json::object()));
}

void save_model(const ConstraintModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model: " + path.string());
  const auto j = ordered(m);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write model: " + path.string());
}

ConstraintModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError(std::string("model is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

void check_feature_schema(const ConstraintModel& m) {
  if (m.term_spec() != TermSpec::quadratic(static_cast<int>(kFeatureCount))) {
    throw ModelError("model term order does not match the feature schema (expected " +
                     std::to_string(kFeatureCount) + " features, quadratic expansion)");
  }
}

}  // namespace kplex
