#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "kplex/features.hpp"

namespace kplex {

/// One term of the expansion: x_i alone (j < 0) or the product x_i * x_j, i <= j.
struct Monomial {
  int i = 0;
  int j = -1;
  bool linear() const { return j < 0; }
  friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// Linear-plus-pairwise-product term map over n variables. Order: x_0..x_{n-1},
/// then x_i*x_j for i <= j in lexicographic order, so |terms| = n + n(n+1)/2.
class TermSpec {
 public:
  static TermSpec quadratic(int n);

  int n() const { return n_; }
  std::size_t size() const { return terms_.size(); }
  const std::vector<Monomial>& terms() const { return terms_; }
  /// Stable identifier of the ordering, stored in models.
  static constexpr const char* kOrderId = "linear+quadratic-lex/v1";
  std::vector<std::string> names() const;

  friend bool operator==(const TermSpec&, const TermSpec&) = default;

 private:
  int n_ = 0;
  std::vector<Monomial> terms_;
};

std::vector<double> expand_terms(const TermSpec& spec, std::span<const double> x);

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kWeightBound = 1000.0;

/// A single learned inequality sum_j w_j t_j(x) <= c0 over the term expansion.
/// States that violate it are bounded.
class ConstraintModel {
 public:
  ConstraintModel() = default;
  ConstraintModel(TermSpec spec, std::vector<double> weights, double offset,
                  nlohmann::json meta = nlohmann::json::object());

  static ConstraintModel zero(int n);

  const TermSpec& term_spec() const { return spec_; }
  const std::vector<double>& weights() const { return weights_; }
  double offset() const { return offset_; }
  const nlohmann::json& meta() const { return meta_; }
  nlohmann::json& meta() { return meta_; }

  /// sum_j w_j t_j(x), evaluated as sum_i x_i (w_i + sum_{j>=i} w_ij x_j).
  double score(std::span<const double> x) const;

 private:
  void build_dense();

  TermSpec spec_;
  std::vector<double> linear_;  // n
  std::vector<double> upper_;   // n*n, row i holds w_ij for j >= i
  std::vector<double> weights_;
  double offset_ = 0.0;
  nlohmann::json meta_ = nlohmann::json::object();
};

/// True (prune) iff score(x) > offset. Ties continue.
bool model_bounds(const ConstraintModel& m, std::span<const double> x);
inline bool model_bounds(const ConstraintModel& m, const FeatureVector& x) {
  return model_bounds(m, std::span<const double>(x));
}

nlohmann::json to_json(const ConstraintModel& m);
ConstraintModel model_from_json(const nlohmann::json& j);
void save_model(const ConstraintModel& m, const std::filesystem::path& path);
ConstraintModel load_model(const std::filesystem::path& path);

/// Throws ModelError unless the model's terms match the current feature schema.
void check_feature_schema(const ConstraintModel& m);

}  // namespace kplex
