#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kplex/features.hpp"
#include "kplex/model.hpp"

namespace kplex {

/// One example reduced to what the encoding needs.
struct LabeledPoint {
  std::vector<double> x;
  bool positive = true;
  std::uint64_t count = 1;
};

struct LinearTerm {
  std::size_t var = 0;
  double coef = 0.0;
};

enum class RowSense { le, ge };

/// A materialized row. `strict` rows mean lhs > rhs and are exported as
/// lhs >= rhs + epsilon.
struct MilpRow {
  std::string name;
  std::vector<LinearTerm> terms;
  RowSense sense = RowSense::le;
  double rhs = 0.0;
  bool strict = false;
};

/// Big-M encoding of "every positive satisfies all I constraints, every
/// negative violates at least one". Variables, in order: w_{i,j} and c_i for
/// each constraint i (I*(T+1) continuous), then S_{l,i} (binary).
/// Rows: positives x constraints, negatives x constraints, one coverage row
/// per negative. Rows are produced on demand.
class MilpProblem {
 public:
  MilpProblem(std::vector<LabeledPoint> positives, std::vector<LabeledPoint> negatives, int constraints,
              TermSpec terms, double big_m, double epsilon);

  int constraints() const { return constraints_; }
  const TermSpec& term_spec() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }
  double big_m() const { return big_m_; }
  double epsilon() const { return epsilon_; }
  double weight_bound() const { return kWeightBound; }
  const std::vector<LabeledPoint>& positives() const { return positives_; }
  const std::vector<LabeledPoint>& negatives() const { return negatives_; }

  std::size_t continuous_vars() const;
  std::size_t binary_vars() const;
  std::size_t var_count() const { return continuous_vars() + binary_vars(); }
  std::size_t row_count() const;

  std::size_t weight_var(int i, std::size_t j) const;
  std::size_t offset_var(int i) const;
  std::size_t choice_var(std::size_t l, int i) const;
  std::string var_name(std::size_t v) const;

  MilpRow row(std::size_t r) const;

 private:
  std::vector<LabeledPoint> positives_;
  std::vector<LabeledPoint> negatives_;
  int constraints_;
  TermSpec terms_;
  double big_m_;
  double epsilon_;
};

inline constexpr double kDefaultBigM = 1e6;
inline constexpr double kDefaultEpsilon = 1e-6;

/// Positives keep input order, then negatives. Throws std::invalid_argument on
/// empty input or mixed dimensions.
MilpProblem encode_milp(std::span<const Example> examples, int constraints, double big_m = kDefaultBigM,
                        double epsilon = kDefaultEpsilon);
MilpProblem encode_milp(std::vector<LabeledPoint> points, int dimension, int constraints,
                        double big_m = kDefaultBigM, double epsilon = kDefaultEpsilon);

enum class LpObjective {
  feasibility,  // Maximize 0
  coverage,     // Maximize sum_l count_l * u_l with sum_i S_{l,i} >= u_l, u binary
};

void export_lp(const MilpProblem& p, const std::filesystem::path& path,
               LpObjective objective = LpObjective::feasibility);

/// What the LP reader recovers from a file.
struct LpFileSummary {
  bool maximize = true;
  std::size_t rows = 0;
  std::size_t variables = 0;
  std::size_t binaries = 0;
  std::size_t bounded = 0;
  std::vector<std::string> row_names;
};

class LpParseError : public std::runtime_error {
 public:
  LpParseError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Reader for the CPLEX-style LP subset that export_lp writes: objective,
/// Subject To, Bounds, Binaries/Generals, End. Rows may span lines.
LpFileSummary read_lp(const std::filesystem::path& path);

class NoModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CoverageReport {
  std::uint64_t positives = 0;           // weighted by multiplicity
  std::uint64_t negatives = 0;
  std::uint64_t covered = 0;             // negatives the model prunes
  std::uint64_t positive_violations = 0;  // always 0 for solve()
  std::size_t dropped = 0;               // distinct negatives given up in soft mode
  bool consistent = false;
  bool soft = false;
  double coverage() const { return negatives == 0 ? 1.0 : double(covered) / double(negatives); }
};

CoverageReport evaluate_model(const ConstraintModel& m, const MilpProblem& p);

struct LearnResult {
  ConstraintModel model;
  CoverageReport report;
};

/// Single-constraint learner. Never bounds a positive example. Separable data
/// gets a max-margin consistent model; otherwise soft mode maximizes the
/// number of negatives pruned.
LearnResult solve(const MilpProblem& p, std::chrono::nanoseconds time_limit, std::uint64_t seed = 0);

}  // namespace kplex
