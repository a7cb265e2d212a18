#include <algorithm>
#include <cmath>
#include <numeric>

#include "kplex/milp.hpp"
#include "kplex/row_lp.hpp"

namespace kplex {

CoverageReport evaluate_model(const ConstraintModel& m, const MilpProblem& p) {
  CoverageReport r;
  for (const auto& e : p.positives()) {
    r.positives += e.count;
    if (model_bounds(m, e.x)) r.positive_violations += e.count;
  }
  for (const auto& e : p.negatives()) {
    r.negatives += e.count;
    if (model_bounds(m, e.x)) r.covered += e.count;
  }
  r.consistent = r.positive_violations == 0 && r.covered == r.negatives;
  return r;
}

namespace {

using Clock = std::chrono::steady_clock;

// Box for the max-min-margin variable: twice the largest |w.t - c0| any model
// in the box reaches on column-normalized terms.
double margin_bound(std::size_t terms) { return 2.0 * kWeightBound * static_cast<double>(terms + 2); }

// z = [w'_0 .. w'_{T-1}, c0, s]; w' are weights on terms divided by their
// column scale.
class SeparationRows final : public LpRows {
 public:
  enum class Mode { max_margin, hinge };

  SeparationRows(const MilpProblem& p, const std::vector<double>& scale)
      : p_(p), scale_(scale), dropped_(p.negatives().size(), 0) {}

  // The margin variable only widens the negative side; positives stay at
  // score <= c0.
  Mode mode = Mode::max_margin;

  std::size_t rows() const override { return p_.positives().size() + p_.negatives().size(); }

  void coefficients(std::size_t r, std::span<double> g) const override {
    const std::size_t T = scale_.size();
    const bool positive = r < p_.positives().size();
    const auto& x = positive ? p_.positives()[r].x : p_.negatives()[r - p_.positives().size()].x;
    const auto& terms = p_.term_spec().terms();
    const double sign = positive ? -1.0 : 1.0;
    for (std::size_t j = 0; j < T; ++j) {
      const Monomial& m = terms[j];
      const double t = m.linear() ? x[m.i] : x[m.i] * x[m.j];
      g[j] = sign * t / scale_[j];
    }
    g[T] = -sign;
    g[T + 1] = positive ? 0.0 : 1.0;
  }

  double rhs(std::size_t r) const override { return r < p_.positives().size() ? 0.0 : p_.epsilon(); }

  double cap(std::size_t r) const override {
    if (r < p_.positives().size()) return kHardRow;
    const std::size_t l = r - p_.positives().size();
    if (dropped_[l]) return 0.0;
    return mode == Mode::max_margin ? kHardRow : static_cast<double>(p_.negatives()[l].count);
  }

  bool dropped(std::size_t l) const { return dropped_[l] != 0; }
  void drop(std::size_t l) { dropped_[l] = 1; }
  std::size_t dropped_count() const { return static_cast<std::size_t>(std::count(dropped_.begin(), dropped_.end(), 1)); }

 private:
  const MilpProblem& p_;
  const std::vector<double>& scale_;
  std::vector<char> dropped_;
};

// Raises the offset until no positive is bounded, scaling the whole model down
// if the offset would leave the box.
ConstraintModel make_positive_safe(const MilpProblem& p, std::vector<double> w, double c0,
                                   const nlohmann::json& meta) {
  for (int round = 0; round < 64; ++round) {
    double worst = -std::numeric_limits<double>::infinity();
    ConstraintModel probe(p.term_spec(), w, std::clamp(c0, -kWeightBound, kWeightBound));
    for (const auto& e : p.positives()) worst = std::max(worst, probe.score(e.x));
    if (worst <= c0 && c0 <= kWeightBound) return ConstraintModel(p.term_spec(), std::move(w), c0, meta);
    if (worst > c0) c0 = worst;
    if (c0 > kWeightBound) {
      const double f = kWeightBound / c0;
      for (auto& v : w) v *= f;
      c0 = kWeightBound;
    }
  }
  // Falls back to the model that prunes nothing.
  return ConstraintModel(p.term_spec(), std::vector<double>(p.term_count(), 0.0), 0.0, meta);
}

struct Candidate {
  std::vector<double> z;
  CoverageReport report;
  ConstraintModel model;
};

}  // namespace

LearnResult solve(const MilpProblem& p, std::chrono::nanoseconds time_limit, std::uint64_t seed) {
  if (p.constraints() != 1) {
    throw UnsupportedProblemError("the internal solver handles a single constraint (I = 1); use export_lp and an external MILP solver for I = " +
                                  std::to_string(p.constraints()));
  }
  const auto start = Clock::now();
  const auto deadline = start + time_limit;
  const std::size_t T = p.term_count();

  nlohmann::json meta = {{"solver", "internal dual simplex, row generation"},
                         {"seed", seed},
                         {"epsilon", p.epsilon()},
                         {"big_m", p.big_m()},
                         {"normalization", "term columns divided by max(1, max |t_j|)"}};

  if (p.negatives().empty()) {
    ConstraintModel m(p.term_spec(), std::vector<double>(T, 0.0), 0.0, meta);
    CoverageReport rep = evaluate_model(m, p);
    m.meta()["coverage"] = 1.0;
    return {std::move(m), rep};
  }

  std::vector<double> scale(T, 1.0);
  for (const auto* set : {&p.positives(), &p.negatives()}) {
    for (const auto& e : *set) {
      const auto t = expand_terms(p.term_spec(), e.x);
      for (std::size_t j = 0; j < T; ++j) scale[j] = std::max(scale[j], std::fabs(t[j]));
    }
  }
  meta["term_scales"] = scale;

  SeparationRows rows(p, scale);
  const std::size_t n = T + 2;
  std::vector<double> lo(n, -kWeightBound), hi(n, kWeightBound);
  std::vector<double> margin_cost(n, 0.0), zero_cost(n, 0.0);
  margin_cost[T + 1] = 1.0;
  const double S = margin_bound(T);

  RowLpOptions opt;
  opt.seed = seed;
  opt.deadline = deadline;
  std::size_t iterations = 0;

  auto to_model = [&](const std::vector<double>& z) {
    std::vector<double> w(T);
    for (std::size_t j = 0; j < T; ++j) w[j] = std::clamp(z[j] / scale[j], -kWeightBound, kWeightBound);
    return make_positive_safe(p, std::move(w), std::clamp(z[T], -kWeightBound, kWeightBound), meta);
  };

  auto margin_lp = [&] {
    rows.mode = SeparationRows::Mode::max_margin;
    lo[T + 1] = -S;
    hi[T + 1] = S;
    auto r = solve_row_lp(rows, margin_cost, lo, hi, opt);
    iterations += r.iterations;
    return r;
  };

  auto first = margin_lp();
  if (first.status != RowLpResult::Status::optimal) {
    throw NoModelError("no model: the time limit expired before the first LP solve finished");
  }
  Candidate best{first.z, {}, to_model(first.z)};
  best.report = evaluate_model(best.model, p);
  const bool separable = first.z[T + 1] <= opt.tolerance;

  if (!separable) {
    // Soft mode: minimize count-weighted hinge violation with positives hard,
    // then give up on the worst-violated negatives and repeat.
    std::vector<double> g(n);
    const std::size_t P = p.positives().size();
    for (;;) {
      if (Clock::now() >= deadline) break;
      rows.mode = SeparationRows::Mode::hinge;
      lo[T + 1] = hi[T + 1] = 0.0;
      auto r = solve_row_lp(rows, zero_cost, lo, hi, opt);
      iterations += r.iterations;
      if (r.status != RowLpResult::Status::optimal) break;
      Candidate c{r.z, {}, to_model(r.z)};
      c.report = evaluate_model(c.model, p);
      if (c.report.covered > best.report.covered) best = std::move(c);

      std::vector<std::pair<double, std::size_t>> violated;
      for (std::size_t l = 0; l < p.negatives().size(); ++l) {
        if (rows.dropped(l)) continue;
        rows.coefficients(P + l, g);
        double margin = 0.0;
        for (std::size_t i = 0; i <= T; ++i) margin += g[i] * r.z[i];
        if (margin <= p.epsilon() / 2) violated.emplace_back(margin, l);
      }
      if (violated.empty()) break;
      std::sort(violated.begin(), violated.end());
      const std::size_t k = std::max<std::size_t>(1, (violated.size() + 3) / 4);
      for (std::size_t i = 0; i < k; ++i) rows.drop(violated[i].second);
    }
    if (Clock::now() < deadline) {
      auto r = margin_lp();
      if (r.status == RowLpResult::Status::optimal) {
        Candidate c{r.z, {}, to_model(r.z)};
        c.report = evaluate_model(c.model, p);
        if (c.report.covered >= best.report.covered) best = std::move(c);
      }
    }
  }

  CoverageReport rep = best.report;
  rep.soft = !separable;
  rep.dropped = rows.dropped_count();
  nlohmann::json& mm = best.model.meta();
  mm["mode"] = separable ? "separable" : "soft";
  mm["lp_iterations"] = iterations;
  mm["coverage"] = rep.coverage();
  mm["negatives"] = rep.negatives;
  mm["negatives_covered"] = rep.covered;
  mm["positives"] = rep.positives;
  return {std::move(best.model), rep};
}

}  // namespace kplex
