#include "kplex/row_lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace kplex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;
constexpr double kDegenerateStep = 1e-13;
constexpr int kRefactorEvery = 100;
constexpr int kBlandAfter = 50;

// Columns of the dual: 0..n-1 are alpha_j (z_j >= lo_j), n..2n-1 are beta_j
// (z_j <= hi_j), then one y column per working-set row.
class DualSimplex {
 public:
  DualSimplex(const LpRows& rows, std::span<const double> cost, std::span<const double> lo,
              std::span<const double> hi, const RowLpOptions& opt)
      : rows_(rows), opt_(opt), n_(cost.size()), cost_(cost.begin(), cost.end()),
        lo_(lo.begin(), lo.end()), hi_(hi.begin(), hi.end()), in_work_(rows.rows(), 0) {
    if (lo.size() != n_ || hi.size() != n_) throw std::invalid_argument("row LP: bound size mismatch");
    for (std::size_t j = 0; j < n_; ++j) {
      if (!(lo_[j] <= hi_[j]) || !std::isfinite(lo_[j]) || !std::isfinite(hi_[j])) {
        throw std::invalid_argument("row LP: invalid box");
      }
    }
    double scale = 1.0;
    for (double c : cost_) scale = std::max(scale, std::fabs(c));
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    c_ = cost_;
    for (auto& c : c_) {
      const double mag = opt.perturbation * scale * u(rng);
      c += (rng() & 1) ? mag : -mag;
    }
    pos_.assign(2 * n_, -1);
    upper_.assign(2 * n_, 0);
    g_.resize(n_);
    w_.resize(n_);
    pi_.resize(n_);
    slack_basis();
  }

  RowLpResult run() {
    RowLpResult res;
    int since_refactor = 0;
    int degenerate = 0;
    bool bland = false;
    for (;;) {
      if (res.iterations >= opt_.max_iterations) {
        res.status = RowLpResult::Status::iteration_limit;
        break;
      }
      if (opt_.deadline && (res.iterations & 31) == 0 &&
          std::chrono::steady_clock::now() >= *opt_.deadline) {
        res.status = RowLpResult::Status::time_limit;
        break;
      }
      if (since_refactor >= kRefactorEvery) {
        refactor();
        since_refactor = 0;
      }
      compute_pi();
      const long q = choose_entering(bland);
      if (q < 0) {
        if (!add_violated_rows()) break;
        continue;
      }
      ++res.iterations;
      ++since_refactor;
      const double step = pivot(static_cast<std::size_t>(q), bland);
      if (step <= kDegenerateStep) {
        if (++degenerate > kBlandAfter) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
    }
    compute_pi();
    res.z = pi_;
    res.objective = primal_objective(res.z);
    res.working_rows = work_.size();
    return res;
  }

 private:
  std::size_t columns() const { return 2 * n_ + work_.size(); }

  double obj(std::size_t c) const {
    if (c < n_) return lo_[c];
    if (c < 2 * n_) return -hi_[c - n_];
    return wh_[c - 2 * n_];
  }

  double cap(std::size_t c) const { return c < 2 * n_ ? kInf : wcap_[c - 2 * n_]; }

  const double* wrow(std::size_t w) const { return wg_.data() + w * n_; }

  double col_dot(std::size_t c, const std::vector<double>& v) const {
    if (c < n_) return v[c];
    if (c < 2 * n_) return -v[c - n_];
    const double* g = wrow(c - 2 * n_);
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += g[i] * v[i];
    return s;
  }

  void column(std::size_t c, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (c < n_) {
      out[c] = 1.0;
    } else if (c < 2 * n_) {
      out[c - n_] = -1.0;
    } else {
      const double* g = wrow(c - 2 * n_);
      std::copy(g, g + n_, out.begin());
    }
  }

  // Right-hand side after moving nonbasic-at-upper columns across.
  std::vector<double> reduced_rhs() const {
    std::vector<double> b = c_;
    for (std::size_t w = 0; w < work_.size(); ++w) {
      const std::size_t c = 2 * n_ + w;
      if (!upper_[c]) continue;
      const double* g = wrow(w);
      for (std::size_t i = 0; i < n_; ++i) b[i] -= wcap_[w] * g[i];
    }
    return b;
  }

  void slack_basis() {
    const auto b = reduced_rhs();
    for (auto& p : pos_) p = -1;
    basic_.assign(n_, 0);
    binv_.assign(n_ * n_, 0.0);
    xb_.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const bool alpha = b[j] >= 0.0;
      basic_[j] = alpha ? j : n_ + j;
      pos_[basic_[j]] = static_cast<long>(j);
      binv_[j * n_ + j] = alpha ? 1.0 : -1.0;
      xb_[j] = std::fabs(b[j]);
    }
  }

  // Gauss-Jordan inverse of the basis matrix; falls back to the slack basis if
  // round-off made it singular.
  void refactor() {
    std::vector<double> a(n_ * 2 * n_, 0.0);
    std::vector<double> col(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      column(basic_[k], col);
      for (std::size_t i = 0; i < n_; ++i) a[i * 2 * n_ + k] = col[i];
      a[k * 2 * n_ + n_ + k] = 1.0;
    }
    const std::size_t w = 2 * n_;
    for (std::size_t p = 0; p < n_; ++p) {
      std::size_t best = p;
      for (std::size_t i = p + 1; i < n_; ++i) {
        if (std::fabs(a[i * w + p]) > std::fabs(a[best * w + p])) best = i;
      }
      if (std::fabs(a[best * w + p]) < 1e-12) {
        slack_basis();
        return;
      }
      if (best != p) {
        for (std::size_t c = 0; c < w; ++c) std::swap(a[p * w + c], a[best * w + c]);
      }
      const double inv = 1.0 / a[p * w + p];
      for (std::size_t c = 0; c < w; ++c) a[p * w + c] *= inv;
      for (std::size_t i = 0; i < n_; ++i) {
        if (i == p) continue;
        const double f = a[i * w + p];
        if (f == 0.0) continue;
        for (std::size_t c = 0; c < w; ++c) a[i * w + c] -= f * a[p * w + c];
      }
    }
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t c = 0; c < n_; ++c) binv_[i * n_ + c] = a[i * w + n_ + c];
    }
    const auto b = reduced_rhs();
    for (std::size_t k = 0; k < n_; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i) s += binv_[k * n_ + i] * b[i];
      xb_[k] = std::clamp(s, 0.0, cap(basic_[k]));
    }
  }

  void compute_pi() {
    std::fill(pi_.begin(), pi_.end(), 0.0);
    for (std::size_t k = 0; k < n_; ++k) {
      const double o = obj(basic_[k]);
      if (o == 0.0) continue;
      const double* row = binv_.data() + k * n_;
      for (std::size_t i = 0; i < n_; ++i) pi_[i] += o * row[i];
    }
  }

  long choose_entering(bool bland) const {
    long best = -1;
    double best_score = 0.0;
    for (std::size_t c = 0; c < columns(); ++c) {
      if (pos_[c] >= 0 || cap(c) == 0.0) continue;
      const double d = obj(c) - col_dot(c, pi_);
      const double score = upper_[c] ? -d : d;
      if (score <= opt_.tolerance) continue;
      if (bland) return static_cast<long>(c);
      if (score > best_score) {
        best_score = score;
        best = static_cast<long>(c);
      }
    }
    return best;
  }

  // Returns the step length taken.
  double pivot(std::size_t q, bool bland) {
    column(q, g_);
    for (std::size_t k = 0; k < n_; ++k) {
      const double* row = binv_.data() + k * n_;
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i) s += row[i] * g_[i];
      w_[k] = s;
    }
    const double sigma = upper_[q] ? -1.0 : 1.0;
    double theta = cap(q);
    long leave = -1;
    bool leave_upper = false;
    double leave_mag = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      const double d = sigma * w_[k];
      double t;
      bool to_upper;
      if (d > kPivotTol) {
        t = std::max(xb_[k], 0.0) / d;
        to_upper = false;
      } else if (d < -kPivotTol && std::isfinite(cap(basic_[k]))) {
        t = std::max(cap(basic_[k]) - xb_[k], 0.0) / -d;
        to_upper = true;
      } else {
        continue;
      }
      bool take = t < theta;
      if (!take && t == theta && leave >= 0) {
        take = bland ? basic_[k] < basic_[static_cast<std::size_t>(leave)] : std::fabs(d) > leave_mag;
      }
      if (take) {
        theta = t;
        leave = static_cast<long>(k);
        leave_upper = to_upper;
        leave_mag = std::fabs(d);
      }
    }
    if (!std::isfinite(theta)) throw std::runtime_error("row LP: hard rows are infeasible");
    for (std::size_t k = 0; k < n_; ++k) xb_[k] -= sigma * theta * w_[k];
    if (leave < 0) {
      upper_[q] = !upper_[q];
      return theta;
    }
    const std::size_t r = static_cast<std::size_t>(leave);
    const std::size_t out = basic_[r];
    pos_[out] = -1;
    upper_[out] = leave_upper;
    const double entering_value = sigma > 0 ? theta : cap(q) - theta;
    basic_[r] = q;
    pos_[q] = static_cast<long>(r);
    upper_[q] = 0;
    xb_[r] = entering_value;

    double* prow = binv_.data() + r * n_;
    const double inv = 1.0 / w_[r];
    for (std::size_t i = 0; i < n_; ++i) prow[i] *= inv;
    for (std::size_t k = 0; k < n_; ++k) {
      if (k == r || w_[k] == 0.0) continue;
      double* row = binv_.data() + k * n_;
      const double f = w_[k];
      for (std::size_t i = 0; i < n_; ++i) row[i] -= f * prow[i];
    }
    return theta;
  }

  // Pricing over rows outside the working set. Returns false when none is violated.
  bool add_violated_rows() {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t r = 0; r < rows_.rows(); ++r) {
      if (in_work_[r]) continue;
      const double cp = rows_.cap(r);
      if (cp == 0.0) continue;
      rows_.coefficients(r, g_);
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i) s += g_[i] * pi_[i];
      const double viol = rows_.rhs(r) - s;
      if (viol > opt_.tolerance) cand.emplace_back(-viol, r);
    }
    if (cand.empty()) return false;
    const std::size_t take = std::min(cand.size(), std::max<std::size_t>(opt_.rows_per_round, 1));
    std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(take), cand.end());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t r = cand[i].second;
      in_work_[r] = 1;
      work_.push_back(r);
      rows_.coefficients(r, g_);
      wg_.insert(wg_.end(), g_.begin(), g_.end());
      wh_.push_back(rows_.rhs(r));
      wcap_.push_back(rows_.cap(r));
      pos_.push_back(-1);
      upper_.push_back(0);
    }
    return true;
  }

  double primal_objective(const std::vector<double>& z) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n_; ++i) obj += cost_[i] * z[i];
    for (std::size_t r = 0; r < rows_.rows(); ++r) {
      const double cp = rows_.cap(r);
      if (cp == 0.0 || !std::isfinite(cp)) continue;
      rows_.coefficients(r, g_);
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i) s += g_[i] * z[i];
      obj += cp * std::max(0.0, rows_.rhs(r) - s);
    }
    return obj;
  }

  const LpRows& rows_;
  RowLpOptions opt_;
  std::size_t n_;
  std::vector<double> cost_, c_, lo_, hi_;
  std::vector<char> in_work_;
  std::vector<std::size_t> work_;
  std::vector<double> wg_, wh_, wcap_;
  std::vector<std::size_t> basic_;
  std::vector<long> pos_;
  std::vector<char> upper_;
  std::vector<double> binv_, xb_, pi_, g_, w_;
};

}  // namespace

RowLpResult solve_row_lp(const LpRows& rows, std::span<const double> cost, std::span<const double> lo,
                         std::span<const double> hi, const RowLpOptions& opt) {
  DualSimplex s(rows, cost, lo, hi, opt);
  return s.run();
}

}  // namespace kplex
