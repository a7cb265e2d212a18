#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace kplex {

/// Rows g_r . z >= h_r of a box-constrained LP in few variables and many rows.
/// A row with finite cap is soft: its violation is charged cap per unit in the
/// objective. cap == 0 disables the row.
class LpRows {
 public:
  virtual ~LpRows() = default;
  virtual std::size_t rows() const = 0;
  virtual void coefficients(std::size_t r, std::span<double> g) const = 0;
  virtual double rhs(std::size_t r) const = 0;
  virtual double cap(std::size_t r) const = 0;
};

inline constexpr double kHardRow = std::numeric_limits<double>::infinity();

struct RowLpOptions {
  double tolerance = 1e-9;
  std::size_t rows_per_round = 256;
  /// Random tie-breaking perturbation of the cost, relative to its scale.
  double perturbation = 1e-10;
  std::uint64_t seed = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  std::size_t max_iterations = 2'000'000;
};

struct RowLpResult {
  enum class Status { optimal, time_limit, iteration_limit };
  Status status = Status::optimal;
  std::vector<double> z;
  /// cost . z + sum over soft rows of cap * max(0, h - g.z), unperturbed.
  double objective = 0.0;
  std::size_t iterations = 0;
  std::size_t working_rows = 0;
};

/// min cost.z + sum_soft cap_r * max(0, h_r - g_r.z)
/// s.t. g_r.z >= h_r for hard rows, lo <= z <= hi.
/// Bounded revised simplex on the dual; rows enter lazily by most violated.
/// Hard rows must be jointly feasible inside the box.
RowLpResult solve_row_lp(const LpRows& rows, std::span<const double> cost,
                         std::span<const double> lo, std::span<const double> hi,
                         const RowLpOptions& opt = {});

}  // namespace kplex
