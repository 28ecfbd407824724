#pragma once

#include <optional>
#include <vector>

namespace natcop {

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

/// Dense LP: minimize objective . x subject to constraints[i] . x (sense) rhs[i]
/// and x[j] >= lower_bounds[j] where a bound is present. Variables without a
/// bound are free.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> constraints;
  std::vector<Sense> senses;
  std::vector<double> rhs;
  std::vector<std::optional<double>> lower_bounds;

  std::size_t num_variables() const noexcept { return objective.size(); }
  std::size_t num_constraints() const noexcept { return constraints.size(); }

  void add_constraint(std::vector<double> row, Sense sense, double value);
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* to_string(LpStatus status) noexcept;

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> values;
  double objective_value = 0.0;
  /// Phase-two reduced costs over the internal standard-form columns
  /// (split variables, slacks, surpluses). All are >= -pivot tolerance at an
  /// optimal vertex.
  std::vector<double> reduced_costs;
  /// One multiplier per constraint: objective = c - sum_i duals[i] * row_i is
  /// nonnegative on bounded variables and zero on free ones. Signs: >= 0 for
  /// >= rows, <= 0 for <= rows.
  std::vector<double> duals;
  long pivots = 0;
};

/// Reduced costs above -kPivotTolerance count as nonnegative.
inline constexpr double kPivotTolerance = 1e-11;
/// Smallest admissible pivot element in the ratio test. Rows are equilibrated
/// to unit max-norm first, so this is relative to the row scale.
inline constexpr double kRatioPivotTolerance = 1e-9;
inline constexpr long kMaxPivots = 1'000'000;
inline constexpr std::size_t kMaxLpVariables = 4096;
inline constexpr std::size_t kMaxLpConstraints = 5000;

/// Two-phase dense tableau simplex with Bland's rule.
LpSolution solve(const LinearProgram& lp);

}  // namespace natcop
