#include "natcop/simplex_lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "natcop/error.hpp"

namespace natcop {

void LinearProgram::add_constraint(std::vector<double> row, Sense sense, double value) {
  constraints.push_back(std::move(row));
  senses.push_back(sense);
  rhs.push_back(value);
}

const char* to_string(LpStatus status) noexcept {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

// Standard-form tableau: rows 0..m-1 are constraints, row m holds reduced
// costs with -objective in the rhs column.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return data_[i * (cols_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * (cols_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, cols_); }
  double& cost(std::size_t j) { return at(rows_, j); }
  double& neg_objective() { return at(rows_, cols_); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t q) {
    const std::size_t stride = cols_ + 1;
    double* prow = &data_[r * stride];
    const double inv = 1.0 / prow[q];
    nonzero_.clear();
    for (std::size_t j = 0; j <= cols_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nonzero_.push_back(j);
      }
    }
    prow[q] = 1.0;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      double* row = &data_[i * stride];
      const double f = row[q];
      if (f == 0.0) continue;
      for (std::size_t j : nonzero_) row[j] -= f * prow[j];
      row[q] = 0.0;
    }
    basis_[r] = q;
  }

  void drop_row(std::size_t r) {
    const std::size_t stride = cols_ + 1;
    data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(r * stride),
                data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * stride));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    --rows_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nonzero_;
};

enum class PhaseResult { kOptimal, kUnbounded };

// Bland's rule: lowest-index improving column enters; among minimum-ratio
// rows the lowest-index basic variable leaves.
PhaseResult run_phase(Tableau& t, std::size_t allowed_cols, long& pivots) {
  while (true) {
    std::size_t q = allowed_cols;
    for (std::size_t j = 0; j < allowed_cols; ++j) {
      if (t.cost(j) < -kPivotTolerance) {
        q = j;
        break;
      }
    }
    if (q == allowed_cols) return PhaseResult::kOptimal;

    std::size_t r = t.rows();
    double best = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, q);
      if (a <= kRatioPivotTolerance) continue;
      const double ratio = std::max(0.0, t.rhs(i)) / a;
      const double tie = 1e-12 * (1.0 + best);
      if (r == t.rows() || ratio < best - tie) {
        r = i;
        best = ratio;
      } else if (ratio <= best + tie && t.basis()[i] < t.basis()[r]) {
        r = i;
        best = std::min(best, ratio);
      }
    }
    if (r == t.rows()) return PhaseResult::kUnbounded;
    if (++pivots > kMaxPivots) {
      throw Error(ErrorKind::kSolverStall, "simplex exceeded " + std::to_string(kMaxPivots) + " pivots");
    }
    t.pivot(r, q);
  }
}

}  // namespace

LpSolution solve(const LinearProgram& lp) {
  const std::size_t n = lp.objective.size();
  const std::size_t m = lp.constraints.size();
  if (lp.senses.size() != m || lp.rhs.size() != m || lp.lower_bounds.size() != n) {
    throw Error(ErrorKind::kInvalidArgument, "linear program dimensions disagree");
  }
  for (const auto& row : lp.constraints) {
    if (row.size() != n) throw Error(ErrorKind::kInvalidArgument, "constraint row length mismatch");
  }
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "linear program has no variables");
  if (n > kMaxLpVariables || m > kMaxLpConstraints) {
    throw Error(ErrorKind::kInvalidArgument, "linear program exceeds the dense solver size limits");
  }

  // Structural columns: bounded variables shift to x' = x - l >= 0, free
  // variables split into x+ - x-.
  std::vector<std::size_t> first_col(n);
  std::size_t structural = 0;
  for (std::size_t j = 0; j < n; ++j) {
    first_col[j] = structural;
    structural += lp.lower_bounds[j].has_value() ? 1 : 2;
  }

  std::vector<double> b(m);
  std::vector<Sense> sense(lp.senses);
  std::vector<double> row_scale(m, 1.0);
  std::size_t n_slack = 0;
  std::size_t n_art = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double v = lp.rhs[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (lp.lower_bounds[j]) v -= lp.constraints[i][j] * *lp.lower_bounds[j];
    }
    // Negating a >= row with zero rhs lets its slack start in the basis, so
    // only rows with a positive requirement need artificials.
    if (v < 0.0 || (v == 0.0 && sense[i] == Sense::kGreaterEqual)) {
      row_scale[i] = -1.0;
      v = -v;
      if (sense[i] == Sense::kLessEqual) {
        sense[i] = Sense::kGreaterEqual;
      } else if (sense[i] == Sense::kGreaterEqual) {
        sense[i] = Sense::kLessEqual;
      }
    }
    // Equilibrate so the largest coefficient in each row is one.
    double row_max = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_max = std::max(row_max, std::abs(lp.constraints[i][j]));
    if (row_max > 0.0) {
      row_scale[i] /= row_max;
      v /= row_max;
    }
    b[i] = v;
    if (sense[i] != Sense::kEqual) ++n_slack;
    if (sense[i] != Sense::kLessEqual) ++n_art;
  }

  const std::size_t art_begin = structural + n_slack;
  Tableau t(m, art_begin + n_art);
  std::size_t slack = structural;
  std::size_t art = art_begin;
  // Column holding +e_i in row i; its reduced cost is minus the row's multiplier.
  std::vector<std::size_t> unit_col(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = row_scale[i] * lp.constraints[i][j];
      t.at(i, first_col[j]) = a;
      if (!lp.lower_bounds[j]) t.at(i, first_col[j] + 1) = -a;
    }
    t.rhs(i) = b[i];
    if (sense[i] == Sense::kLessEqual) {
      t.at(i, slack) = 1.0;
      unit_col[i] = slack;
      t.basis()[i] = slack++;
    } else {
      if (sense[i] == Sense::kGreaterEqual) t.at(i, slack++) = -1.0;
      t.at(i, art) = 1.0;
      unit_col[i] = art;
      t.basis()[i] = art++;
    }
  }

  LpSolution sol;
  // Phase one: minimize the sum of artificials.
  if (n_art > 0) {
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] < art_begin) continue;
      for (std::size_t j = 0; j < art_begin; ++j) t.cost(j) -= t.at(i, j);
      t.neg_objective() -= t.rhs(i);
    }
    // The phase-one objective is bounded below by zero, so an unbounded ray
    // can only come from accumulated rounding.
    if (run_phase(t, t.cols(), sol.pivots) == PhaseResult::kUnbounded) {
      throw Error(ErrorKind::kSolverStall, "simplex phase one broke down numerically");
    }
    double scale = 1.0;
    for (double v : b) scale = std::max(scale, v);
    if (-t.neg_objective() > 1e-9 * scale) {
      sol.status = LpStatus::kInfeasible;
      return sol;
    }
    // Drive remaining (zero-level) artificials out; rows with no admissible
    // pivot are linearly dependent and dropped.
    for (std::size_t i = 0; i < t.rows();) {
      if (t.basis()[i] < art_begin) {
        ++i;
        continue;
      }
      std::size_t q = art_begin;
      for (std::size_t j = 0; j < art_begin; ++j) {
        if (std::abs(t.at(i, j)) > kRatioPivotTolerance) {
          q = j;
          break;
        }
      }
      if (q == art_begin) {
        t.drop_row(i);
      } else {
        t.pivot(i, q);
        ++i;
      }
    }
  }

  // Phase two on the original costs, artificials barred from entering.
  std::vector<double> c(t.cols(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    c[first_col[j]] = lp.objective[j];
    if (!lp.lower_bounds[j]) c[first_col[j] + 1] = -lp.objective[j];
  }
  for (std::size_t j = 0; j < t.cols(); ++j) t.cost(j) = c[j];
  t.neg_objective() = 0.0;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const double cb = c[t.basis()[i]];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= t.cols(); ++j) t.at(t.rows(), j) -= cb * t.at(i, j);
  }
  if (run_phase(t, art_begin, sol.pivots) == PhaseResult::kUnbounded) {
    sol.status = LpStatus::kUnbounded;
    return sol;
  }

  std::vector<double> x_std(t.cols(), 0.0);
  for (std::size_t i = 0; i < t.rows(); ++i) x_std[t.basis()[i]] = t.rhs(i);
  sol.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (lp.lower_bounds[j]) {
      sol.values[j] = *lp.lower_bounds[j] + x_std[first_col[j]];
    } else {
      sol.values[j] = x_std[first_col[j]] - x_std[first_col[j] + 1];
    }
  }
  sol.objective_value = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective_value += lp.objective[j] * sol.values[j];
  sol.duals.resize(m);
  for (std::size_t i = 0; i < m; ++i) sol.duals[i] = -t.cost(unit_col[i]) * row_scale[i];
  sol.reduced_costs.resize(art_begin);
  for (std::size_t j = 0; j < art_begin; ++j) sol.reduced_costs[j] = t.cost(j);
  sol.status = LpStatus::kOptimal;
  return sol;
}

}  // namespace natcop
