#include "natcop/ot_oracle.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "natcop/error.hpp"
#include "natcop/simplex_lp.hpp"

namespace natcop {

void DiscreteDistribution::validate() const {
  if (support.empty() || support.size() != masses.size()) {
    throw Error(ErrorKind::kInvalidArgument, "distribution needs matching non-empty support and masses");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (!(masses[i] >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "negative mass");
    if (i > 0 && !(support[i] > support[i - 1])) {
      throw Error(ErrorKind::kInvalidArgument, "support must increase strictly");
    }
    total += masses[i];
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw Error(ErrorKind::kInvalidArgument, "masses must sum to 1");
  }
}

DiscreteDistribution discretize(const MarginalDensity& density, int n) {
  if (n < 2) throw Error(ErrorKind::kInvalidArgument, "discretization needs n >= 2");
  DiscreteDistribution d;
  d.support.resize(n);
  d.masses.resize(n);
  for (int i = 0; i < n; ++i) {
    d.support[i] = (i + 0.5) / n;
    d.masses[i] = density(d.support[i]);
  }
  const double total = std::accumulate(d.masses.begin(), d.masses.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorKind::kDegenerateDensity, "density vanishes at every sample point");
  }
  for (double& m : d.masses) m /= total;
  return d;
}

TransportPlan solve_ot_1d(const DiscreteDistribution& mu, const DiscreteDistribution& nu) {
  mu.validate();
  nu.validate();
  const std::size_t n = mu.support.size();
  const std::size_t m = nu.support.size();
  TransportPlan tp;
  tp.plan.assign(n, std::vector<double>(m, 0.0));
  std::size_t i = 0;
  std::size_t j = 0;
  double a = mu.masses[0];
  double b = nu.masses[0];
  while (i < n && j < m) {
    const double moved = std::min(a, b);
    tp.plan[i][j] += moved;
    const double d = mu.support[i] - nu.support[j];
    tp.cost += moved * d * d;
    a -= moved;
    b -= moved;
    // Advance whichever side is exhausted; on the final pair both may carry
    // rounding residue, so the last index on either side absorbs it.
    if (a <= b) {
      if (++i < n) a = mu.masses[i];
    } else {
      if (++j < m) b = nu.masses[j];
    }
  }
  return tp;
}

TransportPlan solve_ot_lp(const DiscreteDistribution& mu, const DiscreteDistribution& nu) {
  mu.validate();
  nu.validate();
  const std::size_t n = mu.support.size();
  const std::size_t m = nu.support.size();
  if (n > kMaxLpSupport || m > kMaxLpSupport) {
    throw Error(ErrorKind::kInvalidArgument,
                "transport LP supports are limited to 64 points, got " + std::to_string(n) + "x" +
                    std::to_string(m));
  }
  LinearProgram lp;
  lp.objective.resize(n * m);
  lp.lower_bounds.assign(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = mu.support[i] - nu.support[j];
      lp.objective[i * m + j] = d * d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(n * m, 0.0);
    for (std::size_t j = 0; j < m; ++j) row[i * m + j] = 1.0;
    lp.add_constraint(std::move(row), Sense::kEqual, mu.masses[i]);
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> row(n * m, 0.0);
    for (std::size_t i = 0; i < n; ++i) row[i * m + j] = 1.0;
    lp.add_constraint(std::move(row), Sense::kEqual, nu.masses[j]);
  }
  const LpSolution sol = solve(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw Error(ErrorKind::kModel, std::string("transport LP ended ") + to_string(sol.status));
  }
  TransportPlan tp;
  tp.plan.assign(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) tp.plan[i][j] = std::max(0.0, sol.values[i * m + j]);
  }
  tp.cost = sol.objective_value;
  return tp;
}

double w2_squared(const MarginalDensity& a, const MarginalDensity& b, int n) {
  return solve_ot_1d(discretize(a, n), discretize(b, n)).cost;
}

}  // namespace natcop
