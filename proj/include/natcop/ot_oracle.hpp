#pragma once

#include <vector>

#include "natcop/hermite_marginals.hpp"

namespace natcop {

/// Finitely supported probability measure on [0,1].
struct DiscreteDistribution {
  std::vector<double> support;
  std::vector<double> masses;

  /// Throws kInvalidArgument unless support increases strictly and masses are
  /// nonnegative and sum to 1 within 1e-10.
  void validate() const;
};

/// Coupling between two discrete distributions with squared-distance cost.
struct TransportPlan {
  std::vector<std::vector<double>> plan;  // plan[i][j]: mass moved from source i to target j
  double cost = 0.0;
};

inline constexpr int kDefaultOracleResolution = 200;
inline constexpr std::size_t kMaxLpSupport = 64;

/// n equispaced midpoints; masses proportional to the density, renormalized.
DiscreteDistribution discretize(const MarginalDensity& density, int n);

/// Exact W2 plan by the monotone (quantile) coupling.
TransportPlan solve_ot_1d(const DiscreteDistribution& mu, const DiscreteDistribution& nu);

/// The Kantorovich transport LP solved with the simplex solver. Supports are
/// limited to 64 points each.
TransportPlan solve_ot_lp(const DiscreteDistribution& mu, const DiscreteDistribution& nu);

/// Squared W2 distance between two marginals at the default resolution.
double w2_squared(const MarginalDensity& a, const MarginalDensity& b,
                  int n = kDefaultOracleResolution);

}  // namespace natcop
