#pragma once

#include "natcop/natural_copula.hpp"

namespace natcop {

/// C_T = int int f_X f_Y (tau^2 - 1).
double correlation_ct(const CopulaModel& model, const QuadratureRule& rule_x,
                      const QuadratureRule& rule_y);
double correlation_ct(const CopulaModel& model);

/// Var(tau) under the product measure f_X f_Y, computed about its own mean.
/// Equals C_T whenever int int f_X f_Y tau = 1.
double tau_variance(const CopulaModel& model, const QuadratureRule& rule_x,
                    const QuadratureRule& rule_y);

struct CorrelationReport {
  double ct = 0.0;
  double variance_residual = 0.0;  // |C_T - Var(tau)|, 0 when skipped
  bool normalized = true;          // false: identity check skipped
};

/// C_T plus the variance-identity residual. The identity is only checked when
/// the model's normalization holds within 1e-8.
CorrelationReport correlation_report(const CopulaModel& model);

}  // namespace natcop
