#include "natcop/correlation.hpp"

#include <cmath>

namespace natcop {

double correlation_ct(const CopulaModel& model, const QuadratureRule& rule_x,
                      const QuadratureRule& rule_y) {
  return integrate_2d(
      [&](double x, double y) {
        const double t = model.tau(x, y);
        return model.fx()(x) * model.fy()(y) * (t * t - 1.0);
      },
      rule_x, rule_y);
}

double correlation_ct(const CopulaModel& model) {
  return correlation_ct(model, model.rule_x(), model.rule_y());
}

double tau_variance(const CopulaModel& model, const QuadratureRule& rule_x,
                    const QuadratureRule& rule_y) {
  const double mean = total_mass(model, rule_x, rule_y);
  return integrate_2d(
      [&](double x, double y) {
        const double d = model.tau(x, y) - mean;
        return model.fx()(x) * model.fy()(y) * d * d;
      },
      rule_x, rule_y);
}

CorrelationReport correlation_report(const CopulaModel& model) {
  const QuadratureRule rx = model.rule_x();
  const QuadratureRule ry = model.rule_y();
  CorrelationReport r;
  r.ct = correlation_ct(model, rx, ry);
  r.normalized = std::abs(total_mass(model, rx, ry) - 1.0) <= 1e-8;
  if (r.normalized) r.variance_residual = std::abs(r.ct - tau_variance(model, rx, ry));
  return r;
}

}  // namespace natcop
