#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "natcop/natural_copula.hpp"
#include "natcop/quadrature.hpp"

namespace natcop {

struct Gradient {
  double dx = 0.0;
  double dy = 0.0;
};

/// Stream function V on [0,1]^2. Missing derivative callbacks fall back to
/// finite differences. kinks_x (kinks_y) list vertical (horizontal) lines
/// across which the gradient jumps; they contribute line terms to the
/// Laplacian.
struct Potential {
  std::function<double(double, double)> value;
  std::function<Gradient(double, double)> gradient;
  std::function<double(double, double)> laplacian;
  std::vector<double> kinks_x;
  std::vector<double> kinks_y;

  Gradient grad(double x, double y) const;
  double lap(double x, double y) const;
};

enum class PotentialKind { kDensity, kCdf };

/// V = pi, differentiated in closed form.
Potential density_potential(const CopulaModel& model);
/// V(x, y) = int_0^x int_0^y pi, differentiated in closed form.
Potential cdf_potential(const CopulaModel& model);
Potential copula_potential(const CopulaModel& model, PotentialKind kind);

/// Probability-flow velocity v_x = dV/dy, v_y = -dV/dx on a grid_n x grid_n
/// grid including the boundary.
struct VelocityField {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> vx;
  std::vector<double> vy;
};

/// Uses the potential's gradient when present; otherwise (or when
/// force_finite_difference is set) central differences with step h, default
/// 1/(4 grid_n), second-order one-sided at the boundary.
VelocityField velocity_field(const Potential& v, int grid_n, std::optional<double> step = {},
                             bool force_finite_difference = false);

/// Finite-difference gradient with second-order one-sided stencils at the
/// edges of [0,1].
Gradient finite_difference_gradient(const std::function<double(double, double)>& v, double x,
                                    double y, double h);

enum class ContourConvention {
  kLegwise,           // leg-by-leg sum with the printed limits and signs
  kCounterclockwise,  // v.T and v.N along the positively oriented boundary
};

/// Signed contributions of the four legs of the unit-square boundary:
/// bottom (0,0)->(1,0), right (1,0)->(1,1), top (1,1)->(0,1), left (0,1)->(0,0).
struct ContourLegs {
  double bottom = 0.0;
  double right = 0.0;
  double top = 0.0;
  double left = 0.0;

  double total() const noexcept { return bottom + right + top + left; }
};

/// Gamma legs: int v_x dx, int v_y dy, int v_x dx, int v_y dy.
ContourLegs circulation_legs(const Potential& v, const QuadratureRule& rule_x,
                             const QuadratureRule& rule_y);
/// Phi legs: -int v_y dx, int v_x dy, -int v_y dx, int v_x dy.
ContourLegs flux_legs(const Potential& v, const QuadratureRule& rule_x, const QuadratureRule& rule_y);

double circulation(const Potential& v, const QuadratureRule& rule_x, const QuadratureRule& rule_y,
                   ContourConvention convention = ContourConvention::kLegwise);
double flux(const Potential& v, const QuadratureRule& rule_x, const QuadratureRule& rule_y,
            ContourConvention convention = ContourConvention::kLegwise);

inline double circulation(const Potential& v, const QuadratureRule& rule,
                          ContourConvention convention = ContourConvention::kLegwise) {
  return circulation(v, rule, rule, convention);
}
inline double flux(const Potential& v, const QuadratureRule& rule,
                   ContourConvention convention = ContourConvention::kLegwise) {
  return flux(v, rule, rule, convention);
}

/// -int int Laplacian(V) over the square, including line terms from gradient
/// jumps across the potential's kink lines.
double area_circulation(const Potential& v, const QuadratureRule& rule_x,
                        const QuadratureRule& rule_y);

/// |circulation - area_circulation|.
double green_check(const Potential& v, const QuadratureRule& rule_x, const QuadratureRule& rule_y);
inline double green_check(const Potential& v, const QuadratureRule& rule) {
  return green_check(v, rule, rule);
}

struct FlowSummary {
  double circulation = 0.0;
  double flux = 0.0;
  double green_residual = 0.0;
};

FlowSummary flow_summary(const Potential& v, const QuadratureRule& rule_x,
                         const QuadratureRule& rule_y,
                         ContourConvention convention = ContourConvention::kLegwise);

}  // namespace natcop
