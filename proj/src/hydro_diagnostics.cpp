#include "natcop/hydro_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "natcop/error.hpp"

namespace natcop {

namespace {

constexpr double kContourStep = 1e-4;
constexpr double kLaplacianStep = 1e-3;
constexpr double kJumpOffset = 1e-11;

double ipow(double x, int p) {
  double r = 1.0;
  for (int k = 0; k < p; ++k) r *= x;
  return r;
}

double checked(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::kNumericalDomain, "potential is not finite");
  return v;
}

double second_difference(const std::function<double(double)>& f, double t, double h) {
  if (t - h >= 0.0 && t + h <= 1.0) return (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
  const double s = t - h < 0.0 ? h : -h;
  return (2.0 * f(t) - 5.0 * f(t + s) + 4.0 * f(t + 2 * s) - f(t + 3 * s)) / (h * h);
}

double first_difference(const std::function<double(double)>& f, double t, double h) {
  if (t - h >= 0.0 && t + h <= 1.0) return (f(t + h) - f(t - h)) / (2.0 * h);
  const double s = t - h < 0.0 ? h : -h;
  return (-3.0 * f(t) + 4.0 * f(t + s) - f(t + 2 * s)) / (2.0 * s);
}

// Partial moments A_p(x) = int_0^x f(s) s^p ds for p = 0..max_power, with
// prefix sums over the density's smooth panels.
class CumulativeMoments {
 public:
  CumulativeMoments(const MarginalDensity& f, int max_power, int n)
      : f_(f), max_power_(max_power), ref_(legendre_reference(n)), breaks_(f.breakpoints()) {
    prefix_.assign(breaks_.size(), std::vector<double>(max_power + 1, 0.0));
    for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
      prefix_[p + 1] = prefix_[p];
      accumulate(breaks_[p], breaks_[p + 1], prefix_[p + 1]);
    }
  }

  std::vector<double> operator()(double x) const {
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    const std::size_t panel = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
    if (panel + 1 >= breaks_.size()) return prefix_.back();
    std::vector<double> out = prefix_[panel];
    accumulate(breaks_[panel], x, out);
    return out;
  }

 private:
  void accumulate(double a, double b, std::vector<double>& out) const {
    if (!(b > a)) return;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t k = 0; k < ref_.nodes.size(); ++k) {
      const double s = mid + half * ref_.nodes[k];
      const double w = half * ref_.weights[k] * f_(s);
      double sp = 1.0;
      for (int p = 0; p <= max_power_; ++p) {
        out[p] += w * sp;
        sp *= s;
      }
    }
  }

  MarginalDensity f_;
  int max_power_;
  ReferenceRule ref_;
  std::vector<double> breaks_;
  std::vector<std::vector<double>> prefix_;
};

struct Segment {
  bool horizontal;  // runs along x at fixed y, otherwise along y at fixed x
  double fixed;
  double direction;  // +1 when traversed in increasing coordinate
};

// Positively oriented boundary of the unit square.
constexpr Segment kBoundary[4] = {
    {true, 0.0, 1.0}, {false, 1.0, 1.0}, {true, 1.0, -1.0}, {false, 0.0, -1.0}};

}  // namespace

Gradient finite_difference_gradient(const std::function<double(double, double)>& v, double x,
                                    double y, double h) {
  Gradient g;
  g.dx = first_difference([&](double t) { return v(t, y); }, x, h);
  g.dy = first_difference([&](double t) { return v(x, t); }, y, h);
  return g;
}

Gradient Potential::grad(double x, double y) const {
  if (gradient) return gradient(x, y);
  return finite_difference_gradient(value, x, y, kContourStep);
}

double Potential::lap(double x, double y) const {
  if (laplacian) return laplacian(x, y);
  return second_difference([&](double t) { return value(t, y); }, x, kLaplacianStep) +
         second_difference([&](double t) { return value(x, t); }, y, kLaplacianStep);
}

Potential density_potential(const CopulaModel& model) {
  auto m = std::make_shared<const CopulaModel>(model);
  Potential p;
  p.value = [m](double x, double y) { return m->density(x, y); };
  p.gradient = [m](double x, double y) {
    const double fx = m->fx()(x);
    const double fy = m->fy()(y);
    const double t = m->tau(x, y);
    return Gradient{m->fx().derivative(x) * fy * t + fx * fy * m->tau_dx(x, y),
                    fx * m->fy().derivative(y) * t + fx * fy * m->tau_dy(x, y)};
  };
  p.laplacian = [m](double x, double y) {
    const double fx = m->fx()(x);
    const double fy = m->fy()(y);
    const double dfx = m->fx().derivative(x);
    const double dfy = m->fy().derivative(y);
    const double t = m->tau(x, y);
    return m->fx().second_derivative(x) * fy * t + 2.0 * dfx * fy * m->tau_dx(x, y) +
           fx * fy * m->tau_dxx(x, y) + fx * m->fy().second_derivative(y) * t +
           2.0 * fx * dfy * m->tau_dy(x, y) + fx * fy * m->tau_dyy(x, y);
  };
  p.kinks_x = model.fx().kinks();
  p.kinks_y = model.fy().kinks();
  return p;
}

Potential cdf_potential(const CopulaModel& model) {
  auto m = std::make_shared<const CopulaModel>(model);
  auto ax = std::make_shared<const CumulativeMoments>(model.fx(), model.basis().max_x_exp(), model.quad_n());
  auto ay = std::make_shared<const CumulativeMoments>(model.fy(), model.basis().max_y_exp(), model.quad_n());
  Potential p;
  p.value = [m, ax, ay](double x, double y) {
    const auto a = (*ax)(x);
    const auto b = (*ay)(y);
    double v = m->constant() * a[0] * b[0];
    for (std::size_t i = 0; i < m->coefficients().size(); ++i) {
      const auto& t = m->basis().terms()[i];
      v += m->coefficients()[i] * a[t.x_exp] * b[t.y_exp];
    }
    return v;
  };
  // Bracket factors: d/dx V = f_X(x) * Bx(x, y), d/dy V = f_Y(y) * By(x, y).
  auto bx = [m](double x, const std::vector<double>& b) {
    double s = m->constant() * b[0];
    for (std::size_t i = 0; i < m->coefficients().size(); ++i) {
      const auto& t = m->basis().terms()[i];
      s += m->coefficients()[i] * ipow(x, t.x_exp) * b[t.y_exp];
    }
    return s;
  };
  auto by = [m](double y, const std::vector<double>& a) {
    double s = m->constant() * a[0];
    for (std::size_t i = 0; i < m->coefficients().size(); ++i) {
      const auto& t = m->basis().terms()[i];
      s += m->coefficients()[i] * a[t.x_exp] * ipow(y, t.y_exp);
    }
    return s;
  };
  p.gradient = [m, ax, ay, bx, by](double x, double y) {
    return Gradient{m->fx()(x) * bx(x, (*ay)(y)), m->fy()(y) * by(y, (*ax)(x))};
  };
  p.laplacian = [m, ax, ay, bx, by](double x, double y) {
    const auto a = (*ax)(x);
    const auto b = (*ay)(y);
    double dbx = 0.0;
    double dby = 0.0;
    for (std::size_t i = 0; i < m->coefficients().size(); ++i) {
      const auto& t = m->basis().terms()[i];
      dbx += m->coefficients()[i] * t.x_exp * ipow(x, t.x_exp - 1) * b[t.y_exp];
      dby += m->coefficients()[i] * t.y_exp * a[t.x_exp] * ipow(y, t.y_exp - 1);
    }
    return m->fx().derivative(x) * bx(x, b) + m->fx()(x) * dbx + m->fy().derivative(y) * by(y, a) +
           m->fy()(y) * dby;
  };
  return p;
}

Potential copula_potential(const CopulaModel& model, PotentialKind kind) {
  return kind == PotentialKind::kDensity ? density_potential(model) : cdf_potential(model);
}

VelocityField velocity_field(const Potential& v, int grid_n, std::optional<double> step,
                             bool force_finite_difference) {
  if (grid_n < 2) throw Error(ErrorKind::kInvalidArgument, "velocity grid needs grid_n >= 2");
  const double h = step.value_or(1.0 / (4.0 * grid_n));
  if (!(h > 0.0 && h < 0.25)) throw Error(ErrorKind::kInvalidArgument, "finite-difference step out of range");
  VelocityField field;
  const std::size_t total = static_cast<std::size_t>(grid_n) * grid_n;
  field.x.reserve(total);
  field.y.reserve(total);
  field.vx.reserve(total);
  field.vy.reserve(total);
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const double x = static_cast<double>(i) / (grid_n - 1);
      const double y = static_cast<double>(j) / (grid_n - 1);
      const Gradient g = (v.gradient && !force_finite_difference)
                             ? v.gradient(x, y)
                             : finite_difference_gradient(v.value, x, y, h);
      field.x.push_back(x);
      field.y.push_back(y);
      field.vx.push_back(checked(g.dy));
      field.vy.push_back(checked(-g.dx));
    }
  }
  return field;
}

// Legs run bottom x: 0->1, right y: 0->1, top x: 1->0, left y: 1->0; the
// reversed limits on top and left flip the sign of the [0,1] integral.
ContourLegs circulation_legs(const Potential& v, const QuadratureRule& rule_x,
                             const QuadratureRule& rule_y) {
  auto vx = [&](double x, double y) { return v.grad(x, y).dy; };
  auto vy = [&](double x, double y) { return -v.grad(x, y).dx; };
  ContourLegs legs;
  legs.bottom = integrate_1d([&](double x) { return vx(x, 0.0); }, rule_x);
  legs.right = integrate_1d([&](double y) { return vy(1.0, y); }, rule_y);
  legs.top = -integrate_1d([&](double x) { return vx(x, 1.0); }, rule_x);
  legs.left = -integrate_1d([&](double y) { return vy(0.0, y); }, rule_y);
  return legs;
}

ContourLegs flux_legs(const Potential& v, const QuadratureRule& rule_x, const QuadratureRule& rule_y) {
  auto vx = [&](double x, double y) { return v.grad(x, y).dy; };
  auto vy = [&](double x, double y) { return -v.grad(x, y).dx; };
  ContourLegs legs;
  legs.bottom = -integrate_1d([&](double x) { return vy(x, 0.0); }, rule_x);
  legs.right = integrate_1d([&](double y) { return vx(1.0, y); }, rule_y);
  legs.top = integrate_1d([&](double x) { return vy(x, 1.0); }, rule_x);
  legs.left = -integrate_1d([&](double y) { return vx(0.0, y); }, rule_y);
  return legs;
}

namespace {

// Line integrals of v.T (circulation) or v.N (outward flux) along the
// positively oriented boundary, N = (T_y, -T_x).
double boundary_integral(const Potential& v, const QuadratureRule& rule_x,
                         const QuadratureRule& rule_y, bool normal) {
  double total = 0.0;
  for (const Segment& s : kBoundary) {
    const double tx = s.horizontal ? s.direction : 0.0;
    const double ty = s.horizontal ? 0.0 : s.direction;
    const double dx = normal ? ty : tx;
    const double dy = normal ? -tx : ty;
    const QuadratureRule& rule = s.horizontal ? rule_x : rule_y;
    total += integrate_1d(
        [&](double q) {
          const double x = s.horizontal ? q : s.fixed;
          const double y = s.horizontal ? s.fixed : q;
          const Gradient g = v.grad(x, y);
          return g.dy * dx - g.dx * dy;
        },
        rule);
  }
  return total;
}

}  // namespace

double circulation(const Potential& v, const QuadratureRule& rule_x, const QuadratureRule& rule_y,
                   ContourConvention convention) {
  if (convention == ContourConvention::kLegwise) return circulation_legs(v, rule_x, rule_y).total();
  return boundary_integral(v, rule_x, rule_y, false);
}

double flux(const Potential& v, const QuadratureRule& rule_x, const QuadratureRule& rule_y,
            ContourConvention convention) {
  if (convention == ContourConvention::kLegwise) return flux_legs(v, rule_x, rule_y).total();
  return boundary_integral(v, rule_x, rule_y, true);
}

double area_circulation(const Potential& v, const QuadratureRule& rule_x,
                        const QuadratureRule& rule_y) {
  double laplacian = integrate_2d([&](double x, double y) { return v.lap(x, y); }, rule_x, rule_y);
  for (double xk : v.kinks_x) {
    laplacian += integrate_1d(
        [&](double y) { return v.grad(xk + kJumpOffset, y).dx - v.grad(xk - kJumpOffset, y).dx; },
        rule_y);
  }
  for (double yk : v.kinks_y) {
    laplacian += integrate_1d(
        [&](double x) { return v.grad(x, yk + kJumpOffset).dy - v.grad(x, yk - kJumpOffset).dy; },
        rule_x);
  }
  return -laplacian;
}

double green_check(const Potential& v, const QuadratureRule& rule_x, const QuadratureRule& rule_y) {
  return std::abs(circulation(v, rule_x, rule_y) - area_circulation(v, rule_x, rule_y));
}

FlowSummary flow_summary(const Potential& v, const QuadratureRule& rule_x,
                         const QuadratureRule& rule_y, ContourConvention convention) {
  FlowSummary s;
  s.circulation = circulation(v, rule_x, rule_y, convention);
  s.flux = flux(v, rule_x, rule_y, convention);
  s.green_residual = std::abs(s.circulation - area_circulation(v, rule_x, rule_y));
  return s;
}

}  // namespace natcop
