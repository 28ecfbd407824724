#include "natcop/natural_copula.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "natcop/error.hpp"

namespace natcop {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int k = 0; k < p; ++k) r *= x;
  return r;
}

// Density values cached at the nodes of a rule. Lookups hit exactly because
// the tensor-product sum evaluates at the very same node values.
class TabulatedDensity {
 public:
  TabulatedDensity(const MarginalDensity& f, const QuadratureRule& rule)
      : f_(f), nodes_(rule.nodes().begin(), rule.nodes().end()) {
    values_.reserve(nodes_.size());
    for (double x : nodes_) values_.push_back(f(x));
  }

  double operator()(double x) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
    if (it != nodes_.end() && *it == x) return values_[static_cast<std::size_t>(it - nodes_.begin())];
    return f_(x);
  }

 private:
  const MarginalDensity& f_;
  std::vector<double> nodes_;
  std::vector<double> values_;
};

void check_unit_square(double x, double y) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "point outside [0,1]^2");
  }
}


// The copula LP has a handful of free variables and hundreds of >= rows. Its
// dual has one row per variable, which keeps the simplex tableau small and
// the rounding growth per pivot low. The primal solution is read back from
// the dual's multipliers.
LpSolution solve_via_dual(const LinearProgram& primal) {
  const std::size_t n = primal.num_variables();
  const std::size_t m = primal.num_constraints();
  LinearProgram dual;
  dual.objective.resize(m);
  dual.lower_bounds.resize(m);
  for (std::size_t r = 0; r < m; ++r) {
    dual.objective[r] = -primal.rhs[r];
    if (primal.senses[r] == Sense::kGreaterEqual) {
      dual.lower_bounds[r] = 0.0;
    } else if (primal.senses[r] == Sense::kLessEqual) {
      throw Error(ErrorKind::kInvalidArgument, "copula LP rows must be >= or =");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> row(m);
    for (std::size_t r = 0; r < m; ++r) row[r] = primal.constraints[r][j];
    dual.add_constraint(std::move(row), Sense::kEqual, primal.objective[j]);
  }

  const LpSolution d = solve(dual);
  LpSolution out;
  out.pivots = d.pivots;
  if (d.status == LpStatus::kInfeasible) {
    out.status = LpStatus::kUnbounded;
    return out;
  }
  if (d.status == LpStatus::kUnbounded) {
    out.status = LpStatus::kInfeasible;
    return out;
  }
  out.status = LpStatus::kOptimal;
  out.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.values[j] = -d.duals[j];
  for (std::size_t j = 0; j < n; ++j) out.objective_value += primal.objective[j] * out.values[j];
  return out;
}

}  // namespace

double Monomial::operator()(double x, double y) const { return ipow(x, x_exp) * ipow(y, y_exp); }

MonomialBasis::MonomialBasis(std::vector<Monomial> terms) : terms_(std::move(terms)) {
  if (terms_.size() > kMaxBasisSize) {
    throw Error(ErrorKind::kInvalidArgument, "basis holds at most 8 monomials");
  }
  std::set<Monomial> seen;
  for (const auto& t : terms_) {
    if (t.x_exp < 1 || t.y_exp < 1) {
      throw Error(ErrorKind::kInvalidArgument, "monomial exponents must be >= 1");
    }
    if (!seen.insert(t).second) throw Error(ErrorKind::kInvalidArgument, "duplicate monomial");
  }
}

MonomialBasis MonomialBasis::standard() { return MonomialBasis({{1, 1}, {2, 1}, {1, 2}, {2, 2}}); }

MonomialBasis MonomialBasis::parse(std::string_view text) {
  if (text.empty() || text == "none") return MonomialBasis();
  std::vector<Monomial> terms;
  while (true) {
    const auto comma = text.find(',');
    const std::string_view tok = text.substr(0, comma);
    if (tok.size() != 2 || tok[0] < '0' || tok[0] > '9' || tok[1] < '0' || tok[1] > '9') {
      throw Error(ErrorKind::kInvalidArgument,
                  "basis terms are two digits 'jk', got '" + std::string(tok) + "'");
    }
    terms.push_back({tok[0] - '0', tok[1] - '0'});
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return MonomialBasis(std::move(terms));
}

int MonomialBasis::max_x_exp() const noexcept {
  int m = 0;
  for (const auto& t : terms_) m = std::max(m, t.x_exp);
  return m;
}

int MonomialBasis::max_y_exp() const noexcept {
  int m = 0;
  for (const auto& t : terms_) m = std::max(m, t.y_exp);
  return m;
}

MonomialBasis MonomialBasis::transposed() const {
  std::vector<Monomial> t;
  for (const auto& m : terms_) t.push_back({m.y_exp, m.x_exp});
  return MonomialBasis(std::move(t));
}

std::string MonomialBasis::to_string() const {
  if (terms_.empty()) return "none";
  std::string s;
  for (const auto& t : terms_) {
    if (!s.empty()) s += ',';
    s += static_cast<char>('0' + t.x_exp);
    s += static_cast<char>('0' + t.y_exp);
  }
  return s;
}

CostIntegrals compute_integrals(const MarginalDensity& fx, const MarginalDensity& fy,
                                const MonomialBasis& basis, const QuadratureRule& rule_x,
                                const QuadratureRule& rule_y) {
  const TabulatedDensity tx(fx, rule_x);
  const TabulatedDensity ty(fy, rule_y);
  CostIntegrals out;
  auto add = [&](auto&& term) {
    out.I.push_back(integrate_2d(
        [&](double x, double y) { return tx(x) * ty(y) * term(x, y); }, rule_x, rule_y));
    out.I_tilde.push_back(integrate_2d(
        [&](double x, double y) {
          const double d = x - y;
          return d * d * tx(x) * ty(y) * term(x, y);
        },
        rule_x, rule_y));
  };
  add([](double, double) { return 1.0; });
  for (const auto& m : basis.terms()) add(m);
  return out;
}

std::vector<double> marginal_moments(const MarginalDensity& f, int max_power,
                                     const QuadratureRule& rule) {
  const TabulatedDensity t(f, rule);
  std::vector<double> out;
  for (int p = 0; p <= max_power; ++p) {
    out.push_back(integrate_1d([&](double x) { return t(x) * ipow(x, p); }, rule));
  }
  return out;
}

std::vector<double> tau_row(const MonomialBasis& basis, double x, double y) {
  std::vector<double> row;
  row.reserve(basis.size() + 1);
  row.push_back(1.0);
  for (const auto& m : basis.terms()) row.push_back(m(x, y));
  return row;
}

LinearProgram assemble_lp(const CostIntegrals& integrals, const MarginalDensity& fx,
                          const MarginalDensity& fy, const MonomialBasis& basis, int grid_n,
                          int moment_constraints, int quad_n) {
  const std::size_t nvars = basis.size() + 1;
  if (integrals.I.size() != nvars || integrals.I_tilde.size() != nvars) {
    throw Error(ErrorKind::kInvalidArgument, "integrals do not match the basis");
  }
  if (grid_n < 2) throw Error(ErrorKind::kInvalidArgument, "enforcement grid needs grid_n >= 2");
  if (moment_constraints < 0) throw Error(ErrorKind::kInvalidArgument, "negative moment count");

  LinearProgram lp;
  lp.objective = integrals.I_tilde;
  lp.lower_bounds.assign(nvars, std::nullopt);
  lp.add_constraint(integrals.I, Sense::kGreaterEqual, 1.0);
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const double x = static_cast<double>(i) / (grid_n - 1);
      const double y = static_cast<double>(j) / (grid_n - 1);
      lp.add_constraint(tau_row(basis, x, y), Sense::kGreaterEqual, 0.0);
    }
  }
  if (moment_constraints > 0) {
    const int k = moment_constraints;
    const auto mx = marginal_moments(fx, k + basis.max_x_exp(), fx.quadrature(quad_n));
    const auto my = marginal_moments(fy, k + basis.max_y_exp(), fy.quadrature(quad_n));
    for (int r = 1; r <= k; ++r) {
      std::vector<double> row_x{mx[r]};
      std::vector<double> row_y{my[r]};
      for (const auto& m : basis.terms()) {
        row_x.push_back(mx[r + m.x_exp] * my[m.y_exp]);
        row_y.push_back(mx[m.x_exp] * my[r + m.y_exp]);
      }
      lp.add_constraint(std::move(row_x), Sense::kEqual, mx[r]);
      lp.add_constraint(std::move(row_y), Sense::kEqual, my[r]);
    }
  }
  return lp;
}

CopulaModel::CopulaModel(MarginalDensity fx, MarginalDensity fy, MonomialBasis basis,
                         double constant, std::vector<double> coefficients, int quad_n)
    : fx_(std::move(fx)),
      fy_(std::move(fy)),
      basis_(std::move(basis)),
      constant_(constant),
      coefficients_(std::move(coefficients)),
      quad_n_(quad_n) {
  if (coefficients_.size() != basis_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "one coefficient per basis monomial required");
  }
}

double CopulaModel::tau(double x, double y) const {
  double v = constant_;
  for (std::size_t i = 0; i < coefficients_.size(); ++i) v += coefficients_[i] * basis_.terms()[i](x, y);
  return v;
}

double CopulaModel::tau_dx(double x, double y) const {
  double v = 0.0;
  for (std::size_t i = 0; i < coefficients_.size(); ++i) {
    const auto& m = basis_.terms()[i];
    v += coefficients_[i] * m.x_exp * ipow(x, m.x_exp - 1) * ipow(y, m.y_exp);
  }
  return v;
}

double CopulaModel::tau_dy(double x, double y) const {
  double v = 0.0;
  for (std::size_t i = 0; i < coefficients_.size(); ++i) {
    const auto& m = basis_.terms()[i];
    v += coefficients_[i] * m.y_exp * ipow(x, m.x_exp) * ipow(y, m.y_exp - 1);
  }
  return v;
}

double CopulaModel::tau_dxx(double x, double y) const {
  double v = 0.0;
  for (std::size_t i = 0; i < coefficients_.size(); ++i) {
    const auto& m = basis_.terms()[i];
    if (m.x_exp < 2) continue;
    v += coefficients_[i] * m.x_exp * (m.x_exp - 1) * ipow(x, m.x_exp - 2) * ipow(y, m.y_exp);
  }
  return v;
}

double CopulaModel::tau_dyy(double x, double y) const {
  double v = 0.0;
  for (std::size_t i = 0; i < coefficients_.size(); ++i) {
    const auto& m = basis_.terms()[i];
    if (m.y_exp < 2) continue;
    v += coefficients_[i] * m.y_exp * (m.y_exp - 1) * ipow(x, m.x_exp) * ipow(y, m.y_exp - 2);
  }
  return v;
}

CopulaModel estimate_copula(const MarginalDensity& fx, const MarginalDensity& fy,
                            const MonomialBasis& basis, const CopulaConfig& config) {
  if (config.check_n < 2) throw Error(ErrorKind::kInvalidArgument, "check grid needs n >= 2");
  const QuadratureRule rx = fx.quadrature(config.quad_n);
  const QuadratureRule ry = fy.quadrature(config.quad_n);
  const CostIntegrals integrals = compute_integrals(fx, fy, basis, rx, ry);
  LinearProgram lp =
      assemble_lp(integrals, fx, fy, basis, config.grid_n, config.moment_constraints, config.quad_n);

  // The product copula (C = 1, c = 0) must be feasible.
  for (std::size_t r = 0; r < lp.num_constraints(); ++r) {
    const double lhs = lp.constraints[r][0];
    const double gap = lhs - lp.rhs[r];
    const bool ok = lp.senses[r] == Sense::kEqual          ? std::abs(gap) <= 1e-8
                    : lp.senses[r] == Sense::kGreaterEqual ? gap >= -1e-8
                                                           : gap <= 1e-8;
    if (!ok) {
      throw Error(ErrorKind::kModel, "product copula violates LP row " + std::to_string(r) +
                                         "; marginals are not normalized");
    }
  }

  CopulaDiagnostics diag;
  std::set<std::pair<int, int>> enforced;
  const int ratio = (config.check_n - 1) % (config.grid_n - 1) == 0
                        ? (config.check_n - 1) / (config.grid_n - 1)
                        : 0;
  if (ratio > 0) {
    for (int i = 0; i < config.grid_n; ++i) {
      for (int j = 0; j < config.grid_n; ++j) enforced.insert({i * ratio, j * ratio});
    }
  }

  LpSolution sol;
  for (int round = 0;; ++round) {
    sol = solve_via_dual(lp);
    diag.pivots += sol.pivots;
    if (sol.status == LpStatus::kInfeasible) {
      throw Error(ErrorKind::kEstimationInfeasible, "copula LP reported infeasible");
    }
    if (sol.status == LpStatus::kUnbounded) {
      throw Error(ErrorKind::kModel, "copula LP unbounded; nonnegativity rows are insufficient");
    }
    if (round >= config.max_refinements) break;

    std::vector<std::pair<double, std::pair<int, int>>> violations;
    const int n = config.check_n;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (enforced.count({i, j})) continue;
        const auto row = tau_row(basis, static_cast<double>(i) / (n - 1), static_cast<double>(j) / (n - 1));
        double t = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) t += row[k] * sol.values[k];
        if (t < -1e-12) violations.push_back({t, {i, j}});
      }
    }
    if (violations.empty()) break;
    std::sort(violations.begin(), violations.end());
    constexpr std::size_t kCutsPerRound = 64;
    for (std::size_t v = 0; v < std::min(kCutsPerRound, violations.size()); ++v) {
      const auto [i, j] = violations[v].second;
      enforced.insert({i, j});
      lp.add_constraint(tau_row(basis, static_cast<double>(i) / (n - 1), static_cast<double>(j) / (n - 1)),
                        Sense::kGreaterEqual, 0.0);
      ++diag.cut_points;
    }
    ++diag.refinements;
  }

  std::vector<double> coeffs(sol.values.begin() + 1, sol.values.end());
  CopulaModel model(fx, fy, basis, sol.values[0], std::move(coeffs), config.quad_n);
  diag.normalization = 0.0;
  for (std::size_t k = 0; k < integrals.I.size(); ++k) diag.normalization += integrals.I[k] * sol.values[k];
  model.set_cost(sol.objective_value);
  model.set_diagnostics(diag);
  return model;
}

double copula_density(const CopulaModel& model, double x, double y) {
  check_unit_square(x, y);
  return model.density(x, y);
}

double wasserstein_cost(const CopulaModel& model, const QuadratureRule& rule_x,
                        const QuadratureRule& rule_y) {
  const TabulatedDensity tx(model.fx(), rule_x);
  const TabulatedDensity ty(model.fy(), rule_y);
  return integrate_2d(
      [&](double x, double y) {
        const double d = x - y;
        return d * d * tx(x) * ty(y) * model.tau(x, y);
      },
      rule_x, rule_y);
}

double wasserstein_cost(const CopulaModel& model) {
  return wasserstein_cost(model, model.rule_x(), model.rule_y());
}

double total_mass(const CopulaModel& model, const QuadratureRule& rule_x,
                  const QuadratureRule& rule_y) {
  const TabulatedDensity tx(model.fx(), rule_x);
  const TabulatedDensity ty(model.fy(), rule_y);
  return integrate_2d([&](double x, double y) { return tx(x) * ty(y) * model.tau(x, y); }, rule_x,
                      rule_y);
}

double min_density_on_grid(const CopulaModel& model, int n) {
  if (n < 2) throw Error(ErrorKind::kInvalidArgument, "grid needs n >= 2");
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      lowest = std::min(lowest, model.density(static_cast<double>(i) / (n - 1),
                                              static_cast<double>(j) / (n - 1)));
    }
  }
  return lowest;
}

double pi_marginal_x(const CopulaModel& model, double x, const std::vector<double>& y_moments) {
  double t = model.constant() * y_moments[0];
  for (std::size_t i = 0; i < model.coefficients().size(); ++i) {
    const auto& m = model.basis().terms()[i];
    t += model.coefficients()[i] * ipow(x, m.x_exp) * y_moments[m.y_exp];
  }
  return model.fx()(x) * t;
}

double pi_marginal_y(const CopulaModel& model, double y, const std::vector<double>& x_moments) {
  double t = model.constant() * x_moments[0];
  for (std::size_t i = 0; i < model.coefficients().size(); ++i) {
    const auto& m = model.basis().terms()[i];
    t += model.coefficients()[i] * x_moments[m.x_exp] * ipow(y, m.y_exp);
  }
  return model.fy()(y) * t;
}

double marginal_deviation(const CopulaModel& model) {
  const QuadratureRule rx = model.rule_x();
  const QuadratureRule ry = model.rule_y();
  const auto mx = marginal_moments(model.fx(), model.basis().max_x_exp(), rx);
  const auto my = marginal_moments(model.fy(), model.basis().max_y_exp(), ry);
  // The marginal difference f(x) (t(x) - 1) changes sign only where the
  // polynomial factor does; the kink-aware rule keeps |.| well resolved.
  const double dev_x = integrate_1d(
      [&](double x) { return std::abs(pi_marginal_x(model, x, my) - model.fx()(x)); }, rx);
  const double dev_y = integrate_1d(
      [&](double y) { return std::abs(pi_marginal_y(model, y, mx) - model.fy()(y)); }, ry);
  return std::max(dev_x, dev_y);
}

}  // namespace natcop
