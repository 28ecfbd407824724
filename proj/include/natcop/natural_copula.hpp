#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "natcop/hermite_marginals.hpp"
#include "natcop/quadrature.hpp"
#include "natcop/simplex_lp.hpp"

namespace natcop {

/// x^x_exp * y^y_exp with both exponents >= 1, so the term vanishes on the
/// axes.
struct Monomial {
  int x_exp = 1;
  int y_exp = 1;

  auto operator<=>(const Monomial&) const = default;
  double operator()(double x, double y) const;
};

inline constexpr std::size_t kMaxBasisSize = 8;

class MonomialBasis {
 public:
  MonomialBasis() = default;
  explicit MonomialBasis(std::vector<Monomial> terms);

  /// {(1,1),(2,1),(1,2),(2,2)}.
  static MonomialBasis standard();

  /// Parses "11,21,12,22" (one digit per exponent); "" or "none" is empty.
  static MonomialBasis parse(std::string_view text);

  const std::vector<Monomial>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  int max_x_exp() const noexcept;
  int max_y_exp() const noexcept;

  /// Exponents swapped; pairs with exchanging the marginals.
  MonomialBasis transposed() const;
  std::string to_string() const;

 private:
  std::vector<Monomial> terms_;
};

/// Index 0 is the constant term; index i >= 1 is basis term i-1.
///   I[i]       = int int f_X f_Y m_i
///   I_tilde[i] = int int (x - y)^2 f_X f_Y m_i
struct CostIntegrals {
  std::vector<double> I;
  std::vector<double> I_tilde;
};

CostIntegrals compute_integrals(const MarginalDensity& fx, const MarginalDensity& fy,
                                const MonomialBasis& basis, const QuadratureRule& rule_x,
                                const QuadratureRule& rule_y);

inline CostIntegrals compute_integrals(const MarginalDensity& fx, const MarginalDensity& fy,
                                       const MonomialBasis& basis, const QuadratureRule& rule) {
  return compute_integrals(fx, fy, basis, rule, rule);
}

/// Moments int f(x) x^p dx for p = 0..max_power.
std::vector<double> marginal_moments(const MarginalDensity& f, int max_power,
                                     const QuadratureRule& rule);

inline constexpr int kDefaultEnforcementGrid = 21;
inline constexpr int kDefaultCheckGrid = 101;

/// LP row for tau(x, y) over the variables (C, c_1..c_m).
std::vector<double> tau_row(const MonomialBasis& basis, double x, double y);

/// Variables (C, c_1..c_m), all free. Minimize sum c_i I_tilde[i] subject to
/// sum c_i I[i] >= 1 and tau >= 0 on a grid_n x grid_n equispaced grid that
/// includes the boundary. With moment_constraints = k > 0, the x- and
/// y-marginals of pi additionally match the first k moments of f_X and f_Y.
LinearProgram assemble_lp(const CostIntegrals& integrals, const MarginalDensity& fx,
                          const MarginalDensity& fy, const MonomialBasis& basis, int grid_n,
                          int moment_constraints = 0, int quad_n = kDefaultQuadratureSize);

struct CopulaConfig {
  int grid_n = kDefaultEnforcementGrid;
  int check_n = kDefaultCheckGrid;
  int quad_n = kDefaultQuadratureSize;
  int moment_constraints = 0;
  int max_refinements = 20;
};

struct CopulaDiagnostics {
  double normalization = 0.0;  // sum c_i I_i at the optimum
  int refinements = 0;         // rounds that added check-grid cuts
  std::size_t cut_points = 0;  // nonnegativity rows beyond the enforcement grid
  long pivots = 0;
};

/// pi(x, y) = f_X(x) f_Y(y) tau(x, y), tau = C + sum c_i m_i(x, y).
class CopulaModel {
 public:
  CopulaModel(MarginalDensity fx, MarginalDensity fy, MonomialBasis basis, double constant,
              std::vector<double> coefficients, int quad_n = kDefaultQuadratureSize);

  const MarginalDensity& fx() const noexcept { return fx_; }
  const MarginalDensity& fy() const noexcept { return fy_; }
  const MonomialBasis& basis() const noexcept { return basis_; }
  double constant() const noexcept { return constant_; }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  int quad_n() const noexcept { return quad_n_; }

  double cost() const noexcept { return cost_; }
  void set_cost(double cost) noexcept { cost_ = cost; }
  const CopulaDiagnostics& diagnostics() const noexcept { return diagnostics_; }
  void set_diagnostics(const CopulaDiagnostics& d) { diagnostics_ = d; }

  double tau(double x, double y) const;
  double tau_dx(double x, double y) const;
  double tau_dy(double x, double y) const;
  double tau_dxx(double x, double y) const;
  double tau_dyy(double x, double y) const;

  /// Unchecked pi(x, y).
  double density(double x, double y) const { return fx_(x) * fy_(y) * tau(x, y); }

  QuadratureRule rule_x() const { return fx_.quadrature(quad_n_); }
  QuadratureRule rule_y() const { return fy_.quadrature(quad_n_); }

 private:
  MarginalDensity fx_;
  MarginalDensity fy_;
  MonomialBasis basis_;
  double constant_;
  std::vector<double> coefficients_;
  int quad_n_;
  double cost_ = 0.0;
  CopulaDiagnostics diagnostics_;
};

/// Solves the LP, then re-checks tau on the check_n grid and adds violated
/// points as further nonnegativity rows until none remain.
CopulaModel estimate_copula(const MarginalDensity& fx, const MarginalDensity& fy,
                            const MonomialBasis& basis, const CopulaConfig& config = {});

/// pi(x, y); throws kInvalidArgument outside [0,1]^2.
double copula_density(const CopulaModel& model, double x, double y);

/// int int (x - y)^2 pi.
double wasserstein_cost(const CopulaModel& model, const QuadratureRule& rule_x,
                        const QuadratureRule& rule_y);
double wasserstein_cost(const CopulaModel& model);

/// int int pi.
double total_mass(const CopulaModel& model, const QuadratureRule& rule_x,
                  const QuadratureRule& rule_y);

/// Smallest pi on an n x n equispaced grid including the boundary.
double min_density_on_grid(const CopulaModel& model, int n = kDefaultCheckGrid);

/// L1 distance between each marginal of pi and the corresponding f; the larger
/// of the two is returned.
double marginal_deviation(const CopulaModel& model);

/// Marginals of pi. y_moments[p] = int f_Y y^p (and x_moments likewise), up
/// to the largest basis exponent.
double pi_marginal_x(const CopulaModel& model, double x, const std::vector<double>& y_moments);
double pi_marginal_y(const CopulaModel& model, double y, const std::vector<double>& x_moments);

}  // namespace natcop
