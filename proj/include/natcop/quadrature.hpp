#pragma once

#include <functional>
#include <span>
#include <vector>

namespace natcop {

/// Nodes and positive weights of a quadrature rule on [0,1]. Nodes are
/// strictly increasing and interior; weights sum to the interval length.
class QuadratureRule {
 public:
  QuadratureRule(std::vector<double> nodes, std::vector<double> weights);

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

using Function1D = std::function<double(double)>;
using Function2D = std::function<double(double, double)>;

inline constexpr int kDefaultQuadratureSize = 32;
inline constexpr int kMaxQuadratureSize = 256;

/// n-point Gauss-Legendre rule mapped onto [0,1]; exact for degree 2n-1.
QuadratureRule gauss_legendre_rule(int n);

/// Composite Gauss-Legendre rule: an n-point rule on every panel between
/// consecutive breakpoints. Breakpoints must start at 0, end at 1 and be
/// strictly increasing.
QuadratureRule composite_rule(std::span<const double> breakpoints, int n);

/// Gauss-Legendre nodes and weights on the reference interval [-1,1].
struct ReferenceRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
ReferenceRule legendre_reference(int n);

double integrate_1d(const Function1D& f, const QuadratureRule& rule);

/// Tensor-product sum over rule_x for x and rule_y for y.
double integrate_2d(const Function2D& f, const QuadratureRule& rule_x,
                    const QuadratureRule& rule_y);

inline double integrate_2d(const Function2D& f, const QuadratureRule& rule) {
  return integrate_2d(f, rule, rule);
}

}  // namespace natcop
