#include "natcop/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "natcop/error.hpp"

namespace natcop {

namespace {

// Gauss-Legendre nodes on [-1,1] for the positive half, by Newton iteration
// on P_n from the Chebyshev-like initial guess.
void legendre_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    // Final derivative at the converged node.
    double p0 = 1.0;
    double p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = weight;
    w[n - 1 - i] = weight;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

void append_panel(const std::vector<double>& ref_x, const std::vector<double>& ref_w, double a,
                  double b, std::vector<double>& nodes, std::vector<double>& weights) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t k = 0; k < ref_x.size(); ++k) {
    nodes.push_back(mid + half * ref_x[k]);
    weights.push_back(half * ref_w[k]);
  }
}

void check_size(int n) {
  if (n < 1 || n > kMaxQuadratureSize) {
    throw Error(ErrorKind::kInvalidArgument,
                "quadrature size must be in [1, 256], got " + std::to_string(n));
  }
}

}  // namespace

QuadratureRule::QuadratureRule(std::vector<double> nodes, std::vector<double> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.empty() || nodes_.size() != weights_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "quadrature rule needs matching non-empty nodes/weights");
  }
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (!(nodes_[k] > 0.0 && nodes_[k] < 1.0) || !(weights_[k] > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "quadrature nodes must lie in (0,1) with positive weights");
    }
    if (k > 0 && !(nodes_[k] > nodes_[k - 1])) {
      throw Error(ErrorKind::kInvalidArgument, "quadrature nodes must be strictly increasing");
    }
  }
}

QuadratureRule gauss_legendre_rule(int n) {
  const double bp[] = {0.0, 1.0};
  return composite_rule(bp, n);
}

QuadratureRule composite_rule(std::span<const double> breakpoints, int n) {
  check_size(n);
  if (breakpoints.size() < 2 || breakpoints.front() != 0.0 || breakpoints.back() != 1.0) {
    throw Error(ErrorKind::kInvalidArgument, "composite rule breakpoints must span [0,1]");
  }
  std::vector<double> ref_x;
  std::vector<double> ref_w;
  legendre_nodes(n, ref_x, ref_w);
  std::vector<double> nodes;
  std::vector<double> weights;
  nodes.reserve(n * (breakpoints.size() - 1));
  weights.reserve(n * (breakpoints.size() - 1));
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    if (!(breakpoints[p + 1] > breakpoints[p])) {
      throw Error(ErrorKind::kInvalidArgument, "composite rule breakpoints must increase");
    }
    append_panel(ref_x, ref_w, breakpoints[p], breakpoints[p + 1], nodes, weights);
  }
  return QuadratureRule(std::move(nodes), std::move(weights));
}

ReferenceRule legendre_reference(int n) {
  check_size(n);
  ReferenceRule ref;
  legendre_nodes(n, ref.nodes, ref.weights);
  return ref;
}

double integrate_1d(const Function1D& f, const QuadratureRule& rule) {
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double v = f(nodes[k]);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kNumericalDomain,
                  "integrand not finite at x=" + std::to_string(nodes[k]));
    }
    sum += weights[k] * v;
  }
  return sum;
}

double integrate_2d(const Function2D& f, const QuadratureRule& rule_x,
                    const QuadratureRule& rule_y) {
  const auto xs = rule_x.nodes();
  const auto wx = rule_x.weights();
  const auto ys = rule_y.nodes();
  const auto wy = rule_y.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double row = 0.0;
    for (std::size_t l = 0; l < ys.size(); ++l) {
      const double v = f(xs[k], ys[l]);
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kNumericalDomain, "integrand not finite at (" +
                                                     std::to_string(xs[k]) + ", " +
                                                     std::to_string(ys[l]) + ")");
      }
      row += wy[l] * v;
    }
    sum += wx[k] * row;
  }
  return sum;
}

}  // namespace natcop
