#pragma once

#include <array>
#include <optional>
#include <vector>

#include "natcop/quadrature.hpp"

namespace natcop {

inline constexpr int kMaxHermiteDegree = 10;
inline constexpr int kHermiteTerms = 4;

/// Physicists' Hermite polynomial H_n(x), 0 <= n <= 10.
double hermite(int n, double x);

/// Affine map from a price interval [lo, hi] onto [0,1].
class DomainMap {
 public:
  DomainMap(double lo, double hi);

  static DomainMap identity() { return {0.0, 1.0}; }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double span() const noexcept { return hi_ - lo_; }
  double to_unit(double price) const noexcept { return (price - lo_) / (hi_ - lo_); }
  double from_unit(double u) const noexcept { return lo_ + u * (hi_ - lo_); }

 private:
  double lo_;
  double hi_;
};

/// Hermite-Gaussian marginal in price units:
///   V * sum_{i=1..4} c_i xi^i H_i((x - center)/width) * exp(-(x - center)^2 / (2 theta width^2)),
/// clamped at zero. There is no H_0 term.
struct MarginalSpec {
  std::array<double, kHermiteTerms> coeffs{};
  double xi = 1.0;
  double center = 0.0;
  double width = 1.0;
  double theta = 1.0;
  double volume = 1.0;

  /// Throws kInvalidArgument when a scale parameter is non-positive or all
  /// coefficients vanish.
  void validate() const;
};

/// Clamped, unnormalized model value at u in [0,1].
double raw_density(const MarginalSpec& spec, double u, const DomainMap& map);

/// Unit-mass density on [0,1]: either a normalized Hermite marginal or the
/// uniform density.
class MarginalDensity {
 public:
  static MarginalDensity uniform();

  bool is_uniform() const noexcept { return !spec_.has_value(); }
  const std::optional<MarginalSpec>& spec() const noexcept { return spec_; }
  const DomainMap& domain_map() const noexcept { return map_; }
  double normalizer() const noexcept { return normalizer_; }

  double operator()(double u) const;
  /// First and second derivatives with respect to u. Zero where clamped.
  double derivative(double u) const;
  double second_derivative(double u) const;

  /// Interior points where the clamp switches on or off; the first derivative
  /// jumps there.
  const std::vector<double>& kinks() const noexcept { return kinks_; }

  /// Panel boundaries (0, ..., 1) on which the density is smooth and resolved
  /// by a Gauss-Legendre panel.
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

  /// Composite Gauss-Legendre rule with n nodes per panel.
  QuadratureRule quadrature(int n = kDefaultQuadratureSize) const;

 private:
  friend MarginalDensity normalize(const MarginalSpec&, const DomainMap&, int);

  MarginalDensity(std::optional<MarginalSpec> spec, DomainMap map);

  double unnormalized(double u, int derivative_order) const;

  std::optional<MarginalSpec> spec_;
  DomainMap map_;
  double normalizer_ = 1.0;
  std::vector<double> kinks_;
  std::vector<double> breakpoints_{0.0, 1.0};
};

/// Divides the clamped model by its integral over [0,1], computed with a
/// kink-aware composite rule of quad_n nodes per panel.
MarginalDensity normalize(const MarginalSpec& spec, const DomainMap& map,
                          int quad_n = kDefaultQuadratureSize);

/// Volume-at-price histogram.
struct EmpiricalHistogram {
  std::vector<double> bin_centers;
  std::vector<double> masses;

  void validate() const;
  double bin_width() const { return bin_centers[1] - bin_centers[0]; }
  double total_mass() const;
};

struct ParamRange {
  double lo;
  double hi;
};

/// Search box for the nonlinear parameters. Unset ranges are derived from the
/// histogram.
struct FitConfig {
  std::optional<ParamRange> xi;
  std::optional<ParamRange> center;
  std::optional<ParamRange> width;
  std::optional<ParamRange> theta;
  int max_iterations = 500;
  double simplex_tolerance = 1e-8;
};

struct FitResult {
  MarginalSpec spec;
  double residual = 0.0;          // clamped sum of squared residuals
  double initial_residual = 0.0;  // same, at the initial simplex vertex
  int iterations = 0;
  bool converged = false;         // false: iteration cap hit, best-so-far returned
};

/// Least-squares fit of the clamped Hermite-Gaussian model to histogram masses.
/// Coefficients are solved linearly for fixed (xi, center, width, theta); those
/// four are searched by Nelder-Mead.
FitResult fit_marginal(const EmpiricalHistogram& hist, const FitConfig& config = {});

/// Masses that the model assigns to the given bin centers (price units).
std::vector<double> model_masses(const MarginalSpec& spec, const std::vector<double>& centers);

}  // namespace natcop
