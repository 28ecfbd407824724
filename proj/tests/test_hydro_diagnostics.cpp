#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "natcop/hydro_diagnostics.hpp"
#include "natcop/natural_copula.hpp"
#include "test_support.hpp"

using namespace natcop;

namespace {

constexpr ContourConvention kBoth[] = {ContourConvention::kLegwise, ContourConvention::kCounterclockwise};

// V = sum a[p][q] x^p y^q with closed-form derivatives.
struct PolyPotential {
  double a[4][4] = {};

  double value(double x, double y) const {
    double v = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) v += a[p][q] * std::pow(x, p) * std::pow(y, q);
    return v;
  }
  Gradient grad(double x, double y) const {
    Gradient g;
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; q < 4; ++q) {
        if (p > 0) g.dx += a[p][q] * p * std::pow(x, p - 1) * std::pow(y, q);
        if (q > 0) g.dy += a[p][q] * q * std::pow(x, p) * std::pow(y, q - 1);
      }
    }
    return g;
  }
  double lap(double x, double y) const {
    double v = 0.0;
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; q < 4; ++q) {
        if (p > 1) v += a[p][q] * p * (p - 1) * std::pow(x, p - 2) * std::pow(y, q);
        if (q > 1) v += a[p][q] * q * (q - 1) * std::pow(x, p) * std::pow(y, q - 2);
      }
    }
    return v;
  }
  // -int int Laplacian(V) over the unit square, term by term.
  double expected_circulation() const {
    double s = 0.0;
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; q < 4; ++q) {
        if (p > 1) s += a[p][q] * p / (q + 1.0);  // p(p-1)/(p-1) * 1/(q+1)
        if (q > 1) s += a[p][q] * q / (p + 1.0);
      }
    }
    return -s;
  }
  Potential analytic() const {
    return {[*this](double x, double y) { return value(x, y); },
            [*this](double x, double y) { return grad(x, y); },
            [*this](double x, double y) { return lap(x, y); }, {}, {}};
  }
  Potential value_only() const { return {[*this](double x, double y) { return value(x, y); }, {}, {}, {}, {}}; }
};

PolyPotential random_poly(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PolyPotential p;
  for (auto& row : p.a)
    for (double& v : row) v = u(rng);
  return p;
}

}  // namespace

TEST_CASE("bilinear potential has zero circulation and flux") {
  PolyPotential v;
  v.a[1][1] = 1.0;
  const auto rule = gauss_legendre_rule(32);
  for (auto c : kBoth) {
    CHECK(std::abs(circulation(v.analytic(), rule, c)) < 1e-9);
    CHECK(std::abs(flux(v.analytic(), rule, c)) < 1e-9);
  }
}

TEST_CASE("quadratic potential has circulation -4") {
  PolyPotential v;
  v.a[2][0] = 1.0;
  v.a[0][2] = 1.0;
  const auto rule = gauss_legendre_rule(32);
  for (auto c : kBoth) {
    CHECK(std::abs(circulation(v.analytic(), rule, c) + 4.0) < 1e-9);
    CHECK(std::abs(flux(v.analytic(), rule, c)) < 1e-9);
  }
  CHECK(std::abs(area_circulation(v.analytic(), rule, rule) + 4.0) < 1e-12);
  // Leg by leg: v = (2y, -2x).
  const auto legs = circulation_legs(v.analytic(), rule, rule);
  CHECK(legs.bottom == doctest::Approx(0.0).scale(1.0));
  CHECK(legs.right == doctest::Approx(-2.0));
  CHECK(legs.top == doctest::Approx(-2.0));
  CHECK(legs.left == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("random polynomial potentials: flux vanishes, Green's theorem holds") {
  std::mt19937_64 rng(10);
  const auto rule = gauss_legendre_rule(32);
  for (int trial = 0; trial < 20; ++trial) {
    const PolyPotential v = random_poly(rng);
    const Potential pa = v.analytic();
    for (auto c : kBoth) {
      CHECK(std::abs(flux(pa, rule, c)) < 1e-12);
      CHECK(std::abs(circulation(pa, rule, c) - v.expected_circulation()) < 1e-12);
    }
    CHECK(green_check(pa, rule) < 1e-12);
    // Finite-difference fallback reaches the same numbers at the spec'd tolerances.
    const Potential pf = v.value_only();
    CHECK(std::abs(flux(pf, rule)) < 1e-6);
    CHECK(std::abs(circulation(pf, rule) - v.expected_circulation()) < 1e-6);
    CHECK(green_check(pf, rule) < 1e-5);
  }
}

TEST_CASE("velocity field is the rotated gradient") {
  PolyPotential v;
  v.a[2][1] = 1.0;  // V = x^2 y: v = (x^2, -2xy)
  const auto field = velocity_field(v.analytic(), 11);
  REQUIRE(field.x.size() == 121);
  for (std::size_t k = 0; k < field.x.size(); ++k) {
    const double x = field.x[k], y = field.y[k];
    CHECK(field.vx[k] == doctest::Approx(x * x).scale(1.0));
    CHECK(field.vy[k] == doctest::Approx(-2.0 * x * y).scale(1.0));
  }
  CHECK(field.x.front() == 0.0);
  CHECK(field.x.back() == 1.0);
  // Central and one-sided differences are exact for quadratics up to rounding.
  const auto fd = velocity_field(v.analytic(), 11, std::nullopt, true);
  for (std::size_t k = 0; k < fd.x.size(); ++k) {
    CHECK(fd.vx[k] == doctest::Approx(field.vx[k]).epsilon(1e-9).scale(1.0));
    CHECK(fd.vy[k] == doctest::Approx(field.vy[k]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("copula potentials satisfy the flow identities") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 5; ++trial) {
    const auto fx = normalize(natcop::testing::random_spec(rng), DomainMap::identity());
    const auto fy = normalize(natcop::testing::random_spec(rng), DomainMap::identity());
    const auto model = estimate_copula(fx, fy, MonomialBasis::standard());
    const auto rx = model.rule_x();
    const auto ry = model.rule_y();
    for (auto kind : {PotentialKind::kDensity, PotentialKind::kCdf}) {
      const Potential v = copula_potential(model, kind);
      for (auto c : kBoth) CHECK(std::abs(flux(v, rx, ry, c)) < 1e-6);
      CHECK(green_check(v, rx, ry) < 1e-5);
      CHECK(circulation(v, rx, ry, ContourConvention::kLegwise) ==
            doctest::Approx(circulation(v, rx, ry, ContourConvention::kCounterclockwise)).epsilon(1e-12));
    }
  }
}

TEST_CASE("analytic copula derivatives agree with finite differences") {
  std::mt19937_64 rng(9);
  const auto fx = normalize(natcop::testing::random_spec(rng), DomainMap::identity());
  const auto fy = normalize(natcop::testing::random_spec(rng), DomainMap::identity());
  const auto model = estimate_copula(fx, fy, MonomialBasis::standard());
  for (auto kind : {PotentialKind::kDensity, PotentialKind::kCdf}) {
    const Potential v = copula_potential(model, kind);
    for (double x = 0.1; x < 0.95; x += 0.17) {
      for (double y = 0.13; y < 0.95; y += 0.19) {
        const Gradient g = v.grad(x, y);
        const Gradient fd = finite_difference_gradient(v.value, x, y, 1e-6);
        CHECK(g.dx == doctest::Approx(fd.dx).epsilon(1e-5).scale(1.0));
        CHECK(g.dy == doctest::Approx(fd.dy).epsilon(1e-5).scale(1.0));
      }
    }
  }
}

TEST_CASE("product copula with uniform marginals is a flat density") {
  const auto model = estimate_copula(MarginalDensity::uniform(), MarginalDensity::uniform(), MonomialBasis{});
  const auto v = density_potential(model);
  const auto rule = gauss_legendre_rule(16);
  CHECK(std::abs(circulation(v, rule)) < 1e-12);
  // The CDF potential is V = xy.
  const auto cdf = cdf_potential(model);
  CHECK(cdf.value(0.3, 0.7) == doctest::Approx(0.21));
  CHECK(std::abs(circulation(cdf, rule)) < 1e-12);
}
