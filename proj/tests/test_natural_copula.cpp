#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cmath>
#include <random>

#include "natcop/error.hpp"
#include "natcop/natural_copula.hpp"
#include "natcop/ot_oracle.hpp"
#include "test_support.hpp"

using namespace natcop;
using natcop::testing::random_spec;
using natcop::testing::simpson;

namespace {

std::vector<double> moments(const MarginalDensity& f) { return natcop::testing::simpson_moments(f, 6); }


// int int f_X f_Y tau from one-dimensional Simpson moments.
double mass_oracle(const CopulaModel& m, const std::vector<double>& mx, const std::vector<double>& my) {
  double total = m.constant();
  for (std::size_t i = 0; i < m.basis().size(); ++i) {
    const Monomial t = m.basis().terms()[i];
    total += m.coefficients()[i] * mx[t.x_exp] * my[t.y_exp];
  }
  return total;
}

// int int (x-y)^2 f_X f_Y x^a y^b by expanding the square.
double cost_moment(const std::vector<double>& mx, const std::vector<double>& my, int a, int b) {
  return mx[a + 2] * my[b] - 2.0 * mx[a + 1] * my[b + 1] + mx[a] * my[b + 2];
}

double cost_moment(const MarginalDensity& fx, const MarginalDensity& fy, int a, int b) {
  return cost_moment(moments(fx), moments(fy), a, b);
}

std::pair<MarginalDensity, MarginalDensity> random_pair(std::mt19937_64& rng) {
  return {normalize(random_spec(rng), DomainMap::identity()),
          normalize(random_spec(rng), DomainMap::identity())};
}

}  // namespace

TEST_CASE("basis parsing") {
  CHECK(MonomialBasis::parse("11,21,12,22").terms() == MonomialBasis::standard().terms());
  CHECK(MonomialBasis::parse("none").empty());
  CHECK(MonomialBasis::parse("").empty());
  CHECK(MonomialBasis::parse("21").transposed().terms().front() == Monomial{1, 2});
  CHECK(MonomialBasis::parse("11,31").to_string() == "11,31");
  CHECK_THROWS_AS(MonomialBasis::parse("01"), Error);
  CHECK_THROWS_AS(MonomialBasis::parse("11,11"), Error);
  CHECK_THROWS_AS(MonomialBasis::parse("1"), Error);
  CHECK_THROWS_AS(MonomialBasis::parse("11,12,13,14,21,22,23,24,31"), Error);
}

TEST_CASE("uniform marginals: analytic optimum of tau = C + c xy") {
  // I_tilde: int int (x-y)^2 = 1/6, int int (x-y)^2 xy = 1/36; I: 1, 1/4.
  // Vertices of {C >= 0, C + c >= 0, C + c/4 >= 1}: (1, 0) costs 1/6,
  // (0, 4) costs 1/9 and is the minimum.
  const double cost_at_c1 = 1.0 / 6.0;
  const double cost_at_c4 = 4.0 * cost_moment(MarginalDensity::uniform(), MarginalDensity::uniform(), 1, 1);
  const double oracle = std::min(cost_at_c1, cost_at_c4);
  CHECK(oracle == doctest::Approx(1.0 / 9.0).epsilon(1e-12));

  const auto start = std::chrono::steady_clock::now();
  const auto m = estimate_copula(MarginalDensity::uniform(), MarginalDensity::uniform(),
                                 MonomialBasis::parse("11"));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(std::abs(m.constant()) < 1e-6);
  CHECK(std::abs(m.coefficients()[0] - 4.0) < 1e-6);
  CHECK(std::abs(m.cost() - oracle) < 1e-6);
  CHECK(std::abs(wasserstein_cost(m) - oracle) < 1e-6);
  CHECK(seconds < 1.0);
}

TEST_CASE("LP layout for uniform marginals on an 11-point grid") {
  const auto u = MarginalDensity::uniform();
  const auto basis = MonomialBasis::parse("11");
  const auto lp = assemble_lp(compute_integrals(u, u, basis, u.quadrature()), u, u, basis, 11);
  CHECK(lp.num_variables() == 2);
  CHECK(lp.num_constraints() == 1 + 121);
  CHECK(lp.objective[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(lp.objective[1] == doctest::Approx(1.0 / 36.0).epsilon(1e-13));
  CHECK(lp.rhs[0] == 1.0);
}

TEST_CASE("cost integrals agree with moment expansions") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    const auto [fx, fy] = random_pair(rng);
    const auto basis = MonomialBasis::standard();
    const auto ints = compute_integrals(fx, fy, basis, fx.quadrature(), fy.quadrature());
    const auto mx = moments(fx);
    const auto my = moments(fy);
    CHECK(ints.I[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ints.I_tilde[0] == doctest::Approx(cost_moment(mx, my, 0, 0)).epsilon(1e-9));
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const Monomial t = basis.terms()[i];
      CHECK(ints.I[i + 1] == doctest::Approx(mx[t.x_exp] * my[t.y_exp]).epsilon(1e-9));
      CHECK(ints.I_tilde[i + 1] == doctest::Approx(cost_moment(mx, my, t.x_exp, t.y_exp)).epsilon(1e-9));
    }
  }
}

TEST_CASE("random pairs: equality, mass, nonnegativity and cost bounds") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto [fx, fy] = random_pair(rng);
    const auto m = estimate_copula(fx, fy, MonomialBasis::standard());
    // The normalization row is active at the optimum.
    CHECK_MESSAGE(std::abs(m.diagnostics().normalization - 1.0) < 1e-8, "trial " << trial);
    const auto mx = moments(fx);
    const auto my = moments(fy);
    const double mass = mass_oracle(m, mx, my);
    CHECK_MESSAGE(std::abs(mass - 1.0) < 1e-7, "trial " << trial << " mass " << mass);
    CHECK(min_density_on_grid(m, 101) >= -1e-7);
    const double cost = wasserstein_cost(m);
    CHECK(std::abs(cost - m.cost()) < 1e-9);
    const double product_cost = cost_moment(mx, my, 0, 0);
    CHECK(cost <= product_cost + 1e-9);
  }
}

TEST_CASE("swapping the marginals transposes the solution") {
  std::mt19937_64 rng(77);
  const auto [fx, fy] = random_pair(rng);
  const auto basis = MonomialBasis::standard();
  const auto a = estimate_copula(fx, fy, basis);
  const auto b = estimate_copula(fy, fx, basis.transposed());
  CHECK(a.cost() == doctest::Approx(b.cost()).epsilon(1e-8));
  for (double x : {0.1, 0.4, 0.7}) {
    for (double y : {0.2, 0.5, 0.9}) CHECK(a.density(x, y) == doctest::Approx(b.density(y, x)).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("richer bases never cost more") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto [fx, fy] = random_pair(rng);
    const auto product = estimate_copula(fx, fy, MonomialBasis{});
    const auto small = estimate_copula(fx, fy, MonomialBasis::parse("11"));
    const auto full = estimate_copula(fx, fy, MonomialBasis::standard());
    CHECK(product.constant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(small.cost() <= product.cost() + 1e-9);
    CHECK(full.cost() <= small.cost() + 1e-9);
  }
}

TEST_CASE("moment constraints restore low marginal moments") {
  std::mt19937_64 rng(13);
  const auto [fx, fy] = random_pair(rng);
  CopulaConfig cfg;
  cfg.moment_constraints = 1;
  const auto m = estimate_copula(fx, fy, MonomialBasis::standard(), cfg);
  // The x-marginal of pi has the same mean as f_X.
  const auto rule = m.fx().quadrature();
  const std::vector<double> y_moments = moments(fy);
  const double pi_mean = integrate_1d([&](double x) { return x * pi_marginal_x(m, x, y_moments); }, rule);
  const auto mx = moments(fx);
  CHECK(pi_mean == doctest::Approx(mx[1]).epsilon(1e-7));
  CHECK(m.cost() <= cost_moment(mx, y_moments, 0, 0) + 1e-9);
}

TEST_CASE("density domain check") {
  const auto m = estimate_copula(MarginalDensity::uniform(), MarginalDensity::uniform(), MonomialBasis::parse("11"));
  CHECK(copula_density(m, 0.5, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(copula_density(m, 1.5, 0.5), Error);
  CHECK_THROWS_AS(copula_density(m, 0.5, -0.1), Error);
}

TEST_CASE("invalid configuration") {
  CopulaConfig cfg;
  cfg.grid_n = 1;
  CHECK_THROWS_AS(estimate_copula(MarginalDensity::uniform(), MarginalDensity::uniform(), MonomialBasis::standard(), cfg),
                  Error);
}
