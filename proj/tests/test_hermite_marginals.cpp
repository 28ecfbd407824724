#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "natcop/error.hpp"
#include "natcop/hermite_marginals.hpp"
#include "test_support.hpp"

using namespace natcop;
using natcop::testing::random_spec;
using natcop::testing::simpson;

namespace {

// Closed forms of the physicists' polynomials.
double hermite_closed(int n, double x) {
  switch (n) {
    case 0: return 1.0;
    case 1: return 2.0 * x;
    case 2: return 4.0 * x * x - 2.0;
    case 3: return 8.0 * x * x * x - 12.0 * x;
    case 4: return 16.0 * std::pow(x, 4) - 48.0 * x * x + 12.0;
  }
  return NAN;
}

// Independent evaluation of the clamped model in price units.
double model_value(const MarginalSpec& s, double price) {
  const double z = (price - s.center) / s.width;
  double poly = 0.0;
  for (int i = 1; i <= 4; ++i) poly += s.coeffs[i - 1] * std::pow(s.xi, i) * hermite_closed(i, z);
  const double v = s.volume * poly * std::exp(-z * z / (2.0 * s.theta));
  return std::max(0.0, v);
}

}  // namespace

TEST_CASE("Hermite polynomials match closed forms") {
  for (int n = 0; n <= 4; ++n) {
    for (double x = -3.0; x <= 3.0; x += 0.25) {
      CHECK(hermite(n, x) == doctest::Approx(hermite_closed(n, x)).epsilon(1e-13));
    }
  }
  CHECK(hermite(10, 1.0) == doctest::Approx(8224.0));
  CHECK_THROWS_AS(hermite(11, 0.0), Error);
  CHECK_THROWS_AS(hermite(-1, 0.0), Error);
}

TEST_CASE("Hermite orthogonality under exp(-x^2)") {
  for (int m = 0; m <= 4; ++m) {
    for (int n = 0; n <= 4; ++n) {
      const double v = simpson(
          [&](double x) { return hermite(m, x) * hermite(n, x) * std::exp(-x * x); }, -10.0, 10.0,
          20000);
      const double expect =
          m == n ? std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(std::numbers::pi) : 0.0;
      CHECK_MESSAGE(std::abs(v - expect) < 1e-8, "m=" << m << " n=" << n);
    }
  }
}

TEST_CASE("spec validation") {
  MarginalSpec s;
  CHECK_THROWS_AS(s.validate(), Error);  // all coefficients zero
  s.coeffs = {1.0, 0.0, 0.0, 0.0};
  CHECK_NOTHROW(s.validate());
  for (double MarginalSpec::*field :
       {&MarginalSpec::xi, &MarginalSpec::width, &MarginalSpec::theta, &MarginalSpec::volume}) {
    MarginalSpec bad = s;
    bad.*field = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.*field = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
  }
}

TEST_CASE("raw density clamps and matches an independent evaluation") {
  std::mt19937_64 rng(11);
  const DomainMap map(10.0, 14.0);
  for (int trial = 0; trial < 10; ++trial) {
    MarginalSpec s = random_spec(rng);
    s.center = map.from_unit(s.center);
    s.width *= map.span();
    for (double u = 0.0; u <= 1.0; u += 0.01) {
      const double v = raw_density(s, u, map);
      CHECK(v >= 0.0);
      CHECK(v == doctest::Approx(model_value(s, map.from_unit(u))).epsilon(1e-12));
    }
  }
}

TEST_CASE("normalized densities integrate to one against Simpson") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const MarginalSpec s = random_spec(rng);
    const MarginalDensity f = normalize(s, DomainMap::identity());
    const double simpson_mass = simpson([&](double u) { return f(u); }, 0.0, 1.0, 200000);
    CHECK(std::abs(simpson_mass - 1.0) < 1e-8);
    CHECK(std::abs(integrate_1d([&](double u) { return f(u); }, f.quadrature()) - 1.0) < 1e-12);
    for (double u = 0.0; u <= 1.0; u += 0.005) CHECK(f(u) >= 0.0);
  }
}

TEST_CASE("kinks are where the unclamped model changes sign") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    MarginalSpec s = random_spec(rng);
    const MarginalDensity f = normalize(s, DomainMap::identity());
    for (double k : f.kinks()) {
      CHECK(k > 0.0);
      CHECK(k < 1.0);
      // Signed model value just either side of the kink.
      auto signed_value = [&](double u) {
        const double z = (u - s.center) / s.width;
        double poly = 0.0;
        for (int i = 1; i <= 4; ++i) poly += s.coeffs[i - 1] * std::pow(s.xi, i) * hermite_closed(i, z);
        return poly;
      };
      CHECK(std::abs(signed_value(k)) < 1e-9);
      CHECK(signed_value(k - 1e-6) * signed_value(k + 1e-6) < 0.0);
    }
    CHECK(std::is_sorted(f.breakpoints().begin(), f.breakpoints().end()));
    CHECK(f.breakpoints().front() == 0.0);
    CHECK(f.breakpoints().back() == 1.0);
  }
}

TEST_CASE("derivatives agree with finite differences") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const MarginalDensity f = normalize(random_spec(rng), DomainMap::identity());
    for (double u = 0.05; u < 0.95; u += 0.0731) {
      bool near_kink = false;
      for (double k : f.kinks()) near_kink = near_kink || std::abs(u - k) < 1e-3;
      if (near_kink) continue;
      const double h = 1e-5;
      const double d1 = (f(u + h) - f(u - h)) / (2.0 * h);
      const double d2 = (f(u + h) - 2.0 * f(u) + f(u - h)) / (h * h);
      CHECK(f.derivative(u) == doctest::Approx(d1).epsilon(1e-6).scale(1.0));
      CHECK(f.second_derivative(u) == doctest::Approx(d2).epsilon(1e-3).scale(10.0));
    }
  }
}

TEST_CASE("uniform density") {
  const auto f = MarginalDensity::uniform();
  CHECK(f.is_uniform());
  CHECK(f(0.3) == 1.0);
  CHECK(f.derivative(0.3) == 0.0);
  CHECK(f.kinks().empty());
}

TEST_CASE("a spec with no positive mass is degenerate") {
  MarginalSpec s;
  s.coeffs = {1.0, 0.0, 0.0, 0.0};  // 2z is negative left of the center
  s.center = 50.0;
  s.width = 0.1;
  try {
    normalize(s, DomainMap::identity());
    FAIL("expected degenerate density");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateDensity);
  }
}

TEST_CASE("fit round trip on noise-free histograms") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    MarginalSpec truth = random_spec(rng);
    truth.center = 100.0 + 10.0 * truth.center;
    truth.width *= 10.0;
    truth.volume *= 1000.0;
    EmpiricalHistogram hist;
    const int bins = 48;
    const double half = 3.0 * truth.width * std::sqrt(truth.theta);
    for (int k = 0; k < bins; ++k) {
      const double x = truth.center - half + 2.0 * half * (k + 0.5) / bins;
      hist.bin_centers.push_back(x);
      hist.masses.push_back(model_value(truth, x));
    }
    const FitResult fit = fit_marginal(hist);
    CHECK(fit.residual <= fit.initial_residual);
    const auto fitted = model_masses(fit.spec, hist.bin_centers);
    const double peak = *std::max_element(hist.masses.begin(), hist.masses.end());
    double worst = 0.0;
    for (int k = 0; k < bins; ++k) {
      if (hist.masses[k] <= 0.01 * peak) continue;
      worst = std::max(worst, std::abs(fitted[k] - hist.masses[k]) / hist.masses[k]);
    }
    CHECK_MESSAGE(worst <= 1e-3, "trial " << trial << " worst relative error " << worst);
  }
}

TEST_CASE("fit input errors") {
  EmpiricalHistogram hist;
  for (int k = 0; k < 5; ++k) {
    hist.bin_centers.push_back(k);
    hist.masses.push_back(1.0);
  }
  try {
    fit_marginal(hist);
    FAIL("expected insufficient data");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInsufficientData);
  }
  hist.bin_centers.push_back(5);
  hist.masses.push_back(1.0);
  FitConfig bad;
  bad.width = ParamRange{2.0, 1.0};
  CHECK_THROWS_AS(fit_marginal(hist, bad), Error);
}

TEST_CASE("three-term recurrence") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pick(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = pick(rng);
    for (int n = 1; n <= 9; ++n) {
      const double lhs = hermite(n + 1, x) - 2.0 * x * hermite(n, x) + 2.0 * n * hermite(n - 1, x);
      const double scale = std::max(1.0, std::abs(hermite(n + 1, x)));
      CHECK(std::abs(lhs) / scale <= 1e-9);
    }
  }
}

TEST_CASE("normalized density ignores a common scale on the coefficients") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const MarginalSpec s = random_spec(rng);
    MarginalSpec scaled = s;
    const double lambda = 0.01 + 50.0 * trial;
    for (double& c : scaled.coeffs) c *= lambda;
    const MarginalDensity a = normalize(s, DomainMap::identity());
    const MarginalDensity b = normalize(scaled, DomainMap::identity());
    for (int k = 0; k <= 200; ++k) {
      const double u = k / 200.0;
      CHECK(std::abs(a(u) - b(u)) <= 1e-12 * std::max(1.0, a(u)));
    }
  }
}

TEST_CASE("pure H2 normalizer against a split trapezoid") {
  MarginalSpec s;
  s.coeffs = {0.0, 1.0, 0.0, 0.0};
  s.center = 0.5;
  s.width = 0.25;
  const auto g = [](double u) {
    const double z = (u - 0.5) / 0.25;
    return std::max(0.0, (4.0 * z * z - 2.0) * std::exp(-z * z / 2.0));
  };
  // H2 changes sign at z = +-1/sqrt(2); integrate the two positive lobes.
  const double root = 0.25 / std::numbers::sqrt2;
  const auto trapezoid = [&](double a, double b, int m) {
    const double h = (b - a) / m;
    double acc = 0.5 * (g(a) + g(b));
    for (int k = 1; k < m; ++k) acc += g(a + k * h);
    return acc * h;
  };
  const double reference = trapezoid(0.0, 0.5 - root, 1'000'000) + trapezoid(0.5 + root, 1.0, 1'000'000);
  const MarginalDensity d = normalize(s, DomainMap::identity());
  CHECK(std::abs(d.normalizer() - reference) <= 1e-9);
}

TEST_CASE("flat histogram beats the best fit at the starting shape and the zero model") {
  for (int bins : {6, 12, 48}) {
    EmpiricalHistogram hist;
    for (int k = 0; k < bins; ++k) {
      hist.bin_centers.push_back(10.0 + k);
      hist.masses.push_back(5.0);
    }
    FitResult fit;
    REQUIRE_NOTHROW(fit = fit_marginal(hist));
    CHECK(fit.converged);
    CHECK(fit.residual <= fit.initial_residual);
    CHECK(fit.residual <= 25.0 * bins);
  }
}

TEST_CASE("three bins are not enough") {
  EmpiricalHistogram hist{{1.0, 2.0, 3.0}, {1.0, 2.0, 1.0}};
  try {
    fit_marginal(hist);
    FAIL("expected insufficient data");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInsufficientData);
  }
}

TEST_CASE("fitting is deterministic") {
  std::mt19937_64 rng(55);
  MarginalSpec truth = random_spec(rng);
  EmpiricalHistogram hist;
  std::normal_distribution<double> noise(0.0, 0.02);
  for (int k = 0; k < 40; ++k) {
    const double x = (k + 0.5) / 40.0;
    hist.bin_centers.push_back(x);
    hist.masses.push_back(model_value(truth, x) * (1.0 + noise(rng)));
  }
  const FitResult a = fit_marginal(hist);
  const FitResult b = fit_marginal(hist);
  CHECK(a.residual == b.residual);
  CHECK(a.iterations == b.iterations);
  CHECK(a.spec.center == b.spec.center);
  CHECK(a.spec.width == b.spec.width);
  CHECK(a.spec.theta == b.spec.theta);
  CHECK(a.spec.xi == b.spec.xi);
  for (int i = 0; i < kHermiteTerms; ++i) CHECK(a.spec.coeffs[i] == b.spec.coeffs[i]);
}
