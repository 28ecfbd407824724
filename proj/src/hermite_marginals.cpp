#include "natcop/hermite_marginals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "natcop/error.hpp"

namespace natcop {

double hermite(int n, double x) {
  if (n < 0 || n > kMaxHermiteDegree) {
    throw Error(ErrorKind::kInvalidArgument,
                "Hermite degree must be in [0, 10], got " + std::to_string(n));
  }
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

DomainMap::DomainMap(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && hi > lo)) {
    throw Error(ErrorKind::kInvalidArgument, "domain map needs finite lo < hi");
  }
}

void MarginalSpec::validate() const {
  if (!(xi > 0.0 && width > 0.0 && theta > 0.0 && volume > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "xi, width, theta and volume must be positive");
  }
  if (std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; })) {
    throw Error(ErrorKind::kInvalidArgument, "at least one Hermite coefficient must be nonzero");
  }
}

namespace {

// Hermite sum P(z) = sum_i c_i xi^i H_i(z) and its first two z-derivatives,
// using H_i' = 2i H_{i-1}.
struct HermiteSum {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

HermiteSum hermite_sum(const MarginalSpec& spec, double z) {
  std::array<double, kHermiteTerms + 1> h{};
  h[0] = 1.0;
  h[1] = 2.0 * z;
  for (int k = 1; k < kHermiteTerms; ++k) h[k + 1] = 2.0 * z * h[k] - 2.0 * k * h[k - 1];
  HermiteSum s;
  double scale = 1.0;
  for (int i = 1; i <= kHermiteTerms; ++i) {
    scale *= spec.xi;
    const double c = spec.coeffs[i - 1] * scale;
    s.value += c * h[i];
    s.d1 += c * 2.0 * i * h[i - 1];
    if (i >= 2) s.d2 += c * 4.0 * i * (i - 1) * h[i - 2];
  }
  return s;
}

double raw_price(const MarginalSpec& spec, double x) {
  const double z = (x - spec.center) / spec.width;
  const double v = spec.volume * hermite_sum(spec, z).value * std::exp(-z * z / (2.0 * spec.theta));
  return std::max(0.0, v);
}

// Monomial coefficients (ascending powers of z) of the Hermite sum.
std::vector<double> hermite_sum_monomials(const MarginalSpec& spec) {
  std::vector<std::vector<double>> h(kHermiteTerms + 1);
  h[0] = {1.0};
  h[1] = {0.0, 2.0};
  for (int k = 1; k < kHermiteTerms; ++k) {
    std::vector<double> next(k + 2, 0.0);
    for (std::size_t j = 0; j < h[k].size(); ++j) next[j + 1] += 2.0 * h[k][j];
    for (std::size_t j = 0; j < h[k - 1].size(); ++j) next[j] -= 2.0 * k * h[k - 1][j];
    h[k + 1] = std::move(next);
  }
  std::vector<double> poly(kHermiteTerms + 1, 0.0);
  double scale = 1.0;
  for (int i = 1; i <= kHermiteTerms; ++i) {
    scale *= spec.xi;
    for (std::size_t j = 0; j < h[i].size(); ++j) poly[j] += spec.coeffs[i - 1] * scale * h[i][j];
  }
  while (poly.size() > 1 && poly.back() == 0.0) poly.pop_back();
  return poly;
}

double eval_poly(const std::vector<double>& p, double z) {
  double v = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * z + *it;
  return v;
}

double bisect_root(const std::vector<double>& p, double a, double b) {
  double fa = eval_poly(p, a);
  for (int iter = 0; iter < 200; ++iter) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = eval_poly(p, m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Sign-changing real roots of p in (a, b). Roots of p' split the interval into
// monotone pieces, each holding at most one root.
std::vector<double> sign_change_roots(const std::vector<double>& p, double a, double b) {
  if (p.size() <= 1) return {};
  std::vector<double> dp(p.size() - 1);
  for (std::size_t j = 1; j < p.size(); ++j) dp[j - 1] = p[j] * static_cast<double>(j);
  std::vector<double> cuts{a};
  for (double r : sign_change_roots(dp, a, b)) cuts.push_back(r);
  cuts.push_back(b);
  std::vector<double> roots;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double fa = eval_poly(p, cuts[k]);
    const double fb = eval_poly(p, cuts[k + 1]);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      roots.push_back(bisect_root(p, cuts[k], cuts[k + 1]));
    }
  }
  return roots;
}

constexpr int kMaxPanels = 64;
constexpr double kPanelsPerScale = 3.0;

}  // namespace

double raw_density(const MarginalSpec& spec, double u, const DomainMap& map) {
  return raw_price(spec, map.from_unit(u));
}

std::vector<double> model_masses(const MarginalSpec& spec, const std::vector<double>& centers) {
  std::vector<double> out;
  out.reserve(centers.size());
  for (double x : centers) out.push_back(raw_price(spec, x));
  return out;
}

MarginalDensity::MarginalDensity(std::optional<MarginalSpec> spec, DomainMap map)
    : spec_(std::move(spec)), map_(map) {}

MarginalDensity MarginalDensity::uniform() { return MarginalDensity(std::nullopt, DomainMap::identity()); }

double MarginalDensity::unnormalized(double u, int order) const {
  const MarginalSpec& s = *spec_;
  const double z = (map_.from_unit(u) - s.center) / s.width;
  const HermiteSum h = hermite_sum(s, z);
  const double g = std::exp(-z * z / (2.0 * s.theta));
  if (s.volume * h.value * g <= 0.0) return 0.0;
  const double dz = map_.span() / s.width;
  switch (order) {
    case 0:
      return s.volume * h.value * g;
    case 1:
      return s.volume * dz * (h.d1 - h.value * z / s.theta) * g;
    default:
      return s.volume * dz * dz *
             (h.d2 - 2.0 * h.d1 * z / s.theta - h.value / s.theta +
              h.value * z * z / (s.theta * s.theta)) *
             g;
  }
}

double MarginalDensity::operator()(double u) const {
  if (is_uniform()) return 1.0;
  return unnormalized(u, 0) / normalizer_;
}

double MarginalDensity::derivative(double u) const {
  if (is_uniform()) return 0.0;
  return unnormalized(u, 1) / normalizer_;
}

double MarginalDensity::second_derivative(double u) const {
  if (is_uniform()) return 0.0;
  return unnormalized(u, 2) / normalizer_;
}

QuadratureRule MarginalDensity::quadrature(int n) const { return composite_rule(breakpoints_, n); }

MarginalDensity normalize(const MarginalSpec& spec, const DomainMap& map, int quad_n) {
  spec.validate();
  MarginalDensity d(spec, map);

  const double z0 = (map.lo() - spec.center) / spec.width;
  const double z1 = (map.hi() - spec.center) / spec.width;
  for (double z : sign_change_roots(hermite_sum_monomials(spec), z0, z1)) {
    const double u = map.to_unit(spec.center + z * spec.width);
    if (u > 1e-12 && u < 1.0 - 1e-12) d.kinks_.push_back(u);
  }

  // Panels no wider than a few Gaussian scales so every panel is resolved.
  const double scale_u = spec.width * std::sqrt(spec.theta) / map.span();
  const int panels =
      std::clamp(static_cast<int>(std::ceil(1.0 / (kPanelsPerScale * scale_u))), 1, kMaxPanels);
  std::vector<double> bp;
  for (int p = 0; p <= panels; ++p) bp.push_back(static_cast<double>(p) / panels);
  bp.insert(bp.end(), d.kinks_.begin(), d.kinks_.end());
  std::sort(bp.begin(), bp.end());
  std::vector<double> merged;
  for (double b : bp) {
    if (merged.empty() || b - merged.back() > 1e-12) {
      merged.push_back(b);
    } else if (b == 1.0) {
      merged.back() = 1.0;
    }
  }
  d.breakpoints_ = std::move(merged);

  const QuadratureRule rule = d.quadrature(quad_n);
  const double total = integrate_1d([&](double u) { return raw_density(spec, u, map); }, rule);
  if (!(std::isfinite(total) && total > 0.0)) {
    throw Error(ErrorKind::kDegenerateDensity, "clamped model has no mass on [0,1]");
  }
  d.normalizer_ = total;
  return d;
}

void EmpiricalHistogram::validate() const {
  if (bin_centers.size() != masses.size()) {
    throw Error(ErrorKind::kInvalidArgument, "histogram centers and masses differ in length");
  }
  if (bin_centers.size() < 3) {
    throw Error(ErrorKind::kInvalidArgument, "histogram needs at least 3 bins");
  }
  for (std::size_t k = 0; k < masses.size(); ++k) {
    if (!(masses[k] >= 0.0) || !std::isfinite(masses[k])) {
      throw Error(ErrorKind::kInvalidArgument, "histogram masses must be finite and nonnegative");
    }
    if (k > 0 && !(bin_centers[k] > bin_centers[k - 1])) {
      throw Error(ErrorKind::kInvalidArgument, "histogram bin centers must increase");
    }
  }
}

double EmpiricalHistogram::total_mass() const {
  return std::accumulate(masses.begin(), masses.end(), 0.0);
}

namespace {

constexpr int kNonlinearParams = 4;
constexpr double kRankThreshold = 1e-10;
constexpr int kActiveSetPasses = 20;

using Params = std::array<double, kNonlinearParams>;  // xi, center, width, theta

struct InnerFit {
  std::array<double, kHermiteTerms> coeffs{};
  double residual = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Linear least squares for the coefficients at fixed nonlinear parameters.
// Bins with zero mass where the unclamped model is negative are dropped and
// the system refit, so that the clamp is respected at the solution.
InnerFit solve_coefficients(const EmpiricalHistogram& hist, const Params& p) {
  const int n = static_cast<int>(hist.masses.size());
  Eigen::MatrixXd basis(n, kHermiteTerms);
  for (int k = 0; k < n; ++k) {
    const double z = (hist.bin_centers[k] - p[1]) / p[2];
    const double g = std::exp(-z * z / (2.0 * p[3]));
    double scale = 1.0;
    for (int i = 1; i <= kHermiteTerms; ++i) {
      scale *= p[0];
      basis(k, i - 1) = scale * hermite(i, z) * g;
    }
  }
  const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(hist.masses.data(), n);

  std::vector<char> active(n, 1);
  InnerFit best;
  for (int pass = 0; pass < kActiveSetPasses; ++pass) {
    std::vector<int> rows;
    for (int k = 0; k < n; ++k) {
      if (active[k]) rows.push_back(k);
    }
    if (static_cast<int>(rows.size()) < kHermiteTerms) break;
    Eigen::MatrixXd a(rows.size(), kHermiteTerms);
    Eigen::VectorXd b(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      a.row(r) = basis.row(rows[r]);
      b(r) = target(rows[r]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < kHermiteTerms) break;
    const Eigen::VectorXd c = qr.solve(b);
    const Eigen::VectorXd model = basis * c;
    double ssr = 0.0;
    for (int k = 0; k < n; ++k) {
      const double r = std::max(0.0, model(k)) - target(k);
      ssr += r * r;
    }
    if (!std::isfinite(ssr)) break;
    if (ssr < best.residual) {
      best.residual = ssr;
      for (int i = 0; i < kHermiteTerms; ++i) best.coeffs[i] = c(i);
      best.ok = true;
    }
    std::vector<char> next(n, 1);
    for (int k = 0; k < n; ++k) next[k] = !(target(k) <= 0.0 && model(k) <= 0.0);
    if (next == active) break;
    active = std::move(next);
  }
  return best;
}

// Bounded parametrization v = lo + (hi - lo) (1 + sin t) / 2.
double from_unbounded(double t, const ParamRange& r) {
  return r.lo + (r.hi - r.lo) * 0.5 * (1.0 + std::sin(t));
}

double to_unbounded(double v, const ParamRange& r) {
  if (r.hi <= r.lo) return 0.0;
  const double s = std::clamp(2.0 * (v - r.lo) / (r.hi - r.lo) - 1.0, -1.0, 1.0);
  return std::asin(s);
}

struct NelderMeadResult {
  Params point{};
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <class F>
NelderMeadResult nelder_mead(F&& f, const Params& start, double step, int max_iter, double tol) {
  constexpr int n = kNonlinearParams;
  std::array<Params, n + 1> simplex;
  std::array<double, n + 1> values;
  simplex[0] = start;
  for (int i = 0; i < n; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += step;
  }
  for (int i = 0; i <= n; ++i) values[i] = f(simplex[i]);

  NelderMeadResult result;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::array<int, n + 1> order;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    std::array<Params, n + 1> s2;
    std::array<double, n + 1> v2;
    for (int i = 0; i <= n; ++i) {
      s2[i] = simplex[order[i]];
      v2[i] = values[order[i]];
    }
    simplex = s2;
    values = v2;

    double diameter = 0.0;
    for (int i = 1; i <= n; ++i) {
      double d2 = 0.0;
      for (int j = 0; j < n; ++j) d2 += (simplex[i][j] - simplex[0][j]) * (simplex[i][j] - simplex[0][j]);
      diameter = std::max(diameter, std::sqrt(d2));
    }
    if (diameter < tol) {
      result.converged = true;
      break;
    }

    Params centroid{};
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) centroid[j] += simplex[i][j] / n;
    }
    auto along = [&](double t) {
      Params q;
      for (int j = 0; j < n; ++j) q[j] = centroid[j] + t * (simplex[n][j] - centroid[j]);
      return q;
    };

    const Params reflected = along(-1.0);
    const double fr = f(reflected);
    if (fr < values[0]) {
      const Params expanded = along(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[n] = expanded;
        values[n] = fe;
      } else {
        simplex[n] = reflected;
        values[n] = fr;
      }
      continue;
    }
    if (fr < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = fr;
      continue;
    }
    const bool outside = fr < values[n];
    const Params contracted = along(outside ? -0.5 : 0.5);
    const double fc = f(contracted);
    if (fc < (outside ? fr : values[n])) {
      simplex[n] = contracted;
      values[n] = fc;
      continue;
    }
    for (int i = 1; i <= n; ++i) {
      for (int j = 0; j < n; ++j) simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
      values[i] = f(simplex[i]);
    }
  }
  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  result.point = simplex[best];
  result.value = values[best];
  result.iterations = iter;
  return result;
}

}  // namespace

FitResult fit_marginal(const EmpiricalHistogram& hist, const FitConfig& config) {
  hist.validate();
  if (hist.masses.size() < 6) {
    throw Error(ErrorKind::kInsufficientData, "fit needs at least 6 bins, got " +
                                                  std::to_string(hist.masses.size()));
  }
  const double total = hist.total_mass();
  if (!(total > 0.0)) {
    throw Error(ErrorKind::kInsufficientData, "histogram carries no mass");
  }

  double mean = 0.0;
  for (std::size_t k = 0; k < hist.masses.size(); ++k) mean += hist.masses[k] * hist.bin_centers[k];
  mean /= total;
  double var = 0.0;
  for (std::size_t k = 0; k < hist.masses.size(); ++k) {
    var += hist.masses[k] * (hist.bin_centers[k] - mean) * (hist.bin_centers[k] - mean);
  }
  const double spread = hist.bin_centers.back() - hist.bin_centers.front();
  const double std_dev = std::max(std::sqrt(var / total), hist.bin_width());

  const std::array<ParamRange, kNonlinearParams> ranges{
      config.xi.value_or(ParamRange{0.1, 10.0}),
      config.center.value_or(ParamRange{hist.bin_centers.front(), hist.bin_centers.back()}),
      config.width.value_or(ParamRange{0.25 * hist.bin_width(), spread}),
      config.theta.value_or(ParamRange{0.25, 4.0}),
  };
  for (int i = 0; i < kNonlinearParams; ++i) {
    const bool positive_required = i != 1;
    if (!(ranges[i].hi >= ranges[i].lo) || (positive_required && !(ranges[i].lo > 0.0))) {
      throw Error(ErrorKind::kInvalidArgument, "fit search ranges must be ordered and positive");
    }
  }
  auto to_params = [&](const Params& t) {
    Params p;
    for (int i = 0; i < kNonlinearParams; ++i) p[i] = from_unbounded(t[i], ranges[i]);
    return p;
  };
  auto objective = [&](const Params& t) { return solve_coefficients(hist, to_params(t)).residual; };
  auto start_at = [&](double width, double theta) {
    const Params initial{1.0, mean, width, theta};
    Params t;
    for (int i = 0; i < kNonlinearParams; ++i) t[i] = to_unbounded(initial[i], ranges[i]);
    return t;
  };

  // The residual surface has local minima from clamp switching and the
  // width/theta trade-off, and the sine box map flattens it at the bounds.
  // A fixed grid of starts is searched; the best is then restarted until the
  // simplex stops improving.
  constexpr double kStartWidths[] = {0.5, 1.0, 2.0};
  constexpr double kStartThetas[] = {0.5, 1.0, 2.0};
  constexpr double kStartStep = 0.5;
  constexpr double kPolishStep = 0.1;
  constexpr int kMaxRestarts = 5;
  const Params start = start_at(std_dev, 1.0);
  NelderMeadResult nm;
  int iterations = 0;
  bool first = true;
  for (double w : kStartWidths) {
    for (double th : kStartThetas) {
      const NelderMeadResult run = nelder_mead(objective, start_at(w * std_dev, th), kStartStep,
                                               config.max_iterations, config.simplex_tolerance);
      iterations += run.iterations;
      if (first || run.value < nm.value) nm = run;
      first = false;
    }
  }
  for (int r = 0; r < kMaxRestarts; ++r) {
    const NelderMeadResult run =
        nelder_mead(objective, nm.point, kPolishStep, config.max_iterations, config.simplex_tolerance);
    iterations += run.iterations;
    const bool improved = run.value < nm.value;
    if (run.value <= nm.value) nm = run;
    if (!improved) break;
  }
  const Params best = to_params(nm.point);
  const InnerFit inner = solve_coefficients(hist, best);
  if (!inner.ok) {
    throw Error(ErrorKind::kIllConditionedFit,
                "coefficient least squares is rank-deficient over the whole search box");
  }

  FitResult out;
  out.spec.xi = best[0];
  out.spec.center = best[1];
  out.spec.width = best[2];
  out.spec.theta = best[3];
  out.spec.volume = total;
  for (int i = 0; i < kHermiteTerms; ++i) out.spec.coeffs[i] = inner.coeffs[i] / total;
  out.residual = inner.residual;
  out.initial_residual = objective(start);
  out.iterations = iterations;
  out.converged = nm.converged;
  return out;
}

}  // namespace natcop
