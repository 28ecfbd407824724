#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "natcop/correlation.hpp"
#include "natcop/data_ingest.hpp"
#include "natcop/error.hpp"
#include "natcop/hermite_marginals.hpp"
#include "natcop/hydro_diagnostics.hpp"
#include "natcop/natural_copula.hpp"
#include "natcop/ot_oracle.hpp"
#include "natcop/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace natcop;

namespace {

constexpr const char* kSchema = "natural-copula/1";

enum class ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

// Twelve significant digits, then the shortest decimal that reads back to
// the rounded double.
double round12(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::kNumericalDomain, "non-finite value in report");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

json num(double v) { return round12(v); }

json num_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", round12(v));
  return buf;
}

struct Options {
  std::string input;
  int bins = kDefaultBins;
  int ma_order = 2;
  std::string basis = "11,21,12,22";
  int grid_n = kDefaultEnforcementGrid;
  int quad_n = kDefaultQuadratureSize;
  int moment_constraints = 0;
  int export_n = kDefaultCheckGrid;
  std::string potential = "density";
  std::string convention = "paper";
  std::string format = "json";
  std::string out;
  bool uniform = false;
  std::string test_potential;
};

json params_block(const Options& o) {
  json p;
  p["input"] = o.uniform ? json(nullptr) : json(o.input);
  p["uniform"] = o.uniform;
  p["bins"] = o.bins;
  p["ma_order"] = o.ma_order;
  p["basis"] = o.basis;
  p["grid_n"] = o.grid_n;
  p["quad_n"] = o.quad_n;
  p["moment_constraints"] = o.moment_constraints;
  p["export_n"] = o.export_n;
  p["potential"] = o.potential;
  p["contour_convention"] = o.convention;
  return p;
}

struct Marginals {
  MarginalDensity buy = MarginalDensity::uniform();
  MarginalDensity sell = MarginalDensity::uniform();
  json report;
};

json spec_block(const FitResult& fit, const MarginalDensity& density) {
  json s;
  s["volume"] = num(fit.spec.volume);
  s["xi"] = num(fit.spec.xi);
  s["center"] = num(fit.spec.center);
  s["width"] = num(fit.spec.width);
  s["theta"] = num(fit.spec.theta);
  s["coefficients"] = num_array({fit.spec.coeffs.begin(), fit.spec.coeffs.end()});
  s["residual"] = num(fit.residual);
  s["initial_residual"] = num(fit.initial_residual);
  s["iterations"] = fit.iterations;
  s["converged"] = fit.converged;
  s["normalizer"] = num(density.normalizer());
  s["kinks"] = num_array(density.kinks());
  return s;
}

Marginals build_marginals(const Options& o) {
  Marginals m;
  if (o.uniform) {
    m.report["domain"] = num_array({0.0, 1.0});
    m.report["buy"] = "uniform";
    m.report["sell"] = "uniform";
    return m;
  }
  const auto records = load_csv(o.input);
  auto hist_buy = bin_levels(records, o.bins, Side::kBuy);
  auto hist_sell = bin_levels(records, o.bins, Side::kSell);
  hist_buy.masses = ma_smooth(hist_buy.masses, o.ma_order);
  hist_sell.masses = ma_smooth(hist_sell.masses, o.ma_order);
  const DomainMap map = shared_domain(hist_buy, hist_sell);

  const FitResult fit_buy = fit_marginal(hist_buy);
  const FitResult fit_sell = fit_marginal(hist_sell);
  for (const auto* fit : {&fit_buy, &fit_sell}) {
    if (!fit->converged) {
      std::cerr << "warning: " << (fit == &fit_buy ? "buy" : "sell")
                << " fit hit the iteration cap; best parameters so far are reported\n";
    }
  }
  m.buy = normalize(fit_buy.spec, map, o.quad_n);
  m.sell = normalize(fit_sell.spec, map, o.quad_n);
  m.report["domain"] = num_array({map.lo(), map.hi()});
  m.report["buy"] = spec_block(fit_buy, m.buy);
  m.report["sell"] = spec_block(fit_sell, m.sell);
  return m;
}

CopulaModel build_copula(const Options& o, const Marginals& m) {
  CopulaConfig cfg;
  cfg.grid_n = o.grid_n;
  cfg.quad_n = o.quad_n;
  cfg.moment_constraints = o.moment_constraints;
  return estimate_copula(m.buy, m.sell, MonomialBasis::parse(o.basis), cfg);
}

json copula_block(const CopulaModel& model) {
  const double cost = wasserstein_cost(model);
  const double bound = w2_squared(model.fx(), model.fy());
  json c;
  c["basis"] = model.basis().to_string();
  c["C"] = num(model.constant());
  c["coefficients"] = num_array(model.coefficients());
  c["cost"] = num(cost);
  c["constraint_residual"] = num(std::abs(model.diagnostics().normalization - 1.0));
  c["marginal_deviation"] = num(marginal_deviation(model));
  c["ot_lower_bound"] = num(bound);
  c["ot_gap"] = num(cost - bound);
  c["total_mass"] = num(total_mass(model, model.rule_x(), model.rule_y()));
  c["min_density"] = num(min_density_on_grid(model));
  c["refinements"] = model.diagnostics().refinements;
  c["cut_points"] = model.diagnostics().cut_points;
  return c;
}

PotentialKind potential_kind(const Options& o) {
  return o.potential == "cdf" ? PotentialKind::kCdf : PotentialKind::kDensity;
}

ContourConvention contour_convention(const Options& o) {
  return o.convention == "counterclockwise" ? ContourConvention::kCounterclockwise
                                            : ContourConvention::kLegwise;
}

json legs_block(const ContourLegs& legs) {
  json j;
  j["bottom"] = num(legs.bottom);
  j["right"] = num(legs.right);
  j["top"] = num(legs.top);
  j["left"] = num(legs.left);
  return j;
}

json hydro_block(const Potential& v, const QuadratureRule& rx, const QuadratureRule& ry,
                 ContourConvention convention) {
  const FlowSummary s = flow_summary(v, rx, ry, convention);
  json h;
  h["gamma"] = num(s.circulation);
  h["phi"] = num(s.flux);
  h["green_residual"] = num(s.green_residual);
  h["area_circulation"] = num(area_circulation(v, rx, ry));
  h["gamma_legs"] = legs_block(circulation_legs(v, rx, ry));
  h["phi_legs"] = legs_block(flux_legs(v, rx, ry));
  return h;
}

json corr_block(const CopulaModel& model) {
  const CorrelationReport r = correlation_report(model);
  json c;
  c["ct"] = num(r.ct);
  c["variance_residual"] = num(r.variance_residual);
  c["identity_checked"] = r.normalized;
  return c;
}

// V = xy and V = x^2 + y^2 with closed-form derivatives.
Potential test_potential(const std::string& name) {
  if (name == "bilinear") {
    return {[](double x, double y) { return x * y; }, [](double x, double y) { return Gradient{y, x}; },
            [](double, double) { return 0.0; }, {}, {}};
  }
  return {[](double x, double y) { return x * x + y * y; },
          [](double x, double y) { return Gradient{2.0 * x, 2.0 * y}; }, [](double, double) { return 4.0; },
          {}, {}};
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else if (j.is_number_float()) {
    out.emplace_back(prefix, csv_number(j.get<double>()));
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

std::string render(const json& report, const std::string& format) {
  if (format == "json") return report.dump(2) + "\n";
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(report, "", rows);
  std::string s = "field,value\n";
  for (const auto& [k, v] : rows) s += k + "," + v + "\n";
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

void emit_report(const Options& o, const json& report) {
  const std::string text = render(report, o.format);
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(o.out);
  write_text(fs::path(o.out) / ("report." + o.format), text);
}

double grid_coord(int k, int n) { return static_cast<double>(k) / (n - 1); }

void write_density_grid(const Options& o, const CopulaModel& model) {
  if (o.out.empty()) return;
  std::ostringstream s;
  s << "x,y,density\n";
  for (int i = 0; i < o.export_n; ++i) {
    for (int j = 0; j < o.export_n; ++j) {
      const double x = grid_coord(i, o.export_n), y = grid_coord(j, o.export_n);
      s << csv_number(x) << ',' << csv_number(y) << ',' << csv_number(model.density(x, y)) << '\n';
    }
  }
  write_text(fs::path(o.out) / "density_grid.csv", s.str());
}

void write_vector_field(const Options& o, const Potential& v) {
  if (o.out.empty()) return;
  const VelocityField f = velocity_field(v, o.export_n);
  std::ostringstream s;
  s << "x,y,vx,vy\n";
  for (std::size_t k = 0; k < f.x.size(); ++k) {
    s << csv_number(f.x[k]) << ',' << csv_number(f.y[k]) << ',' << csv_number(f.vx[k]) << ','
      << csv_number(f.vy[k]) << '\n';
  }
  write_text(fs::path(o.out) / "vector_field.csv", s.str());
}

json base_report(const Options& o) {
  json r;
  r["schema"] = kSchema;
  r["params"] = params_block(o);
  return r;
}

void require_input(const Options& o) {
  if (!o.uniform && o.input.empty()) throw CLI::ValidationError("input", "an input CSV or --uniform is required");
}

void cmd_fit(const Options& o) {
  require_input(o);
  const Marginals m = build_marginals(o);
  json r = base_report(o);
  r["marginals"] = m.report;
  std::vector<double> u, buy, sell;
  for (int k = 0; k < o.export_n; ++k) {
    u.push_back(grid_coord(k, o.export_n));
    buy.push_back(m.buy(u.back()));
    sell.push_back(m.sell(u.back()));
  }
  r["samples"] = {{"u", num_array(u)}, {"buy", num_array(buy)}, {"sell", num_array(sell)}};
  emit_report(o, r);
}

enum class Stage { kCopula, kHydro, kCorr, kAll };

void cmd_pipeline(const Options& o, Stage stage) {
  if (stage == Stage::kHydro && !o.test_potential.empty()) {
    const auto rule = gauss_legendre_rule(o.quad_n);
    const Potential v = test_potential(o.test_potential);
    json r = base_report(o);
    r["params"]["test_potential"] = o.test_potential;
    r["hydro"] = hydro_block(v, rule, rule, contour_convention(o));
    emit_report(o, r);
    write_vector_field(o, v);
    return;
  }
  require_input(o);
  const Marginals m = build_marginals(o);
  const CopulaModel model = build_copula(o, m);
  json r = base_report(o);
  r["marginals"] = m.report;
  r["copula"] = copula_block(model);
  const bool hydro = stage == Stage::kHydro || stage == Stage::kAll;
  std::optional<Potential> v;
  if (hydro) {
    v = copula_potential(model, potential_kind(o));
    r["hydro"] = hydro_block(*v, model.rule_x(), model.rule_y(), contour_convention(o));
  }
  if (stage == Stage::kCorr || stage == Stage::kAll) r["corr"] = corr_block(model);
  emit_report(o, r);
  if (stage == Stage::kCopula || stage == Stage::kAll) write_density_grid(o, model);
  if (v) write_vector_field(o, *v);
}

struct SynthOptions {
  std::string preset = "ibm";
  std::optional<std::vector<double>> coeffs_buy;
  std::optional<std::vector<double>> coeffs_sell;
  std::optional<double> volume_buy;
  std::optional<double> volume_sell;
  std::optional<double> sigma;
  std::optional<double> xi;
  std::optional<double> center_buy;
  std::optional<double> center_sell;
  std::optional<double> theta;
  int levels = 1000;
  double noise = 0.05;
  std::uint64_t seed = 42;
  std::string out;
};

void cmd_synth(const SynthOptions& s) {
  SynthConfig cfg;
  cfg.sides = s.preset == "spdr" ? spdr_preset() : ibm_preset();
  cfg.levels = s.levels;
  cfg.noise = s.noise;
  cfg.seed = s.seed;
  for (MarginalSpec* side : {&cfg.sides.buy, &cfg.sides.sell}) {
    if (s.sigma) side->width = *s.sigma;
    if (s.theta) side->theta = *s.theta;
    if (s.xi) {
      // Keep the shape h_i = c_i xi^i when only xi changes.
      std::array<double, kHermiteTerms> shape{};
      double p = 1.0;
      for (int i = 0; i < kHermiteTerms; ++i) shape[i] = side->coeffs[i] * (p *= side->xi);
      side->xi = *s.xi;
      side->coeffs = coefficients_from_shape(shape, side->xi);
    }
  }
  if (s.volume_buy) cfg.sides.buy.volume = *s.volume_buy;
  if (s.volume_sell) cfg.sides.sell.volume = *s.volume_sell;
  if (s.center_buy) cfg.sides.buy.center = *s.center_buy;
  if (s.center_sell) cfg.sides.sell.center = *s.center_sell;
  auto set_coeffs = [](MarginalSpec& side, const std::optional<std::vector<double>>& c) {
    if (!c) return;
    for (int i = 0; i < kHermiteTerms; ++i) side.coeffs[i] = (*c)[i];
  };
  set_coeffs(cfg.sides.buy, s.coeffs_buy);
  set_coeffs(cfg.sides.sell, s.coeffs_sell);

  const auto records = synthesize(cfg);
  if (s.out.empty()) {
    std::cout << format_csv(records);
  } else {
    write_csv(s.out, records);
  }
}

void add_pipeline_flags(CLI::App* cmd, Options& o, bool with_copula) {
  cmd->add_option("input", o.input, "Price-level CSV with header price,volume,side");
  cmd->add_option("--bins", o.bins, "Histogram bins per side")->check(CLI::Range(6, 4096));
  cmd->add_option("--ma-order", o.ma_order, "Trailing moving-average order (1 disables)")->check(CLI::Range(1, 64));
  cmd->add_option("--quad-n", o.quad_n, "Gauss-Legendre nodes per panel")->check(CLI::Range(1, 256));
  cmd->add_option("--export-n", o.export_n, "Resolution of exported grids and samples")->check(CLI::Range(2, 1001));
  cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", o.out, "Output directory (report to stdout when omitted)");
  cmd->add_flag("--uniform", o.uniform, "Use uniform marginals instead of fitting input data");
  if (!with_copula) return;
  cmd->add_option("--basis", o.basis, "Monomials as exponent pairs, e.g. 11,21,12,22; 'none' forces the product copula");
  cmd->add_option("--grid-n", o.grid_n, "LP nonnegativity grid per axis")->check(CLI::Range(2, 64));
  cmd->add_option("--moment-constraints", o.moment_constraints, "Match the first k marginal moments")
      ->check(CLI::Range(0, 4));
  cmd->add_option("--potential", o.potential, "Stream function")->check(CLI::IsMember({"density", "cdf"}));
  cmd->add_option("--contour-convention", o.convention, "Boundary integral convention")
      ->check(CLI::IsMember({"paper", "counterclockwise"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural copula estimation for two-sided order-book marginals"};
  app.require_subcommand(1);

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Write a synthetic price,volume,side CSV from model parameters");
  synth->add_option("--preset", so.preset, "Published parameter set")->check(CLI::IsMember({"ibm", "spdr"}));
  synth->add_option("--coeffs-buy", so.coeffs_buy, "Buy-side Hermite coefficients c1,c2,c3,c4")
      ->delimiter(',')
      ->expected(kHermiteTerms);
  synth->add_option("--coeffs-sell", so.coeffs_sell, "Sell-side Hermite coefficients c1,c2,c3,c4")
      ->delimiter(',')
      ->expected(kHermiteTerms);
  synth->add_option("--volume-buy", so.volume_buy, "Buy-side volume V_B")->check(CLI::NonNegativeNumber);
  synth->add_option("--volume-sell", so.volume_sell, "Sell-side volume V_S")->check(CLI::NonNegativeNumber);
  synth->add_option("--sigma", so.sigma, "Price width sigma_p")->check(CLI::PositiveNumber);
  synth->add_option("--xi", so.xi, "Shape scale xi")->check(CLI::PositiveNumber);
  synth->add_option("--center-buy", so.center_buy, "Buy-side center p_B");
  synth->add_option("--center-sell", so.center_sell, "Sell-side center p_S");
  synth->add_option("--theta", so.theta, "Gaussian stretch theta")->check(CLI::PositiveNumber);
  synth->add_option("--levels", so.levels, "Price levels per side")->check(CLI::Range(3, 100000));
  synth->add_option("--noise", so.noise, "Relative Gaussian noise per level")->check(CLI::Range(0.0, 10.0));
  synth->add_option("--seed", so.seed, "Random seed");
  synth->add_option("--out", so.out, "Output CSV path (stdout when omitted)");

  Options fo, co, ho, ro, ao;
  auto* fit = app.add_subcommand("fit", "Fit Hermite-Gaussian marginals to both sides");
  add_pipeline_flags(fit, fo, false);
  auto* copula = app.add_subcommand("copula", "Estimate the natural copula; exports density_grid.csv");
  add_pipeline_flags(copula, co, true);
  auto* hydro = app.add_subcommand("hydro", "Circulation and flux of the copula flow; exports vector_field.csv");
  add_pipeline_flags(hydro, ho, true);
  hydro->add_option("--test-potential", ho.test_potential, "Skip estimation and use V=xy or V=x^2+y^2")
      ->check(CLI::IsMember({"bilinear", "quadratic"}));
  auto* corr = app.add_subcommand("corr", "Correlation measure C_T of the copula");
  add_pipeline_flags(corr, ro, true);
  auto* run = app.add_subcommand("run", "Fit, copula, hydro and corr in one report");
  add_pipeline_flags(run, ao, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (*synth) cmd_synth(so);
    if (*fit) cmd_fit(fo);
    if (*copula) cmd_pipeline(co, Stage::kCopula);
    if (*hydro) cmd_pipeline(ho, Stage::kHydro);
    if (*corr) cmd_pipeline(ro, Stage::kCorr);
    if (*run) cmd_pipeline(ao, Stage::kAll);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kUsage);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  }
  return static_cast<int>(ExitCode::kOk);
}
