#include "natcop/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>

#include "natcop/error.hpp"

namespace natcop {

std::array<double, kHermiteTerms> coefficients_from_shape(const std::array<double, kHermiteTerms>& shape,
                                                          double xi) {
  std::array<double, kHermiteTerms> c{};
  double scale = 1.0;
  for (int i = 0; i < kHermiteTerms; ++i) {
    scale *= xi;
    c[i] = shape[i] / scale;
  }
  return c;
}

namespace {

MarginalSpec side(double volume, double width, double xi, double center, double theta,
                  const std::array<double, kHermiteTerms>& shape) {
  MarginalSpec s;
  s.volume = volume;
  s.width = width;
  s.xi = xi;
  s.center = center;
  s.theta = theta;
  s.coeffs = coefficients_from_shape(shape, xi);
  return s;
}

void emit_side(const MarginalSpec& spec, Side which, const SynthConfig& config, std::mt19937_64& rng,
               std::vector<PriceLevelRecord>& out) {
  if (!(spec.volume > 0.0)) {
    throw Error(ErrorKind::kEmptySide, "requested zero volume for the " +
                                           std::string(to_string(which)) + " side");
  }
  spec.validate();
  const double half = config.span_widths * spec.width * std::sqrt(spec.theta);
  const DomainMap map(spec.center - half, spec.center + half);
  std::vector<double> prices(config.levels);
  std::vector<double> raw(config.levels);
  double total = 0.0;
  for (int k = 0; k < config.levels; ++k) {
    const double u = (k + 0.5) / config.levels;
    prices[k] = map.from_unit(u);
    raw[k] = raw_density(spec, u, map);
    total += raw[k];
  }
  if (!(total > 0.0)) {
    throw Error(ErrorKind::kEmptySide, "model has no positive level on the " +
                                           std::string(to_string(which)) + " side");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::size_t emitted = 0;
  for (int k = 0; k < config.levels; ++k) {
    if (raw[k] <= 0.0) continue;
    const double eps = gauss(rng);
    const double v = spec.volume * config.volume_unit * raw[k] / total * std::max(0.0, 1.0 + config.noise * eps);
    const double shares = std::round(v);
    if (shares <= 0.0) continue;
    out.push_back({prices[k], shares, which});
    ++emitted;
  }
  if (emitted == 0) {
    throw Error(ErrorKind::kEmptySide, "no positive volume on the " + std::string(to_string(which)) + " side");
  }
}

}  // namespace

SidePair ibm_preset() {
  return {side(3.5, 0.0471, 3.558, 13.374, 1.0, kStandInBuyShape),
          side(6.0, 0.0471, 3.558, 13.561, 1.0, kStandInSellShape)};
}

SidePair spdr_preset() {
  return {side(14.0, 10.561, 1.698, 173.164, 2.0, kStandInBuyShape),
          side(16.0, 10.561, 1.698, 174.116, 2.0, kStandInSellShape)};
}

std::vector<PriceLevelRecord> synthesize(const SynthConfig& config) {
  if (config.levels < 3) throw Error(ErrorKind::kInvalidArgument, "need at least 3 levels per side");
  if (!(config.noise >= 0.0) || !(config.volume_unit > 0.0) || !(config.span_widths > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "noise, volume unit and span must be positive");
  }
  std::mt19937_64 rng(config.seed);
  std::vector<PriceLevelRecord> out;
  emit_side(config.sides.buy, Side::kBuy, config, rng, out);
  emit_side(config.sides.sell, Side::kSell, config, rng, out);
  return out;
}

}  // namespace natcop
