#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "natcop/data_ingest.hpp"
#include "natcop/hermite_marginals.hpp"

namespace natcop {

/// Published shape parameters of one two-sided example. The Hermite
/// coefficients were never published, so presets carry stand-in shapes.
struct SidePair {
  MarginalSpec buy;
  MarginalSpec sell;
};

/// Converts products h_i = c_i xi^i into coefficients c_i for the given xi.
std::array<double, kHermiteTerms> coefficients_from_shape(const std::array<double, kHermiteTerms>& shape,
                                                          double xi);

/// IBM 2016-05-03 VAP: V_B 3.5, V_S 6.0, sigma 0.0471, xi 3.558,
/// p_B 13.374, p_S 13.561, theta 1.
SidePair ibm_preset();
/// SPDR500 LOB: V_B 14.0, V_S 16.0, sigma 10.561, xi 1.698,
/// p_B 173.164, p_S 174.116, theta 2.
SidePair spdr_preset();

/// Stand-in shapes h_i = c_i xi^i used by the presets.
inline constexpr std::array<double, kHermiteTerms> kStandInBuyShape{0.2, -0.6875, 0.0, -0.03125};
inline constexpr std::array<double, kHermiteTerms> kStandInSellShape{-0.15, -0.6875, 0.01, -0.03125};

struct SynthConfig {
  SidePair sides;
  int levels = 1000;           // price levels per side before dropping empty ones
  double span_widths = 3.0;    // levels cover center +/- span_widths * width * sqrt(theta)
  double volume_unit = 1e4;    // shares per unit of V
  double noise = 0.05;         // relative Gaussian noise on each level
  std::uint64_t seed = 42;
};

/// Volume-at-price records sampled from the clamped model. Levels with zero
/// volume are omitted; volumes are rounded to whole shares. Deterministic for
/// a given seed. Throws kEmptySide when a side has zero requested volume or
/// ends up with no positive level.
std::vector<PriceLevelRecord> synthesize(const SynthConfig& config);

}  // namespace natcop
