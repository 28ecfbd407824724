#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "natcop/hermite_marginals.hpp"

namespace natcop {

enum class Side { kBuy, kSell };

std::string_view to_string(Side side) noexcept;

/// One row of the `price,volume,side` input format.
struct PriceLevelRecord {
  double price = 0.0;
  double volume = 0.0;
  Side side = Side::kBuy;

  bool operator==(const PriceLevelRecord&) const = default;
};

inline constexpr std::string_view kCsvHeader = "price,volume,side";
inline constexpr int kDefaultBins = 64;

/// Parses a CSV with header `price,volume,side`. Side tokens are
/// case-insensitive buy/sell/B/S. Blank lines are skipped.
std::vector<PriceLevelRecord> load_csv(const std::filesystem::path& path);
std::vector<PriceLevelRecord> parse_csv(std::string_view text);

/// Writes records in the same format; prices and volumes use the shortest
/// representation that parses back to the identical double.
void write_csv(const std::filesystem::path& path, std::span<const PriceLevelRecord> records);
std::string format_csv(std::span<const PriceLevelRecord> records);

/// Trailing moving average: out[k] = mean(masses[max(0, k-order+1) .. k]).
/// Total mass is not preserved in general.
std::vector<double> ma_smooth(std::span<const double> masses, int order);

/// Equal-width volume histogram of one side over [min price, max price].
EmpiricalHistogram bin_levels(std::span<const PriceLevelRecord> records, int n_bins, Side side);

/// Shared embedding of both sides: [min center - w, max center + w] where w is
/// the larger bin width.
DomainMap shared_domain(const EmpiricalHistogram& a, const EmpiricalHistogram& b);

}  // namespace natcop
