#include "natcop/data_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "natcop/error.hpp"

namespace natcop {

std::string_view to_string(Side side) noexcept { return side == Side::kBuy ? "buy" : "sell"; }

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view field, std::size_t line, const char* name) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    parse_error(line, std::string("malformed ") + name + " '" + std::string(field) + "'");
  }
  return v;
}

Side parse_side(std::string_view field, std::size_t line) {
  std::string lower(field);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "buy" || lower == "b") return Side::kBuy;
  if (lower == "sell" || lower == "s") return Side::kSell;
  parse_error(line, "unknown side '" + std::string(field) + "'");
}

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

std::vector<PriceLevelRecord> parse_csv(std::string_view text) {
  std::vector<PriceLevelRecord> records;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (!header_seen) {
      if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
      if (line != kCsvHeader) parse_error(line_no, "expected header '" + std::string(kCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    std::string_view fields[3];
    std::size_t count = 0;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      if (count == 3) parse_error(line_no, "expected 3 fields");
      fields[count++] = trim(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (count != 3) parse_error(line_no, "expected 3 fields");
    PriceLevelRecord r;
    r.price = parse_number(fields[0], line_no, "price");
    r.volume = parse_number(fields[1], line_no, "volume");
    r.side = parse_side(fields[2], line_no);
    if (!(r.price > 0.0)) parse_error(line_no, "price must be positive");
    if (r.volume < 0.0) parse_error(line_no, "volume must be nonnegative");
    records.push_back(r);
  }
  if (!header_seen) parse_error(1, "missing header");
  return records;
}

std::vector<PriceLevelRecord> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string format_csv(std::span<const PriceLevelRecord> records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    append_number(out, r.price);
    out += ',';
    append_number(out, r.volume);
    out += ',';
    out += to_string(r.side);
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, std::span<const PriceLevelRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << format_csv(records);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

std::vector<double> ma_smooth(std::span<const double> masses, int order) {
  if (masses.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot smooth an empty sequence");
  if (order < 1) throw Error(ErrorKind::kInvalidArgument, "moving-average order must be >= 1");
  std::vector<double> out(masses.size());
  for (std::size_t k = 0; k < masses.size(); ++k) {
    const std::size_t first = k + 1 >= static_cast<std::size_t>(order) ? k + 1 - order : 0;
    double sum = 0.0;
    for (std::size_t j = first; j <= k; ++j) sum += masses[j];
    out[k] = sum / static_cast<double>(k - first + 1);
  }
  return out;
}

EmpiricalHistogram bin_levels(std::span<const PriceLevelRecord> records, int n_bins, Side side) {
  if (n_bins < 3) throw Error(ErrorKind::kInvalidArgument, "need at least 3 bins");
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const auto& r : records) {
    if (r.side != side) continue;
    lo = any ? std::min(lo, r.price) : r.price;
    hi = any ? std::max(hi, r.price) : r.price;
    any = true;
  }
  if (!any) {
    throw Error(ErrorKind::kEmptySide, "no " + std::string(to_string(side)) + " records");
  }
  double width = (hi - lo) / n_bins;
  if (!(width > 0.0)) {
    // A single price level: tiny bins centred on it.
    width = std::max(std::abs(lo), 1.0) * 1e-6;
    lo -= 0.5 * width * n_bins;
  }
  EmpiricalHistogram hist;
  hist.bin_centers.resize(n_bins);
  hist.masses.assign(n_bins, 0.0);
  for (int k = 0; k < n_bins; ++k) hist.bin_centers[k] = lo + (k + 0.5) * width;
  for (const auto& r : records) {
    if (r.side != side) continue;
    const int k = std::clamp(static_cast<int>(std::floor((r.price - lo) / width)), 0, n_bins - 1);
    hist.masses[k] += r.volume;
  }
  return hist;
}

DomainMap shared_domain(const EmpiricalHistogram& a, const EmpiricalHistogram& b) {
  const double w = std::max(a.bin_width(), b.bin_width());
  const double lo = std::min(a.bin_centers.front(), b.bin_centers.front()) - w;
  const double hi = std::max(a.bin_centers.back(), b.bin_centers.back()) + w;
  return DomainMap(lo, hi);
}

}  // namespace natcop
