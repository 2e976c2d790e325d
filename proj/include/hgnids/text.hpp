#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hgnids::text {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

std::string_view trim(std::string_view s);

/// Splits on a single delimiter; empty fields are kept.
std::vector<std::string_view> split(std::string_view s, char delim);

/// Parses a full field as a double. Accepts "inf"/"Infinity"/"nan" forms.
/// Returns nullopt for empty or malformed text.
std::optional<double> parse_double(std::string_view s);

std::optional<long long> parse_int(std::string_view s);

std::string to_lower(std::string_view s);

template <class Range>
std::string join(const Range& items, std::string_view sep) {
  std::string out;
  bool first = true;
  for (const auto& item : items) {
    if (!first) out.append(sep);
    first = false;
    out.append(item);
  }
  return out;
}

}  // namespace hgnids::text
