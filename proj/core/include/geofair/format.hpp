#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "geofair/errors.hpp"

namespace geofair {

/// Shortest decimal form of `value` that parses back to the same double.
/// Used for every floating-point field written to CSV so that outputs are
/// byte-stable and round-trip exact.
inline std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw NumericError("failed to format double");
  return std::string(buf, ptr);
}

/// Strict full-field double parse. Rejects trailing garbage and empty input.
inline double parse_double(std::string_view text, const char* what) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ValidationError(std::string("invalid number for ") + what + ": '" +
                          std::string(text) + "'");
  }
  return value;
}

/// Strict full-field integer parse.
inline long long parse_int(std::string_view text, const char* what) {
  long long value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ValidationError(std::string("invalid integer for ") + what + ": '" +
                          std::string(text) + "'");
  }
  return value;
}

}  // namespace geofair
