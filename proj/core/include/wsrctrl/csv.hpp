#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace wsrctrl {

// Shortest decimal form that parses back to the same double; "inf", "-inf"
// and "nan" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace wsrctrl
