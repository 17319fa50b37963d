#pragma once

#include <charconv>
#include <string>

namespace mcc::detail {

// Shortest decimal text that parses back to the same double.
inline std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace mcc::detail
