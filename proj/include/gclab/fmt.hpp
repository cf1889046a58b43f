#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace gclab::fmt {

// Shortest decimal form that round-trips the exact double. Used everywhere
// numbers go into CSV or reports so that reruns are byte-identical.
inline std::string format_double(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace gclab::fmt
