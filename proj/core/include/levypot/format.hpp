#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <vector>

namespace levypot {

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_list(const std::vector<double>& xs, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out.push_back(sep);
    out += format_double(xs[i]);
  }
  return out;
}

}  // namespace levypot
