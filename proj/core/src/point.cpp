#include "levypot/point.hpp"

#include "levypot/format.hpp"

namespace levypot {

std::string to_string(const Point& p) {
  std::string s = "[";
  for (int i = 0; i < p.dim(); ++i) {
    if (i) s.push_back(',');
    s += format_double(p[i]);
  }
  s.push_back(']');
  return s;
}

}  // namespace levypot
