#pragma once

#include <sstream>
#include <string>

#include "spectral/band.hpp"
#include "spectral/order.hpp"

namespace spectral {

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Hasse diagram, smaller elements at the bottom.
inline std::string to_dot(const Poset& p, const std::string& name = "order") {
  std::ostringstream out;
  out << "digraph " << detail::dot_quote(name) << " {\n  rankdir=BT;\n";
  for (int x = 0; x < p.size(); ++x) out << "  n" << x << " [label=" << detail::dot_quote(p.label(x)) << "];\n";
  for (auto [x, y] : p.covers()) out << "  n" << x << " -> n" << y << ";\n";
  out << "}\n";
  return out.str();
}

/// Natural order of the band.
inline std::string to_dot(const Band& b, const std::string& name = "band") { return to_dot(natural_order(b), name); }

}  // namespace spectral
