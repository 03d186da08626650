#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "spectral/band.hpp"
#include "spectral/order.hpp"
#include "spectral/patch.hpp"
#include "spectral/sheaf.hpp"
#include "spectral/skew.hpp"

namespace spectral::io {

using Json = nlohmann::json;

/// Malformed JSON text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset, int line, int column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        offset_(offset), line_(line), column_(column) {}
  std::size_t offset() const { return offset_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::size_t offset_;
  int line_, column_;
};

inline Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
    int line = 1, column = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    auto tail = what.find(": ", what.find("parse error"));
    throw ParseError(tail == std::string::npos ? what : what.substr(tail + 2), offset, line, column);
  }
}

inline std::string schema_name(const std::string& kind) { return "spectral." + kind + "/1"; }

/// Kind named by the "schema" field, or guessed from the keys present.
inline std::string kind_of(const Json& j) {
  if (!j.is_object()) throw ShapeError("document is not a JSON object");
  if (j.contains("schema")) {
    std::string s = j.at("schema").get<std::string>();
    for (std::string k : {"poset", "lattice", "band", "skew", "sheaf", "talgebra", "family"})
      if (s == schema_name(k)) return k;
    throw ShapeError("unknown schema '" + s + "'");
  }
  if (j.contains("xi")) return "talgebra";
  if (j.contains("base_poset")) return "sheaf";
  if (j.contains("stalks")) return "family";
  if (j.contains("mul")) return "band";
  if (j.contains("meet") && j.contains("join")) return "skew";
  if (j.contains("leq")) return "poset";
  throw ShapeError("cannot tell which structure the document holds");
}

namespace detail {

inline const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ShapeError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline std::string text(const Json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw ShapeError(where + ": expected a string id");
}

inline std::vector<std::string> labels(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ShapeError(where + ": expected an array of ids");
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(text(e, where));
  std::set<std::string> seen(out.begin(), out.end());
  if (seen.size() != out.size()) throw ShapeError(where + ": duplicate id");
  return out;
}

inline int lookup(const std::vector<std::string>& ids, const Json& j, const std::string& where) {
  if (j.is_number_integer()) {
    long long v = j.get<long long>();
    if (v < 0 || v >= static_cast<long long>(ids.size())) throw ShapeError(where + ": index " + std::to_string(v) + " out of range");
    return static_cast<int>(v);
  }
  std::string s = text(j, where);
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == s) return static_cast<int>(i);
  throw ShapeError(where + ": unknown id '" + s + "'");
}

inline Table table(const Json& j, const std::vector<std::string>& ids, const std::string& where) {
  int n = static_cast<int>(ids.size());
  if (!j.is_array() || static_cast<int>(j.size()) != n) throw ShapeError(where + ": expected " + std::to_string(n) + " rows");
  Table t(n);
  for (int r = 0; r < n; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw ShapeError(where + ": row " + std::to_string(r) + " needs " + std::to_string(n) + " entries");
    for (int c = 0; c < n; ++c) t.at(r, c) = lookup(ids, row[c], where);
  }
  return t;
}

inline Json rows(const Table& t) {
  Json out = Json::array();
  for (int r = 0; r < t.size(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < t.size(); ++c) row.push_back(t(r, c));
    out.push_back(row);
  }
  return out;
}

inline Mask parse_key(const SpectralSpace& S, const std::string& key, const std::string& where) {
  if (key.size() < 2 || key.front() != '{' || key.back() != '}') throw ShapeError(where + ": bad set key '" + key + "'");
  Mask m = 0;
  std::string body = key.substr(1, key.size() - 2);
  std::size_t start = 0;
  while (!body.empty() && start <= body.size()) {
    auto comma = body.find(',', start);
    std::string id = body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    int x = -1;
    for (int i = 0; i < S.points(); ++i)
      if (S.poset().label(i) == id) x = i;
    if (x < 0) throw ShapeError(where + ": unknown point '" + id + "' in '" + key + "'");
    m |= bit(x);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return m;
}

inline int section_index(const std::vector<std::string>& sections, const std::string& label, const std::string& where) {
  for (std::size_t i = 0; i < sections.size(); ++i)
    if (sections[i] == label) return static_cast<int>(i);
  throw ShapeError(where + ": unknown section '" + label + "'");
}

}  // namespace detail

inline Json to_json(const Poset& p) {
  Json leq = Json::array();
  for (int x = 0; x < p.size(); ++x)
    for (int y = 0; y < p.size(); ++y)
      if (p.less(x, y)) leq.push_back({p.label(x), p.label(y)});
  return {{"schema", schema_name("poset")}, {"elements", p.labels()}, {"leq", leq}};
}

/// Pairs in "leq" are closed under reflexivity and transitivity.
inline Poset poset_from_json(const Json& j) {
  auto ids = detail::labels(detail::field(j, "elements", "poset"), "poset.elements");
  std::vector<std::pair<int, int>> pairs;
  if (j.contains("leq")) {
    const auto& leq = j.at("leq");
    if (!leq.is_array()) throw ShapeError("poset.leq: expected an array of pairs");
    for (const auto& pr : leq) {
      if (!pr.is_array() || pr.size() != 2) throw ShapeError("poset.leq: each entry must be a pair");
      pairs.emplace_back(detail::lookup(ids, pr[0], "poset.leq"), detail::lookup(ids, pr[1], "poset.leq"));
    }
  }
  return Poset::from_pairs(ids, pairs);
}

inline Json to_json(const DistLattice& l) {
  return {{"schema", schema_name("lattice")}, {"elements", l.labels}, {"meet", detail::rows(l.meet)}, {"join", detail::rows(l.join)}};
}

inline DistLattice lattice_from_json(const Json& j) {
  auto ids = detail::labels(detail::field(j, "elements", "lattice"), "lattice.elements");
  if (ids.empty()) throw ShapeError("lattice: no elements");
  DistLattice l{ids, detail::table(detail::field(j, "meet", "lattice"), ids, "lattice.meet"),
                detail::table(detail::field(j, "join", "lattice"), ids, "lattice.join"), -1, -1};
  int n = l.size();
  for (int x = 0; x < n; ++x) {
    bool bottom = true, top = true;
    for (int y = 0; y < n; ++y) {
      if (l.meet(x, y) != x) bottom = false;
      if (l.join(x, y) != x) top = false;
    }
    if (bottom) l.bottom = x;
    if (top) l.top = x;
  }
  if (l.bottom < 0 || l.top < 0) throw DomainError("lattice has no bottom or no top");
  auto problems = check_lattice(l);
  if (!problems.empty()) throw DomainError("not a lattice: " + problems.front());
  return l;
}

inline Json to_json(const Band& b) {
  return {{"schema", schema_name("band")}, {"elements", b.labels}, {"mul", detail::rows(b.mul)}};
}

inline Band band_from_json(const Json& j) {
  auto ids = detail::labels(detail::field(j, "elements", "band"), "band.elements");
  return {ids, detail::table(detail::field(j, "mul", "band"), ids, "band.mul")};
}

inline Json to_json(const SkewLattice& s) {
  return {{"schema", schema_name("skew")}, {"elements", s.labels}, {"meet", detail::rows(s.meet)}, {"join", detail::rows(s.join)}};
}

inline SkewLattice skew_from_json(const Json& j) {
  auto ids = detail::labels(detail::field(j, "elements", "skew"), "skew.elements");
  return {ids, detail::table(detail::field(j, "meet", "skew"), ids, "skew.meet"),
          detail::table(detail::field(j, "join", "skew"), ids, "skew.join")};
}

/// Sections keyed by upset ("{a,b}", ids sorted bytewise), restrictions keyed
/// "<U>|<V>" for every pair V strictly inside U.
inline Json to_json(const Presheaf& F) {
  const auto& S = F.space;
  Json sections = Json::object(), res = Json::object();
  for (int u = 0; u < F.upsets(); ++u) {
    sections[S.key(S.upset(u))] = F.sections[u];
    for (int v = 0; v < F.upsets(); ++v) {
      if (u == v || !subset(S.upset(v), S.upset(u))) continue;
      Json m = Json::object();
      for (int s = 0; s < F.size(u); ++s) m[F.sections[u][s]] = F.sections[v][F.restrict(u, v, s)];
      res[S.key(S.upset(u)) + "|" + S.key(S.upset(v))] = m;
    }
  }
  return {{"schema", schema_name("sheaf")}, {"base_poset", to_json(S.poset())}, {"sections", sections}, {"restrictions", res}};
}

/// A restriction may be omitted when its target holds exactly one section.
inline Presheaf presheaf_from_json(const Json& j) {
  SpectralSpace S(poset_from_json(detail::field(j, "base_poset", "sheaf")));
  int m = S.upset_count();
  Presheaf F{S, std::vector<std::vector<std::string>>(m), {}};
  const auto& sections = detail::field(j, "sections", "sheaf");
  if (!sections.is_object()) throw ShapeError("sheaf.sections: expected an object");
  std::vector<bool> given(m, false);
  for (const auto& [key, list] : sections.items()) {
    Mask u = detail::parse_key(S, key, "sheaf.sections");
    if (!S.is_upset(u)) throw DomainError("sheaf.sections: key is not an upset", {key});
    int i = S.index(u);
    if (given[i]) throw ShapeError("sheaf.sections: upset listed twice: " + key);
    given[i] = true;
    F.sections[i] = detail::labels(list, "sheaf.sections[" + key + "]");
  }
  for (int u = 0; u < m; ++u)
    if (!given[u]) throw ShapeError("sheaf.sections: missing upset " + S.key(S.upset(u)));
  std::map<std::pair<int, int>, std::vector<int>> res;
  const Json empty = Json::object();
  const auto& restrictions = j.contains("restrictions") ? j.at("restrictions") : empty;
  if (!restrictions.is_object()) throw ShapeError("sheaf.restrictions: expected an object");
  for (const auto& [key, table] : restrictions.items()) {
    auto bar = key.find('|');
    if (bar == std::string::npos) throw ShapeError("sheaf.restrictions: key without '|': " + key);
    std::string where = "sheaf.restrictions[" + key + "]";
    int u = S.index(detail::parse_key(S, key.substr(0, bar), where));
    int v = S.index(detail::parse_key(S, key.substr(bar + 1), where));
    if (!subset(S.upset(v), S.upset(u))) throw DomainError(where + ": target is not inside the source", {key});
    if (!table.is_object()) throw ShapeError(where + ": expected an object");
    std::vector<int> r(F.size(u), -1);
    for (const auto& [from, to] : table.items())
      r[detail::section_index(F.sections[u], from, where)] = detail::section_index(F.sections[v], detail::text(to, where), where);
    for (int s = 0; s < F.size(u); ++s)
      if (r[s] < 0) throw ShapeError(where + ": no image for section '" + F.sections[u][s] + "'");
    res[{u, v}] = r;
  }
  fill_restrictions(F, [&](int u, int v, int s) {
    if (u == v) return s;
    auto it = res.find({u, v});
    if (it != res.end()) return it->second[s];
    if (F.size(v) == 1) return 0;
    throw ShapeError("sheaf.restrictions: missing " + S.key(S.upset(u)) + "|" + S.key(S.upset(v)));
  });
  return F;
}

/// Sheaf fields plus "xi": per upset, germ-tuple key to section label.
inline Json to_json(const TAlgebra& A) {
  Json out = to_json(A.sheaf);
  out["schema"] = schema_name("talgebra");
  const auto& F = A.sheaf;
  const auto& S = F.space;
  auto codec = patch_codec(F);
  auto label = [&](int x, int a) { return F.sections[S.principal(x)][a]; };
  Json xi = Json::object();
  for (int u = 0; u < F.upsets(); ++u) {
    Json m = Json::object();
    for (long long c = 0; c < codec.count(u); ++c) m[germ_key(S, label, codec.decode(u, c))] = F.sections[u][A.xi[u][c]];
    xi[S.key(S.upset(u))] = m;
  }
  out["xi"] = xi;
  return out;
}

inline TAlgebra talgebra_from_json(const Json& j) {
  TAlgebra A{presheaf_from_json(j), {}};
  const auto& F = A.sheaf;
  const auto& S = F.space;
  auto codec = patch_codec(F);
  auto label = [&](int x, int a) { return F.sections[S.principal(x)][a]; };
  const auto& xi = detail::field(j, "xi", "talgebra");
  if (!xi.is_object()) throw ShapeError("talgebra.xi: expected an object");
  A.xi.resize(F.upsets());
  for (int u = 0; u < F.upsets(); ++u) {
    std::string key = S.key(S.upset(u));
    std::string where = "talgebra.xi[" + key + "]";
    const auto& table = detail::field(xi, key, "talgebra.xi");
    std::map<std::string, long long> code_of;
    for (long long c = 0; c < codec.count(u); ++c) code_of[germ_key(S, label, codec.decode(u, c))] = c;
    A.xi[u].assign(codec.count(u), -1);
    for (const auto& [germs, value] : table.items()) {
      auto it = code_of.find(germs);
      if (it == code_of.end()) throw ShapeError(where + ": unknown germ tuple '" + germs + "'");
      A.xi[u][it->second] = detail::section_index(F.sections[u], detail::text(value, where), where);
    }
    for (long long c = 0; c < codec.count(u); ++c)
      if (A.xi[u][c] < 0) throw ShapeError(where + ": no value for '" + germ_key(S, label, codec.decode(u, c)) + "'");
  }
  return A;
}

/// {"points":[...],"stalks":{"x":[...]},"leq":[[x,y],...]}; without "leq"
/// the points are unordered.
inline Json to_json(const SaturatedStalkFamily& G) {
  Json stalks = Json::object();
  for (int x = 0; x < G.base.size(); ++x) stalks[G.base.label(x)] = G.stalks[x];
  Json leq = Json::array();
  for (int x = 0; x < G.base.size(); ++x)
    for (int y = 0; y < G.base.size(); ++y)
      if (G.base.less(x, y)) leq.push_back({G.base.label(x), G.base.label(y)});
  return {{"schema", schema_name("family")}, {"points", G.base.labels()}, {"stalks", stalks}, {"leq", leq}};
}

inline SaturatedStalkFamily family_from_json(const Json& j) {
  Json as_poset = {{"elements", detail::field(j, "points", "family")}};
  if (j.contains("leq")) as_poset["leq"] = j.at("leq");
  SaturatedStalkFamily G{poset_from_json(as_poset), {}};
  const auto& stalks = detail::field(j, "stalks", "family");
  if (!stalks.is_object()) throw ShapeError("family.stalks: expected an object");
  G.stalks.resize(G.base.size());
  for (const auto& [id, list] : stalks.items()) G.stalks[G.base.index_of(id)] = detail::labels(list, "family.stalks[" + id + "]");
  return G;
}

}  // namespace spectral::io
