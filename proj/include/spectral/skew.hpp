#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spectral/band.hpp"
#include "spectral/common.hpp"
#include "spectral/order.hpp"

namespace spectral {

/// Carrier with a meet table and a join table.
struct SkewLattice {
  std::vector<std::string> labels;
  Table meet;
  Table join;

  int size() const { return meet.size(); }
  int index_of(const std::string& l) const {
    for (int i = 0; i < size(); ++i)
      if (labels[i] == l) return i;
    throw ShapeError("unknown skew lattice element '" + l + "'");
  }
  Band meet_band() const { return {labels, meet}; }
  Band join_band() const { return {labels, join}; }
};

inline SkewLattice skew_from_lattice(const DistLattice& l) { return {l.labels, l.meet, l.join}; }

struct SkewReport {
  std::vector<std::string> violations;
  bool right_handed = false;
  bool left_handed = false;
  bool normal = false;
  bool commutative = false;
  /// Lattice reflection on the D-classes, present when the axioms hold.
  std::optional<DistLattice> reflection;
  /// Projection onto the reflection.
  std::vector<int> reflection_map;

  bool valid() const { return violations.empty(); }
};

namespace detail {

inline void absorption_violations(const SkewLattice& s, std::vector<std::string>& out) {
  int n = s.size();
  const auto& L = s.labels;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      if (s.join(s.meet(y, x), x) != x) out.push_back("(y^x)vx = x fails at x=" + L[x] + ", y=" + L[y]);
      if (s.meet(x, s.join(x, y)) != x) out.push_back("x^(xvy) = x fails at x=" + L[x] + ", y=" + L[y]);
      if (s.join(x, s.meet(x, y)) != x) out.push_back("xv(x^y) = x fails at x=" + L[x] + ", y=" + L[y]);
      if (s.meet(s.join(y, x), x) != x) out.push_back("(yvx)^x = x fails at x=" + L[x] + ", y=" + L[y]);
    }
}

inline DistLattice reflection_tables(const SkewLattice& s, const Partition& D, std::vector<std::string> labels) {
  std::vector<int> rep(D.count, -1);
  for (int x = 0; x < s.size(); ++x)
    if (rep[D.class_of[x]] < 0) rep[D.class_of[x]] = x;
  DistLattice l{std::move(labels), Table(D.count), Table(D.count), 0, 0};
  for (int c = 0; c < D.count; ++c)
    for (int d = 0; d < D.count; ++d) {
      l.meet.at(c, d) = D.class_of[s.meet(rep[c], rep[d])];
      l.join.at(c, d) = D.class_of[s.join(rep[c], rep[d])];
    }
  for (int c = 0; c < D.count; ++c) {
    bool bottom = true, top = true;
    for (int d = 0; d < D.count; ++d) {
      if (l.meet(c, d) != c) bottom = false;
      if (l.meet(c, d) != d) top = false;
    }
    if (bottom) l.bottom = c;
    if (top) l.top = c;
  }
  return l;
}

}  // namespace detail

inline SkewReport check_skew(const SkewLattice& s) {
  SkewReport r;
  int n = s.size();
  if (s.join.size() != n || static_cast<int>(s.labels.size()) != n) {
    r.violations.push_back("meet, join and labels disagree in size");
    return r;
  }
  for (const auto& p : check_band(s.meet_band())) r.violations.push_back("meet: " + p);
  for (const auto& p : check_band(s.join_band())) r.violations.push_back("join: " + p);
  detail::absorption_violations(s, r.violations);
  if (!r.valid()) return r;
  auto mc = classify(s.meet_band());
  auto jc = classify(s.join_band());
  r.right_handed = mc.right_regular && jc.left_regular;
  r.left_handed = mc.left_regular && jc.right_regular;
  r.normal = mc.normal;
  r.commutative = mc.commutative && jc.commutative;
  auto D = green_relations(s.meet_band()).D;
  std::vector<std::string> labels(D.count);
  for (int x = n - 1; x >= 0; --x) labels[D.class_of[x]] = "[" + s.labels[x] + "]";
  r.reflection = detail::reflection_tables(s, D, labels);
  r.reflection_map = D.class_of;
  return r;
}

inline bool is_skew_lattice(const SkewLattice& s) { return check_skew(s).valid(); }

struct SymmetryResult {
  bool symmetric = true;
  /// A pair commuting for one operation but not the other.
  std::optional<std::pair<int, int>> witness;
};

inline SymmetryResult is_symmetric(const SkewLattice& s) {
  SymmetryResult r;
  for (int x = 0; x < s.size(); ++x)
    for (int y = x + 1; y < s.size(); ++y) {
      bool m = s.meet(x, y) == s.meet(y, x);
      bool j = s.join(x, y) == s.join(y, x);
      if (m != j) {
        r.symmetric = false;
        r.witness = std::make_pair(x, y);
        return r;
      }
    }
  return r;
}

/// (x^y)vx = x^(yvx) and (xvy)^x = xv(y^x) for all pairs. Requires a normal
/// skew lattice.
inline bool symmetric_identities_hold(const SkewLattice& s) {
  if (!classify(s.meet_band()).normal) throw DomainError("skew lattice is not normal");
  for (int x = 0; x < s.size(); ++x)
    for (int y = 0; y < s.size(); ++y) {
      if (s.join(s.meet(x, y), x) != s.meet(x, s.join(y, x))) return false;
      if (s.meet(s.join(x, y), x) != s.join(x, s.meet(y, x))) return false;
    }
  return true;
}

/// z^(xvy)^z = (z^x^z)v(z^y^z)
inline bool sandwich_law_holds(const SkewLattice& s) {
  int n = s.size();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (s.meet(s.meet(z, s.join(x, y)), z) != s.join(s.meet(s.meet(z, x), z), s.meet(s.meet(z, y), z)))
          return false;
  return true;
}

/// z^(xvy) = (z^x)v(z^y), the form for left-handed skew lattices.
inline bool left_meet_law_holds(const SkewLattice& s) {
  int n = s.size();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (s.meet(z, s.join(x, y)) != s.join(s.meet(z, x), s.meet(z, y))) return false;
  return true;
}

/// (xvy)^z = (x^z)v(y^z), the form for right-handed skew lattices.
inline bool right_meet_law_holds(const SkewLattice& s) {
  int n = s.size();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (s.meet(s.join(x, y), z) != s.join(s.meet(x, z), s.meet(y, z))) return false;
  return true;
}

struct DistributiveSkewReport {
  bool valid = false;
  bool right_handed = false;
  bool normal = false;
  bool symmetric = false;
  /// The meet band has a two-sided zero.
  bool has_zero = false;
  bool distributive_reflection = false;
  bool boolean_reflection = false;
  /// x^(yvz) = (x^y)v(x^z)
  bool left_law = false;
  /// (xvy)^z = (x^z)v(y^z)
  bool right_law = false;

  bool distributive() const { return valid && normal && symmetric && has_zero && distributive_reflection; }
  bool right_distributive() const { return distributive() && right_handed; }
  bool right_boolean() const { return right_distributive() && boolean_reflection; }
  /// For normal inputs the two laws hold exactly when the lattice is
  /// symmetric with distributive reflection.
  bool laws_match() const { return !valid || !normal || ((symmetric && distributive_reflection) == (left_law && right_law)); }
};

inline DistributiveSkewReport is_distributive_skew(const SkewLattice& s) {
  DistributiveSkewReport r;
  auto rep = check_skew(s);
  r.valid = rep.valid();
  if (!r.valid) return r;
  r.right_handed = rep.right_handed;
  r.normal = rep.normal;
  r.symmetric = is_symmetric(s).symmetric;
  r.has_zero = band_zero(s.meet_band()).has_value();
  r.distributive_reflection = !distributivity_violation(*rep.reflection);
  r.boolean_reflection = r.distributive_reflection && is_boolean_lattice(*rep.reflection);
  r.left_law = left_meet_law_holds(s);
  r.right_law = right_meet_law_holds(s);
  return r;
}

/// The join of the unique right Boolean skew lattice on a right Boolean band:
/// x v y is the supremum of x and the part of y lying outside [x].
inline SkewLattice reconstruct_boolean_join(const Band& b) {
  auto report = is_distributive_band(b);
  if (!report.normal) throw DomainError("band is not normal");
  if (!report.right_regular) throw DomainError("band is not right regular");
  if (!report.has_zero) throw DomainError("band has no zero");
  if (!report.commuting_sups) throw DomainError("band lacks suprema of commuting pairs");
  if (!report.bounded_distributive_reflection) throw DomainError("reflection is not bounded distributive");
  if (!report.boolean_reflection) throw DomainError("reflection is not Boolean");
  auto D = green_relations(b).D;
  auto lattice = *reflection_lattice(b);
  int n = b.size();
  std::vector<int> rep(D.count, -1), complement(D.count, -1);
  for (int x = 0; x < n; ++x)
    if (rep[D.class_of[x]] < 0) rep[D.class_of[x]] = x;
  for (int a = 0; a < D.count; ++a)
    for (int c = 0; c < D.count; ++c)
      if (lattice.meet(a, c) == lattice.bottom && lattice.join(a, c) == lattice.top) complement[a] = c;
  SkewLattice s{b.labels, b.mul, Table(n)};
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      int cls = lattice.meet(D.class_of[y], complement[D.class_of[x]]);
      int rest = b(rep[cls], y);
      auto sup = commuting_sup(b, x, rest);
      if (!sup) throw DomainError("relative complement does not commute", {b.labels[x], b.labels[rest]});
      s.join.at(x, y) = *sup;
    }
  return s;
}

/// Words without repetition under x^y = letters of y occurring in x, in the
/// order of y, and xvy = leftmost occurrences of xy.
inline SkewLattice nonsymmetric_example(int n) {
  auto words = repetition_free_words(n);
  int m = static_cast<int>(words.size());
  SkewLattice s{{}, Table(m), Table(m)};
  for (const auto& w : words) s.labels.push_back(word_label(w));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Word meet;
      for (int c : words[j])
        if (std::find(words[i].begin(), words[i].end(), c) != words[i].end()) meet.push_back(c);
      Word cat = words[i];
      cat.insert(cat.end(), words[j].begin(), words[j].end());
      s.meet.at(i, j) = word_index(words, meet);
      s.join.at(i, j) = word_index(words, keep_leftmost(cat));
    }
  return s;
}

enum class JoinRequirement { SkewLattice, RightDistributive };

struct JoinSearchResult {
  std::vector<Table> joins;
  bool complete = true;
  long long leaves = 0;
};

/// Exhaustive search for every join table making the band a skew lattice
/// (optionally right distributive). Candidates per cell come from the four
/// absorption laws; associativity is propagated as cells become fixed and every
/// complete table is checked in full. Bands of at most 64 elements.
inline JoinSearchResult search_skew_joins(const Band& meet, JoinRequirement req, CancelToken cancel = {},
                                          std::size_t limit = 0) {
  int n = meet.size();
  if (n > 64) throw DomainError("join search supports at most 64 elements", {std::to_string(n)});
  JoinSearchResult out;
  if (n == 0) return out;
  using Dom = std::uint64_t;
  auto single = [](Dom d) { return d && !(d & (d - 1)); };
  auto value_of = [](Dom d) { return std::countr_zero(d); };
  std::size_t cells = static_cast<std::size_t>(n) * n;
  std::vector<Dom> dom(cells, 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Dom& d = dom[a * n + b];
      for (int v = 0; v < n; ++v) {
        if (a == b && v != a) continue;
        if (meet(a, b) == a && v != b) continue;
        if (meet(a, b) == b && v != a) continue;
        if (meet(a, v) != a || meet(v, b) != b) continue;
        d |= Dom{1} << v;
      }
      if (!d) return out;
    }
  std::vector<int> fixed(cells, -1);
  std::vector<std::vector<int>> by_value(n);
  struct Entry {
    int cell;
    Dom old;
    bool fix;
  };
  std::vector<Entry> trail;
  std::vector<int> queue;
  auto narrow = [&](int c, Dom d) {
    Dom nd = dom[c] & d;
    if (nd == dom[c]) return true;
    if (!nd) return false;
    trail.push_back({c, dom[c], false});
    dom[c] = nd;
    if (single(nd)) queue.push_back(c);
    return true;
  };
  auto equate = [&](int c1, int c2) { return narrow(c1, dom[c2]) && narrow(c2, dom[c1]); };
  auto propagate = [&]() {
    while (!queue.empty()) {
      int c = queue.back();
      queue.pop_back();
      if (fixed[c] >= 0) continue;
      int v = value_of(dom[c]);
      int p = c / n, q = c % n;
      fixed[c] = v;
      by_value[v].push_back(c);
      trail.push_back({c, dom[c], true});
      for (int z = 0; z < n; ++z) {
        int b = fixed[q * n + z];
        if (b >= 0 && !equate(v * n + z, p * n + b)) return false;
      }
      for (int x = 0; x < n; ++x) {
        int a = fixed[x * n + p];
        if (a >= 0 && !equate(a * n + q, x * n + v)) return false;
      }
      for (int xy : by_value[p]) {
        int b = fixed[(xy % n) * n + q];
        if (b >= 0 && !narrow((xy / n) * n + b, Dom{1} << v)) return false;
      }
      for (int yz : by_value[q]) {
        int a = fixed[p * n + yz / n];
        if (a >= 0 && !narrow(a * n + yz % n, Dom{1} << v)) return false;
      }
    }
    return true;
  };
  auto undo = [&](std::size_t mark) {
    queue.clear();
    while (trail.size() > mark) {
      Entry e = trail.back();
      trail.pop_back();
      if (e.fix) {
        by_value[fixed[e.cell]].pop_back();
        fixed[e.cell] = -1;
      } else {
        dom[e.cell] = e.old;
      }
    }
  };
  auto accept = [&]() {
    SkewLattice s{meet.labels, meet.mul, Table(n, fixed)};
    if (req == JoinRequirement::SkewLattice) return is_skew_lattice(s);
    return is_distributive_skew(s).right_distributive();
  };
  for (std::size_t c = 0; c < cells; ++c)
    if (single(dom[c])) queue.push_back(static_cast<int>(c));
  if (!propagate()) return out;
  bool stop = false;
  std::function<void()> rec = [&]() {
    if (stop) return;
    if (cancel.cancelled()) {
      out.complete = false;
      stop = true;
      return;
    }
    int best = -1, width = 65;
    for (std::size_t c = 0; c < cells; ++c)
      if (fixed[c] < 0) {
        int w = std::popcount(dom[c]);
        if (w < width) {
          width = w;
          best = static_cast<int>(c);
          if (w <= 1) break;
        }
      }
    if (best < 0) {
      ++out.leaves;
      if (accept()) {
        out.joins.emplace_back(n, fixed);
        if (limit && out.joins.size() >= limit) {
          out.complete = false;
          stop = true;
        }
      }
      return;
    }
    Dom options = dom[best];
    while (options && !stop) {
      int v = value_of(options);
      options &= options - 1;
      std::size_t mark = trail.size();
      if (narrow(best, Dom{1} << v)) {
        if (fixed[best] < 0 && std::find(queue.begin(), queue.end(), best) == queue.end()) queue.push_back(best);
        if (propagate()) rec();
      }
      undo(mark);
    }
  };
  rec();
  return out;
}

}  // namespace spectral
