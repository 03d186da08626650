#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spectral/common.hpp"
#include "spectral/order.hpp"

namespace spectral {

/// Finite carrier with a multiplication table. Construction does not check
/// the band axioms; use check_band or make_band for that.
struct Band {
  std::vector<std::string> labels;
  Table mul;

  int size() const { return mul.size(); }
  int operator()(int x, int y) const { return mul(x, y); }
  int index_of(const std::string& l) const {
    for (int i = 0; i < size(); ++i)
      if (labels[i] == l) return i;
    throw ShapeError("unknown band element '" + l + "'");
  }
};

inline std::vector<std::string> check_band(const Band& b) {
  std::vector<std::string> out;
  if (static_cast<int>(b.labels.size()) != b.size()) {
    out.push_back("label count does not match table size");
    return out;
  }
  int n = b.size();
  for (int x = 0; x < n; ++x)
    if (b(x, x) != x) out.push_back("not idempotent at " + b.labels[x]);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (b(b(x, y), z) != b(x, b(y, z)))
          out.push_back("not associative at " + b.labels[x] + "," + b.labels[y] + "," + b.labels[z]);
  return out;
}

inline bool is_band(const Band& b) {
  int n = b.size();
  for (int x = 0; x < n; ++x)
    if (b(x, x) != x) return false;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (b(b(x, y), z) != b(x, b(y, z))) return false;
  return true;
}

inline Band make_band(std::vector<std::string> labels, Table mul) {
  Band b{std::move(labels), std::move(mul)};
  auto problems = check_band(b);
  if (!problems.empty()) throw DomainError("not a band: " + problems.front());
  return b;
}

inline Band right_zero_band(int n) {
  Table t(n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) t.at(x, y) = y;
  return {index_labels(n), t};
}

inline Band left_zero_band(int n) {
  Table t(n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) t.at(x, y) = x;
  return {index_labels(n), t};
}

inline Band opposite_band(const Band& b) {
  Table t(b.size());
  for (int x = 0; x < b.size(); ++x)
    for (int y = 0; y < b.size(); ++y) t.at(x, y) = b(y, x);
  return {b.labels, t};
}

inline Band product_band(const Band& a, const Band& b) {
  int n = a.size() * b.size();
  Table t(n);
  std::vector<std::string> labels;
  for (int x = 0; x < a.size(); ++x)
    for (int y = 0; y < b.size(); ++y) labels.push_back("(" + a.labels[x] + "," + b.labels[y] + ")");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      t.at(i, j) = a(i / b.size(), j / b.size()) * b.size() + b(i % b.size(), j % b.size());
  return {labels, t};
}

/// Band on a lattice's meet table.
inline Band meet_band(const DistLattice& l) { return {l.labels, l.meet}; }

/// x = xyx
inline bool preceq(const Band& b, int x, int y) { return b(b(x, y), x) == x; }

/// x = yx = xy
inline bool natural_leq(const Band& b, int x, int y) { return b(y, x) == x && b(x, y) == x; }

inline Poset natural_order(const Band& b) {
  int n = b.size();
  std::vector<std::vector<bool>> leq(n, std::vector<bool>(n));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) leq[x][y] = natural_leq(b, x, y);
  return Poset::from_matrix(b.labels, leq);
}

struct GreenRelations {
  Partition D, L, R;
};

/// L: xy = x and yx = y. R: xy = y and yx = x. D: x = xyx and y = yxy.
inline GreenRelations green_relations(const Band& b) {
  int n = b.size();
  auto build = [&](auto related) {
    UnionFind uf(n);
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y)
        if (related(x, y)) uf.unite(x, y);
    return uf.partition();
  };
  return {build([&](int x, int y) { return preceq(b, x, y) && preceq(b, y, x); }),
          build([&](int x, int y) { return b(x, y) == x && b(y, x) == y; }),
          build([&](int x, int y) { return b(x, y) == y && b(y, x) == x; })};
}

inline bool is_congruence(const Band& b, const Partition& p) {
  int n = b.size();
  for (int x = 0; x < n; ++x)
    for (int x2 = 0; x2 < n; ++x2) {
      if (!p.same(x, x2)) continue;
      for (int y = 0; y < n; ++y)
        if (!p.same(b(x, y), b(x2, y)) || !p.same(b(y, x), b(y, x2))) return false;
    }
  return true;
}

/// Quotient band with the projection map.
struct Quotient {
  Band band;
  std::vector<int> map;
};

inline Quotient quotient_band(const Band& b, const Partition& p) {
  if (!is_congruence(b, p)) throw DomainError("partition is not a congruence");
  std::vector<int> rep(p.count, -1);
  for (int x = 0; x < b.size(); ++x)
    if (rep[p.class_of[x]] < 0) rep[p.class_of[x]] = x;
  Table t(p.count);
  std::vector<std::string> labels;
  for (int c = 0; c < p.count; ++c) {
    labels.push_back("[" + b.labels[rep[c]] + "]");
    for (int d = 0; d < p.count; ++d) t.at(c, d) = p.class_of[b(rep[c], rep[d])];
  }
  return {{labels, t}, p.class_of};
}

inline Quotient semilattice_reflection(const Band& b) { return quotient_band(b, green_relations(b).D); }

/// Order [x] <= [y] iff x = xyx on the D-classes.
inline Poset reflection_order(const Band& b, const Partition& D) {
  std::vector<int> rep(D.count, -1);
  for (int x = 0; x < b.size(); ++x)
    if (rep[D.class_of[x]] < 0) rep[D.class_of[x]] = x;
  std::vector<std::string> labels;
  std::vector<std::vector<bool>> leq(D.count, std::vector<bool>(D.count));
  for (int c = 0; c < D.count; ++c) {
    labels.push_back("[" + b.labels[rep[c]] + "]");
    for (int d = 0; d < D.count; ++d) leq[c][d] = preceq(b, rep[c], rep[d]);
  }
  return Poset::from_matrix(labels, leq);
}

struct BandClass {
  bool commutative = true;
  bool regular = true;
  bool left_regular = true;
  bool right_regular = true;
  bool normal = true;
  bool left_normal = true;
  bool right_normal = true;
  bool rectangular = true;
};

inline BandClass classify(const Band& b) {
  BandClass c;
  int n = b.size();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      int xy = b(x, y), yx = b(y, x);
      if (xy != yx) c.commutative = false;
      if (b(xy, x) != xy) c.left_regular = false;
      if (b(xy, x) != yx) c.right_regular = false;
      if (b(xy, x) != x) c.rectangular = false;
      for (int z = 0; z < n; ++z) {
        int zx = b(z, x), zy = b(z, y);
        if (b(b(zx, z), b(y, z)) != b(b(zx, y), z)) c.regular = false;
        if (b(b(zx, y), z) != b(b(zy, x), z)) c.normal = false;
        if (b(xy, z) != b(b(x, z), y)) c.left_normal = false;
        if (b(xy, z) != b(yx, z)) c.right_normal = false;
      }
    }
  return c;
}

/// Kimura square X -> X/R x_{X/D} X/L.
struct KimuraDecomposition {
  GreenRelations green;
  bool left_congruence = false;   // R is a congruence
  bool right_congruence = false;  // L is a congruence
  std::optional<Quotient> by_R, by_L, by_D;
  /// Pullback of sets: pairs (R-class, L-class) over the same D-class.
  std::vector<std::pair<int, int>> pullback;
  /// Image of each element in the pullback.
  std::vector<int> map;
  bool set_bijection = false;
  bool semigroup_iso = false;
};

inline KimuraDecomposition kimura_decomposition(const Band& b) {
  KimuraDecomposition k;
  k.green = green_relations(b);
  const auto& [D, L, R] = k.green;
  int n = b.size();
  k.left_congruence = is_congruence(b, R);
  k.right_congruence = is_congruence(b, L);
  k.by_D = quotient_band(b, D);
  if (k.left_congruence) k.by_R = quotient_band(b, R);
  if (k.right_congruence) k.by_L = quotient_band(b, L);
  std::vector<int> r_to_d(R.count), l_to_d(L.count);
  for (int x = 0; x < n; ++x) {
    r_to_d[R.class_of[x]] = D.class_of[x];
    l_to_d[L.class_of[x]] = D.class_of[x];
  }
  for (int r = 0; r < R.count; ++r)
    for (int l = 0; l < L.count; ++l)
      if (r_to_d[r] == l_to_d[l]) k.pullback.emplace_back(r, l);
  std::vector<int> hit(k.pullback.size(), 0);
  k.map.resize(n);
  for (int x = 0; x < n; ++x) {
    auto it = std::find(k.pullback.begin(), k.pullback.end(), std::make_pair(R.class_of[x], L.class_of[x]));
    k.map[x] = static_cast<int>(it - k.pullback.begin());
    ++hit[k.map[x]];
  }
  k.set_bijection = std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; });
  if (k.set_bijection && k.by_R && k.by_L) {
    k.semigroup_iso = true;
    for (int x = 0; x < n && k.semigroup_iso; ++x)
      for (int y = 0; y < n && k.semigroup_iso; ++y) {
        auto [rx, lx] = k.pullback[k.map[x]];
        auto [ry, ly] = k.pullback[k.map[y]];
        auto prod = std::make_pair(k.by_R->band(rx, ry), k.by_L->band(lx, ly));
        if (k.pullback[k.map[b(x, y)]] != prod) k.semigroup_iso = false;
      }
  }
  return k;
}

/// Repetition-free word over letters 0..n-1.
using Word = std::vector<int>;

inline std::string word_label(const Word& w) {
  if (w.empty()) return "ε";
  std::string s;
  for (int c : w) s += static_cast<char>('a' + c);
  return s;
}

/// Keeps the rightmost occurrence of each letter.
inline Word keep_rightmost(const Word& w) {
  Word out;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (std::find(w.begin() + static_cast<long>(i) + 1, w.end(), w[i]) == w.end()) out.push_back(w[i]);
  return out;
}

/// Keeps the leftmost occurrence of each letter.
inline Word keep_leftmost(const Word& w) {
  Word out;
  for (int c : w)
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  return out;
}

/// All repetition-free words, ordered by length then lexicographically.
inline std::vector<Word> repetition_free_words(int n) {
  if (n < 0 || n > 5) throw DomainError("alphabet size must be between 0 and 5");
  std::vector<Word> out{{}};
  for (std::size_t start = 0; start < out.size(); ++start) {
    for (int c = 0; c < n; ++c) {
      Word w = out[start];
      if (std::find(w.begin(), w.end(), c) != w.end()) continue;
      Word v = w;
      v.push_back(c);
      out.push_back(v);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Word& a, const Word& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

inline int word_index(const std::vector<Word>& words, const Word& w) {
  return static_cast<int>(std::find(words.begin(), words.end(), w) - words.begin());
}

/// Free unital right regular band on n letters, product keep_rightmost(st).
inline Band free_right_regular_band(int n) {
  auto words = repetition_free_words(n);
  int m = static_cast<int>(words.size());
  Band b{{}, Table(m)};
  for (const auto& w : words) b.labels.push_back(word_label(w));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Word st = words[i];
      st.insert(st.end(), words[j].begin(), words[j].end());
      b.mul.at(i, j) = word_index(words, keep_rightmost(st));
    }
  return b;
}

/// Least upper bound in the natural order, if it exists.
inline std::optional<int> natural_sup(const Band& b, int x, int y) {
  std::optional<int> best;
  int n = b.size();
  for (int u = 0; u < n; ++u) {
    if (!natural_leq(b, x, u) || !natural_leq(b, y, u)) continue;
    if (!best || natural_leq(b, u, *best)) best = u;
  }
  if (!best) return std::nullopt;
  for (int u = 0; u < n; ++u)
    if (natural_leq(b, x, u) && natural_leq(b, y, u) && !natural_leq(b, *best, u)) return std::nullopt;
  return best;
}

/// Supremum of a commuting pair; empty if the pair does not commute or has
/// no supremum.
inline std::optional<int> commuting_sup(const Band& b, int x, int y) {
  if (b(x, y) != b(y, x)) return std::nullopt;
  if (x == y) return x;
  return natural_sup(b, x, y);
}

inline std::optional<int> band_zero(const Band& b) {
  for (int z = 0; z < b.size(); ++z) {
    bool bottom = true;
    for (int x = 0; x < b.size() && bottom; ++x)
      if (!natural_leq(b, z, x)) bottom = false;
    if (bottom) return z;
  }
  return std::nullopt;
}

inline bool is_boolean_lattice(const DistLattice& l) {
  for (int a = 0; a < l.size(); ++a) {
    bool has_complement = false;
    for (int c = 0; c < l.size() && !has_complement; ++c)
      if (l.meet(a, c) == l.bottom && l.join(a, c) == l.top) has_complement = true;
    if (!has_complement) return false;
  }
  return true;
}

struct DistributiveBandReport {
  bool normal = false;
  bool right_regular = false;
  bool has_zero = false;
  bool commuting_sups = false;
  bool bounded_distributive_reflection = false;
  bool boolean_reflection = false;
  /// Products distribute over sups of commuting pairs on both sides.
  bool sups_distribute = false;
  std::vector<std::string> failures;

  bool distributive() const { return normal && has_zero && commuting_sups && bounded_distributive_reflection; }
  bool right_distributive() const { return distributive() && right_regular; }
  bool right_boolean() const { return right_distributive() && boolean_reflection; }
};

inline std::optional<DistLattice> reflection_lattice(const Band& b) {
  auto D = green_relations(b).D;
  if (D.count == 0) return std::nullopt;
  try {
    return lattice_from_order(reflection_order(b, D));
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

inline DistributiveBandReport is_distributive_band(const Band& b) {
  DistributiveBandReport r;
  auto cls = classify(b);
  r.normal = cls.normal;
  r.right_regular = cls.right_regular;
  if (!r.normal) r.failures.push_back("not normal");
  r.has_zero = band_zero(b).has_value();
  if (!r.has_zero) r.failures.push_back("no zero element");
  int n = b.size();
  r.commuting_sups = true;
  r.sups_distribute = true;
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      if (b(x, y) != b(y, x)) continue;
      auto s = natural_sup(b, x, y);
      if (!s) {
        if (r.commuting_sups) r.failures.push_back("commuting pair without supremum: " + b.labels[x] + "," + b.labels[y]);
        r.commuting_sups = false;
        continue;
      }
      for (int z = 0; z < n; ++z) {
        auto left = commuting_sup(b, b(z, x), b(z, y));
        auto right = commuting_sup(b, b(x, z), b(y, z));
        if (!left || *left != b(z, *s) || !right || *right != b(*s, z)) r.sups_distribute = false;
      }
    }
  auto lattice = reflection_lattice(b);
  r.bounded_distributive_reflection = lattice && !distributivity_violation(*lattice);
  if (!r.bounded_distributive_reflection) r.failures.push_back("reflection is not a bounded distributive lattice");
  r.boolean_reflection = r.bounded_distributive_reflection && is_boolean_lattice(*lattice);
  return r;
}

/// Set-valued presheaf on a poset: restriction(y, x) maps sets[y] to sets[x]
/// for x <= y.
struct PresheafOnPoset {
  Poset base;
  std::vector<std::vector<std::string>> sets;
  std::map<std::pair<int, int>, std::vector<int>> restrictions;

  const std::vector<int>& restriction(int y, int x) const {
    auto it = restrictions.find({y, x});
    if (it == restrictions.end()) throw ShapeError("missing restriction " + base.label(y) + " -> " + base.label(x));
    return it->second;
  }

  void validate() const {
    int n = base.size();
    if (static_cast<int>(sets.size()) != n) throw ShapeError("presheaf needs one set per base element");
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        if (!base.leq(x, y)) continue;
        const auto& r = restriction(y, x);
        if (r.size() != sets[y].size()) throw ShapeError("restriction has wrong length");
        for (int v : r)
          if (v < 0 || v >= static_cast<int>(sets[x].size())) throw ShapeError("restriction value out of range");
        if (x == y)
          for (std::size_t i = 0; i < r.size(); ++i)
            if (r[i] != static_cast<int>(i)) throw DomainError("identity restriction is not the identity", {base.label(x)});
      }
    for (int z = 0; z < n; ++z)
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          if (!base.leq(x, y) || !base.leq(y, z)) continue;
          const auto& zy = restriction(z, y);
          const auto& yx = restriction(y, x);
          const auto& zx = restriction(z, x);
          for (std::size_t s = 0; s < zy.size(); ++s)
            if (yx[zy[s]] != zx[s])
              throw DomainError("restrictions do not compose", {base.label(z), base.label(y), base.label(x)});
        }
  }
};

/// Band on pairs (a, s) with (a,s)(b,t) = (a^b, t restricted to a^b).
struct ElementBand {
  Band band;
  std::vector<std::pair<int, int>> elements;
};

inline ElementBand element_band(const PresheafOnPoset& F) {
  F.validate();
  const Poset& P = F.base;
  int n = P.size();
  std::vector<std::vector<int>> meet(n, std::vector<int>(n));
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      auto m = P.meet(a, c);
      if (!m) throw DomainError("base is not a meet-semilattice", {P.label(a), P.label(c)});
      meet[a][c] = *m;
    }
  ElementBand eb;
  std::vector<std::vector<int>> index(n);
  for (int a = 0; a < n; ++a)
    for (std::size_t s = 0; s < F.sets[a].size(); ++s) {
      index[a].push_back(static_cast<int>(eb.elements.size()));
      eb.elements.emplace_back(a, static_cast<int>(s));
      eb.band.labels.push_back(F.sets[a][s] + "@" + P.label(a));
    }
  int m = static_cast<int>(eb.elements.size());
  eb.band.mul = Table(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      auto [a, s] = eb.elements[i];
      auto [c, t] = eb.elements[j];
      int ac = meet[a][c];
      eb.band.mul.at(i, j) = index[ac][F.restriction(c, ac)[t]];
    }
  return eb;
}

/// Universal right normal quotient of a right regular band, obtained by
/// factorising X -> X/D into a connected map followed by a covering.
inline Quotient normal_reflection(const Band& b) {
  if (!classify(b).right_regular) throw DomainError("band is not right regular");
  auto D = green_relations(b).D;
  Poset X = natural_order(b);
  Poset Y = reflection_order(b, D);
  MonotoneMap f(X, Y, D.class_of);
  auto fac = comprehensive_factorisation(f);
  const Poset& M = fac.covering.dom();
  Quotient sl = quotient_band(b, D);
  int m = M.size();
  Band out{M.labels(), Table(m)};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      int yz = sl.band(fac.covering(i), fac.covering(j));
      int lift = -1;
      for (int k = 0; k < m; ++k)
        if (M.leq(k, j) && fac.covering(k) == yz) lift = k;
      out.mul.at(i, j) = lift;
    }
  return {out, fac.connected.values()};
}

/// Enumerates maps h with h(op_k(x,y)) = op_k'(h x, h y) for every listed
/// operation pair. `partial` fixes some values (-1 = free). The visitor
/// returns false to stop. With `injective` only injective maps are produced.
inline void for_each_hom(const std::vector<const Table*>& dom_ops, const std::vector<const Table*>& cod_ops,
                         std::vector<int> partial, const std::function<bool(const std::vector<int>&)>& visit,
                         bool injective = false) {
  int n = dom_ops.front()->size();
  int m = cod_ops.front()->size();
  if (static_cast<int>(partial.size()) != n) partial.assign(n, -1);
  bool stop = false;
  auto propagate = [&](std::vector<int>& h) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t k = 0; k < dom_ops.size(); ++k)
        for (int x = 0; x < n; ++x) {
          if (h[x] < 0) continue;
          for (int y = 0; y < n; ++y) {
            if (h[y] < 0) continue;
            int z = (*dom_ops[k])(x, y);
            int v = (*cod_ops[k])(h[x], h[y]);
            if (h[z] < 0) {
              h[z] = v;
              changed = true;
            } else if (h[z] != v) {
              return false;
            }
          }
        }
    }
    if (injective) {
      std::vector<char> used(m, 0);
      for (int v : h)
        if (v >= 0) {
          if (used[v]) return false;
          used[v] = 1;
        }
    }
    return true;
  };
  std::function<void(std::vector<int>)> rec = [&](std::vector<int> h) {
    if (stop || !propagate(h)) return;
    auto it = std::find(h.begin(), h.end(), -1);
    if (it == h.end()) {
      if (!visit(h)) stop = true;
      return;
    }
    int x = static_cast<int>(it - h.begin());
    for (int v = 0; v < m && !stop; ++v) {
      auto next = h;
      next[x] = v;
      rec(next);
    }
  };
  if (n == 0) {
    visit({});
    return;
  }
  if (m == 0) return;
  rec(partial);
}

inline std::vector<std::vector<int>> band_homs(const Band& a, const Band& b, std::vector<int> partial = {}) {
  std::vector<std::vector<int>> out;
  for_each_hom({&a.mul}, {&b.mul}, std::move(partial), [&](const std::vector<int>& h) {
    out.push_back(h);
    return true;
  });
  return out;
}

inline bool is_band_hom(const Band& a, const Band& b, const std::vector<int>& h) {
  for (int x = 0; x < a.size(); ++x)
    for (int y = 0; y < a.size(); ++y)
      if (h[a(x, y)] != b(h[x], h[y])) return false;
  return true;
}

inline std::optional<std::vector<int>> band_isomorphism(const Band& a, const Band& b) {
  if (a.size() != b.size()) return std::nullopt;
  std::optional<std::vector<int>> found;
  for_each_hom({&a.mul}, {&b.mul}, {}, [&](const std::vector<int>& h) {
    found = h;
    return false;
  }, true);
  return found;
}

/// Lexicographically least relabelled table over all carrier permutations.
inline std::vector<int> canonical_form(const Band& b) {
  int n = b.size();
  if (n > 7) throw DomainError("canonical form limited to 7 elements");
  std::vector<int> perm(n), best;
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> inv(n), cells(static_cast<std::size_t>(n) * n);
  do {
    for (int i = 0; i < n; ++i) inv[perm[i]] = i;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cells[i * n + j] = inv[b(perm[i], perm[j])];
    if (best.empty() || cells < best) best = cells;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Morphism conditions for distributive bands, checked independently.
struct DistributiveMorphismReport {
  bool hom = false;
  bool preserves_zero = false;
  bool preserves_global = false;
  bool preserves_sups = false;
  bool ok() const { return hom && preserves_zero && preserves_global && preserves_sups; }
};

inline std::vector<int> global_elements(const Band& b) {
  std::vector<int> out;
  for (int x = 0; x < b.size(); ++x) {
    bool top = true;
    for (int y = 0; y < b.size() && top; ++y)
      if (!preceq(b, y, x)) top = false;
    if (top) out.push_back(x);
  }
  return out;
}

inline DistributiveMorphismReport check_distributive_morphism(const Band& a, const Band& b, const std::vector<int>& h) {
  DistributiveMorphismReport r;
  r.hom = is_band_hom(a, b, h);
  auto za = band_zero(a), zb = band_zero(b);
  r.preserves_zero = za && zb && h[*za] == *zb;
  auto gb = global_elements(b);
  r.preserves_global = true;
  for (int g : global_elements(a))
    if (std::find(gb.begin(), gb.end(), h[g]) == gb.end()) r.preserves_global = false;
  r.preserves_sups = true;
  for (int x = 0; x < a.size(); ++x)
    for (int y = x + 1; y < a.size(); ++y) {
      if (a(x, y) != a(y, x)) continue;
      auto s = natural_sup(a, x, y);
      auto t = natural_sup(b, h[x], h[y]);
      if (!s || !t || h[*s] != *t) r.preserves_sups = false;
    }
  return r;
}

}  // namespace spectral
