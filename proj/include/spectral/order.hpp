#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "spectral/common.hpp"

namespace spectral {

/// Finite partial order stored as a full relation matrix.
class Poset {
 public:
  Poset() = default;

  /// Builds the reflexive transitive closure of `pairs` (x <= y) and checks
  /// antisymmetry.
  static Poset from_pairs(std::vector<std::string> labels, const std::vector<std::pair<int, int>>& pairs) {
    Poset p(std::move(labels));
    for (auto [a, b] : pairs) {
      if (a < 0 || b < 0 || a >= p.n_ || b >= p.n_) throw ShapeError("order pair out of range");
      p.rel_[a * p.n_ + b] = 1;
    }
    for (int i = 0; i < p.n_; ++i) p.rel_[i * p.n_ + i] = 1;
    for (int k = 0; k < p.n_; ++k)
      for (int i = 0; i < p.n_; ++i)
        if (p.rel_[i * p.n_ + k])
          for (int j = 0; j < p.n_; ++j)
            if (p.rel_[k * p.n_ + j]) p.rel_[i * p.n_ + j] = 1;
    p.check_antisymmetric();
    return p;
  }

  /// Takes a relation that must already be a partial order.
  static Poset from_matrix(std::vector<std::string> labels, const std::vector<std::vector<bool>>& leq) {
    Poset p(std::move(labels));
    if (static_cast<int>(leq.size()) != p.n_) throw ShapeError("order matrix has wrong row count");
    for (int i = 0; i < p.n_; ++i) {
      if (static_cast<int>(leq[i].size()) != p.n_) throw ShapeError("order matrix has wrong column count");
      for (int j = 0; j < p.n_; ++j) p.rel_[i * p.n_ + j] = leq[i][j] ? 1 : 0;
    }
    for (int i = 0; i < p.n_; ++i)
      if (!p.leq(i, i)) throw DomainError("order is not reflexive", {p.labels_[i]});
    for (int i = 0; i < p.n_; ++i)
      for (int j = 0; j < p.n_; ++j)
        for (int k = 0; k < p.n_; ++k)
          if (p.leq(i, j) && p.leq(j, k) && !p.leq(i, k))
            throw DomainError("order is not transitive", {p.labels_[i], p.labels_[j], p.labels_[k]});
    p.check_antisymmetric();
    return p;
  }

  static Poset chain(int n) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
    return from_pairs(index_labels(n), pairs);
  }

  static Poset antichain(std::vector<std::string> labels) { return from_pairs(std::move(labels), {}); }
  static Poset antichain(int n) { return antichain(index_labels(n)); }

  int size() const { return n_; }
  bool leq(int x, int y) const { return rel_[x * n_ + y] != 0; }
  bool less(int x, int y) const { return x != y && leq(x, y); }
  bool comparable(int x, int y) const { return leq(x, y) || leq(y, x); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int i) const { return labels_[i]; }

  int index_of(const std::string& label) const {
    for (int i = 0; i < n_; ++i)
      if (labels_[i] == label) return i;
    throw ShapeError("unknown element id '" + label + "'");
  }

  /// Pairs (x, y) with x covered by y.
  std::vector<std::pair<int, int>> covers() const {
    std::vector<std::pair<int, int>> out;
    for (int x = 0; x < n_; ++x)
      for (int y = 0; y < n_; ++y) {
        if (!less(x, y)) continue;
        bool direct = true;
        for (int z = 0; z < n_ && direct; ++z)
          if (less(x, z) && less(z, y)) direct = false;
        if (direct) out.emplace_back(x, y);
      }
    return out;
  }

  Poset dual() const {
    Poset p(labels_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) p.rel_[i * n_ + j] = rel_[j * n_ + i];
    return p;
  }

  /// Induced suborder on the listed elements, in the listed order.
  Poset restrict_to(const std::vector<int>& elems) const {
    std::vector<std::string> labels;
    for (int e : elems) labels.push_back(labels_[e]);
    Poset p(std::move(labels));
    for (std::size_t i = 0; i < elems.size(); ++i)
      for (std::size_t j = 0; j < elems.size(); ++j) p.rel_[i * p.n_ + j] = rel_[elems[i] * n_ + elems[j]];
    return p;
  }

  std::optional<int> meet(int x, int y) const {
    std::optional<int> best;
    for (int z = 0; z < n_; ++z) {
      if (!leq(z, x) || !leq(z, y)) continue;
      if (!best || leq(*best, z)) best = z;
    }
    if (!best) return std::nullopt;
    for (int z = 0; z < n_; ++z)
      if (leq(z, x) && leq(z, y) && !leq(z, *best)) return std::nullopt;
    return best;
  }

  std::optional<int> join(int x, int y) const {
    std::optional<int> best;
    for (int z = 0; z < n_; ++z) {
      if (!leq(x, z) || !leq(y, z)) continue;
      if (!best || leq(z, *best)) best = z;
    }
    if (!best) return std::nullopt;
    for (int z = 0; z < n_; ++z)
      if (leq(x, z) && leq(y, z) && !leq(*best, z)) return std::nullopt;
    return best;
  }

  /// Connected components of the comparability graph restricted to `elems`.
  std::vector<int> components(const std::vector<int>& elems, int* count = nullptr) const {
    UnionFind uf(static_cast<int>(elems.size()));
    for (std::size_t i = 0; i < elems.size(); ++i)
      for (std::size_t j = i + 1; j < elems.size(); ++j)
        if (comparable(elems[i], elems[j])) uf.unite(static_cast<int>(i), static_cast<int>(j));
    Partition p = uf.partition();
    if (count) *count = p.count;
    return p.class_of;
  }

  friend bool operator==(const Poset&, const Poset&) = default;

 private:
  explicit Poset(std::vector<std::string> labels)
      : labels_(std::move(labels)), n_(static_cast<int>(labels_.size())), rel_(static_cast<std::size_t>(n_) * n_, 0) {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (labels_[i] == labels_[j]) throw ShapeError("duplicate element id '" + labels_[i] + "'");
  }

  void check_antisymmetric() const {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (leq(i, j) && leq(j, i)) throw DomainError("order is not antisymmetric", {labels_[i], labels_[j]});
  }

  std::vector<std::string> labels_;
  int n_ = 0;
  std::vector<char> rel_;
};

class MonotoneMap {
 public:
  MonotoneMap(Poset dom, Poset cod, std::vector<int> map) : dom_(std::move(dom)), cod_(std::move(cod)), map_(std::move(map)) {
    if (static_cast<int>(map_.size()) != dom_.size()) throw ShapeError("map is not defined on every element");
    for (int v : map_)
      if (v < 0 || v >= cod_.size()) throw ShapeError("map value outside codomain");
    for (int x = 0; x < dom_.size(); ++x)
      for (int y = 0; y < dom_.size(); ++y)
        if (dom_.leq(x, y) && !cod_.leq(map_[x], map_[y]))
          throw DomainError("map is not monotone", {dom_.label(x), dom_.label(y)});
  }

  static MonotoneMap identity(const Poset& p) {
    std::vector<int> m(p.size());
    std::iota(m.begin(), m.end(), 0);
    return MonotoneMap(p, p, m);
  }

  const Poset& dom() const { return dom_; }
  const Poset& cod() const { return cod_; }
  int operator()(int x) const { return map_[x]; }
  const std::vector<int>& values() const { return map_; }

 private:
  Poset dom_, cod_;
  std::vector<int> map_;
};

inline MonotoneMap compose(const MonotoneMap& g, const MonotoneMap& f) {
  if (!(f.cod() == g.dom())) throw ShapeError("maps are not composable");
  std::vector<int> m(f.dom().size());
  for (int x = 0; x < f.dom().size(); ++x) m[x] = g(f(x));
  return MonotoneMap(f.dom(), g.cod(), m);
}

inline bool is_covering(const MonotoneMap& f) {
  const Poset& X = f.dom();
  const Poset& Y = f.cod();
  for (int x = 0; x < X.size(); ++x)
    for (int y = 0; y < Y.size(); ++y) {
      if (!Y.leq(y, f(x))) continue;
      int lifts = 0;
      for (int z = 0; z < X.size(); ++z)
        if (X.leq(z, x) && f(z) == y) ++lifts;
      if (lifts != 1) return false;
    }
  return true;
}

/// Elements x with y <= f(x).
inline std::vector<int> comma_elements(const MonotoneMap& f, int y) {
  std::vector<int> out;
  for (int x = 0; x < f.dom().size(); ++x)
    if (f.cod().leq(y, f(x))) out.push_back(x);
  return out;
}

inline bool is_connected_map(const MonotoneMap& f) {
  for (int y = 0; y < f.cod().size(); ++y) {
    auto elems = comma_elements(f, y);
    if (elems.empty()) return false;
    int count = 0;
    f.dom().components(elems, &count);
    if (count != 1) return false;
  }
  return true;
}

/// Connected map followed by a covering. The middle poset is the poset of
/// elements of y -> components(y|f); its elements are labelled "y#k".
struct Factorisation {
  MonotoneMap connected;
  MonotoneMap covering;
  /// For each middle element, its base element and component number.
  std::vector<std::pair<int, int>> middle;
};

inline Factorisation comprehensive_factorisation(const MonotoneMap& f) {
  const Poset& X = f.dom();
  const Poset& Y = f.cod();
  // component[y][x] = component of x in y|f, or -1.
  std::vector<std::vector<int>> component(Y.size(), std::vector<int>(X.size(), -1));
  std::vector<std::pair<int, int>> middle;
  std::vector<std::vector<int>> middle_index(Y.size());
  for (int y = 0; y < Y.size(); ++y) {
    auto elems = comma_elements(f, y);
    int count = 0;
    auto comp = X.components(elems, &count);
    for (std::size_t i = 0; i < elems.size(); ++i) component[y][elems[i]] = comp[i];
    for (int k = 0; k < count; ++k) {
      middle_index[y].push_back(static_cast<int>(middle.size()));
      middle.emplace_back(y, k);
    }
  }
  std::vector<std::string> labels;
  for (auto [y, k] : middle) labels.push_back(Y.label(y) + "#" + std::to_string(k));
  // (y,s) <= (z,t) iff y <= z and t restricts to s. The restriction of a
  // component of z|f to y is the component of y|f containing it.
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < middle.size(); ++a)
    for (std::size_t b = 0; b < middle.size(); ++b) {
      auto [y, s] = middle[a];
      auto [z, t] = middle[b];
      if (!Y.leq(y, z)) continue;
      for (int x = 0; x < X.size(); ++x)
        if (component[z][x] == t) {
          if (component[y][x] == s) pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
          break;
        }
    }
  Poset M = Poset::from_pairs(labels, pairs);
  std::vector<int> alpha(X.size()), beta(middle.size());
  for (int x = 0; x < X.size(); ++x) alpha[x] = middle_index[f(x)][component[f(x)][x]];
  for (std::size_t m = 0; m < middle.size(); ++m) beta[m] = middle[m].first;
  return {MonotoneMap(X, M, alpha), MonotoneMap(M, Y, beta), middle};
}

/// Bounded lattice given by operation tables.
struct DistLattice {
  std::vector<std::string> labels;
  Table meet;
  Table join;
  int bottom = 0;
  int top = 0;

  int size() const { return meet.size(); }
  bool leq(int a, int b) const { return meet(a, b) == a; }
  int index_of(const std::string& l) const {
    for (int i = 0; i < size(); ++i)
      if (labels[i] == l) return i;
    throw ShapeError("unknown lattice element '" + l + "'");
  }
};

/// Lattice axioms violated by the tables (distributivity excluded).
inline std::vector<std::string> check_lattice(const DistLattice& l) {
  std::vector<std::string> out;
  int n = l.size();
  if (l.join.size() != n || static_cast<int>(l.labels.size()) != n) {
    out.push_back("table sizes differ");
    return out;
  }
  auto name = [&](int x) { return l.labels[x]; };
  for (int x = 0; x < n; ++x) {
    if (l.meet(x, x) != x) out.push_back("meet not idempotent at " + name(x));
    if (l.join(x, x) != x) out.push_back("join not idempotent at " + name(x));
    if (l.join(l.bottom, x) != x) out.push_back("bottom not neutral for join at " + name(x));
    if (l.meet(l.top, x) != x) out.push_back("top not neutral for meet at " + name(x));
    for (int y = 0; y < n; ++y) {
      if (l.meet(x, y) != l.meet(y, x)) out.push_back("meet not commutative at " + name(x) + "," + name(y));
      if (l.join(x, y) != l.join(y, x)) out.push_back("join not commutative at " + name(x) + "," + name(y));
      if (l.meet(x, l.join(x, y)) != x || l.join(x, l.meet(x, y)) != x)
        out.push_back("absorption fails at " + name(x) + "," + name(y));
      for (int z = 0; z < n; ++z) {
        if (l.meet(l.meet(x, y), z) != l.meet(x, l.meet(y, z)))
          out.push_back("meet not associative at " + name(x) + "," + name(y) + "," + name(z));
        if (l.join(l.join(x, y), z) != l.join(x, l.join(y, z)))
          out.push_back("join not associative at " + name(x) + "," + name(y) + "," + name(z));
      }
    }
  }
  return out;
}

/// First triple violating x(y+z) = xy + xz, if any.
inline std::optional<std::array<int, 3>> distributivity_violation(const DistLattice& l) {
  int n = l.size();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (l.meet(x, l.join(y, z)) != l.join(l.meet(x, y), l.meet(x, z))) return std::array<int, 3>{x, y, z};
  return std::nullopt;
}

/// Builds a lattice from a finite bounded partial order; throws if some
/// pair lacks a meet or join.
inline DistLattice lattice_from_order(const Poset& p) {
  int n = p.size();
  if (n == 0) throw DomainError("empty order has no bounds");
  DistLattice l{p.labels(), Table(n), Table(n), -1, -1};
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      auto m = p.meet(x, y);
      auto j = p.join(x, y);
      if (!m || !j) throw DomainError("order is not a lattice", {p.label(x), p.label(y)});
      l.meet.at(x, y) = *m;
      l.join.at(x, y) = *j;
    }
  for (int x = 0; x < n; ++x) {
    bool is_bottom = true, is_top = true;
    for (int y = 0; y < n; ++y) {
      if (!p.leq(x, y)) is_bottom = false;
      if (!p.leq(y, x)) is_top = false;
    }
    if (is_bottom) l.bottom = x;
    if (is_top) l.top = x;
  }
  return l;
}

/// Finite spectral space: a poset whose opens are its upsets. Every upset is
/// compact open; the constructible sets are all subsets.
class SpectralSpace {
 public:
  SpectralSpace() = default;
  explicit SpectralSpace(Poset p) : poset_(std::move(p)) {
    int n = poset_.size();
    if (n > 20) throw DomainError("spectral space limited to 20 points");
    up_.assign(n, 0);
    down_.assign(n, 0);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (poset_.leq(x, y)) {
          up_[x] |= bit(y);
          down_[y] |= bit(x);
        }
    for (Mask m = 0; m < (Mask{1} << n); ++m)
      if (is_upset(m)) upsets_.push_back(m);
    std::sort(upsets_.begin(), upsets_.end(), [](Mask a, Mask b) {
      return popcount(a) != popcount(b) ? popcount(a) < popcount(b) : a < b;
    });
    for (std::size_t i = 0; i < upsets_.size(); ++i) index_[upsets_[i]] = static_cast<int>(i);
  }

  const Poset& poset() const { return poset_; }
  int points() const { return poset_.size(); }
  Mask all() const { return points() == 64 ? ~Mask{0} : (Mask{1} << points()) - 1; }
  Mask up(int x) const { return up_[x]; }
  Mask down(int x) const { return down_[x]; }

  bool is_upset(Mask m) const {
    for (int x : members(m))
      if (!subset(up_[x], m)) return false;
    return true;
  }
  Mask up_closure(Mask m) const {
    Mask out = 0;
    for (int x : members(m)) out |= up_[x];
    return out;
  }
  Mask down_closure(Mask m) const {
    Mask out = 0;
    for (int x : members(m)) out |= down_[x];
    return out;
  }

  /// Upsets ordered by size then bit pattern; index 0 is empty, last is all.
  const std::vector<Mask>& upsets() const { return upsets_; }
  int upset_count() const { return static_cast<int>(upsets_.size()); }
  Mask upset(int i) const { return upsets_[i]; }
  int index(Mask m) const {
    auto it = index_.find(m);
    if (it == index_.end()) throw DomainError("subset is not an upset", {key(m)});
    return it->second;
  }
  int principal(int x) const { return index(up_[x]); }
  int empty_index() const { return 0; }
  int top_index() const { return upset_count() - 1; }

  /// Set notation with ids sorted bytewise, e.g. "{a,b}".
  std::string key(Mask m) const {
    std::vector<std::string> ids;
    for (int x : members(m)) ids.push_back(poset_.label(x));
    std::sort(ids.begin(), ids.end());
    return "{" + join(ids, ",") + "}";
  }

  /// Points of m that are maximal within m.
  std::vector<int> maximal(Mask m) const {
    std::vector<int> out;
    for (int x : members(m))
      if ((up_[x] & m) == bit(x)) out.push_back(x);
    return out;
  }

 private:
  Poset poset_;
  std::vector<Mask> up_, down_, upsets_;
  std::unordered_map<Mask, int> index_;
};

inline DistLattice upset_lattice(const SpectralSpace& s) {
  int m = s.upset_count();
  DistLattice l;
  for (Mask u : s.upsets()) l.labels.push_back(s.key(u));
  l.meet = Table(m);
  l.join = Table(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      l.meet.at(a, b) = s.index(s.upset(a) & s.upset(b));
      l.join.at(a, b) = s.index(s.upset(a) | s.upset(b));
    }
  l.bottom = s.empty_index();
  l.top = s.top_index();
  return l;
}

inline DistLattice upset_lattice(const Poset& p) { return upset_lattice(SpectralSpace(p)); }

/// Join-irreducibles of a finite distributive lattice, ordered opposite to
/// the lattice order so that a |-> {j <= a} lands in the upsets.
struct SpectralDual {
  Poset poset;
  /// Lattice element of each point.
  std::vector<int> point_element;
  /// Upset (as a mask over the points) of each lattice element.
  std::vector<Mask> element_upset;
};

inline SpectralDual spectral_poset(const DistLattice& l) {
  auto problems = check_lattice(l);
  if (!problems.empty()) throw DomainError("not a bounded lattice: " + problems.front());
  if (auto v = distributivity_violation(l))
    throw DomainError("lattice is not distributive", {l.labels[(*v)[0]], l.labels[(*v)[1]], l.labels[(*v)[2]]});
  int n = l.size();
  std::vector<int> irreducible;
  for (int j = 0; j < n; ++j) {
    if (j == l.bottom) continue;
    bool irr = true;
    for (int a = 0; a < n && irr; ++a)
      for (int b = 0; b < n && irr; ++b)
        if (l.join(a, b) == j && a != j && b != j) irr = false;
    if (irr) irreducible.push_back(j);
  }
  if (irreducible.size() > 20) throw DomainError("lattice has more than 20 join-irreducibles");
  std::vector<std::string> labels;
  for (int j : irreducible) labels.push_back(l.labels[j]);
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < irreducible.size(); ++a)
    for (std::size_t b = 0; b < irreducible.size(); ++b)
      if (l.leq(irreducible[b], irreducible[a])) pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
  SpectralDual d{Poset::from_pairs(labels, pairs), irreducible, std::vector<Mask>(n, 0)};
  for (int a = 0; a < n; ++a)
    for (std::size_t j = 0; j < irreducible.size(); ++j)
      if (l.leq(irreducible[j], a)) d.element_upset[a] |= bit(static_cast<int>(j));
  return d;
}

/// Powerset lattice of the points together with the inclusion of the upsets.
struct BooleanEnvelope {
  DistLattice lattice;
  /// Subset mask of each powerset element.
  std::vector<Mask> subsets;
  /// Powerset element of each upset, indexed like SpectralSpace::upsets().
  std::vector<int> inclusion;
};

inline BooleanEnvelope boolean_envelope(const SpectralSpace& s) {
  int n = s.points();
  if (n > 12) throw DomainError("powerset envelope limited to 12 points");
  BooleanEnvelope e;
  Mask full = s.all();
  for (Mask m = 0; m <= full; ++m) e.subsets.push_back(m);
  std::sort(e.subsets.begin(), e.subsets.end(), [](Mask a, Mask b) {
    return popcount(a) != popcount(b) ? popcount(a) < popcount(b) : a < b;
  });
  std::unordered_map<Mask, int> idx;
  for (std::size_t i = 0; i < e.subsets.size(); ++i) idx[e.subsets[i]] = static_cast<int>(i);
  int m = static_cast<int>(e.subsets.size());
  e.lattice.meet = Table(m);
  e.lattice.join = Table(m);
  for (Mask a : e.subsets) e.lattice.labels.push_back(s.key(a));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      e.lattice.meet.at(a, b) = idx[e.subsets[a] & e.subsets[b]];
      e.lattice.join.at(a, b) = idx[e.subsets[a] | e.subsets[b]];
    }
  e.lattice.bottom = 0;
  e.lattice.top = m - 1;
  for (Mask u : s.upsets()) e.inclusion.push_back(idx[u]);
  return e;
}

inline BooleanEnvelope boolean_envelope(const Poset& p) { return boolean_envelope(SpectralSpace(p)); }

struct ConstructiblePartition {
  Mask whole = 0;
  std::vector<Mask> parts;
};

/// Ascending chain of upsets from the empty set to the whole.
struct ChainPartition {
  std::vector<Mask> chain;

  Mask whole() const { return chain.empty() ? 0 : chain.back(); }
  std::vector<Mask> parts() const {
    std::vector<Mask> out;
    for (std::size_t i = 1; i < chain.size(); ++i) out.push_back(chain[i] & ~chain[i - 1]);
    return out;
  }
  friend bool operator==(const ChainPartition&, const ChainPartition&) = default;
};

inline void validate(const SpectralSpace& s, const ConstructiblePartition& cp) {
  if (!s.is_upset(cp.whole)) throw DomainError("partition whole is not an upset", {s.key(cp.whole)});
  Mask seen = 0;
  for (Mask p : cp.parts) {
    if (p == 0) throw ShapeError("partition has an empty part");
    if (p & seen) throw DomainError("partition parts overlap", {s.key(p)});
    seen |= p;
  }
  if (seen != cp.whole) throw DomainError("partition parts do not cover the whole", {s.key(cp.whole)});
}

inline void validate(const SpectralSpace& s, const ChainPartition& c) {
  if (c.chain.empty() || c.chain.front() != 0) throw ShapeError("chain must start at the empty set");
  for (std::size_t i = 0; i < c.chain.size(); ++i) {
    if (!s.is_upset(c.chain[i])) throw DomainError("chain member is not an upset", {s.key(c.chain[i])});
    if (i && !(subset(c.chain[i - 1], c.chain[i]) && c.chain[i - 1] != c.chain[i]))
      throw DomainError("chain is not strictly ascending", {s.key(c.chain[i - 1]), s.key(c.chain[i])});
  }
}

/// Peels off one maximal point at a time (smallest index first), then merges
/// consecutive steps that fall into the same part.
inline ChainPartition refine_to_chain_partition(const SpectralSpace& s, const ConstructiblePartition& cp) {
  validate(s, cp);
  auto part_of = [&](int x) {
    for (std::size_t i = 0; i < cp.parts.size(); ++i)
      if (contains(cp.parts[i], x)) return static_cast<int>(i);
    return -1;
  };
  ChainPartition out{{0}};
  Mask done = 0;
  int last_part = -1;
  while (done != cp.whole) {
    Mask rest = cp.whole & ~done;
    int p = s.maximal(rest).front();
    done |= s.up(p);
    int part = part_of(p);
    if (part == last_part)
      out.chain.back() = done;
    else
      out.chain.push_back(done);
    last_part = part;
  }
  return out;
}

/// True iff every part of `fine` lies in a part of `coarse`.
inline bool refines(const std::vector<Mask>& fine, const std::vector<Mask>& coarse) {
  for (Mask f : fine) {
    bool inside = false;
    for (Mask c : coarse)
      if (subset(f, c)) inside = true;
    if (!inside) return false;
  }
  return true;
}

/// Refinement with an order-preserving choice function; equivalently every
/// member of the coarse chain occurs in the fine chain.
inline bool chain_refines(const ChainPartition& fine, const ChainPartition& coarse) {
  if (fine.whole() != coarse.whole()) return false;
  for (Mask c : coarse.chain)
    if (std::find(fine.chain.begin(), fine.chain.end(), c) == fine.chain.end()) return false;
  return true;
}

/// Chain of all pairwise intersections. Throws with an incomparable pair when
/// the intersections do not form a chain, in which case no common chain
/// refinement exists.
inline ChainPartition common_chain_refinement(const SpectralSpace& s, const ChainPartition& a, const ChainPartition& b) {
  validate(s, a);
  validate(s, b);
  if (a.whole() != b.whole()) throw DomainError("chains have different wholes", {s.key(a.whole()), s.key(b.whole())});
  std::vector<Mask> members;
  for (Mask u : a.chain)
    for (Mask v : b.chain) members.push_back(u & v);
  std::sort(members.begin(), members.end(), [](Mask x, Mask y) {
    return popcount(x) != popcount(y) ? popcount(x) < popcount(y) : x < y;
  });
  members.erase(std::unique(members.begin(), members.end()), members.end());
  for (std::size_t i = 1; i < members.size(); ++i)
    if (!subset(members[i - 1], members[i]))
      throw DomainError("intersections do not form a chain", {s.key(members[i - 1]), s.key(members[i])});
  return ChainPartition{members};
}

}  // namespace spectral
