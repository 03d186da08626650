#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "spectral/band.hpp"
#include "spectral/common.hpp"
#include "spectral/order.hpp"
#include "spectral/sheaf.hpp"
#include "spectral/skew.hpp"

namespace spectral {

/// Germ tuple: one entry per point of the space, -1 outside the domain.
using Germs = std::vector<int>;

/// Mixed-radix codes for tuples over the points of each upset, with radix
/// radix[x] at point x. Points of an upset are ordered by index.
class TupleCodec {
 public:
  TupleCodec() = default;
  TupleCodec(const SpectralSpace& space, std::vector<long long> radix) : space_(&space), radix_(std::move(radix)) {
    int m = space.upset_count();
    counts_.resize(m);
    for (int u = 0; u < m; ++u) {
      long long c = 1;
      for (int x : members(space.upset(u))) {
        c *= radix_[x];
        if (c > (1LL << 40)) throw DomainError("tuple space too large");
      }
      counts_[u] = c;
    }
  }

  long long count(int u) const { return counts_[u]; }
  long long radix(int x) const { return radix_[x]; }
  const SpectralSpace& space() const { return *space_; }

  Germs decode(int u, long long code) const {
    Germs g(space_->points(), -1);
    for (int x : members(space_->upset(u))) {
      g[x] = static_cast<int>(code % radix_[x]);
      code /= radix_[x];
    }
    return g;
  }

  long long encode(int u, const Germs& g) const {
    long long code = 0, weight = 1;
    for (int x : members(space_->upset(u))) {
      code += weight * g[x];
      weight *= radix_[x];
    }
    return code;
  }

  /// Code of the tuple restricted to the smaller upset v.
  long long restrict(int u, int v, long long code) const { return encode(v, decode(u, code)); }

 private:
  const SpectralSpace* space_ = nullptr;
  std::vector<long long> radix_;
  std::vector<long long> counts_;
};

/// Codec for TF: radix at x is the number of sections over up(x).
inline TupleCodec patch_codec(const Presheaf& F) {
  std::vector<long long> radix;
  for (int x = 0; x < F.space.points(); ++x) radix.push_back(F.size(F.space.principal(x)));
  return TupleCodec(F.space, radix);
}

/// Codec for T applied to the object whose principal sections are counted by
/// `inner`; used to reach TTF and TTTF without materialising them.
inline TupleCodec lift_codec(const TupleCodec& inner) {
  std::vector<long long> radix;
  const auto& S = inner.space();
  for (int x = 0; x < S.points(); ++x) radix.push_back(inner.count(S.principal(x)));
  return TupleCodec(S, radix);
}

/// Key of a germ tuple: sorted "point=label" pairs joined by ";", "*" when
/// the domain is empty.
inline std::string germ_key(const SpectralSpace& S, const std::function<std::string(int, int)>& label, const Germs& g) {
  std::vector<std::string> parts;
  for (int x = 0; x < S.points(); ++x)
    if (g[x] >= 0) parts.push_back(S.poset().label(x) + "=" + label(x, g[x]));
  if (parts.empty()) return "*";
  std::sort(parts.begin(), parts.end());
  return join(parts, ";");
}

/// TF(U) = product over x in U of F(up(x)), restrictions drop coordinates.
inline Presheaf patch(const Presheaf& F) {
  const auto& S = F.space;
  auto codec = patch_codec(F);
  Presheaf T{S, std::vector<std::vector<std::string>>(F.upsets()), {}};
  auto label = [&](int x, int a) { return F.sections[S.principal(x)][a]; };
  for (int u = 0; u < F.upsets(); ++u)
    for (long long c = 0; c < codec.count(u); ++c) T.sections[u].push_back(germ_key(S, label, codec.decode(u, c)));
  fill_restrictions(T, [&](int u, int v, int s) { return static_cast<int>(codec.restrict(u, v, s)); });
  return T;
}

/// Germs of a section at every point of its domain.
inline Germs germs_of(const Presheaf& F, int u, int s) {
  Germs g(F.space.points(), -1);
  for (int x : members(F.space.upset(u))) g[x] = F.restrict(u, F.space.principal(x), s);
  return g;
}

/// Monad unit F -> TF.
inline SheafMap patch_unit(const Presheaf& F) {
  auto codec = patch_codec(F);
  SheafMap out(F.upsets());
  for (int u = 0; u < F.upsets(); ++u)
    for (int s = 0; s < F.size(u); ++s) out[u].push_back(static_cast<int>(codec.encode(u, germs_of(F, u, s))));
  return out;
}

/// Tf : TF -> TG for a natural map f : F -> G.
inline SheafMap patch_map(const Presheaf& F, const Presheaf& G, const SheafMap& f) {
  auto cf = patch_codec(F), cg = patch_codec(G);
  const auto& S = F.space;
  SheafMap out(F.upsets());
  for (int u = 0; u < F.upsets(); ++u)
    for (long long c = 0; c < cf.count(u); ++c) {
      auto g = cf.decode(u, c);
      for (int x : members(S.upset(u))) g[x] = f[S.principal(x)][g[x]];
      out[u].push_back(static_cast<int>(cg.encode(u, g)));
    }
  return out;
}

/// Multiplication on codes: `outer` encodes TTG, `inner` encodes TG. A
/// tuple of inner tuples collapses to the diagonal x -> (inner at x)(x).
inline long long patch_mult(const TupleCodec& inner, const TupleCodec& outer, int u, long long code) {
  const auto& S = inner.space();
  auto h = outer.decode(u, code);
  Germs g(S.points(), -1);
  for (int x : members(S.upset(u))) g[x] = inner.decode(S.principal(x), h[x])[x];
  return inner.encode(u, g);
}

/// Multiplication TTF -> TF as a map on the codes of TTF.
inline SheafMap patch_mult(const Presheaf& F) {
  auto inner = patch_codec(F);
  auto outer = lift_codec(inner);
  SheafMap out(F.upsets());
  for (int u = 0; u < F.upsets(); ++u)
    for (long long c = 0; c < outer.count(u); ++c) out[u].push_back(static_cast<int>(patch_mult(inner, outer, u, c)));
  return out;
}

struct MonadLawReport {
  long long checked = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Unit laws and naturality exhaustively, associativity and naturality of
/// the multiplication on up to `samples` random elements per upset.
inline MonadLawReport check_monad_laws(const Presheaf& F, std::uint64_t seed = 1, int samples = 512) {
  MonadLawReport r;
  const auto& S = F.space;
  auto c1 = patch_codec(F);
  auto c2 = lift_codec(c1);
  auto c3 = lift_codec(c2);
  std::mt19937_64 rng(seed);
  auto fail = [&](const std::string& what, int u) {
    if (r.failures.size() < 20) r.failures.push_back(what + " over " + S.key(S.upset(u)));
  };
  auto draw = [&](const TupleCodec& c, int u, long long i) {
    if (c.count(u) <= samples) return i;
    return static_cast<long long>(std::uniform_int_distribution<long long>(0, c.count(u) - 1)(rng));
  };
  for (int u = 0; u < F.upsets(); ++u) {
    auto pts = members(S.upset(u));
    for (int s = 0; s < F.size(u); ++s)
      for (int v = 0; v < F.upsets(); ++v) {
        if (!subset(S.upset(v), S.upset(u))) continue;
        ++r.checked;
        if (c1.restrict(u, v, c1.encode(u, germs_of(F, u, s))) != c1.encode(v, germs_of(F, v, F.restrict(u, v, s))))
          fail("unit is not natural", u);
      }
    for (long long c = 0; c < c1.count(u); ++c) {
      auto g = c1.decode(u, c);
      Germs left(S.points(), -1), right(S.points(), -1);
      for (int x : pts) {
        left[x] = static_cast<int>(c1.restrict(u, S.principal(x), c));
        right[x] = static_cast<int>(c1.encode(S.principal(x), germs_of(F, S.principal(x), g[x])));
      }
      ++r.checked;
      if (patch_mult(c1, c2, u, c2.encode(u, left)) != c) fail("left unit law fails", u);
      if (patch_mult(c1, c2, u, c2.encode(u, right)) != c) fail("right unit law fails", u);
    }
    long long n2 = std::min<long long>(c2.count(u), samples);
    for (long long i = 0; i < n2; ++i) {
      long long h = draw(c2, u, i);
      long long m = patch_mult(c1, c2, u, h);
      for (int v = 0; v < F.upsets(); ++v) {
        if (!subset(S.upset(v), S.upset(u))) continue;
        ++r.checked;
        if (patch_mult(c1, c2, v, c2.restrict(u, v, h)) != c1.restrict(u, v, m)) fail("multiplication is not natural", u);
      }
    }
    long long n3 = std::min<long long>(c3.count(u), samples);
    for (long long i = 0; i < n3; ++i) {
      long long k = draw(c3, u, i);
      auto outer = c3.decode(u, k);
      Germs via_inner(S.points(), -1);
      for (int x : pts) via_inner[x] = static_cast<int>(patch_mult(c1, c2, S.principal(x), outer[x]));
      long long a = patch_mult(c1, c2, u, patch_mult(c2, c3, u, k));
      long long b = patch_mult(c1, c2, u, c2.encode(u, via_inner));
      ++r.checked;
      if (a != b) fail("associativity fails", u);
    }
  }
  return r;
}

/// Formal patch: sections s_i over upsets U_i restricted to disjoint parts
/// V_i of U_i.
struct FormalPatch {
  struct Part {
    int section;
    int upset;
    Mask part;
  };
  std::vector<Part> parts;

  Mask whole() const {
    Mask m = 0;
    for (const auto& p : parts) m |= p.part;
    return m;
  }
};

inline void validate(const Presheaf& F, const FormalPatch& p) {
  Mask seen = 0;
  for (const auto& part : p.parts) {
    if (part.upset < 0 || part.upset >= F.upsets()) throw ShapeError("formal patch upset out of range");
    if (part.section < 0 || part.section >= F.size(part.upset)) throw ShapeError("formal patch section out of range");
    if (!subset(part.part, F.space.upset(part.upset))) throw DomainError("formal patch part leaves its domain");
    if (part.part & seen) throw DomainError("formal patch parts overlap");
    seen |= part.part;
  }
  if (!F.space.is_upset(seen)) throw DomainError("formal patch does not cover an upset");
}

/// Canonical germ tuple x -> s_i restricted to up(x) for x in V_i.
inline Germs normalize(const Presheaf& F, const FormalPatch& p) {
  validate(F, p);
  Germs g(F.space.points(), -1);
  for (const auto& part : p.parts)
    for (int x : members(part.part)) g[x] = F.restrict(part.upset, F.space.principal(x), part.section);
  return g;
}

/// Refinement equivalence checked on the common refinement into single
/// points: at each x the two representatives must restrict to the same
/// section over some upset containing x inside both domains.
inline bool formally_equivalent(const Presheaf& F, const FormalPatch& a, const FormalPatch& b) {
  validate(F, a);
  validate(F, b);
  if (a.whole() != b.whole()) return false;
  const auto& S = F.space;
  for (int x : members(a.whole())) {
    const FormalPatch::Part* pa = nullptr;
    const FormalPatch::Part* pb = nullptr;
    for (const auto& p : a.parts)
      if (contains(p.part, x)) pa = &p;
    for (const auto& p : b.parts)
      if (contains(p.part, x)) pb = &p;
    Mask common = S.upset(pa->upset) & S.upset(pb->upset);
    bool agree = false;
    for (int w = 0; w < F.upsets() && !agree; ++w) {
      Mask W = S.upset(w);
      if (!contains(W, x) || !subset(W, common)) continue;
      if (F.restrict(pa->upset, w, pa->section) == F.restrict(pb->upset, w, pb->section)) agree = true;
    }
    if (!agree) return false;
  }
  return true;
}

/// Formal patch whose entries are formal patches of F over the U_i.
struct NestedPatch {
  struct Part {
    FormalPatch inner;
    int upset;
    Mask part;
  };
  std::vector<Part> parts;
};

/// Forgets one level of partition: (s_ij, U_ij; V_ij meet V_i).
inline FormalPatch flatten(const NestedPatch& p) {
  FormalPatch out;
  for (const auto& outer : p.parts)
    for (const auto& inner : outer.inner.parts) {
      Mask m = inner.part & outer.part;
      if (m) out.parts.push_back({inner.section, inner.upset, m});
    }
  return out;
}

/// The element of TTF represented by a nested formal patch, as a code.
inline long long nested_code(const Presheaf& F, const NestedPatch& p, Mask whole) {
  const auto& S = F.space;
  auto c1 = patch_codec(F);
  auto c2 = lift_codec(c1);
  Germs h(S.points(), -1);
  for (const auto& outer : p.parts) {
    auto inner = normalize(F, outer.inner);
    for (int x : members(outer.part)) {
      Germs at(S.points(), -1);
      for (int y : members(S.up(x))) at[y] = inner[y];
      h[x] = static_cast<int>(c1.encode(S.principal(x), at));
    }
  }
  return c2.encode(S.index(whole), h);
}

/// Structure map per upset on the codes of TF.
struct TAlgebra {
  Presheaf sheaf;
  std::vector<std::vector<int>> xi;
};

struct TAlgebraReport {
  std::vector<std::string> unit;
  std::vector<std::string> associativity;
  std::vector<std::string> naturality;
  std::vector<std::string> shape;
  bool ok() const { return unit.empty() && associativity.empty() && naturality.empty() && shape.empty(); }
  std::vector<std::string> all() const {
    std::vector<std::string> out = shape;
    for (const auto* v : {&unit, &associativity, &naturality}) out.insert(out.end(), v->begin(), v->end());
    return out;
  }
};

inline TAlgebraReport check_talgebra(const TAlgebra& A, long long associativity_limit = 1 << 16) {
  TAlgebraReport r;
  const auto& F = A.sheaf;
  const auto& S = F.space;
  auto c1 = patch_codec(F);
  auto c2 = lift_codec(c1);
  if (static_cast<int>(A.xi.size()) != F.upsets()) {
    r.shape.push_back("structure map needs one table per upset");
    return r;
  }
  for (int u = 0; u < F.upsets(); ++u) {
    if (static_cast<long long>(A.xi[u].size()) != c1.count(u)) {
      r.shape.push_back("structure map over " + S.key(S.upset(u)) + " has wrong length");
      continue;
    }
    for (int v : A.xi[u])
      if (v < 0 || v >= F.size(u)) r.shape.push_back("structure map value out of range over " + S.key(S.upset(u)));
  }
  if (!r.shape.empty()) return r;
  auto note = [](std::vector<std::string>& v, const std::string& s) {
    if (v.size() < 20) v.push_back(s);
  };
  for (int u = 0; u < F.upsets(); ++u) {
    std::string key = S.key(S.upset(u));
    auto pts = members(S.upset(u));
    for (int s = 0; s < F.size(u); ++s)
      if (A.xi[u][c1.encode(u, germs_of(F, u, s))] != s) note(r.unit, "unit law fails over " + key + " at " + F.sections[u][s]);
    for (long long c = 0; c < c1.count(u); ++c)
      for (int v = 0; v < F.upsets(); ++v) {
        if (!subset(S.upset(v), S.upset(u))) continue;
        if (A.xi[v][c1.restrict(u, v, c)] != F.restrict(u, v, A.xi[u][c]))
          note(r.naturality, "not natural over " + key + " > " + S.key(S.upset(v)));
      }
    long long n2 = std::min(c2.count(u), associativity_limit);
    for (long long h = 0; h < n2; ++h) {
      auto outer = c2.decode(u, h);
      Germs acted(S.points(), -1);
      for (int x : pts) acted[x] = A.xi[S.principal(x)][outer[x]];
      if (A.xi[u][c1.encode(u, acted)] != A.xi[u][patch_mult(c1, c2, u, h)])
        note(r.associativity, "associativity fails over " + key);
    }
  }
  return r;
}

/// Extends structure maps given on principal upsets to all upsets by gluing.
/// Returns nullopt when some family does not glue.
inline std::optional<std::vector<std::vector<int>>> glue_structure(const Presheaf& F, const std::vector<std::vector<int>>& principal) {
  const auto& S = F.space;
  auto codec = patch_codec(F);
  std::vector<std::vector<int>> xi(F.upsets());
  for (int u = 0; u < F.upsets(); ++u) {
    auto pts = members(S.upset(u));
    std::map<Germs, int> by_germs;
    for (int s = 0; s < F.size(u); ++s) by_germs[germs_of(F, u, s)] = s;
    for (long long c = 0; c < codec.count(u); ++c) {
      Germs want(S.points(), -1);
      for (int x : pts) want[x] = principal[x][codec.restrict(u, S.principal(x), c)];
      auto it = by_germs.find(want);
      if (it == by_germs.end()) return std::nullopt;
      xi[u].push_back(it->second);
    }
  }
  return xi;
}

struct TAlgebraSearch {
  std::vector<TAlgebra> algebras;
  bool complete = true;
};

/// Every structure map on a sheaf. Principal upsets are handled from the
/// maximal points down; values on unit images are pinned, the rest must
/// restrict to the values already chosen above, and associativity is
/// propagated between cells while they are chosen.
inline TAlgebraSearch enumerate_talgebras(const Presheaf& F, CancelToken cancel = {}, std::size_t limit = 0) {
  TAlgebraSearch out;
  if (!is_sheaf(F).ok()) throw DomainError("structure maps are enumerated on sheaves only");
  const auto& S = F.space;
  int n = S.points();
  auto c1 = patch_codec(F);
  auto c2 = lift_codec(c1);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return popcount(S.up(a)) < popcount(S.up(b)); });
  std::vector<std::vector<int>> phi(n);
  bool stop = false;
  std::function<void(int)> point = [&](int k) {
    if (stop) return;
    if (cancel.cancelled()) {
      out.complete = false;
      stop = true;
      return;
    }
    if (k == n) {
      auto xi = glue_structure(F, phi);
      if (xi) {
        out.algebras.push_back({F, *xi});
        if (limit && out.algebras.size() >= limit) stop = true;
      }
      return;
    }
    int x = order[k];
    int px = S.principal(x);
    long long count = c1.count(px);
    std::vector<std::vector<int>> candidates(count);
    std::vector<int> pinned(count, -1);
    for (int s = 0; s < F.size(px); ++s) pinned[c1.encode(px, germs_of(F, px, s))] = s;
    for (long long c = 0; c < count; ++c) {
      for (int s = 0; s < F.size(px); ++s) {
        if (pinned[c] >= 0 && pinned[c] != s) continue;
        bool ok = true;
        for (int y : members(S.up(x))) {
          if (y == x) continue;
          int py = S.principal(y);
          if (F.restrict(px, py, s) != phi[y][c1.restrict(px, py, c)]) ok = false;
        }
        if (ok) candidates[c].push_back(s);
      }
      if (candidates[c].empty()) return;
    }
    // Associativity at h reads phi(a) with a = outer(h) at x and ties the
    // cell base(h) + phi(a) * weight to the cell mu(h).
    auto pts = members(S.up(x));
    Germs zero(n, -1);
    for (int y : pts) zero[y] = 0;
    long long weight = 0;
    if (c1.radix(x) > 1) {
      Germs one = zero;
      one[x] = 1;
      weight = c1.encode(px, one) - c1.encode(px, zero);
    }
    struct Tie {
      long long a, m, base;
    };
    std::vector<Tie> ties;
    std::vector<std::vector<int>> watch(count);
    for (long long h = 0; h < c2.count(px); ++h) {
      auto outer = c2.decode(px, h);
      Germs acted(n, -1);
      for (int y : pts) acted[y] = y == x ? 0 : phi[y][outer[y]];
      Tie t{outer[x], patch_mult(c1, c2, px, h), c1.encode(px, acted)};
      int id = static_cast<int>(ties.size());
      ties.push_back(t);
      watch[t.a].push_back(id);
      watch[t.m].push_back(id);
      for (int v = 0; v < F.size(px); ++v) watch[t.base + v * weight].push_back(id);
    }
    std::vector<std::vector<char>> allowed(count, std::vector<char>(F.size(px), 0));
    for (long long c = 0; c < count; ++c)
      for (int s : candidates[c]) allowed[c][s] = 1;
    std::vector<int> val(count, -1);
    std::vector<long long> trail;
    auto assign = [&](long long c, int s, std::vector<long long>& queue) {
      if (val[c] >= 0) return val[c] == s;
      if (!allowed[c][s]) return false;
      val[c] = s;
      trail.push_back(c);
      queue.push_back(c);
      return true;
    };
    auto propagate = [&](std::vector<long long>& queue) {
      while (!queue.empty()) {
        long long c = queue.back();
        queue.pop_back();
        for (int id : watch[c]) {
          const Tie& t = ties[id];
          if (val[t.a] < 0) continue;
          long long b = t.base + val[t.a] * weight;
          if (val[t.m] >= 0) {
            if (!assign(b, val[t.m], queue)) return false;
          } else if (val[b] >= 0) {
            if (!assign(t.m, val[b], queue)) return false;
          }
        }
      }
      return true;
    };
    auto undo = [&](std::size_t mark) {
      while (trail.size() > mark) {
        val[trail.back()] = -1;
        trail.pop_back();
      }
    };
    std::vector<long long> queue;
    bool consistent = true;
    for (long long c = 0; c < count && consistent; ++c)
      if (candidates[c].size() == 1) consistent = assign(c, candidates[c].front(), queue);
    if (!consistent || !propagate(queue)) return;
    std::function<void()> search = [&] {
      if (stop) return;
      long long best = -1;
      std::size_t fewest = 0;
      for (long long c = 0; c < count; ++c)
        if (val[c] < 0 && (best < 0 || candidates[c].size() < fewest)) {
          best = c;
          fewest = candidates[c].size();
        }
      if (best < 0) {
        phi[x] = val;
        point(k + 1);
        return;
      }
      for (int s : candidates[best]) {
        std::size_t mark = trail.size();
        std::vector<long long> q;
        if (assign(best, s, q) && propagate(q)) search();
        undo(mark);
        if (stop) return;
      }
    };
    search();
    phi[x].clear();
  };
  point(0);
  return out;
}

/// Join of two local sections (indices into local_section_band(F)): germs of
/// the first on its domain, germs of the second elsewhere, then the
/// structure map.
inline int algebra_join(const TAlgebra& A, const SheafBand& band, int a, int b) {
  const auto& F = A.sheaf;
  const auto& S = F.space;
  auto [u, s] = band.elements[a];
  auto [v, t] = band.elements[b];
  Mask U = S.upset(u), V = S.upset(v);
  int w = S.index(U | V);
  Germs g(S.points(), -1);
  for (int x : members(U)) g[x] = F.restrict(u, S.principal(x), s);
  for (int x : members(V & ~U)) g[x] = F.restrict(v, S.principal(x), t);
  return band.element(w, A.xi[w][patch_codec(F).encode(w, g)]);
}

inline SkewLattice talgebra_to_skew(const TAlgebra& A) {
  auto report = check_talgebra(A);
  if (!report.ok()) throw DomainError("not a T-algebra: " + report.all().front());
  if (!A.sheaf.global()) throw DomainError("no global sections");
  auto band = local_section_band(A.sheaf);
  int n = band.band.size();
  SkewLattice s{band.band.labels, band.band.mul, Table(n)};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) s.join.at(a, b) = algebra_join(A, band, a, b);
  return s;
}

namespace detail {

inline void require_right_distributive(const SkewLattice& S) {
  auto rep = is_distributive_skew(S);
  if (!rep.valid) throw DomainError("not a skew lattice");
  if (!rep.right_handed) throw DomainError("skew lattice is not right-handed");
  if (!rep.normal) throw DomainError("skew lattice is not normal");
  if (!rep.symmetric) throw DomainError("skew lattice is not symmetric");
  if (!rep.distributive_reflection) throw DomainError("reflection is not distributive");
}

/// Joins g_p over up(p) for the points peeled maximal-first.
inline int peeled_join(const Presheaf& F, const SkewLattice& S, const SheafBand& band, int u, const Germs& g) {
  const auto& X = F.space;
  Mask U = X.upset(u);
  if (U == 0) return band.element(0, 0);
  ConstructiblePartition singletons{U, {}};
  for (int x : members(U)) singletons.parts.push_back(bit(x));
  auto chain = refine_to_chain_partition(X, singletons);
  int acc = -1;
  for (Mask part : chain.parts()) {
    int p = members(part).front();
    int e = band.element(X.principal(p), g[p]);
    acc = acc < 0 ? e : S.join(acc, e);
  }
  return acc;
}

}  // namespace detail

/// Structure map from a right distributive skew lattice indexed like
/// local_section_band(F).
inline TAlgebra skew_to_talgebra(const Presheaf& F, const SkewLattice& S) {
  detail::require_right_distributive(S);
  auto band = local_section_band(F);
  if (S.size() != band.band.size() || !(S.meet == band.band.mul))
    throw DomainError("meet band does not match the local sections of the sheaf");
  auto codec = patch_codec(F);
  TAlgebra A{F, std::vector<std::vector<int>>(F.upsets())};
  for (int u = 0; u < F.upsets(); ++u)
    for (long long c = 0; c < codec.count(u); ++c) {
      int e = detail::peeled_join(F, S, band, u, codec.decode(u, c));
      auto [w, s] = band.elements[e];
      if (w != u) throw DomainError("join of a chain patch left its domain", {S.labels[e]});
      A.xi[u].push_back(s);
    }
  return A;
}

/// Skew lattice over its own dual sheaf, with its elements renumbered to
/// match local_section_band of that sheaf.
struct SkewSheaf {
  Presheaf sheaf;
  SkewLattice lattice;
  /// Index in `lattice` of each element of the input.
  std::vector<int> element;
};

inline SkewSheaf skew_over_sheaf(const SkewLattice& S) {
  detail::require_right_distributive(S);
  auto bs = band_to_sheaf(S.meet_band());
  auto band = local_section_band(bs.sheaf);
  int n = S.size();
  SkewSheaf out{bs.sheaf, SkewLattice{band.band.labels, band.band.mul, Table(n)}, std::vector<int>(n)};
  std::vector<int> back(n);
  for (int x = 0; x < n; ++x) {
    auto [u, s] = bs.element_section[x];
    out.element[x] = band.element(u, s);
    back[out.element[x]] = x;
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      out.lattice.join.at(a, b) = out.element[S.join(back[a], back[b])];
      if (out.lattice.meet(a, b) != out.element[S.meet(back[a], back[b])])
        throw DomainError("dual sheaf does not reproduce the meet");
    }
  return out;
}

inline TAlgebra skew_to_talgebra(const SkewLattice& S) {
  auto ss = skew_over_sheaf(S);
  return skew_to_talgebra(ss.sheaf, ss.lattice);
}

/// Joins t_1 v ... v t_m over every chain of upsets ending at U and every
/// admissible choice of representatives agreeing with the germs on each
/// part. Chains whose parts admit no representative are skipped.
struct AdmissibleJoins {
  std::set<int> results;
  long long choices = 0;
  long long chains = 0;
};

inline AdmissibleJoins admissible_joins(const Presheaf& F, const SkewLattice& S, int u, const Germs& g) {
  const auto& X = F.space;
  auto band = local_section_band(F);
  Mask U = X.upset(u);
  AdmissibleJoins out;
  std::vector<Mask> chain{0};
  std::function<void()> walk_chain;
  std::function<void(std::size_t, int)> pick = [&](std::size_t i, int acc) {
    if (i == chain.size()) {
      ++out.choices;
      out.results.insert(acc);
      return;
    }
    Mask prev = chain[i - 1], cur = chain[i], part = cur & ~prev;
    for (int w = 0; w < F.upsets(); ++w) {
      Mask W = X.upset(w);
      if (!subset(part, W) || !subset(W, cur) || (W | prev) != cur) continue;
      for (int s = 0; s < F.size(w); ++s) {
        bool match = true;
        for (int x : members(part))
          if (F.restrict(w, X.principal(x), s) != g[x]) match = false;
        if (!match) continue;
        int e = band.element(w, s);
        pick(i + 1, acc < 0 ? e : S.join(acc, e));
      }
    }
  };
  walk_chain = [&]() {
    Mask top = chain.back();
    if (top == U) {
      ++out.chains;
      if (U == 0)
        out.results.insert(band.element(0, 0));
      else
        pick(1, -1);
      return;
    }
    for (int w = 0; w < F.upsets(); ++w) {
      Mask W = X.upset(w);
      if (!subset(top, W) || W == top || !subset(W, U)) continue;
      chain.push_back(W);
      walk_chain();
      chain.pop_back();
    }
  };
  walk_chain();
  return out;
}

/// Fibre of F(U) -> F(V) via the coequaliser of (t, s) -> t v s and
/// (t, s) -> s, with the check that F(U) is the product of F(V) and the
/// quotient.
struct RelativeSections {
  Partition quotient;
  bool splits = false;
};

inline RelativeSections relative_sections(const TAlgebra& A, int u, int v) {
  const auto& F = A.sheaf;
  const auto& S = F.space;
  if (!subset(S.upset(v), S.upset(u))) throw DomainError("relative sections need V inside U", {S.key(S.upset(v)), S.key(S.upset(u))});
  auto band = local_section_band(F);
  UnionFind uf(F.size(u));
  for (int t = 0; t < F.size(v); ++t)
    for (int s = 0; s < F.size(u); ++s) {
      auto [w, r] = band.elements[algebra_join(A, band, band.element(v, t), band.element(u, s))];
      if (w != u) throw DomainError("join left the larger domain");
      uf.unite(s, r);
    }
  RelativeSections out{uf.partition(), true};
  std::set<std::pair<int, int>> seen;
  for (int s = 0; s < F.size(u); ++s)
    if (!seen.insert({F.restrict(u, v, s), out.quotient.class_of[s]}).second) out.splits = false;
  if (static_cast<long long>(seen.size()) != static_cast<long long>(F.size(v)) * out.quotient.count) out.splits = false;
  return out;
}

/// Triples (U, V, W) with V inside U where restricting a join to U n W
/// differs from joining the restrictions.
inline std::vector<std::array<int, 3>> join_restriction_failures(const TAlgebra& A) {
  const auto& F = A.sheaf;
  const auto& S = F.space;
  auto band = local_section_band(F);
  std::vector<std::array<int, 3>> out;
  int m = F.upsets();
  for (int u = 0; u < m; ++u)
    for (int v = 0; v < m; ++v) {
      if (!subset(S.upset(v), S.upset(u))) continue;
      for (int w = 0; w < m; ++w) {
        int uw = S.index(S.upset(u) & S.upset(w)), vw = S.index(S.upset(v) & S.upset(w));
        bool ok = true;
        for (int y = 0; y < F.size(v) && ok; ++y)
          for (int x = 0; x < F.size(u) && ok; ++x) {
            int j = band.elements[algebra_join(A, band, band.element(v, y), band.element(u, x))].second;
            int left = F.restrict(u, uw, j);
            int right = band.elements[algebra_join(A, band, band.element(vw, F.restrict(v, vw, y)),
                                                   band.element(uw, F.restrict(u, uw, x)))].second;
            if (left != right) ok = false;
          }
        if (!ok) out.push_back({u, v, w});
      }
    }
  return out;
}

/// Sets per point of the space with the order kept for the comparison
/// functor. The support is saturated when it is an upset.
struct SaturatedStalkFamily {
  Poset base;
  std::vector<std::vector<std::string>> stalks;

  Mask support() const {
    Mask m = 0;
    for (std::size_t x = 0; x < stalks.size(); ++x)
      if (!stalks[x].empty()) m |= bit(static_cast<int>(x));
    return m;
  }
  bool saturated() const { return SpectralSpace(base).is_upset(support()); }
};

/// W-equivalence classes of local sections over upsets containing W. Two
/// sections are related when some upset U between W and both domains and
/// some upset V inside U missing W make their restrictions to U agree away
/// from V.
struct LRelation {
  Mask subset = 0;
  std::vector<std::pair<int, int>> elements;
  Partition classes;
  /// The relation needed no transitive closure.
  bool transitive = true;
  /// Related pairs that the reading "for every such V" would separate.
  int universal_differs = 0;
  /// Pairs whose relatedness changes when only the largest V is tried.
  int shortcut_differs = 0;
};

inline LRelation l_relation(const TAlgebra& A, Mask W) {
  const auto& F = A.sheaf;
  const auto& S = F.space;
  auto band = local_section_band(F);
  LRelation out;
  out.subset = W;
  for (int u = 0; u < F.upsets(); ++u)
    if (subset(W, S.upset(u)))
      for (int s = 0; s < F.size(u); ++s) out.elements.emplace_back(u, s);
  int n = static_cast<int>(out.elements.size());
  // away[u][v][s]: class of s in F(U) under agreement away from V.
  std::map<std::pair<int, int>, std::vector<int>> away;
  for (int u = 0; u < F.upsets(); ++u) {
    Mask U = S.upset(u);
    if (!subset(W, U)) continue;
    for (int v = 0; v < F.upsets(); ++v) {
      Mask V = S.upset(v);
      if (!subset(V, U) || (V & W)) continue;
      std::map<std::vector<int>, int> keys;
      auto& cls = away[{u, v}];
      for (int s = 0; s < F.size(u); ++s) {
        std::vector<int> key;
        for (int t = 0; t < F.size(v); ++t) key.push_back(algebra_join(A, band, band.element(v, t), band.element(u, s)));
        cls.push_back(keys.emplace(key, static_cast<int>(keys.size())).first->second);
      }
    }
  }
  std::vector<std::vector<char>> rel(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto [u1, s1] = out.elements[i];
      auto [u2, s2] = out.elements[j];
      Mask common = S.upset(u1) & S.upset(u2);
      bool some = false, every = false, largest = false;
      for (int u = 0; u < F.upsets(); ++u) {
        Mask U = S.upset(u);
        if (!subset(W, U) || !subset(U, common)) continue;
        int a = F.restrict(u1, u, s1), b = F.restrict(u2, u, s2);
        bool all_v = true;
        int big = -1;
        for (int v = 0; v < F.upsets(); ++v) {
          Mask V = S.upset(v);
          if (!subset(V, U) || (V & W)) continue;
          const auto& cls = away.at({u, v});
          bool same = cls[a] == cls[b];
          some = some || same;
          all_v = all_v && same;
          if (big < 0 || popcount(V) > popcount(S.upset(big))) big = v;
        }
        every = every || all_v;
        const auto& cls = away.at({u, big});
        largest = largest || cls[a] == cls[b];
      }
      rel[i][j] = some;
      if (some && !every) ++out.universal_differs;
      if (some != largest) ++out.shortcut_differs;
    }
  UnionFind uf(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (rel[i][j]) uf.unite(i, j);
  out.classes = uf.partition();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (out.classes.same(i, j) && !rel[i][j]) out.transitive = false;
  return out;
}

/// The family x -> lF({x}) with, per point, the class of every local
/// section over an upset containing x (-1 otherwise).
struct LFamily {
  SaturatedStalkFamily family;
  std::vector<LRelation> relations;
  std::vector<std::vector<std::vector<int>>> class_of;
};

inline LFamily functor_l(const TAlgebra& A) {
  const auto& F = A.sheaf;
  const auto& S = F.space;
  int n = S.points();
  LFamily out;
  out.family.base = S.poset();
  out.family.stalks.resize(n);
  out.class_of.resize(n);
  for (int x = 0; x < n; ++x) {
    auto rel = l_relation(A, bit(x));
    auto& cls = out.class_of[x];
    cls.resize(F.upsets());
    for (int u = 0; u < F.upsets(); ++u) cls[u].assign(F.size(u), -1);
    std::vector<std::string> label(rel.classes.count);
    int px = S.principal(x);
    for (std::size_t i = 0; i < rel.elements.size(); ++i) {
      auto [u, s] = rel.elements[i];
      int c = rel.classes.class_of[i];
      cls[u][s] = c;
      if (u == px && label[c].empty()) label[c] = F.sections[u][s];
    }
    for (int c = 0; c < rel.classes.count; ++c)
      if (label[c].empty()) label[c] = "#" + std::to_string(c);
    out.family.stalks[x] = label;
    out.relations.push_back(std::move(rel));
  }
  return out;
}

/// k(G): F(U) is the product of the stalks over U with projections as
/// restrictions, and the structure map keeps the diagonal entries.
inline TAlgebra comparison_k(const SaturatedStalkFamily& G) {
  SpectralSpace space(G.base);
  int n = space.points();
  if (static_cast<int>(G.stalks.size()) != n) throw ShapeError("need one stalk per point");
  std::vector<long long> radix;
  for (const auto& s : G.stalks) radix.push_back(static_cast<long long>(s.size()));
  TupleCodec codec(space, radix);
  Presheaf F{space, std::vector<std::vector<std::string>>(space.upset_count()), {}};
  auto label = [&](int x, int a) { return G.stalks[x][a]; };
  for (int u = 0; u < F.upsets(); ++u)
    for (long long c = 0; c < codec.count(u); ++c) F.sections[u].push_back(germ_key(space, label, codec.decode(u, c)));
  fill_restrictions(F, [&](int u, int v, int s) { return static_cast<int>(codec.restrict(u, v, s)); });
  TAlgebra A{F, std::vector<std::vector<int>>(F.upsets())};
  auto pc = patch_codec(A.sheaf);
  for (int u = 0; u < F.upsets(); ++u)
    for (long long c = 0; c < pc.count(u); ++c) {
      auto g = pc.decode(u, c);
      Germs diag(n, -1);
      for (int x : members(space.upset(u))) diag[x] = codec.decode(space.principal(x), g[x])[x];
      A.xi[u].push_back(static_cast<int>(codec.encode(u, diag)));
    }
  return A;
}

struct KlReport {
  bool bijective = true;
  bool natural = true;
  bool structure = true;
  bool ok() const { return bijective && natural && structure; }
};

/// F -> klF, s over U going to its classes at the points of U.
inline KlReport check_kl_iso(const TAlgebra& A, const LFamily& L) {
  KlReport r;
  const auto& F = A.sheaf;
  const auto& S = F.space;
  int n = S.points();
  std::vector<long long> radix;
  for (const auto& st : L.family.stalks) radix.push_back(static_cast<long long>(st.size()));
  TupleCodec kl(S, radix);
  auto image = [&](int u, int s) {
    Germs g(n, -1);
    for (int x : members(S.upset(u))) g[x] = L.class_of[x][u][s];
    return kl.encode(u, g);
  };
  for (int u = 0; u < F.upsets(); ++u) {
    std::set<long long> hit;
    for (int s = 0; s < F.size(u); ++s) hit.insert(image(u, s));
    if (static_cast<long long>(hit.size()) != F.size(u) || kl.count(u) != F.size(u)) r.bijective = false;
    for (int v = 0; v < F.upsets(); ++v) {
      if (!subset(S.upset(v), S.upset(u))) continue;
      for (int s = 0; s < F.size(u); ++s)
        if (image(v, F.restrict(u, v, s)) != kl.restrict(u, v, image(u, s))) r.natural = false;
    }
  }
  auto pc = patch_codec(F);
  for (int u = 0; u < F.upsets(); ++u)
    for (long long c = 0; c < pc.count(u); ++c) {
      auto g = pc.decode(u, c);
      int s = A.xi[u][c];
      for (int x : members(S.upset(u)))
        if (L.class_of[x][u][s] != L.class_of[x][S.principal(x)][g[x]]) r.structure = false;
    }
  return r;
}

struct LkReport {
  bool well_defined = true;
  bool bijective = true;
  bool ok() const { return well_defined && bijective; }
};

/// lkG -> G sending the class of a product section to its coordinate.
inline LkReport check_lk_iso(const SaturatedStalkFamily& G) {
  LkReport r;
  auto A = comparison_k(G);
  auto L = functor_l(A);
  const auto& S = A.sheaf.space;
  std::vector<long long> radix;
  for (const auto& s : G.stalks) radix.push_back(static_cast<long long>(s.size()));
  TupleCodec codec(S, radix);
  for (int x = 0; x < S.points(); ++x) {
    const auto& rel = L.relations[x];
    std::vector<int> coord(rel.classes.count, -1);
    for (std::size_t i = 0; i < rel.elements.size(); ++i) {
      auto [u, s] = rel.elements[i];
      int c = rel.classes.class_of[i];
      int value = codec.decode(u, s)[x];
      if (coord[c] >= 0 && coord[c] != value) r.well_defined = false;
      coord[c] = value;
    }
    std::set<int> hit(coord.begin(), coord.end());
    if (static_cast<int>(hit.size()) != rel.classes.count || rel.classes.count != static_cast<int>(G.stalks[x].size()))
      r.bijective = false;
  }
  return r;
}

/// Right Boolean skew lattice of sections of lF over all subsets of the
/// points, with the unit from the input.
struct SkewEnvelope {
  SkewLattice lattice;
  std::vector<int> unit;
  /// Domain and per-point class tuple of each element.
  std::vector<std::pair<Mask, Germs>> elements;
  /// Points of the spectrum of the reflection.
  Poset points;
};

inline SkewEnvelope boolean_skew_envelope(const SkewLattice& input) {
  auto ss = skew_over_sheaf(input);
  auto A = skew_to_talgebra(ss.sheaf, ss.lattice);
  auto L = functor_l(A);
  const auto& X = A.sheaf.space;
  int n = X.points();
  auto env = boolean_envelope(X);
  SkewEnvelope out;
  out.points = X.poset();
  std::map<std::pair<Mask, Germs>, int> index;
  for (Mask W : env.subsets) {
    auto pts = members(W);
    Germs g(n, -1);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == pts.size()) {
        index[{W, g}] = static_cast<int>(out.elements.size());
        out.elements.emplace_back(W, g);
        std::vector<std::string> parts;
        for (int x : pts) parts.push_back(X.poset().label(x) + "=" + L.family.stalks[x][g[x]]);
        std::sort(parts.begin(), parts.end());
        out.lattice.labels.push_back((parts.empty() ? std::string("*") : join(parts, ";")) + "@" + X.key(W));
        return;
      }
      for (int c = 0; c < static_cast<int>(L.family.stalks[pts[i]].size()); ++c) {
        g[pts[i]] = c;
        rec(i + 1);
      }
      g[pts[i]] = -1;
    };
    rec(0);
  }
  int m = static_cast<int>(out.elements.size());
  out.lattice.meet = Table(m);
  out.lattice.join = Table(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const auto& [W1, g1] = out.elements[a];
      const auto& [W2, g2] = out.elements[b];
      Germs meet(n, -1), joined(n, -1);
      for (int x : members(W1 & W2)) meet[x] = g2[x];
      for (int x : members(W1)) joined[x] = g1[x];
      for (int x : members(W2 & ~W1)) joined[x] = g2[x];
      out.lattice.meet.at(a, b) = index.at({W1 & W2, meet});
      out.lattice.join.at(a, b) = index.at({W1 | W2, joined});
    }
  auto band = local_section_band(A.sheaf);
  for (int i = 0; i < input.size(); ++i) {
    auto [u, s] = band.elements[ss.element[i]];
    Germs g(n, -1);
    for (int x : members(X.upset(u))) g[x] = L.class_of[x][u][s];
    out.unit.push_back(index.at({X.upset(u), g}));
  }
  return out;
}

/// The unit is injective, its image is exactly the elements over upsets, and
/// it preserves both operations: the square with the lattice reflections is
/// a pullback.
inline bool envelope_is_pullback(const SkewLattice& input, const SkewEnvelope& env) {
  SpectralSpace X(env.points);
  std::set<int> image(env.unit.begin(), env.unit.end());
  if (static_cast<int>(image.size()) != input.size()) return false;
  for (int e = 0; e < env.lattice.size(); ++e)
    if (X.is_upset(env.elements[e].first) != (image.count(e) > 0)) return false;
  for (int a = 0; a < input.size(); ++a)
    for (int b = 0; b < input.size(); ++b) {
      if (env.unit[input.meet(a, b)] != env.lattice.meet(env.unit[a], env.unit[b])) return false;
      if (env.unit[input.join(a, b)] != env.lattice.join(env.unit[a], env.unit[b])) return false;
    }
  return true;
}

/// Maps preserving both skew operations.
inline void for_each_skew_hom(const SkewLattice& a, const SkewLattice& b, std::vector<int> partial,
                              const std::function<bool(const std::vector<int>&)>& visit) {
  for_each_hom({&a.meet, &a.join}, {&b.meet, &b.join}, std::move(partial), visit);
}

}  // namespace spectral
