#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spectral/band.hpp"
#include "spectral/common.hpp"
#include "spectral/order.hpp"

namespace spectral {

/// Presheaf on the upset lattice of a finite spectral space. Sections are
/// indexed by upset index; restriction tables are stored for every pair
/// v <= u at res[u * m + v].
struct Presheaf {
  SpectralSpace space;
  std::vector<std::vector<std::string>> sections;
  std::vector<std::vector<int>> res;

  int upsets() const { return space.upset_count(); }
  int size(int u) const { return static_cast<int>(sections[u].size()); }
  const std::vector<int>& restriction(int u, int v) const { return res[static_cast<std::size_t>(u) * upsets() + v]; }
  int restrict(int u, int v, int s) const { return restriction(u, v)[s]; }
  bool global() const { return !sections[space.top_index()].empty(); }
  int total() const {
    int n = 0;
    for (const auto& s : sections) n += static_cast<int>(s.size());
    return n;
  }

  /// Shape and functoriality problems, empty when the data is a presheaf.
  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    int m = upsets();
    if (static_cast<int>(sections.size()) != m) return {"need one section set per upset"};
    if (static_cast<int>(res.size()) != m * m) return {"restriction table has wrong size"};
    for (int u = 0; u < m; ++u)
      for (int v = 0; v < m; ++v) {
        if (!subset(space.upset(v), space.upset(u))) continue;
        const auto& r = restriction(u, v);
        if (static_cast<int>(r.size()) != size(u)) {
          out.push_back("restriction " + space.key(space.upset(u)) + "|" + space.key(space.upset(v)) + " has wrong length");
          continue;
        }
        for (int t : r)
          if (t < 0 || t >= size(v)) out.push_back("restriction value out of range at " + space.key(space.upset(u)));
        if (u == v)
          for (int s = 0; s < size(u); ++s)
            if (r[s] != s) out.push_back("identity restriction moves a section over " + space.key(space.upset(u)));
      }
    if (!out.empty()) return out;
    for (int u = 0; u < m; ++u)
      for (int v = 0; v < m; ++v) {
        if (!subset(space.upset(v), space.upset(u))) continue;
        for (int w = 0; w < m; ++w) {
          if (!subset(space.upset(w), space.upset(v))) continue;
          for (int s = 0; s < size(u); ++s)
            if (restrict(v, w, restrict(u, v, s)) != restrict(u, w, s)) {
              out.push_back("restrictions do not compose along " + space.key(space.upset(u)) + " > " +
                            space.key(space.upset(v)) + " > " + space.key(space.upset(w)));
              s = size(u);
            }
        }
      }
    return out;
  }

  void validate() const {
    auto p = problems();
    if (!p.empty()) throw DomainError("not a presheaf: " + p.front());
  }
};

/// Allocates the restriction tables of a presheaf and fills them with
/// rule(u, v, s) for every v <= u.
inline void fill_restrictions(Presheaf& F, const std::function<int(int, int, int)>& rule) {
  int m = F.upsets();
  F.res.assign(static_cast<std::size_t>(m) * m, {});
  for (int u = 0; u < m; ++u)
    for (int v = 0; v < m; ++v) {
      if (!subset(F.space.upset(v), F.space.upset(u))) continue;
      auto& r = F.res[static_cast<std::size_t>(u) * m + v];
      r.resize(F.size(u));
      for (int s = 0; s < F.size(u); ++s) r[s] = rule(u, v, s);
    }
}

/// Functor on the points: a set per point and a map stalk(x) -> stalk(y)
/// for each x <= y. maps[{x, y}] is required for x < y.
struct StalkFunctor {
  std::vector<std::vector<std::string>> stalks;
  std::map<std::pair<int, int>, std::vector<int>> maps;

  int apply(int x, int y, int a) const { return x == y ? a : maps.at({x, y})[a]; }
};

/// Families (a_x) over the points of each upset with a_x mapped to a_y for
/// x <= y. Such families are the sheaf with the given functor on principal
/// upsets.
inline Presheaf sheaf_from_stalks(const SpectralSpace& space, const StalkFunctor& G) {
  int n = space.points();
  const Poset& P = space.poset();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (P.less(x, y)) {
        const auto& f = G.maps.at({x, y});
        if (static_cast<int>(f.size()) != static_cast<int>(G.stalks[x].size()))
          throw ShapeError("stalk map " + P.label(x) + "->" + P.label(y) + " has wrong length");
        for (int a = 0; a < static_cast<int>(f.size()); ++a) {
          if (f[a] < 0 || f[a] >= static_cast<int>(G.stalks[y].size())) throw ShapeError("stalk map value out of range");
          for (int z = 0; z < n; ++z)
            if (P.less(y, z) && G.apply(y, z, f[a]) != G.apply(x, z, a))
              throw DomainError("stalk maps do not compose", {P.label(x), P.label(y), P.label(z)});
        }
      }
  Presheaf F{space, {}, {}};
  int m = space.upset_count();
  F.sections.resize(m);
  std::vector<std::vector<std::vector<int>>> families(m);
  for (int u = 0; u < m; ++u) {
    auto pts = members(space.upset(u));
    std::vector<int> mins;
    for (int x : pts)
      if ((space.down(x) & space.upset(u)) == bit(x)) mins.push_back(x);
    std::vector<int> choice(mins.size(), 0);
    bool done = false;
    for (std::size_t i = 0; i < mins.size(); ++i)
      if (G.stalks[mins[i]].empty()) done = true;
    while (!done) {
      std::vector<int> family(n, -1);
      bool ok = true;
      for (std::size_t i = 0; i < mins.size() && ok; ++i) {
        int x = mins[i];
        for (int y : pts) {
          if (!P.leq(x, y)) continue;
          int val = G.apply(x, y, choice[i]);
          if (family[y] >= 0 && family[y] != val) ok = false;
          family[y] = val;
        }
      }
      if (ok) {
        std::vector<std::string> parts;
        for (std::size_t i = 0; i < mins.size(); ++i)
          parts.push_back(P.label(mins[i]) + "=" + G.stalks[mins[i]][choice[i]]);
        std::sort(parts.begin(), parts.end());
        F.sections[u].push_back(mins.size() == 1 ? G.stalks[mins[0]][choice[0]] : join(parts, ";"));
        families[u].push_back(family);
      }
      std::size_t i = 0;
      for (; i < mins.size(); ++i) {
        if (++choice[i] < static_cast<int>(G.stalks[mins[i]].size())) break;
        choice[i] = 0;
      }
      if (i == mins.size()) done = true;
    }
    if (mins.empty()) {
      F.sections[u] = {"*"};
      families[u] = {std::vector<int>(n, -1)};
    }
  }
  fill_restrictions(F, [&](int u, int v, int s) {
    const auto& fam = families[u][s];
    Mask V = space.upset(v);
    for (std::size_t t = 0; t < families[v].size(); ++t) {
      bool same = true;
      for (int x : members(V))
        if (families[v][t][x] != fam[x]) same = false;
      if (same) return static_cast<int>(t);
    }
    throw DomainError("restricted family missing");
  });
  return F;
}

/// Stalk functor read off the principal upsets of a presheaf.
inline StalkFunctor stalks_of(const Presheaf& F) {
  const auto& S = F.space;
  StalkFunctor G;
  for (int x = 0; x < S.points(); ++x) G.stalks.push_back(F.sections[S.principal(x)]);
  for (int x = 0; x < S.points(); ++x)
    for (int y = 0; y < S.points(); ++y)
      if (S.poset().less(x, y)) G.maps[{x, y}] = F.restriction(S.principal(x), S.principal(y));
  return G;
}

struct SheafReport {
  std::vector<std::string> functoriality;
  bool bottom_singleton = false;
  /// Pairs of upsets whose gluing map is not a bijection.
  std::vector<std::pair<int, int>> gluing_failures;
  std::vector<std::string> messages;

  bool ok() const { return functoriality.empty() && bottom_singleton && gluing_failures.empty(); }
};

inline SheafReport is_sheaf(const Presheaf& F) {
  SheafReport r;
  r.functoriality = F.problems();
  if (!r.functoriality.empty()) {
    r.messages = r.functoriality;
    return r;
  }
  const auto& S = F.space;
  r.bottom_singleton = F.size(S.empty_index()) == 1;
  if (!r.bottom_singleton) r.messages.push_back("sections over the empty set are not a singleton");
  int m = F.upsets();
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      Mask A = S.upset(a), B = S.upset(b);
      if (subset(A, B) || subset(B, A)) continue;
      int j = S.index(A | B), k = S.index(A & B);
      std::map<std::pair<int, int>, int> hits;
      for (int s = 0; s < F.size(j); ++s) ++hits[{F.restrict(j, a, s), F.restrict(j, b, s)}];
      bool bijective = true;
      for (auto& [pair, count] : hits)
        if (count != 1) bijective = false;
      int compatible = 0;
      for (int s = 0; s < F.size(a); ++s)
        for (int t = 0; t < F.size(b); ++t)
          if (F.restrict(a, k, s) == F.restrict(b, k, t)) ++compatible;
      if (compatible != static_cast<int>(hits.size())) bijective = false;
      if (!bijective) {
        r.gluing_failures.emplace_back(a, b);
        r.messages.push_back("gluing fails over " + S.key(A) + " and " + S.key(B));
      }
    }
  return r;
}

/// Per-upset maps between two presheaves on the same space.
using SheafMap = std::vector<std::vector<int>>;

inline bool is_natural(const Presheaf& F, const Presheaf& G, const SheafMap& f) {
  int m = F.upsets();
  for (int u = 0; u < m; ++u)
    for (int v = 0; v < m; ++v) {
      if (!subset(F.space.upset(v), F.space.upset(u))) continue;
      for (int s = 0; s < F.size(u); ++s)
        if (G.restrict(u, v, f[u][s]) != f[v][F.restrict(u, v, s)]) return false;
    }
  return true;
}

inline bool is_bijective(const Presheaf& F, const Presheaf& G, const SheafMap& f) {
  for (int u = 0; u < F.upsets(); ++u) {
    if (F.size(u) != G.size(u)) return false;
    std::vector<char> hit(G.size(u), 0);
    for (int v : f[u]) {
      if (hit[v]) return false;
      hit[v] = 1;
    }
  }
  return true;
}

inline SheafMap compose(const SheafMap& g, const SheafMap& f) {
  SheafMap out(f.size());
  for (std::size_t u = 0; u < f.size(); ++u)
    for (int v : f[u]) out[u].push_back(g[u][v]);
  return out;
}

inline SheafMap identity_map(const Presheaf& F) {
  SheafMap out(F.upsets());
  for (int u = 0; u < F.upsets(); ++u)
    for (int s = 0; s < F.size(u); ++s) out[u].push_back(s);
  return out;
}

/// Isomorphism of sheaves over isomorphic bases: an order isomorphism of
/// the points and, per upset of the first base, a bijection of sections onto
/// the sections over the image upset.
struct SheafIso {
  std::vector<int> points;
  SheafMap sections;
};

inline std::optional<SheafIso> sheaf_isomorphism(const Presheaf& F, const Presheaf& G) {
  const auto& S = F.space;
  const auto& T = G.space;
  int n = S.points();
  if (T.points() != n || F.upsets() != G.upsets()) return std::nullopt;
  std::vector<int> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return popcount(S.up(a)) < popcount(S.up(b)); });
  do {
    bool monotone = true;
    for (int x = 0; x < n && monotone; ++x)
      for (int y = 0; y < n && monotone; ++y)
        if (S.poset().leq(x, y) != T.poset().leq(pi[x], pi[y])) monotone = false;
    if (!monotone) continue;
    std::vector<int> image(F.upsets());
    bool sizes = true;
    for (int u = 0; u < F.upsets() && sizes; ++u) {
      Mask m = 0;
      for (int x : members(S.upset(u))) m |= bit(pi[x]);
      image[u] = T.index(m);
      if (F.size(u) != G.size(image[u])) sizes = false;
    }
    if (!sizes) continue;
    std::vector<std::vector<int>> phi(n);
    std::vector<char> placed(n, 0);
    std::optional<SheafIso> found;
    std::function<void(int)> rec = [&](int k) {
      if (found) return;
      if (k == n) {
        SheafMap f(F.upsets());
        for (int u = 0; u < F.upsets(); ++u) {
          int v = image[u];
          auto pts = members(S.upset(u));
          std::vector<char> used(G.size(v), 0);
          for (int s = 0; s < F.size(u); ++s) {
            int hit = -1;
            for (int t = 0; t < G.size(v) && hit < 0; ++t) {
              bool same = true;
              for (int x : pts)
                if (phi[x][F.restrict(u, S.principal(x), s)] != G.restrict(v, T.principal(pi[x]), t)) same = false;
              if (same) hit = t;
            }
            if (hit < 0 || used[hit]) return;
            used[hit] = 1;
            f[u].push_back(hit);
          }
        }
        for (int u = 0; u < F.upsets(); ++u)
          for (int w = 0; w < F.upsets(); ++w) {
            if (!subset(S.upset(w), S.upset(u))) continue;
            for (int s = 0; s < F.size(u); ++s)
              if (G.restrict(image[u], image[w], f[u][s]) != f[w][F.restrict(u, w, s)]) return;
          }
        found = SheafIso{pi, f};
        return;
      }
      int x = order[k];
      int px = S.principal(x), qx = T.principal(pi[x]);
      int size = F.size(px);
      std::vector<int> perm(size);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        bool ok = true;
        for (int y = 0; y < n && ok; ++y) {
          if (!S.poset().less(x, y) || !placed[y]) continue;
          int py = S.principal(y), qy = T.principal(pi[y]);
          for (int a = 0; a < size && ok; ++a)
            if (G.restrict(qx, qy, perm[a]) != phi[y][F.restrict(px, py, a)]) ok = false;
        }
        if (ok) {
          phi[x] = perm;
          placed[x] = 1;
          rec(k + 1);
          placed[x] = 0;
        }
      } while (!found && std::next_permutation(perm.begin(), perm.end()));
    };
    rec(0);
    if (found) return found;
  } while (std::next_permutation(pi.begin(), pi.end()));
  return std::nullopt;
}

struct Sheafification {
  Presheaf sheaf;
  SheafMap unit;
  int rounds = 0;
};

namespace detail {

/// One plus construction over the finest cover {up(x) : x in U}: matching
/// families of sections on principal upsets.
inline Sheafification plus_construction(const Presheaf& P) {
  const auto& S = P.space;
  int m = P.upsets(), n = S.points();
  Sheafification out{Presheaf{S, std::vector<std::vector<std::string>>(m), {}}, SheafMap(m), 1};
  std::vector<std::map<std::vector<int>, int>> index(m);
  std::vector<std::vector<std::vector<int>>> families(m);
  for (int u = 0; u < m; ++u) {
    auto pts = members(S.upset(u));
    std::vector<int> choice(pts.size(), 0);
    bool done = false;
    for (int x : pts)
      if (P.size(S.principal(x)) == 0) done = true;
    while (!done) {
      bool ok = true;
      for (std::size_t i = 0; i < pts.size() && ok; ++i)
        for (std::size_t j = i + 1; j < pts.size() && ok; ++j) {
          int pi = S.principal(pts[i]), pj = S.principal(pts[j]);
          int k = S.index(S.up(pts[i]) & S.up(pts[j]));
          if (P.restrict(pi, k, choice[i]) != P.restrict(pj, k, choice[j])) ok = false;
        }
      if (ok) {
        std::vector<int> family(n, -1);
        std::vector<std::string> parts;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          family[pts[i]] = choice[i];
          parts.push_back(S.poset().label(pts[i]) + "=" + P.sections[S.principal(pts[i])][choice[i]]);
        }
        std::sort(parts.begin(), parts.end());
        index[u][family] = static_cast<int>(families[u].size());
        families[u].push_back(family);
        out.sheaf.sections[u].push_back(pts.empty() ? "*" : join(parts, ";"));
      }
      std::size_t i = 0;
      for (; i < pts.size(); ++i) {
        if (++choice[i] < P.size(S.principal(pts[i]))) break;
        choice[i] = 0;
      }
      if (i == pts.size()) done = true;
    }
  }
  fill_restrictions(out.sheaf, [&](int u, int v, int s) {
    auto family = families[u][s];
    Mask V = S.upset(v);
    for (int x = 0; x < n; ++x)
      if (!contains(V, x)) family[x] = -1;
    return index[v].at(family);
  });
  for (int u = 0; u < m; ++u) {
    auto pts = members(S.upset(u));
    for (int s = 0; s < P.size(u); ++s) {
      std::vector<int> family(n, -1);
      for (int x : pts) family[x] = P.restrict(u, S.principal(x), s);
      out.unit[u].push_back(index[u].at(family));
    }
  }
  return out;
}

}  // namespace detail

/// Universal map to a sheaf by iterating the plus construction until the
/// result satisfies the sheaf condition. Sections over principal upsets are
/// relabelled by their preimages, other sections by their germs at the
/// minimal points.
inline Sheafification sheafify(const Presheaf& P) {
  P.validate();
  if (is_sheaf(P).ok()) return {P, identity_map(P), 0};
  Sheafification acc{P, identity_map(P), 0};
  while (!is_sheaf(acc.sheaf).ok()) {
    if (acc.rounds >= 4) throw Error("sheafification did not stabilise");
    auto next = detail::plus_construction(acc.sheaf);
    acc.unit = compose(next.unit, acc.unit);
    acc.sheaf = std::move(next.sheaf);
    ++acc.rounds;
  }
  const auto& S = acc.sheaf.space;
  for (int x = 0; x < S.points(); ++x) {
    int px = S.principal(x);
    for (int s = 0; s < P.size(px); ++s) acc.sheaf.sections[px][acc.unit[px][s]] = P.sections[px][s];
  }
  for (int u = 0; u < acc.sheaf.upsets(); ++u) {
    Mask U = S.upset(u);
    if (U == 0) {
      acc.sheaf.sections[u].assign(acc.sheaf.size(u), "*");
      continue;
    }
    std::vector<int> mins;
    for (int x : members(U))
      if ((S.down(x) & U) == bit(x)) mins.push_back(x);
    if (mins.size() == 1) continue;
    for (int s = 0; s < acc.sheaf.size(u); ++s) {
      std::vector<std::string> parts;
      for (int x : mins)
        parts.push_back(S.poset().label(x) + "=" + acc.sheaf.sections[S.principal(x)][acc.sheaf.restrict(u, S.principal(x), s)]);
      std::sort(parts.begin(), parts.end());
      acc.sheaf.sections[u][s] = join(parts, ";");
    }
  }
  return acc;
}

/// Sheaf of a distributive band over the spectrum of its reflection.
struct BandSheaf {
  Presheaf sheaf;
  /// Reflection lattice on the D-classes and its spectrum.
  DistLattice lattice;
  SpectralDual dual;
  /// Upset index of each D-class.
  std::vector<int> class_upset;
  /// Upset and section index of each band element.
  std::vector<std::pair<int, int>> element_section;
};

inline BandSheaf band_to_sheaf(const Band& b) {
  auto report = is_distributive_band(b);
  if (!report.normal) throw DomainError("not a distributive band: not normal");
  if (!report.has_zero) throw DomainError("not a distributive band: no zero element");
  if (!report.commuting_sups) throw DomainError("not a distributive band: a commuting pair lacks a supremum");
  if (!report.bounded_distributive_reflection)
    throw DomainError("not a distributive band: reflection is not a bounded distributive lattice");
  auto D = green_relations(b).D;
  BandSheaf out{{}, *reflection_lattice(b), {}, std::vector<int>(D.count), std::vector<std::pair<int, int>>(b.size())};
  out.dual = spectral_poset(out.lattice);
  SpectralSpace space(out.dual.poset);
  int m = space.upset_count();
  if (m != D.count) throw DomainError("reflection does not match its spectrum");
  std::vector<std::vector<int>> fiber(m);
  std::vector<int> class_of_upset(m);
  for (int c = 0; c < D.count; ++c) {
    out.class_upset[c] = space.index(out.dual.element_upset[c]);
    class_of_upset[out.class_upset[c]] = c;
  }
  Presheaf F{space, std::vector<std::vector<std::string>>(m), {}};
  for (int x = 0; x < b.size(); ++x) {
    int u = out.class_upset[D.class_of[x]];
    out.element_section[x] = {u, static_cast<int>(fiber[u].size())};
    fiber[u].push_back(x);
    F.sections[u].push_back(b.labels[x]);
  }
  fill_restrictions(F, [&](int u, int v, int s) {
    int x = fiber[u][s];
    int r = fiber[v].front();
    int lift = b(b(x, r), x);
    return out.element_section[lift].second;
  });
  out.sheaf = std::move(F);
  return out;
}

/// Band of all local sections with (s,U)(t,V) = (t restricted to U^V, U^V).
struct SheafBand {
  Band band;
  std::vector<std::pair<int, int>> elements;
  /// Index of the first element over each upset.
  std::vector<int> offset;

  int element(int u, int s) const { return offset[u] + s; }
};

inline SheafBand local_section_band(const Presheaf& F) {
  const auto& S = F.space;
  int m = F.upsets();
  SheafBand out;
  for (int u = 0; u < m; ++u) {
    out.offset.push_back(static_cast<int>(out.elements.size()));
    for (int s = 0; s < F.size(u); ++s) {
      out.elements.emplace_back(u, s);
      out.band.labels.push_back(F.sections[u][s] + "@" + S.key(S.upset(u)));
    }
  }
  int n = static_cast<int>(out.elements.size());
  out.band.mul = Table(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto [u, s] = out.elements[i];
      auto [v, t] = out.elements[j];
      int w = S.index(S.upset(u) & S.upset(v));
      out.band.mul.at(i, j) = out.offset[w] + F.restrict(v, w, t);
    }
  return out;
}

inline SheafBand sheaf_to_band(const Presheaf& F) {
  auto report = is_sheaf(F);
  if (!report.ok()) throw DomainError("not a sheaf: " + report.messages.front());
  if (!F.global()) throw DomainError("no global sections");
  return local_section_band(F);
}

struct FlasqueResult {
  bool quasi_flasque = true;
  /// Upsets (u, v) with a non-surjective restriction.
  std::optional<std::pair<int, int>> witness;
};

inline FlasqueResult is_quasi_flasque(const Presheaf& F) {
  FlasqueResult r;
  int m = F.upsets();
  for (int u = 0; u < m; ++u)
    for (int v = 0; v < m; ++v) {
      if (u == v || !subset(F.space.upset(v), F.space.upset(u))) continue;
      std::vector<char> hit(F.size(v), 0);
      for (int t : F.restriction(u, v)) hit[t] = 1;
      if (std::find(hit.begin(), hit.end(), 0) != hit.end()) {
        r.quasi_flasque = false;
        r.witness = std::make_pair(u, v);
        return r;
      }
    }
  return r;
}

/// Right Boolean band reflecting a right distributive band, with the unit.
struct BooleanBandReflection {
  Band band;
  std::vector<int> unit;
  /// Sheaf on the discrete space of points whose local sections form band.
  Presheaf sheaf;
  SheafBand sections;
};

/// Composes the Boolean envelope of the reflection, the comprehensive
/// factorisation of X -> (X/D)_B, and sheafification of the presheaf that
/// the covering part represents.
inline BooleanBandReflection band_boolean_reflection(const Band& b) {
  auto report = is_distributive_band(b);
  if (!report.right_distributive()) throw DomainError("band is not right distributive");
  auto bs = band_to_sheaf(b);
  SpectralSpace space(bs.dual.poset);
  auto env = boolean_envelope(space);
  auto D = green_relations(b).D;
  std::map<Mask, int> env_index;
  for (std::size_t i = 0; i < env.subsets.size(); ++i) env_index[env.subsets[i]] = static_cast<int>(i);
  std::vector<std::vector<bool>> leq(env.lattice.size(), std::vector<bool>(env.lattice.size()));
  for (int a = 0; a < env.lattice.size(); ++a)
    for (int c = 0; c < env.lattice.size(); ++c) leq[a][c] = env.lattice.leq(a, c);
  Poset envelope_order = Poset::from_matrix(env.lattice.labels, leq);
  std::vector<int> to_env(b.size());
  for (int x = 0; x < b.size(); ++x) to_env[x] = env_index.at(space.upset(bs.class_upset[D.class_of[x]]));
  MonotoneMap f(natural_order(b), envelope_order, to_env);
  auto fac = comprehensive_factorisation(f);
  const Poset& M = fac.covering.dom();

  std::vector<std::string> labels(space.points());
  for (int x = 0; x < space.points(); ++x) labels[x] = space.poset().label(x);
  SpectralSpace discrete(Poset::antichain(labels));
  int m = discrete.upset_count();
  Presheaf P{discrete, std::vector<std::vector<std::string>>(m), {}};
  std::vector<std::vector<int>> fiber(m);
  std::vector<std::pair<int, int>> middle_section(M.size());
  for (int k = 0; k < M.size(); ++k) {
    int u = discrete.index(env.subsets[fac.covering(k)]);
    middle_section[k] = {u, static_cast<int>(fiber[u].size())};
    fiber[u].push_back(k);
    P.sections[u].push_back(M.label(k));
  }
  fill_restrictions(P, [&](int u, int v, int s) {
    int k = fiber[u][s];
    for (int j : fiber[v])
      if (M.leq(j, k)) return middle_section[j].second;
    throw DomainError("covering has no lift");
  });
  for (int u = 0; u < m; ++u)
    if (P.sections[u].empty() && discrete.upset(u) == 0) {
      P.sections[u].push_back("*");
      fiber[u].push_back(-1);
    }
  if (P.size(discrete.empty_index()) == 1 && fiber[discrete.empty_index()].front() < 0)
    fill_restrictions(P, [&](int u, int v, int s) {
      if (discrete.upset(v) == 0) return 0;
      int k = fiber[u][s];
      for (int j : fiber[v])
        if (M.leq(j, k)) return middle_section[j].second;
      throw DomainError("covering has no lift");
    });
  auto sh = sheafify(P);
  BooleanBandReflection out;
  out.sheaf = sh.sheaf;
  out.sections = local_section_band(out.sheaf);
  out.band = out.sections.band;
  for (int x = 0; x < b.size(); ++x) {
    auto [u, s] = middle_section[fac.connected(x)];
    out.unit.push_back(out.sections.element(u, sh.unit[u][s]));
  }
  return out;
}

}  // namespace spectral
