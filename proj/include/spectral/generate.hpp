#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "spectral/band.hpp"
#include "spectral/common.hpp"
#include "spectral/order.hpp"
#include "spectral/patch.hpp"
#include "spectral/sheaf.hpp"
#include "spectral/skew.hpp"

namespace spectral {

using Rng = std::mt19937_64;

/// Every band table on {0..n-1}.
inline std::vector<Band> all_bands(int n) {
  if (n > 3) throw DomainError("exhaustive band enumeration limited to order 3");
  std::vector<Band> out;
  int cells = n * n;
  std::vector<int> t(cells, 0);
  for (int x = 0; x < n; ++x) t[x * n + x] = x;
  std::vector<int> free;
  for (int c = 0; c < cells; ++c)
    if (c % (n + 1) != 0) free.push_back(c);
  while (true) {
    Band b{index_labels(n), Table(n, t)};
    if (is_band(b)) out.push_back(b);
    std::size_t i = 0;
    for (; i < free.size(); ++i) {
      if (++t[free[i]] < n) break;
      t[free[i]] = 0;
    }
    if (i == free.size()) break;
  }
  return out;
}

inline std::vector<Band> all_bands_up_to(int n) {
  std::vector<Band> out;
  for (int k = 1; k <= n; ++k) {
    auto b = all_bands(k);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

/// Labelled-order canonical key used to keep one poset per isomorphism class.
inline std::vector<char> poset_canonical(const Poset& p) {
  int n = p.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<char> best;
  do {
    std::vector<char> cur(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cur[i * n + j] = p.leq(perm[i], perm[j]);
    if (best.empty() || cur < best) best = cur;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// One poset per isomorphism class on exactly n points (n <= 6).
inline std::vector<Poset> posets_of_size(int n) {
  if (n > 6) throw DomainError("poset enumeration limited to 6 points");
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::set<std::vector<char>> seen;
  std::vector<Poset> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << pairs.size()); ++m) {
    std::vector<std::pair<int, int>> chosen;
    for (std::size_t k = 0; k < pairs.size(); ++k)
      if ((m >> k) & 1) chosen.push_back(pairs[k]);
    auto p = Poset::from_pairs(index_labels(n), chosen);
    int strict = 0;
    for (auto [a, b] : pairs) strict += p.leq(a, b);
    if (strict != static_cast<int>(chosen.size())) continue;
    if (seen.insert(poset_canonical(p)).second) out.push_back(p);
  }
  return out;
}

inline std::vector<Poset> posets_up_to(int n) {
  std::vector<Poset> out;
  for (int k = 1; k <= n; ++k) {
    auto p = posets_of_size(k);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

inline Poset random_poset(Rng& rng, int n, double density = 0.4) {
  std::bernoulli_distribution edge(density);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (edge(rng)) pairs.emplace_back(i, j);
  return Poset::from_pairs(index_labels(n), pairs);
}

/// All set partitions of the points of `whole` into at most max_parts parts.
inline std::vector<std::vector<Mask>> set_partitions(Mask whole, int max_parts) {
  auto pts = members(whole);
  std::vector<std::vector<Mask>> out;
  std::vector<Mask> parts;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == pts.size()) {
      out.push_back(parts);
      return;
    }
    for (std::size_t k = 0; k < parts.size(); ++k) {
      parts[k] |= bit(pts[i]);
      rec(i + 1);
      parts[k] &= ~bit(pts[i]);
    }
    if (static_cast<int>(parts.size()) < max_parts) {
      parts.push_back(bit(pts[i]));
      rec(i + 1);
      parts.pop_back();
    }
  };
  rec(0);
  return out;
}

/// Compatible families over the points strictly above x in a partially built
/// stalk functor (all points above x already have stalks and maps).
inline std::vector<std::vector<int>> families_above(const SpectralSpace& S, const StalkFunctor& G, int x) {
  Mask above = S.up(x) & ~bit(x);
  std::vector<int> mins;
  for (int y : members(above))
    if ((S.down(y) & above) == bit(y)) mins.push_back(y);
  std::vector<std::vector<int>> out;
  std::vector<int> choice(mins.size(), 0);
  for (int y : mins)
    if (G.stalks[y].empty()) return out;
  while (true) {
    std::vector<int> fam(S.points(), -1);
    bool ok = true;
    for (std::size_t i = 0; i < mins.size() && ok; ++i)
      for (int z : members(S.up(mins[i]))) {
        int v = G.apply(mins[i], z, choice[i]);
        if (fam[z] >= 0 && fam[z] != v) ok = false;
        fam[z] = v;
      }
    if (ok) out.push_back(fam);
    std::size_t i = 0;
    for (; i < mins.size(); ++i) {
      if (++choice[i] < static_cast<int>(G.stalks[mins[i]].size())) break;
      choice[i] = 0;
    }
    if (i == mins.size()) break;
  }
  return out;
}

/// Random functor on the points with stalk sizes in [min_fiber, max_fiber].
/// Points are filled from the top; each element picks a compatible family
/// above it as its image.
inline StalkFunctor random_stalk_functor(Rng& rng, const SpectralSpace& S, int min_fiber, int max_fiber) {
  int n = S.points();
  StalkFunctor G;
  G.stalks.resize(n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return popcount(S.up(a)) < popcount(S.up(b)); });
  std::uniform_int_distribution<int> size(min_fiber, max_fiber);
  for (int x : order) {
    auto fams = families_above(S, G, x);
    int k = fams.empty() ? 0 : size(rng);
    for (int a = 0; a < k; ++a) {
      G.stalks[x].push_back(std::string(1, static_cast<char>('p' + a)) + S.poset().label(x));
      const auto& fam = fams[std::uniform_int_distribution<std::size_t>(0, fams.size() - 1)(rng)];
      for (int y : members(S.up(x)))
        if (y != x) G.maps[{x, y}].push_back(fam[y]);
    }
    for (int y : members(S.up(x)))
      if (y != x) G.maps.try_emplace({x, y});
  }
  return G;
}

inline Presheaf random_sheaf(Rng& rng, const SpectralSpace& S, int max_fiber, bool global = true) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto F = sheaf_from_stalks(S, random_stalk_functor(rng, S, global ? 1 : 0, max_fiber));
    if (!global || F.global()) return F;
  }
  throw Error("could not generate a global sheaf");
}

/// Global sheaves on random posets with at most max_points points and stalk
/// sizes at most max_fiber.
inline std::vector<Presheaf> sheaf_population(std::uint64_t seed, int count, int max_points, int max_fiber) {
  Rng rng(seed);
  std::vector<Presheaf> out;
  std::uniform_int_distribution<int> points(1, max_points);
  while (static_cast<int>(out.size()) < count) {
    SpectralSpace S(random_poset(rng, points(rng)));
    out.push_back(random_sheaf(rng, S, max_fiber));
  }
  return out;
}

/// Stalk family on a random poset whose support is a random upset, stalk
/// sizes in [1, max_stalk] on the support.
inline SaturatedStalkFamily random_family(Rng& rng, int max_points, int max_stalk) {
  int n = std::uniform_int_distribution<int>(1, max_points)(rng);
  SpectralSpace S(random_poset(rng, n));
  Mask support = S.upset(std::uniform_int_distribution<int>(0, S.upset_count() - 1)(rng));
  SaturatedStalkFamily G{S.poset(), std::vector<std::vector<std::string>>(n)};
  std::uniform_int_distribution<int> size(1, max_stalk);
  for (int x : members(support)) {
    int k = size(rng);
    for (int a = 0; a < k; ++a) G.stalks[x].push_back(std::string(1, static_cast<char>('a' + a)) + S.poset().label(x));
  }
  return G;
}

/// Sheaves of sections of stalk families with full support: the Sierpinski
/// products F({0,1}) = Q x F({1}) for |Q| <= 3, |F({1})| <= 2, then seeded
/// random families with at most max_sections sections in total.
inline std::vector<Presheaf> product_sheaves(std::uint64_t seed, int count, int max_points, int max_stalk, int max_sections = 28) {
  std::vector<Presheaf> out;
  Poset sierpinski = Poset::from_pairs({"0", "1"}, {{0, 1}});
  auto stalk = [](int k, const std::string& at) {
    std::vector<std::string> st;
    for (int a = 0; a < k; ++a) st.push_back(std::string(1, static_cast<char>('a' + a)) + at);
    return st;
  };
  for (int top = 1; top <= 2; ++top)
    for (int q = 1; q <= 3; ++q) out.push_back(comparison_k({sierpinski, {stalk(q, "0"), stalk(top, "1")}}).sheaf);
  Rng rng(seed);
  std::size_t target = out.size() + static_cast<std::size_t>(count);
  while (out.size() < target) {
    auto G = random_family(rng, max_points, max_stalk);
    if (G.support() != SpectralSpace(G.base).all()) continue;
    auto F = comparison_k(G).sheaf;
    if (F.total() <= max_sections) out.push_back(F);
  }
  return out;
}

/// A presheaf obtained from a sheaf by duplicating or deleting a section
/// (deleting also removes everything restricting onto it).
inline Presheaf perturb_presheaf(Rng& rng, const Presheaf& F) {
  const auto& S = F.space;
  int m = F.upsets();
  std::vector<std::vector<int>> keep(m);
  std::vector<std::vector<int>> origin(m);
  int u = std::uniform_int_distribution<int>(0, m - 1)(rng);
  bool duplicate = std::bernoulli_distribution(0.5)(rng) || F.size(u) == 0;
  Presheaf P{S, std::vector<std::vector<std::string>>(m), {}};
  if (duplicate) {
    for (int w = 0; w < m; ++w)
      for (int s = 0; s < F.size(w); ++s) {
        origin[w].push_back(s);
        P.sections[w].push_back(F.sections[w][s]);
      }
    if (F.size(u) > 0) {
      int s = std::uniform_int_distribution<int>(0, F.size(u) - 1)(rng);
      origin[u].push_back(s);
      P.sections[u].push_back(F.sections[u][s] + "'");
    }
  } else {
    int s = std::uniform_int_distribution<int>(0, F.size(u) - 1)(rng);
    for (int w = 0; w < m; ++w)
      for (int t = 0; t < F.size(w); ++t) {
        bool drop = subset(S.upset(u), S.upset(w)) && F.restrict(w, u, t) == s;
        if (drop) continue;
        origin[w].push_back(t);
        P.sections[w].push_back(F.sections[w][t]);
      }
  }
  std::vector<std::map<int, int>> first(m);
  for (int w = 0; w < m; ++w)
    for (std::size_t i = 0; i < origin[w].size(); ++i) first[w].emplace(origin[w][i], static_cast<int>(i));
  fill_restrictions(P, [&](int w, int v, int i) {
    if (w == v) return i;
    return first[v].at(F.restrict(w, v, origin[w][i]));
  });
  return P;
}

/// Regular bands of order at most max_size built from products, opposites,
/// free right regular bands and section bands, chosen with a seeded RNG.
inline std::vector<Band> constructed_regular_bands(std::uint64_t seed, int count, int max_size = 8) {
  Rng rng(seed);
  std::vector<Band> small;
  for (const auto& b : all_bands_up_to(3))
    if (classify(b).regular) small.push_back(b);
  std::vector<Band> atoms = small;
  atoms.push_back(free_right_regular_band(2));
  atoms.push_back(opposite_band(free_right_regular_band(2)));
  std::vector<Band> out;
  while (static_cast<int>(out.size()) < count) {
    int kind = std::uniform_int_distribution<int>(0, 3)(rng);
    Band b;
    if (kind == 0 || kind == 1) {
      const auto& a = atoms[std::uniform_int_distribution<std::size_t>(0, atoms.size() - 1)(rng)];
      const auto& c = atoms[std::uniform_int_distribution<std::size_t>(0, atoms.size() - 1)(rng)];
      if (a.size() * c.size() > max_size) continue;
      b = product_band(a, c);
    } else if (kind == 2) {
      SpectralSpace S(random_poset(rng, std::uniform_int_distribution<int>(1, 2)(rng)));
      auto F = random_sheaf(rng, S, 2);
      if (F.total() > max_size) continue;
      b = local_section_band(F).band;
      if (std::bernoulli_distribution(0.5)(rng)) b = opposite_band(b);
    } else {
      b = atoms[std::uniform_int_distribution<std::size_t>(0, atoms.size() - 1)(rng)];
      if (b.size() < 4) continue;
    }
    if (b.size() <= max_size) out.push_back(b);
  }
  return out;
}

/// Every skew lattice of order at most n: each band table for the meet
/// paired with every join table passing the search.
inline std::vector<SkewLattice> all_skew_lattices_up_to(int n) {
  std::vector<SkewLattice> out;
  for (const auto& b : all_bands_up_to(n))
    for (const auto& j : search_skew_joins(b, JoinRequirement::SkewLattice).joins) out.push_back({b.labels, b.mul, j});
  return out;
}

/// Section bands of sheaves on antichains, one per multiset of stalk sizes.
inline std::vector<Band> right_boolean_bands(int max_points, int max_fiber) {
  std::vector<Band> out;
  for (int n = 1; n <= max_points; ++n) {
    SpectralSpace S(Poset::antichain(n));
    std::vector<int> sizes(n, 1);
    std::function<void(int, int)> rec = [&](int i, int lo) {
      if (i == n) {
        StalkFunctor G;
        for (int x = 0; x < n; ++x) {
          std::vector<std::string> st;
          for (int a = 0; a < sizes[x]; ++a) st.push_back(std::string(1, static_cast<char>('p' + a)) + std::to_string(x));
          G.stalks.push_back(st);
        }
        out.push_back(local_section_band(sheaf_from_stalks(S, G)).band);
        return;
      }
      for (int k = lo; k <= max_fiber; ++k) {
        sizes[i] = k;
        rec(i + 1, k);
      }
    };
    rec(0, 1);
  }
  return out;
}

}  // namespace spectral
