#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spectral/spectral.hpp"

using namespace spectral;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr double kBandLedgerSeconds = 30.0;
constexpr double kRoundTripSeconds = 120.0;
constexpr int kRoundTripInstances = 500;
constexpr int kRoundTripPoints = 4;
constexpr int kRoundTripFiber = 3;
constexpr int kConstructedRegular = 120;
constexpr int kMinConstructedRegular = 100;
constexpr long long kFormalPatches = 10000;
constexpr long long kNestedPatches = 2000;
constexpr int kAlgebraSheaves = 200;
constexpr int kMinAlgebraSheaves = 50;
constexpr int kCuratedSheaves = 100;
constexpr int kChainPoints = 5;
constexpr int kChainParts = 4;
constexpr int kTargetOrder = 3;

struct Outcome {
  bool pass = true;
  long long violations = 0;
  std::string witness;
  std::string detail;

  void fail(const std::string& w) {
    pass = false;
    if (violations++ == 0) witness = w;
  }
  void require(bool ok, const std::string& w) {
    if (!ok) fail(w);
  }
};

std::string text(const Band& b) { return io::to_json(b)["mul"].dump(); }
std::string text(const SkewLattice& s) { return io::to_json(s)["meet"].dump() + "/" + io::to_json(s)["join"].dump(); }

std::string campaign_text(const Campaign& c) {
  std::ostringstream out;
  out << c.instances << " instances, " << c.failures << " failures";
  for (const auto& [k, v] : c.counters) out << ", " << k << "=" << v;
  if (!c.complete) out << ", incomplete";
  return out.str();
}

void absorb(Outcome& o, const Campaign& c) {
  if (!c.passed()) o.fail(c.witnesses.empty() ? c.name + " campaign incomplete or empty" : c.witnesses.front());
}

bool regular(const Band& b) {
  int n = b.size();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (b(b(b(b(z, x), z), y), z) != b(b(b(z, x), y), z)) return false;
  return true;
}

bool normal(const Band& b) {
  int n = b.size();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        if (b(b(b(z, x), y), z) != b(b(b(z, y), x), z)) return false;
  return true;
}

bool right_regular(const Band& b) {
  for (int x = 0; x < b.size(); ++x)
    for (int y = 0; y < b.size(); ++y)
      if (b(b(x, y), x) != b(y, x)) return false;
  return true;
}

bool commutative(const Band& b) {
  for (int x = 0; x < b.size(); ++x)
    for (int y = 0; y < b.size(); ++y)
      if (b(x, y) != b(y, x)) return false;
  return true;
}

/// Band with a fresh identity element appended.
Band with_identity(const Band& b) {
  int n = b.size();
  Band out{b.labels, Table(n + 1)};
  out.labels.push_back("1");
  for (int x = 0; x <= n; ++x)
    for (int y = 0; y <= n; ++y) out.mul.at(x, y) = x == n ? y : y == n ? x : b(x, y);
  return out;
}

/// Homomorphisms g with g(unit(x)) = h(x) for every x.
long long count_factorisations(const std::vector<const Table*>& dom, const std::vector<const Table*>& cod, const std::vector<int>& unit,
                               const std::vector<int>& h, const std::function<bool(const std::vector<int>&)>& accept) {
  std::vector<int> partial(dom.front()->size(), -1);
  for (std::size_t x = 0; x < unit.size(); ++x) {
    if (partial[unit[x]] >= 0 && partial[unit[x]] != h[x]) return 0;
    partial[unit[x]] = h[x];
  }
  long long count = 0;
  for_each_hom(dom, cod, partial, [&](const std::vector<int>& g) {
    if (accept(g)) ++count;
    return count < 2;
  });
  return count;
}

/// All band tables on n labelled elements, by backtracking with
/// associativity checked on every filled triple.
std::vector<Band> bands_of_order(int n) {
  Table t(n, -1);
  for (int i = 0; i < n; ++i) t.at(i, i) = i;
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) cells.push_back({i, j});
  auto consistent = [&] {
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        int a = t.at(x, y);
        if (a < 0) continue;
        for (int z = 0; z < n; ++z) {
          int b = t.at(y, z);
          if (b < 0) continue;
          int l = t.at(a, z), r = t.at(x, b);
          if (l >= 0 && r >= 0 && l != r) return false;
        }
      }
    return true;
  };
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  std::vector<Band> out;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == cells.size()) {
      out.push_back({labels, t});
      return;
    }
    auto [i, j] = cells[k];
    for (int v = 0; v < n; ++v) {
      t.at(i, j) = v;
      if (consistent()) rec(k + 1);
    }
    t.at(i, j) = -1;
  };
  rec(0);
  return out;
}

Outcome band_axioms() {
  Outcome o;
  auto bands = all_bands_up_to(3);
  std::vector<Band> semilattices;
  for (const auto& b : bands)
    if (commutative(b)) semilattices.push_back(b);
  long long universal = 0;
  for (const auto& b : bands) {
    int n = b.size();
    std::string tag = "band " + text(b) + ": ";
    auto le = [&](int x, int y) { return b(y, x) == x && b(x, y) == x; };
    auto pre = [&](int x, int y) { return b(b(x, y), x) == x; };
    auto D = [&](int x, int y) { return pre(x, y) && pre(y, x); };
    auto N = natural_order(b);
    auto green = green_relations(b);
    auto q = semilattice_reflection(b);
    for (int x = 0; x < n; ++x) {
      o.require(le(x, x) && pre(x, x), tag + "reflexivity");
      bool zero = true, bottom = true;
      for (int y = 0; y < n; ++y) {
        if (b(x, y) != x || b(y, x) != x) zero = false;
        if (!le(x, y)) bottom = false;
      }
      o.require(zero == bottom, tag + "zero and bottom differ at " + b.labels[x]);
      for (int y = 0; y < n; ++y) {
        o.require((b(b(y, x), y) == x) == le(x, y), tag + "the two forms of the natural order differ");
        o.require(N.leq(x, y) == le(x, y), tag + "natural order table differs");
        o.require(!(le(x, y) && le(y, x)) || x == y, tag + "natural order not antisymmetric");
        bool factor = false;
        for (int s = 0; s < n && !factor; ++s)
          for (int t = 0; t < n && !factor; ++t)
            if (b(b(s, y), t) == x) factor = true;
        o.require(factor == pre(x, y), tag + "preorder differs from the factor form");
        o.require(!le(x, y) || pre(x, y), tag + "natural order not inside the preorder");
        o.require(!(le(x, y) && pre(y, x)) || x == y, tag + "order and reverse preorder do not force equality");
        o.require(!(D(x, y) && le(x, y)) || x == y, tag + "a class is not order-discrete");
        o.require(green.D.same(x, y) == D(x, y), tag + "class relation differs");
        o.require(q.map[x] == q.map[y] ? D(x, y) : !D(x, y), tag + "reflection kernel differs from the class relation");
        int qx = q.map[x], qy = q.map[y];
        bool qpre = q.band(q.band(qx, qy), qx) == qx;
        bool qle = q.band(qx, qy) == qx && q.band(qy, qx) == qx;
        o.require(pre(x, y) == qpre && qpre == qle, tag + "preorder not reflected by the quotient order");
        for (int z = 0; z < n; ++z) {
          o.require(!(le(x, y) && le(y, z)) || le(x, z), tag + "natural order not transitive");
          o.require(!(pre(x, y) && pre(y, z)) || pre(x, z), tag + "preorder not transitive");
          if (pre(x, y))
            o.require(pre(b(x, z), b(y, z)) && pre(b(z, x), b(z, y)), tag + "preorder not compatible with products");
        }
      }
    }
    for (int x = 0; x < n; ++x)
      for (int x2 = 0; x2 < n; ++x2) {
        if (!D(x, x2)) continue;
        for (int y = 0; y < n; ++y)
          for (int y2 = 0; y2 < n; ++y2)
            if (D(y, y2)) o.require(D(b(x, y), b(x2, y2)), tag + "class relation not a congruence");
      }
    o.require(commutative(q.band), tag + "reflection not commutative");
    o.require(is_band_hom(b, q.band, q.map), tag + "reflection map not a homomorphism");
    for (const auto& L : semilattices)
      for (const auto& h : band_homs(b, L)) {
        ++universal;
        long long k = count_factorisations({&q.band.mul}, {&L.mul}, q.map, h, [](const std::vector<int>&) { return true; });
        o.require(k == 1, tag + "semilattice map does not factor uniquely");
      }
    bool discrete = true;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (x != y && le(x, y)) discrete = false;
    bool rectangular = green.D.count <= 1;
    o.require(rectangular == discrete, tag + "rectangular iff order-discrete fails");
    o.require(classify(b).rectangular == rectangular, tag + "rectangular flag differs");
  }
  long long homs = 0;
  for (const auto& a : bands)
    for (const auto& c : bands)
      for (const auto& h : band_homs(a, c)) {
        ++homs;
        for (int x = 0; x < a.size(); ++x)
          for (int y = 0; y < a.size(); ++y)
            if (natural_leq(a, x, y)) o.require(natural_leq(c, h[x], h[y]), "homomorphism does not preserve the natural order");
      }
  o.detail = std::to_string(bands.size()) + " bands, " + std::to_string(universal) + " semilattice maps factored, " +
             std::to_string(homs) + " homomorphisms checked";
  return o;
}

struct RegularPopulation {
  std::vector<Band> regular, irregular;
  int constructed = 0;
};

const RegularPopulation& regular_population() {
  static const RegularPopulation pop = [] {
    RegularPopulation p;
    for (const auto& b : all_bands_up_to(3)) (regular(b) ? p.regular : p.irregular).push_back(b);
    for (const auto& b : bands_of_order(5))
      if (!regular(b)) p.irregular.push_back(b);
    auto built = constructed_regular_bands(kSeed, kConstructedRegular, 8);
    p.constructed = static_cast<int>(built.size());
    p.regular.insert(p.regular.end(), built.begin(), built.end());
    return p;
  }();
  return pop;
}

Outcome kimura() {
  Outcome o;
  const auto& pop = regular_population();
  o.require(pop.constructed >= kMinConstructedRegular, "too few constructed bands");
  auto oracle = [](const Band& b, bool& bijection, bool& congruences) {
    int n = b.size();
    auto L = [&](int x, int y) { return b(x, y) == x && b(y, x) == y; };
    auto R = [&](int x, int y) { return b(x, y) == y && b(y, x) == x; };
    auto D = [&](int x, int y) { return b(b(x, y), x) == x && b(b(y, x), y) == y; };
    std::vector<int> rr(n), rl(n);
    for (int x = 0; x < n; ++x) {
      rr[x] = rl[x] = -1;
      for (int y = 0; y < n; ++y) {
        if (rr[x] < 0 && R(x, y)) rr[x] = y;
        if (rl[x] < 0 && L(x, y)) rl[x] = y;
      }
    }
    std::set<std::pair<int, int>> image, pullback;
    for (int x = 0; x < n; ++x) image.insert({rr[x], rl[x]});
    std::set<int> rreps(rr.begin(), rr.end()), lreps(rl.begin(), rl.end());
    for (int r : rreps)
      for (int l : lreps)
        if (D(r, l)) pullback.insert({r, l});
    bijection = static_cast<int>(image.size()) == n && image == pullback;
    congruences = true;
    for (int x = 0; x < n; ++x)
      for (int x2 = 0; x2 < n; ++x2)
        for (int y = 0; y < n; ++y)
          for (int y2 = 0; y2 < n; ++y2) {
            if (R(x, x2) && R(y, y2) && !R(b(x, y), b(x2, y2))) congruences = false;
            if (L(x, x2) && L(y, y2) && !L(b(x, y), b(x2, y2))) congruences = false;
          }
  };
  for (const auto& b : pop.regular) {
    std::string tag = "band " + text(b) + ": ";
    o.require(regular(b), tag + "constructed band is not regular");
    bool bijection = false, congruences = false;
    oracle(b, bijection, congruences);
    auto k = kimura_decomposition(b);
    o.require(bijection && congruences, tag + "fibre product oracle fails");
    o.require(k.set_bijection && k.semigroup_iso, tag + "decomposition is not a semigroup isomorphism");
  }
  for (const auto& b : pop.irregular) {
    std::string tag = "band " + text(b) + ": ";
    bool bijection = false, congruences = false;
    oracle(b, bijection, congruences);
    auto k = kimura_decomposition(b);
    o.require(bijection && k.set_bijection, tag + "not a bijection of sets");
    o.require(!congruences && !k.semigroup_iso, tag + "irregular band reported as a semigroup fibre product");
  }
  o.detail = std::to_string(pop.regular.size() - pop.constructed) + " regular of order <= 3, " + std::to_string(pop.constructed) +
             " constructed, " + std::to_string(pop.irregular.size()) + " irregular of order 5";
  return o;
}

Outcome normal_iff_covering() {
  Outcome o;
  const auto& pop = regular_population();
  int normals = 0;
  for (const auto& b : pop.regular) {
    auto q = semilattice_reflection(b);
    bool covering = is_covering(MonotoneMap(natural_order(b), natural_order(q.band), q.map));
    bool n = normal(b);
    normals += n;
    o.require(n == covering, "band " + text(b) + ": normal " + std::to_string(n) + " but covering " + std::to_string(covering));
    o.require(classify(b).normal == n, "band " + text(b) + ": normal flag differs");
  }
  o.detail = std::to_string(pop.regular.size()) + " regular bands, " + std::to_string(normals) + " normal";
  return o;
}

Outcome free_band() {
  Outcome o;
  const int expected[] = {1, 2, 5, 16};
  std::vector<Band> targets;
  for (const auto& b : all_bands_up_to(3))
    if (right_regular(b)) targets.push_back(b);
  long long maps = 0;
  for (int k = 0; k <= 3; ++k) {
    auto F = free_right_regular_band(k);
    o.require(F.size() == expected[k], "free band on " + std::to_string(k) + " letters has " + std::to_string(F.size()) + " elements");
    o.require(right_regular(F), "free band is not right regular");
    auto words = repetition_free_words(k);
    int empty = word_index(words, {});
    std::vector<int> letters;
    for (int a = 0; a < k; ++a) letters.push_back(word_index(words, {a}));
    std::vector<int> keep;
    for (int x = 0; x < F.size(); ++x)
      if (x != empty) keep.push_back(x);
    int m = static_cast<int>(keep.size());
    Band plus{{}, Table(m)};
    std::vector<int> position(F.size(), -1);
    for (int i = 0; i < m; ++i) {
      position[keep[i]] = i;
      plus.labels.push_back(F.labels[keep[i]]);
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) plus.mul.at(i, j) = position[F(keep[i], keep[j])];
    for (const auto& B : targets) {
      auto B1 = with_identity(B);
      int choices = 1;
      for (int a = 0; a < k; ++a) choices *= B.size();
      for (int f = 0; f < choices; ++f) {
        std::vector<int> value(k);
        for (int a = 0, r = f; a < k; ++a, r /= B.size()) value[a] = r % B.size();
        ++maps;
        std::vector<int> partial(m, -1);
        for (int a = 0; a < k; ++a) partial[position[letters[a]]] = value[a];
        long long plain = 0;
        if (m > 0) {
          for_each_hom({&plus.mul}, {&B.mul}, partial, [&](const std::vector<int>&) { return ++plain < 2; });
        } else {
          plain = 1;
        }
        o.require(plain == 1, "letters map to " + text(B) + " extends " + std::to_string(plain) + " times");
        std::vector<int> unital(F.size(), -1);
        unital[empty] = B.size();
        for (int a = 0; a < k; ++a) unital[letters[a]] = value[a];
        long long with_unit = 0;
        for_each_hom({&F.mul}, {&B1.mul}, unital, [&](const std::vector<int>&) { return ++with_unit < 2; });
        o.require(with_unit == 1, "letters map to " + text(B) + " with identity extends " + std::to_string(with_unit) + " times");
      }
    }
  }
  auto S = nonsymmetric_example(2);
  auto report = check_skew(S);
  auto sym = is_symmetric(S);
  o.require(report.valid(), "word skew lattice on {a,b}: " + (report.violations.empty() ? std::string() : report.violations.front()));
  o.require(report.valid() && report.right_handed && report.normal, "word skew lattice on {a,b} is not right-handed and normal");
  o.require(!sym.symmetric && sym.witness.has_value(), "word skew lattice on {a,b} has no symmetry witness");
  std::string witness = sym.witness ? S.labels[sym.witness->first] + "," + S.labels[sym.witness->second] : "none";
  o.detail = "sizes 1,2,5,16 checked, " + std::to_string(maps) + " letter maps into " + std::to_string(targets.size()) +
             " right regular bands, word skew lattice: " + std::to_string(report.violations.size()) +
             " absorption violations, symmetry witness " + witness;
  return o;
}

Outcome skew_equations() {
  Outcome o;
  auto all = all_skew_lattices_up_to(3);
  std::size_t small = all.size();
  for (int n : {4, 5})
    for (const auto& b : bands_of_order(n))
      if (normal(b))
        for (const auto& j : search_skew_joins(b, JoinRequirement::SkewLattice).joins) all.push_back({b.labels, b.mul, j});
  int normals = 0, asymmetric = 0, nondistributive = 0, handed = 0;
  for (const auto& s : all) {
    int n = s.size();
    auto M = [&](int x, int y) { return s.meet(x, y); };
    auto J = [&](int x, int y) { return s.join(x, y); };
    if (!normal(s.meet_band())) continue;
    ++normals;
    std::string tag = "skew " + text(s) + ": ";
    auto D = [&](int x, int y) { return M(M(x, y), x) == x && M(M(y, x), y) == y; };
    std::vector<int> rep(n);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (D(x, y)) {
          rep[x] = y;
          break;
        }
    bool dist = true;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        for (int z = 0; z < n; ++z)
          if (rep[M(x, J(y, z))] != rep[J(M(x, y), M(x, z))]) dist = false;
    bool rh = right_regular(s.meet_band());
    bool lh = right_regular(opposite_band(s.meet_band()));
    bool sym = true;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if ((M(x, y) == M(y, x)) != (J(x, y) == J(y, x))) sym = false;
    bool sandwich = true, right_law = true, left_law = true, identities = true;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (J(M(x, y), x) != M(x, J(y, x)) || M(J(x, y), x) != J(x, M(y, x))) identities = false;
        for (int z = 0; z < n; ++z) {
          if (M(M(z, J(x, y)), z) != J(M(M(z, x), z), M(M(z, y), z))) sandwich = false;
          if (M(J(x, y), z) != J(M(x, z), M(y, z))) right_law = false;
          if (M(z, J(x, y)) != J(M(z, x), M(z, y))) left_law = false;
        }
      }
    asymmetric += !sym;
    nondistributive += !dist;
    handed += rh || lh;
    o.require(dist == sandwich, tag + "reflection distributivity differs from the sandwich law");
    o.require(!rh || dist == right_law, tag + "right-handed law differs from reflection distributivity");
    o.require(!lh || dist == left_law, tag + "left-handed law differs from reflection distributivity");
    o.require(sym == identities, tag + "symmetry differs from the two identities");
    o.require((sym && dist) == (left_law && right_law), tag + "symmetric distributive differs from the two laws");
    auto d = is_distributive_skew(s);
    o.require(sandwich_law_holds(s) == sandwich && symmetric_identities_hold(s) == identities && is_symmetric(s).symmetric == sym,
              tag + "library checkers disagree with direct evaluation");
    o.require(d.distributive_reflection == dist && d.symmetric == sym && d.left_law == left_law && d.right_law == right_law,
              tag + "distributivity report disagrees with direct evaluation");
  }
  o.detail = std::to_string(small) + " skew lattices of order <= 3 and " + std::to_string(all.size() - small) +
             " normal of order 4 or 5, " + std::to_string(normals) + " normal, " + std::to_string(handed) +
             " handed, " + std::to_string(asymmetric) + " not symmetric, " + std::to_string(nondistributive) +
             " without distributive reflection";
  return o;
}

CampaignOptions options(int count, int max_points, int max_fiber) {
  CampaignOptions opt;
  opt.seed = kSeed;
  opt.count = count;
  opt.max_points = max_points;
  opt.max_fiber = max_fiber;
  return opt;
}

Outcome boolean_join() {
  Outcome o;
  auto c = campaign_boolean_join(options(1, 3, 3));
  absorb(o, c);
  o.detail = campaign_text(c);
  return o;
}

Outcome main0_round_trips() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  auto c = campaign_main0(options(kRoundTripInstances, kRoundTripPoints, kRoundTripFiber));
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  absorb(o, c);
  o.require(c.instances >= kRoundTripInstances, "too few instances");
  o.require(seconds < kRoundTripSeconds, "round trips took " + std::to_string(seconds) + " s");
  o.detail = campaign_text(c);
  return o;
}

int random_upset_above(Rng& rng, const Presheaf& F, Mask V) {
  std::vector<int> options;
  for (int u = 0; u < F.upsets(); ++u)
    if (subset(V, F.space.upset(u)) && F.size(u) > 0) options.push_back(u);
  return options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
}

std::vector<Mask> random_parts(Rng& rng, Mask whole, int max_parts) {
  std::vector<Mask> parts(max_parts, 0);
  for (int x : members(whole)) parts[std::uniform_int_distribution<int>(0, max_parts - 1)(rng)] |= bit(x);
  parts.erase(std::remove(parts.begin(), parts.end(), Mask{0}), parts.end());
  return parts;
}

FormalPatch random_patch(Rng& rng, const Presheaf& F, Mask whole) {
  FormalPatch p;
  for (Mask V : random_parts(rng, whole, 3)) {
    int u = random_upset_above(rng, F, V);
    p.parts.push_back({std::uniform_int_distribution<int>(0, F.size(u) - 1)(rng), u, V});
  }
  return p;
}

/// Same patch cut into single points, each carrying a restriction of its
/// section to a random upset between up(x) and the original domain.
FormalPatch pointwise_refinement(Rng& rng, const Presheaf& F, const FormalPatch& p) {
  const auto& S = F.space;
  FormalPatch out;
  for (const auto& part : p.parts)
    for (int x : members(part.part)) {
      std::vector<int> between;
      for (int w = 0; w < F.upsets(); ++w)
        if (subset(S.up(x), S.upset(w)) && subset(S.upset(w), S.upset(part.upset))) between.push_back(w);
      int w = between[std::uniform_int_distribution<std::size_t>(0, between.size() - 1)(rng)];
      out.parts.push_back({F.restrict(part.upset, w, part.section), w, bit(x)});
    }
  return out;
}

Outcome patch_monad() {
  Outcome o;
  auto c = campaign_monad(options(kRoundTripInstances, kRoundTripPoints, kRoundTripFiber));
  absorb(o, c);
  auto population = sheaf_population(kSeed, kRoundTripInstances, kRoundTripPoints, kRoundTripFiber);
  Rng rng(kSeed);
  long long sampled = 0, equal = 0, different = 0;
  while (sampled < kFormalPatches) {
    const auto& F = population[std::uniform_int_distribution<std::size_t>(0, population.size() - 1)(rng)];
    const auto& S = F.space;
    int w = std::uniform_int_distribution<int>(0, F.upsets() - 1)(rng);
    Mask whole = S.upset(w);
    auto a = random_patch(rng, F, whole);
    auto fine = pointwise_refinement(rng, F, a);
    auto b = random_patch(rng, F, whole);
    ++sampled;
    auto ga = normalize(F, a);
    o.require(formally_equivalent(F, a, fine) && normalize(F, fine) == ga, "a patch is not equivalent to its pointwise refinement");
    bool same = normalize(F, b) == ga;
    (same ? equal : different)++;
    o.require(formally_equivalent(F, a, b) == same, "refinement equivalence and germ tuples disagree");
  }
  auto c1_count = 0LL;
  for (long long i = 0; i < kNestedPatches; ++i) {
    const auto& F = population[std::uniform_int_distribution<std::size_t>(0, population.size() - 1)(rng)];
    const auto& S = F.space;
    int w = std::uniform_int_distribution<int>(0, F.upsets() - 1)(rng);
    Mask whole = S.upset(w);
    NestedPatch nested;
    for (Mask V : random_parts(rng, whole, 3)) {
      int u = random_upset_above(rng, F, V);
      nested.parts.push_back({random_patch(rng, F, S.upset(u)), u, V});
    }
    auto c1 = patch_codec(F);
    auto c2 = lift_codec(c1);
    long long flat = c1.encode(w, normalize(F, flatten(nested)));
    o.require(patch_mult(c1, c2, w, nested_code(F, nested, whole)) == flat, "multiplication differs from flattening a nested patch");
    ++c1_count;
  }
  o.require(sampled >= kFormalPatches, "too few formal patches");
  o.detail = campaign_text(c) + "; " + std::to_string(sampled) + " formal patches (" + std::to_string(equal) + " equal, " +
             std::to_string(different) + " different pairs), " + std::to_string(c1_count) + " nested patches";
  return o;
}

const std::vector<Presheaf>& curated_sheaves() {
  static const std::vector<Presheaf> sheaves = product_sheaves(kSeed, kCuratedSheaves, 3, 3);
  return sheaves;
}

Outcome main1_bijection() {
  Outcome o;
  auto c = campaign_main1(options(kAlgebraSheaves, 3, 2));
  absorb(o, c);
  o.require(c.instances >= kMinAlgebraSheaves, "too few sheaves");
  auto opt = options(0, 3, 3);
  auto curated = run_sharded<Presheaf>("main1", opt, curated_sheaves(), [&](const Presheaf& F, std::size_t i, Campaign& k) {
    check_algebra_join_bijection(F, "product sheaf " + std::to_string(i) + ": ", k, {});
  });
  absorb(o, curated);
  o.detail = "random: " + campaign_text(c) + "; products: " + campaign_text(curated);
  return o;
}

std::vector<TAlgebra> algebra_population() {
  std::vector<TAlgebra> out;
  for (const auto& F : sheaf_population(kSeed, kAlgebraSheaves, 3, 2))
    for (auto& A : enumerate_talgebras(F).algebras) out.push_back(std::move(A));
  for (const auto& F : curated_sheaves())
    for (auto& A : enumerate_talgebras(F).algebras) out.push_back(std::move(A));
  return out;
}

Outcome main2_constructive() {
  Outcome o;
  auto c = campaign_main2(options(kAlgebraSheaves, 3, 2));
  absorb(o, c);
  long long curated = 0;
  for (const auto& F : curated_sheaves())
    for (const auto& A : enumerate_talgebras(F).algebras) {
      ++curated;
      o.require(check_kl_iso(A, functor_l(A)).ok(), "product sheaf algebra is not klF");
    }
  Poset sierpinski = Poset::from_pairs({"0", "1"}, {{0, 1}});
  SaturatedStalkFamily bad{sierpinski, {{"g"}, {}}};
  SaturatedStalkFamily good{sierpinski, {{"g"}, {"h"}}};
  bool bad_fails = !bad.saturated() && !check_lk_iso(bad).ok();
  o.require(bad_fails, "non-saturated Sierpinski family passes lkG = G");
  o.require(check_lk_iso(good).ok(), "saturated Sierpinski family fails lkG = G");
  o.detail = campaign_text(c) + ", " + std::to_string(curated) + " product sheaf algebras, non-saturated family " +
             (bad_fails ? "rejected" : "accepted");
  return o;
}

Outcome skew_sheaf_properties() {
  Outcome o;
  auto algebras = algebra_population();
  long long pairs = 0;
  for (std::size_t i = 0; i < algebras.size(); ++i) {
    const auto& A = algebras[i];
    const auto& F = A.sheaf;
    std::string tag = "algebra " + std::to_string(i) + ": ";
    o.require(is_quasi_flasque(F).quasi_flasque, tag + "not quasi-flasque");
    auto square = join_restriction_failures(A);
    o.require(square.empty(), tag + "join does not commute with restriction");
    for (int u = 0; u < F.upsets(); ++u)
      for (int v = 0; v < F.upsets(); ++v)
        if (subset(F.space.upset(v), F.space.upset(u))) {
          ++pairs;
          o.require(relative_sections(A, u, v).splits, tag + "no product splitting over " + F.space.key(F.space.upset(v)));
        }
  }
  o.detail = std::to_string(algebras.size()) + " algebras, " + std::to_string(pairs) + " nested pairs split";
  return o;
}

Outcome chain_refinement() {
  Outcome o;
  long long partitions = 0, pairs = 0, posets = 0;
  for (const auto& P : posets_up_to(kChainPoints)) {
    ++posets;
    SpectralSpace S(P);
    for (Mask whole : S.upsets()) {
      std::vector<ChainPartition> outputs;
      for (const auto& parts : set_partitions(whole, kChainParts)) {
        ++partitions;
        ConstructiblePartition cp{whole, parts};
        auto chain = refine_to_chain_partition(S, cp);
        bool valid = !chain.chain.empty() && chain.chain.front() == 0 && chain.whole() == whole;
        for (std::size_t i = 0; i < chain.chain.size(); ++i) {
          valid = valid && S.is_upset(chain.chain[i]);
          if (i > 0) valid = valid && chain.chain[i - 1] != chain.chain[i] && subset(chain.chain[i - 1], chain.chain[i]);
        }
        o.require(valid, "refinement of a partition of " + S.key(whole) + " is not a chain partition");
        for (Mask d : chain.parts()) {
          int containing = 0;
          for (Mask p : parts) containing += subset(d, p);
          o.require(containing == 1, "chain part " + S.key(d) + " does not lie in exactly one input part");
        }
        if (std::find(outputs.begin(), outputs.end(), chain) == outputs.end()) outputs.push_back(chain);
      }
      for (const auto& a : outputs)
        for (const auto& b : outputs) {
          ++pairs;
          try {
            auto r = common_chain_refinement(S, a, b);
            o.require(chain_refines(r, a) && chain_refines(r, b), "common refinement does not refine both chains");
          } catch (const DomainError& e) {
            o.fail(std::string("common refinement failed: ") + e.what());
          }
        }
    }
  }
  o.detail = std::to_string(posets) + " posets, " + std::to_string(partitions) + " partitions, " + std::to_string(pairs) +
             " chain pairs";
  return o;
}

bool preserves_skew(const SkewLattice& a, const SkewLattice& b, const std::vector<int>& h) {
  for (int x = 0; x < a.size(); ++x)
    for (int y = 0; y < a.size(); ++y)
      if (h[a.meet(x, y)] != b.meet(h[x], h[y]) || h[a.join(x, y)] != b.join(h[x], h[y])) return false;
  return true;
}

Outcome envelopes() {
  Outcome o;
  std::vector<Band> band_targets, band_inputs;
  for (const auto& b : all_bands_up_to(kTargetOrder)) {
    auto d = is_distributive_band(b);
    if (d.right_boolean()) band_targets.push_back(b);
    if (d.right_distributive()) band_inputs.push_back(b);
  }
  for (const auto& F : sheaf_population(kSeed, 40, 2, 2)) band_inputs.push_back(sheaf_to_band(F).band);
  long long band_maps = 0;
  for (const auto& B : band_inputs) {
    std::string tag = "band " + text(B) + ": ";
    auto r = band_boolean_reflection(B);
    o.require(is_distributive_band(r.band).right_boolean(), tag + "reflection is not right Boolean");
    o.require(check_distributive_morphism(B, r.band, r.unit).ok(), tag + "unit is not a distributive morphism");
    for (const auto& C : band_targets)
      for (const auto& h : band_homs(B, C)) {
        if (!check_distributive_morphism(B, C, h).ok()) continue;
        ++band_maps;
        long long k = count_factorisations({&r.band.mul}, {&C.mul}, r.unit, h,
                                           [&](const std::vector<int>& g) { return check_distributive_morphism(r.band, C, g).ok(); });
        o.require(k == 1, tag + "morphism to " + text(C) + " factors " + std::to_string(k) + " times");
      }
  }
  std::vector<SkewLattice> skew_targets, skew_inputs;
  for (const auto& s : all_skew_lattices_up_to(kTargetOrder)) {
    auto d = is_distributive_skew(s);
    if (d.right_boolean()) skew_targets.push_back(s);
    if (d.right_distributive()) skew_inputs.push_back(s);
  }
  for (const auto& F : sheaf_population(kSeed, 40, 2, 2))
    for (const auto& A : enumerate_talgebras(F).algebras) skew_inputs.push_back(talgebra_to_skew(A));
  long long skew_maps = 0;
  for (const auto& S : skew_inputs) {
    std::string tag = "skew " + text(S) + ": ";
    auto env = boolean_skew_envelope(S);
    o.require(is_distributive_skew(env.lattice).right_boolean(), tag + "envelope is not right Boolean");
    o.require(preserves_skew(S, env.lattice, env.unit), tag + "unit is not a homomorphism");
    o.require(envelope_is_pullback(S, env), tag + "envelope square is not a pullback");
    for (const auto& C : skew_targets)
      for_each_skew_hom(S, C, {}, [&](const std::vector<int>& h) {
        ++skew_maps;
        long long k = count_factorisations({&env.lattice.meet, &env.lattice.join}, {&C.meet, &C.join}, env.unit, h,
                                           [](const std::vector<int>&) { return true; });
        o.require(k == 1, tag + "homomorphism to " + text(C) + " factors " + std::to_string(k) + " times");
        return true;
      });
  }
  int lattices = 0;
  for (const auto& P : posets_up_to(3)) {
    ++lattices;
    SpectralSpace space(P);
    auto L = upset_lattice(space);
    auto powerset = boolean_envelope(space);
    auto r = band_boolean_reflection(meet_band(L));
    long long isos = 0;
    for_each_hom({&r.band.mul}, {&powerset.lattice.meet}, [&] {
      std::vector<int> partial(r.band.size(), -1);
      for (int x = 0; x < L.size(); ++x) partial[r.unit[x]] = powerset.inclusion[x];
      return partial;
    }(), [&](const std::vector<int>&) { return ++isos < 2; }, true);
    o.require(r.band.size() == powerset.lattice.size() && isos == 1, "band envelope of a lattice differs from the powerset");
    auto env = boolean_skew_envelope(skew_from_lattice(L));
    auto target = skew_from_lattice(powerset.lattice);
    std::vector<int> partial(env.lattice.size(), -1);
    for (int x = 0; x < L.size(); ++x) partial[env.unit[x]] = powerset.inclusion[x];
    long long skew_isos = 0;
    for_each_hom({&env.lattice.meet, &env.lattice.join}, {&target.meet, &target.join}, partial,
                 [&](const std::vector<int>&) { return ++skew_isos < 2; }, true);
    o.require(env.lattice.size() == target.size() && skew_isos == 1, "skew envelope of a lattice differs from the powerset");
  }
  o.detail = std::to_string(band_inputs.size()) + " bands against " + std::to_string(band_targets.size()) + " targets (" +
             std::to_string(band_maps) + " morphisms), " + std::to_string(skew_inputs.size()) + " skew lattices against " +
             std::to_string(skew_targets.size()) + " targets (" + std::to_string(skew_maps) + " homomorphisms), " +
             std::to_string(lattices) + " lattices compared with powersets";
  return o;
}

Outcome timed_band_axioms() {
  auto start = std::chrono::steady_clock::now();
  auto o = band_axioms();
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(seconds < kBandLedgerSeconds, "ledger took " + std::to_string(seconds) + " s");
  return o;
}

struct Criterion {
  const char* id;
  const char* title;
  Outcome (*run)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"AC1", "band axioms ledger", timed_band_axioms},
      {"AC2", "Kimura fibre product", kimura},
      {"AC3", "normal iff reflection is a covering", normal_iff_covering},
      {"AC4", "free right regular band and word skew lattice", free_band},
      {"AC5", "equational ledger of normal skew lattices", skew_equations},
      {"AC6", "unique join on right Boolean bands", boolean_join},
      {"AC7", "sheaf and band round trips", main0_round_trips},
      {"AC8", "patch monad laws and formal patches", patch_monad},
      {"AC9", "structure maps and skew joins in bijection", main1_bijection},
      {"AC10", "constructive functors k and l", main2_constructive},
      {"AC11", "sheaves of T-algebras", skew_sheaf_properties},
      {"AC12", "chain partition refinement", chain_refinement},
      {"AC13", "Boolean envelopes", envelopes},
  };
  std::cout << "seed " << kSeed << "\n";
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(2);
    line << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.title << " (" << seconds << " s): " << o.detail;
    if (!o.pass) line << " | " << o.violations << " violations, first: " << o.witness;
    std::cout << line.str() << std::endl;
    failed += !o.pass;
  }
  std::cout << (13 - failed) << "/13 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
