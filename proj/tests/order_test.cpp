#include <gtest/gtest.h>

#include <random>

#include "spectral/spectral.hpp"

using namespace spectral;

namespace {

Poset point() { return Poset::chain(1); }

MonotoneMap to_point(const Poset& p) { return MonotoneMap(p, point(), std::vector<int>(p.size(), 0)); }

Poset lattice_order(const DistLattice& l) {
  std::vector<std::vector<bool>> leq(l.size(), std::vector<bool>(l.size()));
  for (int a = 0; a < l.size(); ++a)
    for (int b = 0; b < l.size(); ++b) leq[a][b] = l.leq(a, b);
  return Poset::from_matrix(l.labels, leq);
}

bool isomorphic(const Poset& a, const Poset& b) { return a.size() == b.size() && poset_canonical(a) == poset_canonical(b); }

bool is_chain(const Poset& p) {
  for (int x = 0; x < p.size(); ++x)
    for (int y = 0; y < p.size(); ++y)
      if (!p.comparable(x, y)) return false;
  return true;
}

std::vector<MonotoneMap> monotone_maps(const Poset& a, const Poset& b) {
  std::vector<MonotoneMap> out;
  std::vector<int> m(a.size(), 0);
  std::function<void(int)> rec = [&](int i) {
    if (i == a.size()) {
      out.emplace_back(a, b, m);
      return;
    }
    for (int v = 0; v < b.size(); ++v) {
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) {
        if (a.leq(j, i) && !b.leq(m[j], v)) ok = false;
        if (a.leq(i, j) && !b.leq(v, m[j])) ok = false;
      }
      if (!ok) continue;
      m[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
  return out;
}

}  // namespace

TEST(Poset, RejectsCycles) {
  EXPECT_THROW(Poset::from_pairs({"a", "b"}, {{0, 1}, {1, 0}}), Error);
}

TEST(Poset, ChainAndAntichain) {
  auto c = Poset::chain(3);
  EXPECT_TRUE(c.leq(0, 2));
  EXPECT_FALSE(c.leq(2, 0));
  EXPECT_EQ(c.covers().size(), 2u);
  auto a = Poset::antichain(3);
  EXPECT_FALSE(a.comparable(0, 1));
  EXPECT_EQ(a.covers().size(), 0u);
}

TEST(Covering, Examples) {
  EXPECT_TRUE(is_covering(MonotoneMap::identity(Poset::chain(3))));
  EXPECT_TRUE(is_covering(to_point(Poset::antichain(2))));
  EXPECT_FALSE(is_covering(to_point(Poset::chain(2))));
}

TEST(ConnectedMap, Examples) {
  EXPECT_TRUE(is_connected_map(to_point(Poset::chain(2))));
  EXPECT_FALSE(is_connected_map(to_point(Poset::antichain(2))));
  EXPECT_TRUE(is_connected_map(MonotoneMap::identity(Poset::antichain(2))));
}

TEST(Factorisation, Examples) {
  auto id = comprehensive_factorisation(MonotoneMap::identity(Poset::chain(2)));
  EXPECT_EQ(id.connected.cod().size(), 2);
  EXPECT_EQ(id.covering.dom().size(), 2);

  auto split = comprehensive_factorisation(to_point(Poset::antichain(2)));
  EXPECT_EQ(split.connected.cod().size(), 2);
  EXPECT_NE(split.connected(0), split.connected(1));
  EXPECT_FALSE(split.connected.cod().comparable(0, 1));
  EXPECT_EQ(split.covering.cod().size(), 1);
  EXPECT_TRUE(is_covering(split.covering));

  auto whole = comprehensive_factorisation(to_point(Poset::chain(2)));
  EXPECT_EQ(whole.connected.cod().size(), 1);
  EXPECT_EQ(whole.covering.dom().size(), 1);
}

TEST(Factorisation, ComposesToTheMapOnSmallPosets) {
  auto posets = posets_up_to(3);
  int checked = 0;
  for (const auto& a : posets)
    for (const auto& b : posets)
      for (const auto& f : monotone_maps(a, b)) {
        auto fac = comprehensive_factorisation(f);
        EXPECT_TRUE(is_connected_map(fac.connected));
        EXPECT_TRUE(is_covering(fac.covering));
        EXPECT_EQ(compose(fac.covering, fac.connected).values(), f.values());
        ++checked;
      }
  EXPECT_GT(checked, 100);
}

TEST(UpsetLattice, Examples) {
  EXPECT_EQ(upset_lattice(point()).size(), 2);
  auto chain = upset_lattice(Poset::chain(2));
  EXPECT_EQ(chain.size(), 3);
  EXPECT_TRUE(is_chain(lattice_order(chain)));
  auto square = upset_lattice(Poset::antichain({"a", "b"}));
  EXPECT_EQ(square.size(), 4);
  EXPECT_TRUE(is_boolean_lattice(square));
  EXPECT_EQ(square.labels.back(), "{a,b}");
}

TEST(UpsetLattice, SatisfiesLatticeLaws) {
  for (const auto& p : posets_up_to(5)) {
    auto l = upset_lattice(p);
    EXPECT_TRUE(check_lattice(l).empty());
    EXPECT_FALSE(distributivity_violation(l).has_value());
  }
}

TEST(SpectralPoset, Examples) {
  auto three = spectral_poset(upset_lattice(Poset::chain(2)));
  EXPECT_TRUE(isomorphic(three.poset, Poset::chain(2)));
  auto square = spectral_poset(upset_lattice(Poset::antichain(2)));
  EXPECT_TRUE(isomorphic(square.poset, Poset::antichain(2)));
  auto two = spectral_poset(upset_lattice(Poset::antichain(0)));
  EXPECT_EQ(two.poset.size(), 0);
  EXPECT_EQ(spectral_poset(upset_lattice(point())).poset.size(), 1);
}

TEST(SpectralPoset, RejectsNonDistributiveLattice) {
  Poset m3 = Poset::from_pairs({"0", "a", "b", "c", "1"}, {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 4}, {3, 4}});
  auto l = lattice_from_order(m3);
  EXPECT_TRUE(distributivity_violation(l).has_value());
  EXPECT_THROW(spectral_poset(l), DomainError);
}

TEST(Birkhoff, RoundTripOnPosets) {
  for (const auto& p : posets_up_to(6)) {
    auto back = spectral_poset(upset_lattice(p)).poset;
    EXPECT_TRUE(isomorphic(back, p));
  }
}

TEST(Birkhoff, RoundTripOnLattices) {
  int checked = 0;
  for (const auto& p : posets_up_to(6)) {
    auto l = upset_lattice(p);
    if (l.size() > 8) continue;
    auto again = upset_lattice(spectral_poset(l).poset);
    EXPECT_TRUE(isomorphic(lattice_order(again), lattice_order(l)));
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(BooleanEnvelope, Examples) {
  EXPECT_EQ(boolean_envelope(point()).lattice.size(), 2);
  auto sierpinski = boolean_envelope(Poset::chain(2));
  EXPECT_EQ(sierpinski.lattice.size(), 4);
  EXPECT_EQ(sierpinski.inclusion.size(), 3u);
  EXPECT_EQ(boolean_envelope(Poset::antichain(3)).lattice.size(), 8);
}

TEST(BooleanEnvelope, InclusionIsALatticeEmbedding) {
  for (const auto& p : posets_up_to(4)) {
    SpectralSpace s(p);
    auto l = upset_lattice(s);
    auto env = boolean_envelope(s);
    EXPECT_TRUE(is_boolean_lattice(env.lattice));
    for (int a = 0; a < l.size(); ++a)
      for (int b = 0; b < l.size(); ++b) {
        EXPECT_EQ(env.inclusion[l.meet(a, b)], env.lattice.meet(env.inclusion[a], env.inclusion[b]));
        EXPECT_EQ(env.inclusion[l.join(a, b)], env.lattice.join(env.inclusion[a], env.inclusion[b]));
      }
  }
}

TEST(ChainPartition, SinglePart) {
  SpectralSpace s(Poset::chain(2));
  auto c = refine_to_chain_partition(s, {s.all(), {s.all()}});
  EXPECT_EQ(c.chain, (std::vector<Mask>{0, s.all()}));
}

TEST(ChainPartition, Sierpinski) {
  SpectralSpace s(Poset::chain(2));
  auto c = refine_to_chain_partition(s, {s.all(), {bit(0), bit(1)}});
  EXPECT_EQ(c.chain, (std::vector<Mask>{0, bit(1), bit(0) | bit(1)}));
  EXPECT_EQ(c.parts(), (std::vector<Mask>{bit(1), bit(0)}));
}

TEST(ChainPartition, AntichainTakesTheFirstPointFirst) {
  SpectralSpace s(Poset::antichain({"a", "b"}));
  auto c = refine_to_chain_partition(s, {s.all(), {bit(0), bit(1)}});
  EXPECT_EQ(c.chain, (std::vector<Mask>{0, bit(0), s.all()}));
}

TEST(ChainPartition, RejectsBadPartitions) {
  SpectralSpace s(Poset::chain(2));
  EXPECT_THROW(validate(s, ConstructiblePartition{bit(0), {bit(0)}}), DomainError);
  EXPECT_THROW(validate(s, ConstructiblePartition{s.all(), {bit(0)}}), DomainError);
  EXPECT_THROW(validate(s, ConstructiblePartition{s.all(), {s.all(), bit(1)}}), DomainError);
  EXPECT_THROW(validate(s, ChainPartition{{bit(1), s.all()}}), Error);
}

TEST(ChainPartition, RefinementIsExhaustivelyValid) {
  for (const auto& p : posets_up_to(4)) {
    SpectralSpace s(p);
    for (Mask whole : s.upsets())
      for (const auto& parts : set_partitions(whole, 4)) {
        auto c = refine_to_chain_partition(s, {whole, parts});
        EXPECT_NO_THROW(validate(s, c));
        EXPECT_EQ(c.whole(), whole);
        EXPECT_TRUE(refines(c.parts(), parts));
      }
  }
}

TEST(CommonRefinement, Examples) {
  SpectralSpace s(Poset::chain(2));
  ChainPartition fine{{0, bit(1), s.all()}};
  ChainPartition trivial{{0, s.all()}};
  EXPECT_EQ(common_chain_refinement(s, fine, fine), fine);
  EXPECT_EQ(common_chain_refinement(s, fine, trivial), fine);
  EXPECT_EQ(common_chain_refinement(s, trivial, fine), fine);
  EXPECT_TRUE(chain_refines(fine, trivial));
  EXPECT_FALSE(chain_refines(trivial, fine));
}

TEST(CommonRefinement, DifferentWholesAreRejected) {
  SpectralSpace s(Poset::chain(2));
  EXPECT_THROW(common_chain_refinement(s, ChainPartition{{0, bit(1)}}, ChainPartition{{0, s.all()}}), DomainError);
}

TEST(CommonRefinement, CrossedChainsOnAnAntichainHaveNone) {
  SpectralSpace s(Poset::antichain({"a", "b"}));
  ChainPartition a_first{{0, bit(0), s.all()}};
  ChainPartition b_first{{0, bit(1), s.all()}};
  EXPECT_THROW(common_chain_refinement(s, a_first, b_first), DomainError);
}

TEST(CommonRefinement, RefinesBothOutputsOfTheSameWhole) {
  for (const auto& p : posets_up_to(4)) {
    SpectralSpace s(p);
    for (Mask whole : s.upsets()) {
      std::vector<ChainPartition> chains;
      for (const auto& parts : set_partitions(whole, 3)) chains.push_back(refine_to_chain_partition(s, {whole, parts}));
      for (const auto& a : chains)
        for (const auto& b : chains) {
          auto r = common_chain_refinement(s, a, b);
          EXPECT_TRUE(chain_refines(r, a));
          EXPECT_TRUE(chain_refines(r, b));
        }
    }
  }
}

TEST(SetPartitions, CountsAreBellNumbers) {
  EXPECT_EQ(set_partitions(0, 4).size(), 1u);
  EXPECT_EQ(set_partitions(0b111, 3).size(), 5u);
  EXPECT_EQ(set_partitions(0b1111, 4).size(), 15u);
  EXPECT_EQ(set_partitions(0b1111, 2).size(), 8u);
  for (const auto& parts : set_partitions(0b11111, 4)) {
    Mask seen = 0;
    for (Mask m : parts) {
      EXPECT_EQ(seen & m, 0u);
      seen |= m;
    }
    EXPECT_EQ(seen, Mask{0b11111});
  }
}

TEST(Posets, CountsOfIsomorphismClasses) {
  const std::size_t expected[] = {1, 1, 2, 5, 16, 63};
  for (int n = 0; n <= 5; ++n) EXPECT_EQ(posets_of_size(n).size(), expected[n]) << n;
}
