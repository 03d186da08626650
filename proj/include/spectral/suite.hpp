#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "spectral/generate.hpp"
#include "spectral/patch.hpp"
#include "spectral/sheaf.hpp"
#include "spectral/skew.hpp"

namespace spectral {

/// Outcome of a theorem campaign over a generated population.
struct Campaign {
  std::string name;
  std::uint64_t seed = 0;
  long long instances = 0;
  long long failures = 0;
  bool complete = true;
  std::vector<std::string> witnesses;
  std::map<std::string, long long> counters;

  bool passed() const { return complete && failures == 0 && instances > 0; }

  void fail(const std::string& witness) {
    ++failures;
    if (witnesses.size() < 5) witnesses.push_back(witness);
  }

  void merge(const Campaign& other) {
    instances += other.instances;
    failures += other.failures;
    complete = complete && other.complete;
    for (const auto& w : other.witnesses)
      if (witnesses.size() < 5) witnesses.push_back(w);
    for (const auto& [k, v] : other.counters) counters[k] += v;
  }
};

struct CampaignOptions {
  std::uint64_t seed = 1;
  int count = 100;
  int max_points = 3;
  int max_fiber = 2;
  int shards = 0;
  CancelToken cancel;
};

/// Runs check(item, index, partial) over contiguous shards with std::async and
/// merges the partial results in shard order.
template <class T>
Campaign run_sharded(const std::string& name, const CampaignOptions& opt, const std::vector<T>& items,
                     const std::function<void(const T&, std::size_t, Campaign&)>& check) {
  std::size_t shards = opt.shards > 0 ? static_cast<std::size_t>(opt.shards) : std::max(1u, std::thread::hardware_concurrency());
  shards = std::max<std::size_t>(1, std::min(shards, items.size()));
  std::vector<std::future<Campaign>> parts;
  for (std::size_t k = 0; k < shards; ++k) {
    std::size_t lo = items.size() * k / shards, hi = items.size() * (k + 1) / shards;
    parts.push_back(std::async(std::launch::async, [&, lo, hi] {
      Campaign c;
      for (std::size_t i = lo; i < hi; ++i) {
        if (opt.cancel.cancelled()) {
          c.complete = false;
          break;
        }
        ++c.instances;
        check(items[i], i, c);
      }
      return c;
    }));
  }
  Campaign out;
  out.name = name;
  out.seed = opt.seed;
  for (auto& p : parts) out.merge(p.get());
  return out;
}

/// Both round trips between global sheaves and distributive bands.
inline Campaign campaign_main0(const CampaignOptions& opt) {
  auto population = sheaf_population(opt.seed, opt.count, opt.max_points, opt.max_fiber);
  return run_sharded<Presheaf>("main0", opt, population, [](const Presheaf& F, std::size_t i, Campaign& c) {
    auto B = sheaf_to_band(F);
    if (!is_distributive_band(B.band).distributive()) return c.fail("instance " + std::to_string(i) + ": section band not distributive");
    auto back = band_to_sheaf(B.band);
    if (!is_sheaf(back.sheaf).ok() || !back.sheaf.global()) return c.fail("instance " + std::to_string(i) + ": band sheaf invalid");
    if (!sheaf_isomorphism(F, back.sheaf)) return c.fail("instance " + std::to_string(i) + ": sheaf round trip not isomorphic");
    auto again = local_section_band(back.sheaf);
    std::vector<int> h(B.band.size());
    for (int x = 0; x < B.band.size(); ++x) h[x] = again.element(back.element_section[x].first, back.element_section[x].second);
    std::set<int> image(h.begin(), h.end());
    if (static_cast<int>(image.size()) != again.band.size() || !is_band_hom(B.band, again.band, h))
      return c.fail("instance " + std::to_string(i) + ": band round trip not isomorphic");
  });
}

/// Monad laws of the patch monad on generated sheaves.
inline Campaign campaign_monad(const CampaignOptions& opt) {
  auto population = sheaf_population(opt.seed, opt.count, opt.max_points, opt.max_fiber);
  return run_sharded<Presheaf>("monad", opt, population, [&](const Presheaf& F, std::size_t i, Campaign& c) {
    auto r = check_monad_laws(F, opt.seed + i);
    c.counters["checked"] += r.checked;
    if (!r.failures.empty()) c.fail("instance " + std::to_string(i) + ": " + r.failures.front());
  });
}

/// Structure maps and right distributive joins on F are in bijection through
/// the two conversions. Records the outcome for one sheaf in `c`.
inline void check_algebra_join_bijection(const Presheaf& F, const std::string& tag, Campaign& c, CancelToken cancel) {
  auto band = sheaf_to_band(F).band;
  if (band.size() > 64) {
    ++c.counters["skipped"];
    c.complete = false;
    return;
  }
  auto algebras = enumerate_talgebras(F, cancel);
  auto joins = search_skew_joins(band, JoinRequirement::RightDistributive, cancel);
  if (!algebras.complete || !joins.complete) {
    c.complete = false;
    return;
  }
  c.counters["algebras"] += static_cast<long long>(algebras.algebras.size());
  c.counters["joins"] += static_cast<long long>(joins.joins.size());
  if (algebras.algebras.size() > 1) ++c.counters["several"];
  if (algebras.algebras.empty()) ++c.counters["none"];
  if (algebras.algebras.size() != joins.joins.size()) return c.fail(tag + "counts differ");
  std::set<std::vector<int>> join_set;
  for (const auto& j : joins.joins) join_set.insert(j.cells());
  std::set<std::vector<std::vector<int>>> xi_set;
  for (const auto& A : algebras.algebras) {
    xi_set.insert(A.xi);
    auto S = talgebra_to_skew(A);
    if (!join_set.count(S.join.cells())) return c.fail(tag + "algebra join not among the searched joins");
    if (skew_to_talgebra(F, S).xi != A.xi) return c.fail(tag + "algebra does not survive the round trip");
  }
  for (const auto& j : joins.joins) {
    SkewLattice S{band.labels, band.mul, j};
    auto A = skew_to_talgebra(F, S);
    if (!xi_set.count(A.xi)) return c.fail(tag + "join gives an algebra outside the enumeration");
    if (!(talgebra_to_skew(A).join == j)) return c.fail(tag + "join does not survive the round trip");
  }
}

inline Campaign campaign_main1(const CampaignOptions& opt) {
  auto population = sheaf_population(opt.seed, opt.count, opt.max_points, opt.max_fiber);
  return run_sharded<Presheaf>("main1", opt, population, [&](const Presheaf& F, std::size_t i, Campaign& c) {
    check_algebra_join_bijection(F, "instance " + std::to_string(i) + ": ", c, opt.cancel);
  });
}

/// F = klF on enumerated algebras, lkG = G on saturated families.
inline Campaign campaign_main2(const CampaignOptions& opt) {
  auto population = sheaf_population(opt.seed, opt.count, opt.max_points, opt.max_fiber);
  auto c1 = run_sharded<Presheaf>("main2", opt, population, [&](const Presheaf& F, std::size_t i, Campaign& c) {
    auto algebras = enumerate_talgebras(F, opt.cancel);
    if (!algebras.complete) c.complete = false;
    for (const auto& A : algebras.algebras) {
      ++c.counters["algebras"];
      if (!check_kl_iso(A, functor_l(A)).ok()) return c.fail("instance " + std::to_string(i) + ": F is not klF");
    }
  });
  Rng rng(opt.seed);
  std::vector<SaturatedStalkFamily> families;
  for (int i = 0; i < opt.count; ++i) families.push_back(random_family(rng, opt.max_points + 1, opt.max_fiber + 1));
  auto c2 = run_sharded<SaturatedStalkFamily>("main2", opt, families, [](const SaturatedStalkFamily& G, std::size_t i, Campaign& c) {
    ++c.counters["families"];
    if (!check_lk_iso(G).ok()) c.fail("family " + std::to_string(i) + ": lkG is not G");
  });
  c1.merge(c2);
  return c1;
}

/// Every right Boolean band has exactly one compatible skew join, the
/// reconstructed one.
inline Campaign campaign_boolean_join(const CampaignOptions& opt) {
  auto bands = right_boolean_bands(opt.max_points, opt.max_fiber);
  return run_sharded<Band>("boolean-join", opt, bands, [&](const Band& b, std::size_t i, Campaign& c) {
    if (b.size() > 64) {
      ++c.counters["skipped"];
      c.complete = false;
      return;
    }
    auto r = search_skew_joins(b, JoinRequirement::RightDistributive, opt.cancel);
    auto any = search_skew_joins(b, JoinRequirement::SkewLattice, opt.cancel);
    if (!r.complete || !any.complete) {
      c.complete = false;
      return;
    }
    c.counters["skew_joins"] += static_cast<long long>(any.joins.size());
    auto rebuilt = reconstruct_boolean_join(b);
    if (r.joins.size() != 1 || !(r.joins.front() == rebuilt.join))
      c.fail("band " + std::to_string(i) + " (" + std::to_string(b.size()) + " elements): " + std::to_string(r.joins.size()) +
             " joins found");
  });
}

inline const std::map<std::string, std::function<Campaign(const CampaignOptions&)>>& campaigns() {
  static const std::map<std::string, std::function<Campaign(const CampaignOptions&)>> table = {
      {"main0", campaign_main0},
      {"main1", campaign_main1},
      {"main2", campaign_main2},
      {"monad", campaign_monad},
      {"boolean-join", campaign_boolean_join},
  };
  return table;
}

}  // namespace spectral
