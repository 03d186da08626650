#pragma once

#include <atomic>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spectral/dot.hpp"
#include "spectral/generate.hpp"
#include "spectral/io.hpp"
#include "spectral/suite.hpp"

namespace spectral::cli {

using io::Json;

enum Exit : int { Pass = 0, Fail = 1, Usage = 2, Interrupted = 130 };

struct Options {
  std::string verb;
  std::vector<std::string> args;
  std::string input;
  std::string output;
  std::string format = "json";
  std::uint64_t seed = 1;
  int max_points = 3;
  int max_fiber = 2;
  int count = 100;
  int shards = 0;
};

inline const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v = {"check", "dualize", "free-band", "skew-laws", "patch", "talg-to-skew", "skew-to-talg",
                                             "l",     "k",       "envelope",  "roundtrip", "enumerate", "export-dot"};
  return v;
}

/// Raised for bad command lines; reported like any other diagnostic.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Result {
  int status = Pass;
  std::string text;
};

namespace detail {

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json read_input(const Options& o) {
  if (o.input.empty()) throw UsageError("verb '" + o.verb + "' needs --input");
  std::ifstream in(o.input);
  if (!in) throw UsageError("cannot open input file '" + o.input + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return io::parse(buf.str());
}

inline Json labels_of(const std::vector<std::string>& all, const std::vector<int>& idx) {
  Json out = Json::array();
  for (int i : idx) out.push_back(all[i]);
  return out;
}

inline Json band_flags(const Band& b) {
  auto c = classify(b);
  auto d = is_distributive_band(b);
  auto g = green_relations(b);
  return {{"commutative", c.commutative},
          {"regular", c.regular},
          {"left_regular", c.left_regular},
          {"right_regular", c.right_regular},
          {"normal", c.normal},
          {"left_normal", c.left_normal},
          {"right_normal", c.right_normal},
          {"rectangular", c.rectangular},
          {"distributive", d.distributive()},
          {"right_distributive", d.right_distributive()},
          {"right_boolean", d.right_boolean()},
          {"d_classes", g.D.count},
          {"l_classes", g.L.count},
          {"r_classes", g.R.count}};
}

inline Json skew_flags(const SkewLattice& s) {
  auto rep = check_skew(s);
  Json out = {{"valid", rep.valid()}, {"violations", rep.violations}};
  if (!rep.valid()) return out;
  auto d = is_distributive_skew(s);
  auto sym = is_symmetric(s);
  out["right_handed"] = rep.right_handed;
  out["left_handed"] = rep.left_handed;
  out["normal"] = rep.normal;
  out["commutative"] = rep.commutative;
  out["symmetric"] = sym.symmetric;
  if (sym.witness) out["symmetry_witness"] = {s.labels[sym.witness->first], s.labels[sym.witness->second]};
  out["has_zero"] = d.has_zero;
  out["distributive_reflection"] = d.distributive_reflection;
  out["boolean_reflection"] = d.boolean_reflection;
  out["distributive"] = d.distributive();
  out["right_distributive"] = d.right_distributive();
  out["reflection_size"] = rep.reflection ? rep.reflection->size() : 0;
  return out;
}

inline Result check(const Options& o) {
  Json doc = read_input(o);
  std::string kind = io::kind_of(doc);
  Json r = {{"schema", io::schema_name("report")}, {"kind", kind}, {"seed", o.seed}};
  bool pass = true;
  if (kind == "poset") {
    auto p = io::poset_from_json(doc);
    SpectralSpace S(p);
    r["points"] = p.size();
    r["upsets"] = S.upset_count();
  } else if (kind == "lattice") {
    auto l = io::lattice_from_json(doc);
    auto v = distributivity_violation(l);
    r["elements"] = l.size();
    r["distributive"] = !v;
    if (v) {
      r["violation"] = {l.labels[(*v)[0]], l.labels[(*v)[1]], l.labels[(*v)[2]]};
      pass = false;
    }
  } else if (kind == "band") {
    auto b = io::band_from_json(doc);
    auto v = check_band(b);
    r["violations"] = v;
    if (v.empty()) r["flags"] = band_flags(b);
    pass = v.empty();
  } else if (kind == "skew") {
    auto s = io::skew_from_json(doc);
    r["flags"] = skew_flags(s);
    pass = r["flags"]["valid"].get<bool>();
  } else if (kind == "sheaf") {
    auto F = io::presheaf_from_json(doc);
    auto rep = is_sheaf(F);
    r["functoriality"] = rep.functoriality;
    r["messages"] = rep.messages;
    r["sheaf"] = rep.ok();
    r["global"] = F.global();
    if (rep.ok()) {
      auto fl = is_quasi_flasque(F);
      r["quasi_flasque"] = fl.quasi_flasque;
      if (fl.witness)
        r["flasque_witness"] = {F.space.key(F.space.upset(fl.witness->first)), F.space.key(F.space.upset(fl.witness->second))};
    }
    pass = rep.ok();
  } else if (kind == "talgebra") {
    auto A = io::talgebra_from_json(doc);
    auto rep = check_talgebra(A);
    r["violations"] = rep.all();
    r["valid"] = rep.ok();
    pass = rep.ok();
  } else {
    auto G = io::family_from_json(doc);
    r["saturated"] = G.saturated();
    r["support"] = SpectralSpace(G.base).key(G.support());
    pass = G.saturated();
  }
  r["pass"] = pass;
  return {pass ? Pass : Fail, dump(r)};
}

inline Result dualize(const Options& o) {
  Json doc = read_input(o);
  std::string kind = io::kind_of(doc);
  if (kind == "band") {
    auto b = io::band_from_json(doc);
    return {Pass, dump(io::to_json(band_to_sheaf(b).sheaf))};
  }
  if (kind == "sheaf" || kind == "talgebra") {
    auto F = io::presheaf_from_json(doc);
    return {Pass, dump(io::to_json(sheaf_to_band(F).band))};
  }
  throw UsageError("dualize takes a band or a sheaf, not a " + kind);
}

inline Result free_band(const Options& o) {
  if (o.args.size() != 1) throw UsageError("free-band takes the alphabet size");
  int n = 0;
  try {
    n = std::stoi(o.args[0]);
  } catch (const std::exception&) {
    throw UsageError("alphabet size must be an integer");
  }
  if (n < 0 || n > 5) throw UsageError("alphabet size must be between 0 and 5");
  auto b = free_right_regular_band(n);
  if (o.format == "dot") return {Pass, to_dot(b, "free")};
  return {Pass, dump(io::to_json(b))};
}

inline Result skew_laws(const Options& o) {
  Json doc = read_input(o);
  auto s = io::skew_from_json(doc);
  auto rep = check_skew(s);
  Json r = {{"schema", io::schema_name("report")}, {"kind", "skew-laws"}, {"flags", skew_flags(s)}};
  if (!rep.valid()) {
    r["pass"] = false;
    return {Fail, dump(r)};
  }
  auto d = is_distributive_skew(s);
  bool sandwich = sandwich_law_holds(s);
  r["sandwich_law"] = sandwich;
  r["left_meet_law"] = left_meet_law_holds(s);
  r["right_meet_law"] = right_meet_law_holds(s);
  r["three_variable_laws"] = d.left_law && d.right_law;
  bool pass = true;
  if (rep.normal) {
    bool ids = symmetric_identities_hold(s);
    r["symmetric_identities"] = ids;
    r["reflection_distributive_iff_sandwich"] = d.distributive_reflection == sandwich;
    r["symmetric_iff_identities"] = d.symmetric == ids;
    r["distributive_iff_laws"] = d.laws_match();
    pass = d.distributive_reflection == sandwich && d.symmetric == ids && d.laws_match();
  }
  r["pass"] = pass;
  return {pass ? Pass : Fail, dump(r)};
}

inline Result patch_tables(const Options& o) {
  Json doc = read_input(o);
  auto F = io::presheaf_from_json(doc);
  auto rep = is_sheaf(F);
  if (!rep.ok()) throw DomainError("not a sheaf: " + rep.messages.front());
  const auto& S = F.space;
  auto T = patch(F);
  auto inner = patch_codec(F);
  auto outer = lift_codec(inner);
  auto unit = patch_unit(F);
  Json r = {{"schema", io::schema_name("patch")}, {"tf", io::to_json(T)}};
  Json eta = Json::object(), mu = Json::object();
  long long total = 0;
  for (int u = 0; u < F.upsets(); ++u) total += outer.count(u);
  for (int u = 0; u < F.upsets(); ++u) {
    std::string key = S.key(S.upset(u));
    Json e = Json::object();
    for (int s = 0; s < F.size(u); ++s) e[F.sections[u][s]] = T.sections[u][unit[u][s]];
    eta[key] = e;
    if (total > (1 << 16)) continue;
    Json m = Json::object();
    auto label = [&](int x, int a) { return "(" + T.sections[S.principal(x)][a] + ")"; };
    for (long long h = 0; h < outer.count(u); ++h)
      m[germ_key(S, label, outer.decode(u, h))] = T.sections[u][patch_mult(inner, outer, u, h)];
    mu[key] = m;
  }
  r["unit"] = eta;
  if (total > (1 << 16))
    r["mult_omitted"] = total;
  else
    r["mult"] = mu;
  return {Pass, dump(r)};
}

inline Result talg_to_skew(const Options& o) {
  auto A = io::talgebra_from_json(read_input(o));
  return {Pass, dump(io::to_json(talgebra_to_skew(A)))};
}

inline Result skew_to_talg(const Options& o) {
  auto S = io::skew_from_json(read_input(o));
  return {Pass, dump(io::to_json(skew_to_talgebra(S)))};
}

inline Result functor_l_verb(const Options& o) {
  auto A = io::talgebra_from_json(read_input(o));
  auto rep = check_talgebra(A);
  if (!rep.ok()) throw DomainError("not a T-algebra: " + rep.all().front());
  return {Pass, dump(io::to_json(functor_l(A).family))};
}

inline Result functor_k_verb(const Options& o) {
  auto G = io::family_from_json(read_input(o));
  if (!G.saturated()) throw DomainError("support is not an upset", {SpectralSpace(G.base).key(G.support())});
  return {Pass, dump(io::to_json(comparison_k(G)))};
}

inline Result envelope(const Options& o) {
  Json doc = read_input(o);
  std::string kind = io::kind_of(doc);
  if (kind == "band") {
    auto b = io::band_from_json(doc);
    auto r = band_boolean_reflection(b);
    Json unit = Json::object();
    for (int x = 0; x < b.size(); ++x) unit[b.labels[x]] = r.band.labels[r.unit[x]];
    return {Pass, dump({{"schema", io::schema_name("envelope")}, {"band", io::to_json(r.band)}, {"unit", unit}})};
  }
  if (kind == "skew") {
    auto s = io::skew_from_json(doc);
    auto env = boolean_skew_envelope(s);
    Json unit = Json::object();
    for (int x = 0; x < s.size(); ++x) unit[s.labels[x]] = env.lattice.labels[env.unit[x]];
    return {Pass, dump({{"schema", io::schema_name("envelope")},
                        {"skew", io::to_json(env.lattice)},
                        {"unit", unit},
                        {"pullback", envelope_is_pullback(s, env)}})};
  }
  throw UsageError("envelope takes a band or a skew lattice, not a " + kind);
}

inline CampaignOptions campaign_options(const Options& o, CancelToken cancel) {
  CampaignOptions c;
  c.seed = o.seed;
  c.count = o.count;
  c.max_points = o.max_points;
  c.max_fiber = o.max_fiber;
  c.shards = o.shards;
  c.cancel = cancel;
  return c;
}

inline Result roundtrip(const Options& o, CancelToken cancel) {
  if (o.args.size() != 1) throw UsageError("roundtrip takes one theorem id");
  auto it = campaigns().find(o.args[0]);
  if (it == campaigns().end()) {
    std::vector<std::string> ids;
    for (const auto& [k, v] : campaigns()) ids.push_back(k);
    throw UsageError("unknown theorem id '" + o.args[0] + "'; known: " + join(ids, ", "));
  }
  auto c = it->second(campaign_options(o, cancel));
  Json r = {{"schema", io::schema_name("roundtrip")},
            {"theorem", c.name},
            {"seed", c.seed},
            {"max_points", o.max_points},
            {"max_fiber", o.max_fiber},
            {"instances", c.instances},
            {"failures", c.failures},
            {"complete", c.complete},
            {"counters", c.counters},
            {"witnesses", c.witnesses},
            {"pass", c.passed()}};
  int status = c.passed() ? Pass : (cancel.cancelled() ? Interrupted : Fail);
  return {status, dump(r)};
}

/// Computes line(i) for every item on worker shards and writes the lines in
/// item order as each shard completes.
template <class T, class Fn>
bool stream_sharded(const std::vector<T>& items, int shards, CancelToken cancel, std::ostream& out, Fn line) {
  std::size_t k = shards > 0 ? static_cast<std::size_t>(shards) : std::max(1u, std::thread::hardware_concurrency());
  k = std::max<std::size_t>(1, std::min(k, items.size()));
  std::vector<std::future<std::vector<std::string>>> parts;
  for (std::size_t s = 0; s < k; ++s) {
    std::size_t lo = items.size() * s / k, hi = items.size() * (s + 1) / k;
    parts.push_back(std::async(std::launch::async, [&, lo, hi] {
      std::vector<std::string> lines;
      for (std::size_t i = lo; i < hi && !cancel.cancelled(); ++i) lines.push_back(line(items[i], i));
      return lines;
    }));
  }
  for (auto& p : parts)
    for (const auto& l : p.get()) out << l << "\n";
  return !cancel.cancelled();
}

inline Result enumerate(const Options& o, CancelToken cancel) {
  if (o.args.size() != 1) throw UsageError("enumerate takes one of: bands, posets, skew, sheaves");
  const std::string& what = o.args[0];
  std::ostringstream out;
  long long emitted = 0;
  bool complete = true;
  auto summary = [&](Json extra) {
    extra["schema"] = io::schema_name("summary");
    extra["kind"] = what;
    extra["seed"] = o.seed;
    extra["emitted"] = emitted;
    extra["complete"] = complete;
    out << extra.dump() << "\n";
    return Result{complete ? Pass : Interrupted, out.str()};
  };
  if (what == "bands") {
    if (o.max_points < 1 || o.max_points > 3) throw UsageError("band enumeration supports --max-points 1..3");
    std::vector<Band> reps;
    long long labelled = 0;
    for (int n = 1; n <= o.max_points; ++n) {
      std::set<std::vector<int>> seen;
      for (const auto& b : all_bands(n)) {
        ++labelled;
        if (seen.insert(canonical_form(b)).second) reps.push_back(b);
      }
    }
    complete = stream_sharded(reps, o.shards, cancel, out, [](const Band& b, std::size_t) {
      return Json{{"size", b.size()}, {"band", io::to_json(b)}, {"flags", band_flags(b)}}.dump();
    });
    emitted = complete ? static_cast<long long>(reps.size()) : 0;
    return summary({{"labelled", labelled}});
  }
  if (what == "posets") {
    if (o.max_points < 0 || o.max_points > 6) throw UsageError("poset enumeration supports --max-points 0..6");
    auto all = posets_up_to(o.max_points);
    complete = stream_sharded(all, o.shards, cancel, out, [](const Poset& p, std::size_t) {
      return Json{{"size", p.size()}, {"poset", io::to_json(p)}, {"upsets", SpectralSpace(p).upset_count()}}.dump();
    });
    emitted = complete ? static_cast<long long>(all.size()) : 0;
    return summary({});
  }
  if (what == "skew") {
    if (o.max_points < 1 || o.max_points > 3) throw UsageError("skew lattice enumeration supports --max-points 1..3");
    auto all = all_skew_lattices_up_to(o.max_points);
    complete = stream_sharded(all, o.shards, cancel, out, [](const SkewLattice& s, std::size_t) {
      return Json{{"size", s.size()}, {"skew", io::to_json(s)}, {"flags", skew_flags(s)}}.dump();
    });
    emitted = complete ? static_cast<long long>(all.size()) : 0;
    return summary({});
  }
  if (what == "sheaves") {
    if (o.max_points < 1 || o.max_points > 4 || o.max_fiber < 1 || o.max_fiber > 3)
      throw UsageError("sheaf sampling supports --max-points 1..4 and --max-fiber 1..3");
    auto all = sheaf_population(o.seed, o.count, o.max_points, o.max_fiber);
    complete = stream_sharded(all, o.shards, cancel, out, [&](const Presheaf& F, std::size_t) {
      auto algebras = enumerate_talgebras(F, cancel);
      return Json{{"points", F.space.points()},
                  {"sheaf", io::to_json(F)},
                  {"quasi_flasque", is_quasi_flasque(F).quasi_flasque},
                  {"algebras", algebras.algebras.size()},
                  {"algebras_complete", algebras.complete}}
          .dump();
    });
    emitted = complete ? static_cast<long long>(all.size()) : 0;
    return summary({});
  }
  throw UsageError("unknown enumeration '" + what + "'");
}

inline Result export_dot(const Options& o) {
  Json doc = read_input(o);
  std::string kind = io::kind_of(doc);
  if (kind == "poset") return {Pass, to_dot(io::poset_from_json(doc), "poset")};
  if (kind == "band") return {Pass, to_dot(io::band_from_json(doc), "band")};
  if (kind == "skew") return {Pass, to_dot(io::skew_from_json(doc).meet_band(), "skew")};
  if (kind == "lattice") {
    auto l = io::lattice_from_json(doc);
    return {Pass, to_dot(natural_order(meet_band(l)), "lattice")};
  }
  if (kind == "sheaf" || kind == "talgebra") return {Pass, to_dot(io::presheaf_from_json(doc).space.poset(), "base")};
  if (kind == "family") return {Pass, to_dot(io::family_from_json(doc).base, "base")};
  throw UsageError("nothing to draw for a " + kind);
}

inline Json diagnostic(const std::string& kind, const std::string& message) {
  return {{"schema", io::schema_name("error")}, {"error", kind}, {"message", message}};
}

}  // namespace detail

/// Parses the command line, runs the verb and writes its output to `out`
/// (or --output). Diagnostics go to `err` as JSON. Returns the exit status.
inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err, CancelToken cancel = {}) {
  Options o;
  CLI::App app{"Finite spectral spaces, bands, skew lattices and the patch monad"};
  app.add_option("verb", o.verb, "one of: " + join(verbs(), ", "))->required();
  app.add_option("args", o.args, "verb arguments");
  app.add_option("-i,--input", o.input, "input JSON file");
  app.add_option("-o,--output", o.output, "write the result here instead of standard output");
  app.add_option("--format", o.format, "json or dot")->check(CLI::IsMember({"json", "dot"}));
  app.add_option("--seed", o.seed, "seed for every randomized population");
  app.add_option("--max-points", o.max_points, "largest base or carrier size")->check(CLI::Range(0, 12));
  app.add_option("--max-fiber", o.max_fiber, "largest stalk size")->check(CLI::Range(1, 8));
  app.add_option("--count", o.count, "population size for sampled campaigns")->check(CLI::Range(1, 1000000));
  app.add_option("--shards", o.shards, "worker shards, 0 for one per core")->check(CLI::Range(0, 256));
  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Pass;
  } catch (const CLI::ParseError& e) {
    err << detail::diagnostic("usage", e.what()).dump() << "\n";
    return Usage;
  }
  Result r;
  try {
    if (std::find(verbs().begin(), verbs().end(), o.verb) == verbs().end()) throw UsageError("unknown verb '" + o.verb + "'");
    if (o.format == "dot" && o.verb != "export-dot" && o.verb != "free-band")
      throw UsageError("--format dot applies to export-dot and free-band only");
    if (o.verb == "check") r = detail::check(o);
    else if (o.verb == "dualize") r = detail::dualize(o);
    else if (o.verb == "free-band") r = detail::free_band(o);
    else if (o.verb == "skew-laws") r = detail::skew_laws(o);
    else if (o.verb == "patch") r = detail::patch_tables(o);
    else if (o.verb == "talg-to-skew") r = detail::talg_to_skew(o);
    else if (o.verb == "skew-to-talg") r = detail::skew_to_talg(o);
    else if (o.verb == "l") r = detail::functor_l_verb(o);
    else if (o.verb == "k") r = detail::functor_k_verb(o);
    else if (o.verb == "envelope") r = detail::envelope(o);
    else if (o.verb == "roundtrip") r = detail::roundtrip(o, cancel);
    else if (o.verb == "enumerate") r = detail::enumerate(o, cancel);
    else r = detail::export_dot(o);
  } catch (const io::ParseError& e) {
    Json d = detail::diagnostic("parse", e.what());
    d["line"] = e.line();
    d["column"] = e.column();
    d["offset"] = e.offset();
    err << d.dump() << "\n";
    return Usage;
  } catch (const UsageError& e) {
    err << detail::diagnostic("usage", e.what()).dump() << "\n";
    return Usage;
  } catch (const DomainError& e) {
    Json d = detail::diagnostic("domain", e.what());
    d["witness"] = e.witness();
    err << d.dump() << "\n";
    return Usage;
  } catch (const ShapeError& e) {
    err << detail::diagnostic("shape", e.what()).dump() << "\n";
    return Usage;
  } catch (const Json::exception& e) {
    err << detail::diagnostic("shape", e.what()).dump() << "\n";
    return Usage;
  } catch (const std::exception& e) {
    err << detail::diagnostic("internal", e.what()).dump() << "\n";
    return Usage;
  }
  if (!o.output.empty()) {
    std::ofstream f(o.output);
    if (!f) {
      err << detail::diagnostic("usage", "cannot write '" + o.output + "'").dump() << "\n";
      return Usage;
    }
    f << r.text;
  } else {
    out << r.text;
  }
  return r.status;
}

}  // namespace spectral::cli
