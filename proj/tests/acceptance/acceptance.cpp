// One line per acceptance criterion; nonzero exit if any fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "oracles.hpp"

#include "mvb/corepull.hpp"
#include "mvb/generate.hpp"
#include "mvb/infbundle.hpp"
#include "mvb/lift.hpp"
#include "mvb/split.hpp"

using namespace mvb;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string note;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      note = what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vector rand_vec(std::size_t d, Rng& rng) {
  Vector v(d);
  for (auto& x : v) x = rng.small_rational();
  return v;
}

int random_chart(const AtlasPresentation& A, int p, Rng& rng) {
  auto cs = A.charts_at(p);
  return cs[rng.range(0, static_cast<long>(cs.size()) - 1)];
}

bool identity_on_building_bundles(const Decomposition& d) {
  for (const auto& [key, g] : d.m.data) {
    const CubeLayout& L = layout(g.n());
    for (std::size_t s = 0; s < L.count(); ++s)
      if (g.source()[s] && !g.linear_part(s).is_identity()) return false;
  }
  return true;
}

// ---------------------------------------------------------------- 1
Outcome partitions_count() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::array<std::size_t, 5> want{1, 2, 5, 15, 52};
  const auto bell = oracle::bell(5);
  for (int k = 1; k <= 5; ++k) {
    const auto P = partitions(IndexSet::range(k));
    std::vector<int> ground;
    for (int i = 1; i <= k; ++i) ground.push_back(i);
    o.require(P.size() == want[k - 1], "count at #I=" + std::to_string(k));
    o.require(P.size() == oracle::partitions_of(ground).size(), "enumerator disagrees at #I=" + std::to_string(k));
    o.require(static_cast<long>(P.size()) == bell[k], "Bell triangle disagrees");
  }
  const double t = seconds_since(t0);
  o.require(t < 1.0, "too slow");
  o.note = o.pass ? "1, 2, 5, 15, 52 in " + std::to_string(t) + " s" : o.note;
  return o;
}

// ---------------------------------------------------------------- 2
Outcome gauge_group() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(1002);
  int count = 0;
  for (; count < 1000; ++count) {
    const int n = static_cast<int>(rng.range(1, 3));
    DimAssignment d = random_dims(n, 2, rng);
    Gauge f = random_gauge(d, rng), g = random_gauge(d, rng), h = random_gauge(d, rng);
    Coords x = oracle::random_coords(d, rng);
    o.require(oracle::to_map(f.evaluate(x), n) == oracle::evaluate(f, oracle::to_map(x, n)), "evaluation formula");
    o.require(coords_equal(compose(g, f).evaluate(x), g.evaluate(f.evaluate(x))), "evaluation contract of compose");
    o.require(compose(h, compose(g, f)) == compose(compose(h, g), f), "associativity");
    const Gauge id = Gauge::identity(d);
    o.require(compose(id, f) == f && compose(f, id) == f, "unit laws");
    const Gauge fi = invert(f);
    o.require(compose(fi, f) == id && compose(f, fi) == id, "two-sided inverse");
    Gauge a = random_statomorphism(d, rng), b = random_statomorphism(d, rng);
    o.require(is_statomorphism(compose(a, b)) && is_statomorphism(invert(a)), "statomorphism subgroup");
  }
  const double t = seconds_since(t0);
  o.require(t < 60.0, "too slow");
  if (o.pass) o.note = std::to_string(count) + " gauges in " + std::to_string(t) + " s";
  return o;
}

// ---------------------------------------------------------------- 3
bool cocycle_by_samples(const AtlasPresentation& A, Rng& rng) {
  for (std::size_t p = 0; p < A.base().size(); ++p) {
    const auto here = A.charts_at(static_cast<int>(p));
    for (int a : here)
      for (int b : here)
        for (int c : here) {
          auto xm = oracle::to_map(oracle::random_coords(A.dims(), rng), A.n());
          const int pi = static_cast<int>(p);
          if (oracle::evaluate(A.transition(b, c, pi), oracle::evaluate(A.transition(a, b, pi), xm)) !=
              oracle::evaluate(A.transition(a, c, pi), xm))
            return false;
        }
  }
  return true;
}

Outcome cocycle() {
  Outcome o;
  Rng rng(1003);
  int atlases = 0, pair_cases = 0, triple_cases = 0;
  for (int t = 0; t < 40; ++t) {
    GenOptions g;
    g.n = static_cast<int>(rng.range(1, 4));
    g.charts = static_cast<int>(rng.range(1, 3));
    g.points = static_cast<int>(rng.range(1, 4));
    g.max_dim = g.n == 4 ? 1 : 2;
    AtlasPresentation A = random_instance(g, rng);
    ++atlases;
    o.require(validate(A).ok(), "generated atlas fails validation");
    o.require(cocycle_by_samples(A, rng), "cocycle law fails pointwise");
    for (std::size_t p = 0; p < A.base().size(); ++p) {
      const auto here = A.charts_at(static_cast<int>(p));
      if (here.size() < 2) continue;
      const int a = here[0], b = here[1], pi = static_cast<int>(p);
      Gauge scale = Gauge::identity(A.dims());
      if (scale.component(0, 0).entries().empty()) continue;
      scale.component(0, 0).entries()[0] = 2;
      const Gauge bad = compose(A.transition(a, b, pi), scale);
      AtlasPresentation B = A;
      B.set_transition(a, b, pi, bad);
      if (here.size() == 3) B.set_transition(b, a, pi, invert(bad));
      ValidationReport r = validate(B);
      o.require(r.violations.size() == 1 && r.count("cocycle") == 1, "perturbation not caught at exactly one triple");
      (here.size() == 2 ? pair_cases : triple_cases) += 1;
    }
  }
  o.require(pair_cases > 0 && triple_cases > 0, "no perturbation cases generated");
  if (o.pass)
    o.note = std::to_string(atlases) + " atlases; perturbations caught once (" + std::to_string(pair_cases) +
             " on a chart pair, " + std::to_string(triple_cases) + " on a chart triple)";
  return o;
}

// ---------------------------------------------------------------- 4
bool interchange_once(const AtlasPresentation& A, const IndexSet& I, int i, int j, Rng& rng) {
  const CubeLayout& L = layout(A.n());
  const int p = static_cast<int>(rng.range(0, static_cast<long>(A.base().size()) - 1));
  const int c = A.canonical_chart(p);
  std::array<Coords, 4> x;
  for (auto& e : x) e = zero_coords(A.dims());
  for (std::size_t s = 0; s < L.count(); ++s) {
    const IndexSet& K = L.subsets[s];
    if (!K.subset_of(I)) continue;
    const bool hi = K.contains(i), hj = K.contains(j);
    if (!hi && !hj) {
      const Vector v = rand_vec(A.dims()[s], rng);
      for (auto& e : x) e[s] = v;
    } else if (hj && !hi) {
      // d1, d2 share the part over E_{I-i}; so do d3, d4
      const Vector u1 = rand_vec(A.dims()[s], rng), u2 = rand_vec(A.dims()[s], rng);
      x[0][s] = x[1][s] = u1;
      x[2][s] = x[3][s] = u2;
    } else if (hi && !hj) {
      const Vector v1 = rand_vec(A.dims()[s], rng), v2 = rand_vec(A.dims()[s], rng);
      x[0][s] = x[2][s] = v1;
      x[1][s] = x[3][s] = v2;
    } else {
      for (auto& e : x) e[s] = rand_vec(A.dims()[s], rng);
    }
  }
  std::array<BundleElement, 4> d;
  for (int q = 0; q < 4; ++q) d[q] = transport(A, BundleElement{I, c, p, x[q]}, random_chart(A, p, rng));
  const auto lhs = add(A, add(A, d[0], d[1], i), add(A, d[2], d[3], i), j);
  const auto rhs = add(A, add(A, d[0], d[2], j), add(A, d[1], d[3], j), i);
  return equal(A, lhs, rhs);
}

Outcome interchange() {
  Outcome o;
  Rng rng(1004);
  std::size_t fixtures = 0, min_count = SIZE_MAX;
  for (const auto& f : oracle::atlas_fixtures()) {
    auto A = oracle::load_atlas(f);
    if (A->n() < 2) continue;
    std::vector<std::tuple<IndexSet, int, int>> faces;
    for (const auto& I : layout(A->n()).subsets)
      for (int i : I)
        for (int j : I)
          if (i < j) faces.emplace_back(I, i, j);
    const std::size_t per = (1000 + faces.size() - 1) / faces.size();
    std::size_t count = 0;
    for (const auto& [I, i, j] : faces)
      for (std::size_t t = 0; t < per; ++t, ++count)
        o.require(interchange_once(*A, I, i, j, rng), "interchange fails on " + f + " face " + I.str());
    min_count = std::min(min_count, count);
    ++fixtures;
  }
  if (o.pass)
    o.note = std::to_string(fixtures) + " fixtures, >= " + std::to_string(min_count) +
             " quadruples each over all square faces";
  return o;
}

// ---------------------------------------------------------------- 5
Outcome pullback_ultracore() {
  Outcome o;
  Rng rng(1005);
  bool saw_7 = false, saw_3_orderings = false;
  std::size_t fixtures = 0;
  for (const auto& f : oracle::atlas_fixtures()) {
    auto A = oracle::load_atlas(f);
    if (A->n() < 2) continue;
    ++fixtures;
    o.require(pullback_surjective(pullback(A)).passed, "pi not surjective on " + f);
    for (int k = 1; k <= A->n(); ++k) {
      UltracoreSequence seq = ultracore_sequence(A, k, rng, 3);
      const json& w = seq.exactness.witnesses;
      o.require(seq.exactness.passed, "sequence not exact on " + f);
      o.require(w["dim_E"].get<std::size_t>() == w["dim_ultracore"].get<std::size_t>() + w["dim_P"].get<std::size_t>(),
                "dimension identity on " + f);
      if (f == "twisted_n3_ones.json")
        saw_7 = saw_7 || (w["dim_E"] == 7 && w["dim_ultracore"] == 1 && w["dim_P"] == 6);
      if (A->n() >= 4 && w["orderings"].size() >= 3) saw_3_orderings = true;
    }
  }
  o.require(saw_7, "7 = 1 + 6 not observed");
  o.require(saw_3_orderings, "fewer than 3 orderings compared");
  if (o.pass)
    o.note = std::to_string(fixtures) + " fixtures exact; 7 = 1 + 6 on n = 3 unit dims; 3 orderings agree on n = 4";
  return o;
}

// ---------------------------------------------------------------- 6
Outcome cores() {
  Outcome o;
  Rng rng(1006);
  std::size_t checked = 0;
  for (const char* f : {"decomposed_n3.json", "decomposed_n4.json"}) {
    auto A = oracle::load_atlas(f);
    for (const auto& S : nonempty_subsets(IndexSet::range(A->n())))
      for (const auto& J : nonempty_subsets(S)) {
        AtlasPresentation C = core(*A, S, J);
        DiagonalPartition rho(S, J);
        const CubeLayout& L = layout(C.n());
        for (std::size_t s = 0; s < L.count(); ++s) {
          IndexSet u;
          for (int q : L.subsets[s]) u = u.unite(rho.as_partition()[q - 1]);
          o.require(C.dims()[s] == A->dims().dim(u), "decomposed core dims differ");
        }
        for (const auto& [key, g] : C.transitions())
          o.require(g == Gauge::identity(C.dims()), "decomposed core is twisted");
        ++checked;
      }
  }
  std::size_t stages = 0;
  for (const char* f : {"twisted_n3_b.json", "twisted_n4_c.json"}) {
    auto A = oracle::load_atlas(f);
    const IndexSet S = IndexSet::range(A->n());
    for (const auto& J : nonempty_subsets(S))
      for (const auto& K : nonempty_subsets(J)) {
        o.require(core_by_stages(*A, S, K, J, rng, 4).passed, std::string("core by stages on ") + f);
        ++stages;
      }
  }
  std::size_t pairs = 0;
  for (const char* f : {"twisted_n3_a.json", "twisted_n4_a.json"}) {
    auto A = oracle::load_atlas(f);
    for (int t = 0; t < 3; ++t) {
      std::map<int, Gauge> a, b;
      for (std::size_t p = 0; p < A->base().size(); ++p) {
        a[static_cast<int>(p)] = random_gauge(A->dims(), rng);
        b[static_cast<int>(p)] = random_gauge(A->dims(), rng);
      }
      BundleMorphism ma = morphism_from_canonical(A, A, a), mb = morphism_from_canonical(A, A, b);
      const IndexSet S = IndexSet::range(A->n());
      for (const auto& J : nonempty_subsets(S)) {
        if (J.size() < 2) continue;
        o.require(morphism_equal(core_morphism(compose(ma, mb), S, J),
                                 compose(core_morphism(ma, S, J), core_morphism(mb, S, J))),
                  "core functor breaks composition");
        ++pairs;
      }
    }
  }
  if (o.pass)
    o.note = std::to_string(checked) + " decomposed cores, " + std::to_string(stages) + " stage pairs, " +
             std::to_string(pairs) + " functoriality checks";
  return o;
}

// ---------------------------------------------------------------- 7, 8, 9
struct Corpus {
  std::vector<std::string> names;
  std::vector<std::shared_ptr<const AtlasPresentation>> atlases;
  std::vector<Decomposition> least, uniform;
};

Outcome decompositions(Corpus& cp) {
  Outcome o;
  const auto t0 = Clock::now();
  for (const auto& f : oracle::atlas_fixtures()) {
    auto A = oracle::load_atlas(f);
    bool in_scope = A->n() <= 4 && A->charts().size() <= 3 && A->base().size() <= 4;
    for (std::size_t s = 0; s < layout(A->n()).count(); ++s) in_scope = in_scope && A->dims()[s] <= 2;
    if (!in_scope) continue;
    cp.names.push_back(f);
    cp.atlases.push_back(A);
    for (auto st : {PasteStrategy::LeastChart, PasteStrategy::Uniform}) {
      Decomposition d = decompose(A, SplitOptions{st, {}, true});
      o.require(check_decomposition(d).passed, "decomposition check fails on " + f);
      o.require(fiberwise_bijective(d.m), "not fiberwise bijective on " + f);
      o.require(identity_on_building_bundles(d), "not the identity on building bundles on " + f);
      (st == PasteStrategy::LeastChart ? cp.least : cp.uniform).push_back(std::move(d));
    }
  }
  const double t = seconds_since(t0);
  o.require(t < 300.0, "corpus took longer than 5 min");
  if (o.pass) o.note = std::to_string(cp.names.size()) + " fixtures x 2 strategies in " + std::to_string(t) + " s";
  return o;
}

Outcome torsors(const Corpus& cp) {
  Outcome o;
  Rng rng(1008);
  for (std::size_t q = 0; q < cp.names.size(); ++q) {
    const auto& A = cp.atlases[q];
    BundleMorphism tau = torsor(cp.least[q], cp.uniform[q]);
    o.require(check_torsor(cp.least[q], cp.uniform[q], tau).passed, "torsor check on " + cp.names[q]);
    std::map<int, Gauge> at;
    for (std::size_t p = 0; p < A->base().size(); ++p) at[static_cast<int>(p)] = random_statomorphism(A->dims(), rng);
    BundleMorphism phi = morphism_from_canonical(cp.least[q].m.source, cp.least[q].m.source, at);
    Decomposition moved = act(cp.least[q], phi);
    o.require(check_decomposition(moved).passed, "acted decomposition on " + cp.names[q]);
    o.require(morphism_equal(torsor(cp.least[q], moved), phi), "act and extract do not round-trip on " + cp.names[q]);
  }
  if (o.pass) o.note = std::to_string(cp.names.size()) + " pairs differ by verified statomorphisms; round trips exact";
  return o;
}

Outcome normalization(const Corpus& cp) {
  Outcome o;
  std::size_t transitions = 0;
  for (std::size_t q = 0; q < cp.names.size(); ++q) {
    for (const auto* d : {&cp.least[q], &cp.uniform[q]}) {
      AtlasPresentation N = normalize_atlas(*cp.atlases[q], *d);
      o.require(validate(N).ok(), "normalized atlas invalid on " + cp.names[q]);
      for (const auto& [key, g] : N.transitions()) {
        o.require(is_block_diagonal(g), "non-block-diagonal transition on " + cp.names[q]);
        ++transitions;
      }
    }
  }
  if (o.pass) o.note = std::to_string(transitions) + " normalized transitions block-diagonal; atlases validate";
  return o;
}

// ---------------------------------------------------------------- 10
Outcome sections() {
  Outcome o;
  std::size_t fixtures = 0;
  for (const auto& f : oracle::atlas_fixtures()) {
    auto T = oracle::load_atlas(f);
    if (T->n() != 3) continue;
    ++fixtures;
    DoublyLinearSequence seq = doubly_linear_sequence(T);
    o.require(seq.exactness.passed, "module sequence not exact on " + f);
    const TripleShape sh(T->dims());
    for (const auto& [p, Tm] : seq.tilde) o.require(oracle::rank(oracle::rows_of(Tm)) == sh.mor2(), "rank count on " + f);
    for (auto st : {PasteStrategy::LeastChart, PasteStrategy::Uniform}) {
      Decomposition S = decompose(T, SplitOptions{st, {}, true});
      o.require(lift_round_trip(T, S).passed, "lift round trip on " + f);
      LiftData data = lift_from_decomposition(T, S);
      o.require(check_lift_compatibility(T, data).passed, "lift compatibility on " + f);
      if (f.rfind("twisted_", 0) == 0)
        o.require(formula_vs_pipeline(T, splittings_from_lift(T, data), S).passed, "seven-argument formula on " + f);
    }
  }
  if (o.pass) o.note = std::to_string(fixtures) + " triple fixtures: exact sequence, round trips, formula = pipeline";
  return o;
}

// ---------------------------------------------------------------- 11
Outcome tower() {
  Outcome o;
  std::vector<std::shared_ptr<InfinityPresentation>> gens{parse_infinity(oracle::load_json("gen_stabilizing_n3.json"))};
  Rng rng(1011);
  for (int t = 0; t < 2; ++t) {
    GenOptions g;
    g.n = 3;
    g.charts = 2;
    g.points = 2;
    g.max_dim = 1;
    gens.push_back(InfinityPresentation::stabilizing(random_instance(g, rng)));
  }
  for (const auto& X : gens) {
    TowerDecomposition td(X);
    o.require(td.check_levels({3, 4}).passed, "S(I) depends on the level");
    for (int n : {3, 4})
      o.require(morphism_equal(td.level(n).m, decompose(X->truncate(n)).m), "tower level differs from a fresh decomposition");
  }
  if (o.pass) o.note = std::to_string(gens.size()) + " stabilizing generators, all I in [3], levels 3 and 4";
  return o;
}

// ---------------------------------------------------------------- 12
std::string capture(const std::string& cmd) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return out;
  char buf[4096];
  std::size_t k;
  while ((k = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, k);
  pclose(p);
  return out;
}

Outcome determinism() {
  Outcome o;
  const std::string cli = MVB_CLI_PATH, fx = oracle::fixture_dir() + "/";
  const std::vector<std::string> cmds{
      "decompose " + fx + "twisted_n3_b.json --seed 7",
      "core-stages " + fx + "twisted_n4_c.json --k 1 --j 1,2 --seed 7",
      "torsor " + fx + "twisted_n2_b.json --seed 7",
      "ultracore " + fx + "twisted_n4_b.json --k 2 --seed 7",
  };
  for (const auto& c : cmds) {
    const std::string a = capture(cli + " " + c), b = capture(cli + " " + c);
    json ja, jb;
    try {
      ja = json::parse(a);
      jb = json::parse(b);
    } catch (...) {
      o.require(false, "unparsable report for: " + c);
      continue;
    }
    o.require(ja["report_hash"] == jb["report_hash"], "hash differs for: " + c);
    o.require(ja["status"] == "ok", "command failed: " + c);
  }
  if (o.pass) o.note = std::to_string(cmds.size()) + " commands, identical report hashes across two runs";
  return o;
}

}  // namespace

int main() {
  Corpus cp;
  std::vector<std::pair<int, std::function<Outcome()>>> crit{
      {1, partitions_count},
      {2, gauge_group},
      {3, cocycle},
      {4, interchange},
      {5, pullback_ultracore},
      {6, cores},
      {7, [&] { return decompositions(cp); }},
      {8, [&] { return torsors(cp); }},
      {9, [&] { return normalization(cp); }},
      {10, sections},
      {11, tower},
      {12, determinism},
  };
  int failed = 0;
  for (auto& [k, run] : crit) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note = std::string("exception: ") + e.what();
    }
    std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.note << std::endl;
    if (!o.pass) ++failed;
  }
  return failed ? 1 : 0;
}
