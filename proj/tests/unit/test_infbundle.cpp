#include "doctest.h"
#include "oracles.hpp"

#include <thread>

#include "mvb/errors.hpp"
#include "mvb/format.hpp"
#include "mvb/infbundle.hpp"

using namespace mvb;

namespace {

std::shared_ptr<InfinityPresentation> load_gen(const char* f) { return parse_infinity(oracle::load_json(f)); }

}  // namespace

TEST_CASE("truncation to level 0 is the base") {
  auto X = load_gen("gen_stabilizing_n3.json");
  auto A0 = X->truncate(0);
  CHECK(A0->n() == 0);
  CHECK(validate(*A0).ok());
  CHECK_THROWS_AS(X->truncate(-1), InvalidArgument);
}

TEST_CASE("stabilizing tower: levels are valid and vanish beyond N") {
  auto X = load_gen("gen_stabilizing_n3.json");
  auto A3 = X->truncate(3);
  for (int n = 0; n <= 5; ++n) {
    auto A = X->truncate(n);
    CAPTURE(n);
    CHECK(A->n() == n);
    CHECK(validate(*A).ok());
    const CubeLayout& L = layout(n);
    for (std::size_t s = 0; s < L.count(); ++s) {
      const IndexSet& J = L.subsets[s];
      if (J.subset_of(IndexSet::range(3)))
        CHECK(A->dims()[s] == A3->dims().dim(J));
      else
        CHECK(A->dims()[s] == 0);
    }
  }
  CHECK(X->truncate(4) == X->truncate(4));  // memoized
}

TEST_CASE("lower truncations are faces of higher ones") {
  for (const char* f : {"gen_stabilizing_n3.json", "gen_rule.json"}) {
    auto X = load_gen(f);
    CAPTURE(f);
    for (int n = 1; n <= 3; ++n) {
      std::vector<IndexSet> bl;
      for (int i = 1; i <= n; ++i) bl.push_back(IndexSet{i});
      CHECK(subbundle(*X->truncate(n + 1), BlockFamily(n + 1, bl)) == *X->truncate(n));
    }
  }
}

TEST_CASE("rule generator: dims by cardinality") {
  auto X = load_gen("gen_rule.json");
  CHECK(X->kind() == "rule");
  auto A = X->truncate(4);
  CHECK(validate(*A).ok());
  const CubeLayout& L = layout(4);
  for (std::size_t s = 0; s < L.count(); ++s) CHECK(A->dims()[s] == (L.subsets[s].size() <= 2 ? 1u : 0u));
  CHECK(!A->transitions().empty());
}

TEST_CASE("tower decompositions agree across levels 3 and 4") {
  for (const char* f : {"gen_stabilizing_n3.json", "gen_rule.json"}) {
    auto X = load_gen(f);
    CAPTURE(f);
    TowerDecomposition tower(X);
    Certificate c = tower.check_levels({3, 4});
    CHECK(c.passed);
    CHECK(check_decomposition(tower.level(4)).passed);
    // against an independent decomposition of the level-3 truncation
    Decomposition alone = decompose(X->truncate(3));
    CHECK(morphism_equal(alone.m, tower.level(3).m));
  }
}

TEST_CASE("tower shares its cache") {
  auto X = load_gen("gen_rule.json");
  TowerDecomposition tower(X);
  tower.level(3);
  const std::size_t after3 = tower.cached_tensors();
  tower.level(3);
  CHECK(tower.cached_tensors() == after3);
  tower.level(4);
  CHECK(tower.cached_tensors() >= after3);
  CHECK_THROWS_AS(tower.evaluate(IndexSet{4}, 3), InvalidArgument);
}

TEST_CASE("generator JSON round trip") {
  for (const char* f : {"gen_stabilizing_n3.json", "gen_rule.json"}) {
    auto X = load_gen(f);
    const json j = X->to_json();
    CHECK(parse_infinity(j)->to_json() == j);
  }
  CHECK_THROWS_AS(parse_infinity(json{{"kind", "other"}}), SchemaError);
  json bad = oracle::load_json("gen_rule.json");
  bad["transition_rule"]["kind"] = "shear";
  CHECK_THROWS_AS(parse_infinity(bad), SchemaError);
}

TEST_CASE("concurrent truncation returns one instance") {
  auto X = load_gen("gen_rule.json");
  std::vector<std::shared_ptr<const AtlasPresentation>> got(4);
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t) ts.emplace_back([&, t] { got[t] = X->truncate(5); });
  for (auto& t : ts) t.join();
  for (const auto& g : got) CHECK(g == got[0]);
}
