#include "doctest.h"
#include "oracles.hpp"

#include "mvb/errors.hpp"
#include "mvb/generate.hpp"
#include "mvb/split.hpp"

using namespace mvb;

namespace {

std::vector<std::string> small_fixtures() {
  std::vector<std::string> out;
  for (const auto& f : oracle::atlas_fixtures())
    if (oracle::load_atlas(f)->n() <= 3) out.push_back(f);
  return out;
}

bool identity_on_building_bundles(const Decomposition& d) {
  for (const auto& [key, g] : d.m.data) {
    const CubeLayout& L = layout(g.n());
    for (std::size_t s = 0; s < L.count(); ++s)
      if (g.source()[s] && !g.linear_part(s).is_identity()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("splittings of the small fixtures, both strategies") {
  for (const auto& f : small_fixtures()) {
    auto A = oracle::load_atlas(f);
    CAPTURE(f);
    for (auto st : {PasteStrategy::LeastChart, PasteStrategy::Uniform}) {
      SplitOptions so;
      so.strategy = st;
      Splitting s = find_splitting(A, so);
      CHECK(check_splitting(s).passed);
      CHECK(fiberwise_injective(s.m));
      CHECK(naturality_violations(s.m).empty());
    }
  }
}

TEST_CASE("decompositions of the small fixtures, both strategies") {
  for (const auto& f : small_fixtures()) {
    auto A = oracle::load_atlas(f);
    CAPTURE(f);
    for (auto st : {PasteStrategy::LeastChart, PasteStrategy::Uniform}) {
      SplitOptions so;
      so.strategy = st;
      Decomposition d = decompose(A, so);
      CHECK(check_decomposition(d).passed);
      CHECK(fiberwise_bijective(d.m));
      CHECK(identity_on_building_bundles(d));
    }
  }
}

TEST_CASE("decomposed input decomposes to the identity") {
  for (const char* f : {"decomposed_n2.json", "decomposed_n3.json", "decomposed_n4.json"}) {
    auto A = oracle::load_atlas(f);
    Decomposition d = decompose(A);
    for (const auto& [key, g] : d.m.data) CHECK(g == Gauge::identity(A->dims()));
  }
}

TEST_CASE("tensors read off the cache agree with the chain construction") {
  auto A = oracle::load_atlas("twisted_n3_b.json");
  SplittingEngine eng(A);
  const Blocks top = singleton_blocks(3);
  Decomposition d = eng.decomposition(top);
  Decomposition a = eng.assembled(top);
  CHECK(morphism_equal(d.m, a.m));
  const std::size_t cached = eng.cached_tensors();
  eng.decomposition(top);
  CHECK(eng.cached_tensors() == cached);  // nothing split twice
}

TEST_CASE("a nonzero theta hook still yields a decomposition") {
  auto A = oracle::load_atlas("twisted_n3_ones.json");
  SplitOptions so;
  so.theta = [](const AtlasPresentation& C, int, int, const Coords& x) {
    const CubeLayout& L = layout(C.n());
    Vector t(C.dims()[L.index(IndexSet::range(C.n()))]);
    const auto& a = x[L.index(IndexSet{1})];
    if (C.n() >= 2 && !t.empty() && !a.empty()) {
      const auto& b = x[L.index(IndexSet{2})];
      t[0] = a[0] * (b.empty() ? Rational(1) : b[0] + Rational(1)) * Rational(3);
    }
    return t;
  };
  Decomposition d = decompose(A, so);
  CHECK(check_decomposition(d).passed);
  Decomposition d0 = decompose(A);
  CHECK(check_torsor(d0, d, torsor(d0, d)).passed);
  CHECK(!morphism_equal(d.m, d0.m));
}

TEST_CASE("splitting and core decompositions rebuild the decomposition") {
  for (const char* f : {"twisted_n3_a.json", "twisted_n3_b.json", "twisted_n2_b.json"}) {
    auto A = oracle::load_atlas(f);
    Decomposition d = decompose(A, SplitOptions{PasteStrategy::Uniform, {}, true});
    Decomposition e = splitting_to_decomposition(A, splitting_of(d), core_decompositions(d));
    CHECK(morphism_equal(d.m, e.m));
  }
}

TEST_CASE("incompatible core decompositions are rejected") {
  auto A = oracle::load_atlas("twisted_n4_c.json");
  REQUIRE(A->dims().dim(IndexSet{3, 4}) > 0);
  Decomposition d = decompose(A);
  auto cores = core_decompositions(d);
  Decomposition& c12 = cores.at(IndexSet{1, 2});
  // change the core decomposition on its face over {3},{4}
  std::map<int, Gauge> at;
  const DimAssignment& cd = c12.m.source->dims();
  const CubeLayout& L = layout(cd.n());
  const int s = L.index(IndexSet{2, 3});
  const int r = L.partition(s, Partition({IndexSet{2}, IndexSet{3}}));
  for (std::size_t p = 0; p < A->base().size(); ++p) {
    Gauge g = Gauge::identity(cd);
    for (auto& e : g.component(s, r).entries()) e = 1;
    at[static_cast<int>(p)] = g;
  }
  c12 = act(c12, morphism_from_canonical(c12.m.source, c12.m.source, at));
  CHECK(check_decomposition(c12).passed);  // still a decomposition of the core
  CHECK_THROWS_AS(splitting_to_decomposition(A, splitting_of(d), cores), SemanticError);
  cores.erase(IndexSet{1, 2});
  CHECK_THROWS_AS(splitting_to_decomposition(A, splitting_of(d), cores), SemanticError);
}

TEST_CASE("decompositions form a torsor under statomorphisms") {
  Rng rng(61);
  for (const char* f : {"twisted_n2_b.json", "twisted_n3_b.json", "twisted_n4_a.json"}) {
    auto A = oracle::load_atlas(f);
    CAPTURE(f);
    Decomposition d1 = decompose(A, SplitOptions{PasteStrategy::LeastChart, {}, true});
    Decomposition d2 = decompose(A, SplitOptions{PasteStrategy::Uniform, {}, true});
    BundleMorphism tau = torsor(d1, d2);
    CHECK(check_torsor(d1, d2, tau).passed);
    CHECK(morphism_equal(compose(d1.m, tau), d2.m));
    std::map<int, Gauge> at;
    for (std::size_t p = 0; p < A->base().size(); ++p) at[static_cast<int>(p)] = random_statomorphism(A->dims(), rng);
    BundleMorphism phi = morphism_from_canonical(d1.m.source, d1.m.source, at);
    Decomposition d3 = act(d1, phi);
    CHECK(check_decomposition(d3).passed);
    CHECK(morphism_equal(torsor(d1, d3), phi));
    for (const auto& [key, g] : phi.data) CHECK(is_statomorphism(g));
  }
}

TEST_CASE("normalized atlases have block-diagonal transitions") {
  for (const char* f : {"twisted_n2_b.json", "twisted_n3_b.json", "twisted_n4_a.json"}) {
    auto A = oracle::load_atlas(f);
    Decomposition d = decompose(A);
    AtlasPresentation N = normalize_atlas(*A, d);
    CHECK(validate(N).ok());
    for (const auto& [key, g] : N.transitions()) CHECK(is_block_diagonal(g));
    CHECK(N.dims() == A->dims());
  }
  auto D = oracle::load_atlas("decomposed_n3.json");
  CHECK(normalize_atlas(*D, decompose(D)) == *D);
}

TEST_CASE("split n-pullback") {
  for (const char* f : {"twisted_n2_a.json", "twisted_n3_b.json", "twisted_n4_b.json"}) {
    auto A = oracle::load_atlas(f);
    CAPTURE(f);
    for (auto st : {PasteStrategy::LeastChart, PasteStrategy::Uniform}) {
      PullbackSplitting ps = split_pullback(A, SplitOptions{st, {}, true});
      CHECK(ps.cert.passed);
      CHECK(fiberwise_injective(ps.sigma));
    }
  }
}

TEST_CASE("splitting checks catch a broken splitting") {
  auto A = oracle::load_atlas("twisted_n3_b.json");
  Splitting s = find_splitting(A);
  auto it = s.m.data.begin();
  it->second.component(0, 0).entries()[0] += Rational(1);
  CHECK(!check_splitting(s).passed);
}

TEST_CASE("strategy names") {
  CHECK(parse_strategy("least-chart") == PasteStrategy::LeastChart);
  CHECK(parse_strategy("uniform-average") == PasteStrategy::Uniform);
  CHECK(std::string(strategy_name(PasteStrategy::Uniform)) == "uniform");
  CHECK_THROWS_AS(parse_strategy("random"), InvalidArgument);
}
