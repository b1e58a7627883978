#include "doctest.h"
#include "oracles.hpp"

#include "mvb/corepull.hpp"
#include "mvb/generate.hpp"

using namespace mvb;

TEST_CASE("cores of decomposed bundles carry the building spaces over the diagonal cube") {
  // E^S_J is the sum of the A_K with J inside K inside S; over the diagonal
  // cube the node of a family of blocks carries A of their union.
  for (const char* f : {"decomposed_n3.json", "decomposed_n4.json", "decomposed_n2.json"}) {
    auto A = oracle::load_atlas(f);
    const int n = A->n();
    for (const auto& S : nonempty_subsets(IndexSet::range(n)))
      for (const auto& J : nonempty_subsets(S)) {
        CAPTURE(S.str());
        CAPTURE(J.str());
        AtlasPresentation C = core(*A, S, J);
        DiagonalPartition rho(S, J);
        const CubeLayout& L = layout(C.n());
        for (std::size_t s = 0; s < L.count(); ++s) {
          IndexSet u;
          for (int q : L.subsets[s]) u = u.unite(rho.as_partition()[q - 1]);
          CHECK(C.dims()[s] == A->dims().dim(u));
        }
        for (const auto& [key, g] : C.transitions()) CHECK(g == Gauge::identity(C.dims()));
        // top fiber: the A_K with J inside K inside S, plus the base E_{S-J}
        std::size_t want = oracle::fiber_dim(A->dims(), S.minus(J).elements());
        for (const auto& K : nonempty_subsets(S))
          if (J.subset_of(K)) want += A->dims().dim(K);
        CHECK(C.dims().node_dim(IndexSet::range(C.n())) == want);
      }
  }
}

TEST_CASE("cores of twisted bundles are closed and valid") {
  for (const char* f : {"twisted_n3_b.json", "twisted_n4_a.json", "twisted_n2_b.json"}) {
    auto A = oracle::load_atlas(f);
    for (const auto& S : nonempty_subsets(IndexSet::range(A->n())))
      for (const auto& J : nonempty_subsets(S)) {
        Certificate c = core_closure(*A, S, J);
        CHECK(c.passed);
        CHECK(validate(core(*A, S, J)).ok());
      }
  }
}

TEST_CASE("core elements are detected") {
  Rng rng(51);
  auto A = oracle::load_atlas("twisted_n3_a.json");
  const IndexSet S{1, 2, 3}, J{1, 2};
  BundleElement e = random_element(*A, S, 0, 0, rng);
  BundleElement z = zero_lift(*A, zero_element(*A, IndexSet{3}, 0), S);
  CHECK(in_core(*A, z, S, J));
  // a generic element does not project to zeros
  bool generic_out = !in_core(*A, e, S, J) || A->dims().node_dim(S) == A->dims().dim(S);
  CHECK(generic_out);
}

TEST_CASE("core by stages") {
  Rng rng(52);
  for (const char* f : {"twisted_n3_b.json", "twisted_n4_c.json"}) {
    auto A = oracle::load_atlas(f);
    const int n = A->n();
    const IndexSet S = IndexSet::range(n);
    for (const auto& J : nonempty_subsets(S))
      for (const auto& K : nonempty_subsets(J)) {
        if (K.size() < 2 && J.size() < 2) continue;
        CAPTURE(J.str());
        CAPTURE(K.str());
        CHECK(core_by_stages(*A, S, K, J, rng, 8).passed);
      }
  }
}

TEST_CASE("core functor respects composition") {
  Rng rng(53);
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
        BundleMorphism lhs = core_morphism(compose(ma, mb), S, J);
        BundleMorphism rhs = compose(core_morphism(ma, S, J), core_morphism(mb, S, J));
        CHECK(morphism_equal(lhs, rhs));
        CHECK(morphism_equal(core_morphism(identity_morphism(A), S, J), identity_morphism(lhs.source)));
      }
    }
  }
}

TEST_CASE("n-pullback projection is surjective with the expected fiber") {
  for (const auto& f : oracle::atlas_fixtures()) {
    auto A = oracle::load_atlas(f);
    if (A->n() < 2) continue;
    CAPTURE(f);
    PullbackPresentation pb = pullback(A);
    CHECK(pullback_surjective(pb).passed);
    const int n = A->n();
    const std::size_t total = A->dims().node_dim(IndexSet::range(n));
    CHECK(pb.P->dims().node_dim(IndexSet::range(n)) == total - A->dims().dim(IndexSet::range(n)));
  }
}

TEST_CASE("ultracore sequence: 7 = 1 + 6 for n = 3 with unit dims") {
  Rng rng(54);
  auto A = oracle::load_atlas("twisted_n3_ones.json");
  for (int k = 1; k <= 3; ++k) {
    UltracoreSequence seq = ultracore_sequence(A, k, rng);
    CHECK(seq.exactness.passed);
    CHECK(seq.exactness.witnesses["dim_E"] == 7);
    CHECK(seq.exactness.witnesses["dim_ultracore"] == 1);
    CHECK(seq.exactness.witnesses["dim_P"] == 6);
  }
}

TEST_CASE("ultracore sequence on the corpus, orderings compared") {
  Rng rng(55);
  for (const auto& f : oracle::atlas_fixtures()) {
    auto A = oracle::load_atlas(f);
    if (A->n() < 2) continue;
    CAPTURE(f);
    UltracoreSequence seq = ultracore_sequence(A, A->n(), rng, 3);
    CHECK(seq.exactness.passed);
    const std::size_t want = A->n() >= 4 ? 3 : (A->n() == 3 ? 2 : 1);
    CHECK(seq.exactness.witnesses["orderings"].size() == want);
  }
}

TEST_CASE("nested zero sums and the kernel retraction are inverse") {
  Rng rng(56);
  auto A = oracle::load_atlas("twisted_n4_b.json");
  const int k = 2;
  const IndexSet top = IndexSet::range(4), base_node = top.without(k);
  BundleElement b = random_element(*A, base_node, 0, 0, rng);
  BundleElement z{top, 0, 0, zero_coords(A->dims())};
  const int ts = layout(4).index(top);
  for (auto& x : z.comps[ts]) x = rng.small_rational();
  for (const auto& order : std::vector<std::vector<int>>{{1, 3, 4}, {4, 3, 1}, {3, 1, 4}}) {
    BundleElement e = iota_element(*A, k, z, b, order);
    CHECK(equal(*A, project(*A, e, k), b));
    CHECK(equal(*A, kernel_retraction(*A, k, e, order), z));
  }
}

TEST_CASE("ultracore rejects a bad index") {
  Rng rng(57);
  auto A = oracle::load_atlas("twisted_n3_a.json");
  CHECK_THROWS(ultracore_sequence(A, 4, rng));
}
