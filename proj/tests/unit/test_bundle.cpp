#include "doctest.h"
#include "oracles.hpp"

#include "mvb/bundle.hpp"
#include "mvb/generate.hpp"

using namespace mvb;

namespace {

// Element of E_I over p in chart c with prescribed components where given,
// random elsewhere.
BundleElement element(const AtlasPresentation& A, const IndexSet& I, int c, int p,
                      const std::map<IndexSet, Vector>& fixed, Rng& rng) {
  const CubeLayout& L = layout(A.n());
  std::map<IndexSet, Vector> comps;
  for (std::size_t s = 0; s < L.count(); ++s) {
    if (!L.subsets[s].subset_of(I)) continue;
    auto it = fixed.find(L.subsets[s]);
    if (it != fixed.end()) {
      comps[L.subsets[s]] = it->second;
    } else {
      Vector v(A.dims()[s]);
      for (auto& x : v) x = rng.small_rational();
      comps[L.subsets[s]] = v;
    }
  }
  return make_element(A, I, c, p, comps);
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

}  // namespace

TEST_CASE("interchange law on every square face of the fixtures") {
  Rng rng(41);
  for (const auto& f : oracle::atlas_fixtures()) {
    auto A = oracle::load_atlas(f);
    CAPTURE(f);
    const CubeLayout& L = layout(A->n());
    for (const auto& I : L.subsets)
      for (int i : I)
        for (int j : I) {
          if (i >= j) continue;
          for (int t = 0; t < 3; ++t) {
            const int p = static_cast<int>(rng.range(0, static_cast<long>(A->base().size()) - 1));
            const int c = A->canonical_chart(p);
            std::map<IndexSet, Vector> common, u1, u2, v1, v2;
            for (std::size_t s = 0; s < L.count(); ++s) {
              const IndexSet& K = L.subsets[s];
              if (!K.subset_of(I)) continue;
              const bool hi = K.contains(i), hj = K.contains(j);
              if (!hi && !hj) common[K] = rand_vec(A->dims()[s], rng);
              if (hj && !hi) {
                u1[K] = rand_vec(A->dims()[s], rng);
                u2[K] = rand_vec(A->dims()[s], rng);
              }
              if (hi && !hj) {
                v1[K] = rand_vec(A->dims()[s], rng);
                v2[K] = rand_vec(A->dims()[s], rng);
              }
            }
            auto merge = [&](std::map<IndexSet, Vector> a, const std::map<IndexSet, Vector>& b,
                             const std::map<IndexSet, Vector>& d) {
              a.insert(b.begin(), b.end());
              a.insert(d.begin(), d.end());
              return a;
            };
            // d1,d2 agree off i; d1,d3 agree off j
            auto d1 = transport(*A, element(*A, I, c, p, merge(common, u1, v1), rng), random_chart(*A, p, rng));
            auto d2 = transport(*A, element(*A, I, c, p, merge(common, u1, v2), rng), random_chart(*A, p, rng));
            auto d3 = transport(*A, element(*A, I, c, p, merge(common, u2, v1), rng), random_chart(*A, p, rng));
            auto d4 = transport(*A, element(*A, I, c, p, merge(common, u2, v2), rng), random_chart(*A, p, rng));
            auto lhs = add(*A, add(*A, d1, d2, i), add(*A, d3, d4, i), j);
            auto rhs = add(*A, add(*A, d1, d3, j), add(*A, d2, d4, j), i);
            CHECK(equal(*A, lhs, rhs));
          }
        }
  }
}

TEST_CASE("each addition is a vector bundle structure") {
  Rng rng(42);
  auto A = oracle::load_atlas("twisted_n3_b.json");
  const IndexSet top = IndexSet::range(3);
  for (int t = 0; t < 20; ++t) {
    const int p = static_cast<int>(rng.range(0, 2));
    const int i = static_cast<int>(rng.range(1, 3));
    BundleElement a = random_element(*A, top, random_chart(*A, p, rng), p, rng);
    // b, c over the same point of E_{top - i} as a
    auto same_base = [&](const BundleElement& x) {
      BundleElement y = transport(*A, x, random_chart(*A, p, rng));
      BundleElement r = random_element(*A, top, y.chart, p, rng);
      const CubeLayout& L = layout(3);
      for (std::size_t s = 0; s < L.count(); ++s)
        if (!L.subsets[s].contains(i)) r.comps[s] = y.comps[s];
      return r;
    };
    BundleElement b = same_base(a), c = same_base(a);
    CHECK(equal(*A, add(*A, a, b, i), add(*A, b, a, i)));
    CHECK(equal(*A, add(*A, add(*A, a, b, i), c, i), add(*A, a, add(*A, b, c, i), i)));
    BundleElement z = zero_lift(*A, project(*A, a, i), top);
    (void)z;
    BundleElement zero = scale(*A, Rational(0), a, i);
    CHECK(equal(*A, add(*A, a, zero, i), a));
    CHECK(equal(*A, subtract(*A, a, a, i), zero));
    const Rational r(2, 3), s(-3);
    CHECK(equal(*A, scale(*A, r + s, a, i), add(*A, scale(*A, r, a, i), scale(*A, s, a, i), i)));
    CHECK(equal(*A, scale(*A, r, add(*A, a, b, i), i), add(*A, scale(*A, r, a, i), scale(*A, r, b, i), i)));
    // projections along other indices are morphisms for +_i
    for (int j = 1; j <= 3; ++j) {
      if (j == i) continue;
      CHECK(equal(*A, project(*A, add(*A, a, b, i), j), add(*A, project(*A, a, j), project(*A, b, j), i)));
    }
    // the projection along i ignores the +_i sum
    CHECK(equal(*A, project(*A, add(*A, a, b, i), i), project(*A, a, i)));
  }
}

TEST_CASE("transport is consistent") {
  Rng rng(43);
  auto A = oracle::load_atlas("twisted_n4_b.json");
  for (int t = 0; t < 20; ++t) {
    const int p = static_cast<int>(rng.range(0, 2));
    BundleElement e = random_element(*A, IndexSet::range(4), random_chart(*A, p, rng), p, rng);
    const int c = random_chart(*A, p, rng);
    BundleElement f = transport(*A, e, c);
    CHECK(f.chart == c);
    CHECK(equal(*A, e, f));
    CHECK(coords_equal(transport(*A, f, e.chart).comps, e.comps));
    CHECK(coords_equal(canonical(*A, e).comps, canonical(*A, f).comps));
  }
}

TEST_CASE("projections commute") {
  Rng rng(44);
  auto A = oracle::load_atlas("twisted_n3_a.json");
  BundleElement e = random_element(*A, IndexSet::range(3), 0, 0, rng);
  CHECK(equal(*A, project(*A, project(*A, e, 1), 2), project(*A, project(*A, e, 2), 1)));
  CHECK(equal(*A, project_to(*A, e, IndexSet{3}), project(*A, project(*A, e, 1), 2)));
}

TEST_CASE("faces are valid and have the restricted dimensions") {
  auto A = oracle::load_atlas("twisted_n4_c.json");
  for (const auto& I : nonempty_subsets(IndexSet::range(4)))
    for (const auto& J : subsets(I)) {
      if (J == I) continue;
      AtlasPresentation F = face(*A, I, J);
      CHECK(validate(F).ok());
      CHECK(F.n() == static_cast<int>(I.size() - J.size()));
    }
  AtlasPresentation F = face(*A, IndexSet{1, 3}, IndexSet{});
  CHECK(F.dims().dim(IndexSet{1, 2}) == A->dims().dim(IndexSet{1, 3}));
  CHECK_THROWS(face(*A, IndexSet{1}, IndexSet{2}));
}

TEST_CASE("hom bundle and tangent prolongation are valid") {
  auto E = oracle::load_atlas("decomposed_n2.json");
  auto T = oracle::load_atlas("twisted_n2_a.json");
  AtlasPresentation H = hom_bundle(*E, *E);
  CHECK(validate(H).ok());
  AtlasPresentation P = tangent_prolongation(*T);
  CHECK(P.n() == 3);
  CHECK(validate(P).ok());
  CHECK(P.dims().dim(IndexSet{3}) == 0);  // finite base: no tangent directions
}

TEST_CASE("hom elements act linearly") {
  Rng rng(45);
  auto E = oracle::load_atlas("decomposed_n2.json");
  AtlasPresentation H = hom_bundle(*E, *E);
  BundleElement phi = random_element(H, IndexSet{1, 2}, 0, 0, rng);
  BundleElement e = random_element(*E, IndexSet{1, 2}, 0, 0, rng);
  BundleElement out = hom_evaluate(*E, *E, phi, e);
  CHECK(out.node == IndexSet{1, 2});
  Gauge g = hom_element_gauge(*E, *E, phi);
  CHECK(coords_equal(canonical(*E, out).comps, g.evaluate(canonical(*E, e).comps)));
}

TEST_CASE("morphisms: identity, composition, naturality") {
  Rng rng(46);
  auto A = oracle::load_atlas("twisted_n3_b.json");
  BundleMorphism id = identity_morphism(A);
  CHECK(naturality_violations(id).empty());
  CHECK(fiberwise_bijective(id));
  std::map<int, Gauge> at;
  for (std::size_t p = 0; p < A->base().size(); ++p) at[static_cast<int>(p)] = random_statomorphism(A->dims(), rng);
  auto D = std::make_shared<const AtlasPresentation>(associated_decomposed(*A));
  BundleMorphism m = morphism_from_canonical(A, A, at);
  CHECK(naturality_violations(m).empty());
  CHECK(morphism_equal(compose(m, id), m));
  CHECK(morphism_equal(compose(id, m), m));
  BundleElement e = random_element(*A, IndexSet::range(3), 1, 1, rng);
  CHECK(equal(*A, apply(compose(m, m), e), apply(m, apply(m, e))));
  // breaking one chart entry breaks naturality
  BundleMorphism bad = m;
  auto it = bad.data.begin();
  while (it != bad.data.end() && A->charts_at(it->first.second).size() < 2) ++it;
  REQUIRE(it != bad.data.end());
  it->second.component(0, 0).entries()[0] += Rational(1);
  CHECK(!naturality_violations(bad).empty());
  (void)D;
}
