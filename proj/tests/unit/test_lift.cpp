#include "doctest.h"
#include "oracles.hpp"

#include "mvb/corepull.hpp"
#include "mvb/errors.hpp"
#include "mvb/generate.hpp"
#include "mvb/lift.hpp"

using namespace mvb;

namespace {

std::shared_ptr<const AtlasPresentation> triple(const char* f) { return oracle::load_atlas(f); }

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.small_rational();
  return m;
}

// dimension of double morphisms D -> S: one tensor per partition of {1,2}
std::size_t mor2_oracle(const DimAssignment& d) {
  std::size_t total = 0;
  for (const auto& rho : oracle::partitions_of({1, 2})) {
    std::size_t v = d.dim({1, 2, 3});
    for (const auto& blk : rho) v *= d.dim(IndexSet(blk));
    total += v;
  }
  return total;
}

}  // namespace

TEST_CASE("linear sections of a double bundle") {
  Rng rng(71);
  auto D = triple("twisted_n2_b.json");
  const auto d1 = D->dims().dim({1}), d12 = D->dims().dim({1, 2});
  for (std::size_t p = 0; p < D->base().size(); ++p) {
    const int pi = static_cast<int>(p);
    LinearSection z = tilde(*D, pi, Matrix(d12, d1));
    for (const auto& x : flatten(z)) CHECK(x == 0);
    const Matrix phi = random_matrix(d12, d1, rng), psi = random_matrix(d12, d1, rng);
    LinearSection a = tilde(*D, pi, phi), b = tilde(*D, pi, psi);
    // the core part reads back and the base section is zero
    CHECK(a.X == phi);
    for (const auto& x : a.b) CHECK(x == 0);
    LinearSection ab = combine(*D, pi, Rational(2), a, Rational(-1), b);
    Matrix mix(d12, d1);
    for (std::size_t i = 0; i < d12; ++i)
      for (std::size_t j = 0; j < d1; ++j) mix(i, j) = Rational(2) * phi(i, j) - psi(i, j);
    CHECK(flatten(ab) == flatten(tilde(*D, pi, mix)));
    CHECK(flatten(unflatten_linear(*D, flatten(ab))) == flatten(ab));
  }
  CHECK_THROWS_AS(tilde(*D, 0, Matrix(d12 + 1, d1)), DimensionMismatch);
}

TEST_CASE("sections module laws") {
  Rng rng(72);
  auto D = triple("twisted_n2_a.json");
  Splitting s = find_splitting(D);
  const auto d2 = D->dims().dim({2});
  Vector b(d2), c(d2);
  for (auto& x : b) x = rng.small_rational();
  for (auto& x : c) x = rng.small_rational();
  const LinearSection hb = hat(*D, 0, b, s), hc = hat(*D, 0, c, s);
  CHECK(hb.b == b);
  // f(s1 + s2) = f s1 + f s2 and (f + g) s = f s + g s
  const Rational f(3, 2), g(-2);
  const LinearSection sum = combine(*D, 0, Rational(1), hb, Rational(1), hc);
  CHECK(flatten(combine(*D, 0, f, sum, Rational(0), hb)) ==
        flatten(combine(*D, 0, f, hb, f, hc)));
  CHECK(flatten(combine(*D, 0, f + g, hb, Rational(0), hc)) == flatten(combine(*D, 0, f, hb, g, hb)));
  // hat is linear in b for a fixed splitting
  Vector bc = b;
  for (std::size_t i = 0; i < d2; ++i) bc[i] += c[i];
  CHECK(flatten(hat(*D, 0, bc, s)) == flatten(sum));
}

TEST_CASE("fat sequence is exact") {
  for (const char* f : {"twisted_n2_a.json", "twisted_n2_b.json", "twisted_n2_ones.json", "decomposed_n2.json"}) {
    CAPTURE(f);
    Certificate c = fat_sequence(triple(f));
    CHECK(c.passed);
  }
  CHECK_THROWS_AS(fat_sequence(triple("twisted_n3_a.json")), InvalidArgument);
}

TEST_CASE("local splittings of double bundles") {
  for (const char* f : {"twisted_n2_a.json", "twisted_n2_b.json", "twisted_n2_ones.json"}) {
    auto D = triple(f);
    CAPTURE(f);
    for (auto st : {PasteStrategy::LeastChart, PasteStrategy::Uniform}) {
      LocalSplitOptions o;
      o.strategy = st;
      Splitting s = local_split_double(D, o);
      CHECK(check_splitting(s).passed);
    }
    LocalSplitOptions lin;
    lin.sigma = [](const AtlasPresentation& A, int chart, int, const Vector& a, const Vector&) {
      Vector out(A.dims().dim({1, 2}));
      for (std::size_t i = 0; i < out.size() && i < a.size(); ++i) out[i] = a[i] * Rational(chart + 2);
      return out;
    };
    Splitting s = local_split_double(D, lin);
    CHECK(check_splitting(s).passed);
    // the only core of a double bundle is an ordinary bundle
    auto C = std::make_shared<const AtlasPresentation>(core(*D, IndexSet{1, 2}, IndexSet{1, 2}));
    Decomposition d = splitting_to_decomposition(D, s, {{IndexSet{1, 2}, identity_decomposition(C)}});
    CHECK(check_decomposition(d).passed);
    LocalSplitOptions bad;
    bad.sigma = [](const AtlasPresentation& A, int, int, const Vector& a, const Vector&) {
      Vector out(A.dims().dim({1, 2}));
      if (!out.empty() && !a.empty()) out[0] = a[0] * a[0] + Rational(1);
      return out;
    };
    if (D->dims().dim({1}) > 0 && D->dims().dim({1, 2}) > 0) CHECK_THROWS_AS(local_split_double(D, bad), SemanticError);
  }
}

TEST_CASE("doubly linear sequence: dimensions from the partition count") {
  for (const char* f : {"twisted_n3_a.json", "twisted_n3_b.json", "twisted_n3_ones.json", "decomposed_n3.json"}) {
    auto T = triple(f);
    CAPTURE(f);
    DoublyLinearSequence seq = doubly_linear_sequence(T);
    CHECK(seq.exactness.passed);
    const TripleShape sh(T->dims());
    CHECK(sh.mor2() == mor2_oracle(T->dims()));
    CHECK(seq.exactness.witnesses["dim_mor2"] == sh.mor2());
    for (const auto& [p, Tm] : seq.tilde) {
      CHECK(oracle::rank(oracle::rows_of(Tm)) == sh.mor2());
      CHECK(Tm.rows() == sh.sections());
    }
  }
  auto ones = triple("twisted_n3_ones.json");
  CHECK(TripleShape(ones->dims()).mor2() == 2);
}

TEST_CASE("doubly linear sections evaluate consistently") {
  Rng rng(73);
  auto T = triple("twisted_n3_b.json");
  const TripleShape sh(T->dims());
  for (std::size_t p = 0; p < T->base().size(); ++p) {
    Vector v(sh.sections());
    for (auto& x : v) x = rng.small_rational();
    DoublyLinearSection s = unflatten_section(sh, v);
    CHECK(flatten(s) == v);
    const int pi = static_cast<int>(p);
    DoublyLinearSection r = read_doubly_linear(*T, pi, [&](const Coords& d) { return evaluate(*T, pi, s, d); });
    CHECK(flatten(r) == v);
    SectionPair xi = project_pair(s);
    CHECK(flatten(project_pair(hat(*T, pi, xi))) == flatten(xi));
    Mor2 zero = unflatten_mor2(sh, Vector(sh.mor2()));
    CHECK(flatten(project_pair(tilde(*T, pi, zero))) == Vector(sh.pairs()));
  }
}

TEST_CASE("horizontal lifts and decompositions determine each other") {
  for (const char* f : {"twisted_n3_a.json", "twisted_n3_b.json", "twisted_n3_ones.json"}) {
    auto T = triple(f);
    CAPTURE(f);
    for (auto st : {PasteStrategy::LeastChart, PasteStrategy::Uniform}) {
      Decomposition S = decompose(T, SplitOptions{st, {}, true});
      LiftData data = lift_from_decomposition(T, S);
      CHECK(check_lift_compatibility(T, data).passed);
      CHECK(lift_round_trip(T, S).passed);
      TripleSplittings sp = splittings_from_lift(T, data);
      CHECK(formula_vs_pipeline(T, sp, S).passed);
      Decomposition back = decomposition_from_lift(T, data);
      CHECK(morphism_equal(back.m, S.m));
      CHECK(lift_data_equal(lift_from_decomposition(T, back), data));
    }
  }
}

TEST_CASE("decomposed triple bundles lift to the identity") {
  auto T = triple("decomposed_n3.json");
  Decomposition S = identity_decomposition(T);
  CHECK(check_decomposition(S).passed);
  LiftData data = lift_from_decomposition(T, S);
  CHECK(check_lift_compatibility(T, data).passed);
  Decomposition back = decomposition_from_lift(T, data);
  for (const auto& [key, g] : back.m.data) CHECK(g == Gauge::identity(T->dims()));
}

TEST_CASE("a perturbed lift breaks compatibility") {
  auto T = triple("twisted_n3_ones.json");
  const TripleShape sh(T->dims());
  REQUIRE(sh.mor2() > 0);
  REQUIRE(sh.ca * sh.a > 0);
  LiftData data = lift_from_decomposition(T, decompose(T));
  Matrix& sig = data.lift.sigma.begin()->second;
  // column of the first phi^F instance, a row inside the Mor2 block
  sig(sh.pairs(), sh.c) += Rational(1);
  CHECK(!check_lift_compatibility(T, data).passed);
  Matrix& sig2 = data.lift.sigma.begin()->second;
  sig2(0, 0) += Rational(1);
  CHECK(!check_lift_compatibility(T, data).passed);
  data.lift.sigma.clear();
  CHECK_THROWS_AS(check_lift_compatibility(T, data), SemanticError);
}

TEST_CASE("face and core families") {
  CHECK(triple_family("LEF").k() == 2);
  CHECK(triple_family("D").unite(IndexSet{1, 2}) == IndexSet{1, 2});
  CHECK_THROWS_AS(triple_family("G"), InvalidArgument);
}
