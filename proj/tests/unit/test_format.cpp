#include "doctest.h"
#include "oracles.hpp"

#include <fstream>
#include <sstream>

#include "mvb/errors.hpp"
#include "mvb/format.hpp"
#include "mvb/generate.hpp"

using namespace mvb;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(oracle::fixture_dir() + "/" + name, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("fixtures survive a parse and serialize cycle byte for byte") {
  for (const auto& f : oracle::atlas_fixtures()) {
    CAPTURE(f);
    const std::string text = slurp(f);
    ParsedAtlas pa = parse_atlas(parse_text(text));
    CHECK(pa.structural.empty());
    CHECK(dump(to_json(pa.atlas)) == text);
  }
}

TEST_CASE("generated atlases round trip") {
  Rng rng(81);
  for (int t = 0; t < 10; ++t) {
    GenOptions o;
    o.n = static_cast<int>(rng.range(1, 3));
    o.charts = 2;
    o.points = 2;
    AtlasPresentation A = random_instance(o, rng);
    const std::string s = dump(to_json(A));
    AtlasPresentation B = parse_atlas(parse_text(s)).atlas;
    CHECK(B == A);
    CHECK(dump(to_json(B)) == s);
  }
}

TEST_CASE("syntax errors carry a byte offset") {
  try {
    parse_text("{\"a\": 1,, }");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.byte_offset() == 9);
  }
  const std::string text = slurp("bad_truncated.json");
  try {
    parse_atlas(parse_text(text));
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.byte_offset() >= 1);
    CHECK(e.byte_offset() <= text.size() + 1);
  }
}

TEST_CASE("schema errors name the tensor") {
  try {
    parse_atlas(oracle::load_json("bad_tensor_length.json"));
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    const std::string w = e.what();
    CHECK(w.find("{1,2}") != std::string::npos);
    CHECK(w.find("{{1},{2}}") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_atlas(json::array()), SchemaError);
  CHECK_THROWS_AS(parse_rational(json("1/0"), "$"), SchemaError);
  CHECK_THROWS_AS(parse_indexset(json{2, 1}, "$"), SchemaError);
}

TEST_CASE("missing dims are structural, not fatal") {
  ParsedAtlas pa = parse_atlas(oracle::load_json("incomplete_dims.json"));
  CHECK(!pa.structural.empty());
}

TEST_CASE("rationals in canonical form") {
  CHECK(to_json(Rational(4, 6)) == json("2/3"));
  CHECK(to_json(Rational(-3)) == json("-3"));
  CHECK(parse_rational(json("-6/4"), "$") == Rational(-3, 2));
  CHECK(parse_rational(json(5), "$") == Rational(5));
}

TEST_CASE("gauges round trip") {
  for (const char* f : {"gauge_stato.json", "gauge_general.json", "gauge_singular.json"}) {
    CAPTURE(f);
    const json j = oracle::load_json(f);
    Gauge g = parse_gauge(j);
    CHECK(parse_gauge(to_json(g)) == g);
  }
  CHECK(is_statomorphism(parse_gauge(oracle::load_json("gauge_stato.json"))));
}

TEST_CASE("morphisms round trip and reject incomplete data") {
  Rng rng(82);
  auto A = oracle::load_atlas("twisted_n3_b.json");
  std::map<int, Gauge> at;
  for (std::size_t p = 0; p < A->base().size(); ++p) at[static_cast<int>(p)] = random_statomorphism(A->dims(), rng);
  BundleMorphism m = morphism_from_canonical(A, A, at);
  const json j = to_json(m);
  BundleMorphism back = parse_morphism(j, A, A);
  CHECK(morphism_equal(back, m));
  json missing = j;
  missing["data"].erase(missing["data"].begin());
  CHECK_THROWS_AS(parse_morphism(missing, A, A), SchemaError);
  json dup = j;
  dup["data"].push_back(dup["data"][0]);
  CHECK_THROWS_AS(parse_morphism(dup, A, A), SchemaError);
}

TEST_CASE("elements round trip") {
  Rng rng(83);
  auto A = oracle::load_atlas("twisted_n2_b.json");
  BundleElement e = random_element(*A, IndexSet{1, 2}, 0, 0, rng);
  BundleElement f = parse_element(*A, to_json(*A, e));
  CHECK(f.node == e.node);
  CHECK(equal(*A, e, f));
}
