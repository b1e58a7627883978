#include "mvb/infbundle.hpp"

#include <algorithm>

#include "mvb/atlas.hpp"
#include "mvb/errors.hpp"
#include "mvb/format.hpp"

namespace mvb {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) h = (h ^ ch) * 0x100000001b3ULL;
  return h;
}

// same entries for (J, rho) at every truncation level
Gauge hashed_statomorphism(const DimAssignment& dims, std::uint64_t seed, const std::string& chart,
                           const std::string& point) {
  Gauge g = Gauge::identity(dims);
  const CubeLayout& L = layout(dims.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    for (std::size_t r = 1; r < L.partitions[s].size(); ++r) {
      auto& e = g.component(s, r).entries();
      const std::string key = chart + "|" + point + "|" + L.partitions[s][r].str() + "|";
      for (std::size_t q = 0; q < e.size(); ++q)
        e[q] = Rational(static_cast<long>(mix(seed ^ fnv(key + std::to_string(q))) % 5) - 2);
    }
  return g;
}

// Gauge over [N] seen over [n], n >= N, with zero dims on the new subsets.
Gauge widen(const Gauge& g, const DimAssignment& src, const DimAssignment& tgt) {
  const CubeLayout& Ls = layout(g.n());
  const CubeLayout& Lt = layout(src.n());
  Gauge h(src, tgt);
  for (std::size_t s = 0; s < Ls.count(); ++s) {
    const int t = Lt.index(Ls.subsets[s]);
    for (std::size_t r = 0; r < Ls.partitions[s].size(); ++r)
      h.component(t, Lt.partition(t, Ls.partitions[s][r])) = g.component(s, r);
  }
  return h;
}

}  // namespace

std::shared_ptr<InfinityPresentation> InfinityPresentation::stabilizing(const AtlasPresentation& A) {
  require_valid(A);
  std::shared_ptr<InfinityPresentation> X(new InfinityPresentation);
  X->kind_ = "stabilizing";
  X->instance_ = std::make_shared<const AtlasPresentation>(A);
  return X;
}

std::shared_ptr<InfinityPresentation> InfinityPresentation::rule(std::vector<std::size_t> dims_by_size,
                                                                 std::vector<std::string> base,
                                                                 std::vector<Chart> charts, bool twisted,
                                                                 std::uint64_t seed) {
  std::shared_ptr<InfinityPresentation> X(new InfinityPresentation);
  X->kind_ = "rule";
  X->dims_by_size_ = std::move(dims_by_size);
  X->base_ = std::move(base);
  X->charts_ = std::move(charts);
  X->twisted_ = twisted;
  X->seed_ = seed;
  AtlasPresentation probe(DimAssignment(0), X->base_, X->charts_);  // checks base and charts
  return X;
}

std::shared_ptr<const AtlasPresentation> InfinityPresentation::truncate(int n) const {
  if (n < 0) throw InvalidArgument("truncation level must be >= 0");
  std::lock_guard<std::mutex> lock(mu_);
  auto it = memo_.find(n);
  if (it != memo_.end()) return it->second;
  auto P = build(n);
  memo_.emplace(n, P);
  return P;
}

std::shared_ptr<const AtlasPresentation> InfinityPresentation::build(int n) const {
  if (kind_ == "stabilizing") {
    const int N = instance_->n();
    if (n <= N) {
      std::vector<IndexSet> bl;
      for (int i = 1; i <= n; ++i) bl.push_back(IndexSet{i});
      return std::make_shared<const AtlasPresentation>(subbundle(*instance_, BlockFamily(N, bl)));
    }
    DimAssignment d(n);
    const CubeLayout& L = layout(N);
    for (std::size_t s = 0; s < L.count(); ++s) d.set(L.subsets[s], instance_->dims()[s]);
    auto B = std::make_shared<AtlasPresentation>(d, instance_->base(), instance_->charts());
    for (const auto& [key, g] : instance_->transitions()) {
      auto [from, to, p] = key;
      B->set_transition(from, to, p, widen(g, d, d));
    }
    return B;
  }
  DimAssignment d(n);
  const CubeLayout& L = layout(n);
  for (std::size_t s = 0; s < L.count(); ++s) {
    const std::size_t k = L.subsets[s].size();
    d[s] = k <= dims_by_size_.size() ? dims_by_size_[k - 1] : 0;
  }
  AtlasPresentation A = trivial_atlas(d, base_, charts_);
  if (!twisted_) return std::make_shared<const AtlasPresentation>(std::move(A));
  std::map<std::pair<int, int>, Gauge> g;
  for (std::size_t c = 0; c < A.charts().size(); ++c)
    for (int p : A.charts()[c].domain)
      g.emplace(std::make_pair(static_cast<int>(c), p), hashed_statomorphism(d, seed_, A.charts()[c].id, A.base()[p]));
  return std::make_shared<const AtlasPresentation>(twist(A, g));
}

json InfinityPresentation::to_json() const {
  if (kind_ == "stabilizing")
    return json{{"format_version", 1}, {"kind", "stabilizing"}, {"N", instance_->n()}, {"instance", mvb::to_json(*instance_)}};
  json charts = json::array();
  for (const auto& c : charts_) {
    json dom = json::array();
    for (int p : c.domain) dom.push_back(base_[p]);
    charts.push_back(json{{"id", c.id}, {"domain", dom}});
  }
  json tr = twisted_ ? json{{"kind", "twist"}, {"seed", seed_}} : json{{"kind", "identity"}};
  return json{{"format_version", 1},
              {"kind", "rule"},
              {"dim_rule", {{"kind", "by_cardinality"}, {"dims", dims_by_size_}}},
              {"transition_rule", tr},
              {"base", base_},
              {"charts", charts}};
}

std::shared_ptr<InfinityPresentation> parse_infinity(const json& j) {
  auto schema = [](const std::string& w, const std::string& what) { throw SchemaError(w + ": " + what); };
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) schema("$", "missing generator kind");
  const std::string kind = j["kind"];
  if (kind == "stabilizing") {
    if (!j.contains("instance")) schema("$", "missing field \"instance\"");
    ParsedAtlas pa = parse_atlas(j["instance"]);
    if (!pa.structural.empty()) throw SemanticError("generator instance: " + pa.structural.front());
    if (j.contains("N") && (!j["N"].is_number_integer() || j["N"].get<int>() != pa.atlas.n()))
      schema("$.N", "does not match the instance");
    return InfinityPresentation::stabilizing(pa.atlas);
  }
  if (kind != "rule") schema("$.kind", "expected \"stabilizing\" or \"rule\"");
  for (const char* f : {"dim_rule", "transition_rule", "base", "charts"})
    if (!j.contains(f)) schema("$", std::string("missing field \"") + f + "\"");
  const json& dr = j["dim_rule"];
  if (!dr.is_object() || dr.value("kind", "") != "by_cardinality" || !dr.contains("dims") || !dr["dims"].is_array())
    schema("$.dim_rule", "expected {kind: \"by_cardinality\", dims: [...]}");
  std::vector<std::size_t> dims;
  for (const auto& x : dr["dims"]) {
    if (!x.is_number_unsigned()) schema("$.dim_rule.dims", "expected nonnegative integers");
    dims.push_back(x.get<std::size_t>());
  }
  const json& tr = j["transition_rule"];
  const std::string tk = tr.is_object() ? tr.value("kind", "") : "";
  if (tk != "identity" && tk != "twist") schema("$.transition_rule.kind", "expected \"identity\" or \"twist\"");
  std::uint64_t seed = 0;
  if (tk == "twist") {
    if (!tr.contains("seed") || !tr["seed"].is_number_unsigned()) schema("$.transition_rule.seed", "expected an unsigned integer");
    seed = tr["seed"].get<std::uint64_t>();
  }
  if (!j["base"].is_array()) schema("$.base", "expected an array");
  std::vector<std::string> base;
  std::map<std::string, int> pidx;
  for (const auto& b : j["base"]) {
    if (!b.is_string()) schema("$.base", "expected strings");
    pidx.emplace(b.get<std::string>(), static_cast<int>(base.size()));
    base.push_back(b.get<std::string>());
  }
  if (!j["charts"].is_array()) schema("$.charts", "expected an array");
  std::vector<Chart> charts;
  for (const auto& c : j["charts"]) {
    if (!c.is_object() || !c.contains("id") || !c["id"].is_string() || !c.contains("domain") || !c["domain"].is_array())
      schema("$.charts", "expected {id, domain}");
    Chart ch{c["id"].get<std::string>(), {}};
    for (const auto& p : c["domain"]) {
      if (!p.is_string() || !pidx.count(p.get<std::string>())) schema("$.charts", "unknown base point in a domain");
      ch.domain.push_back(pidx.at(p.get<std::string>()));
    }
    charts.push_back(std::move(ch));
  }
  try {
    return InfinityPresentation::rule(dims, base, charts, tk == "twist", seed);
  } catch (const InvalidArgument& e) {
    schema("$", e.what());
  }
  return nullptr;
}

TowerDecomposition::TowerDecomposition(std::shared_ptr<const InfinityPresentation> X, SplitOptions opt)
    : X_(X),
      engine_(
          [X](const Blocks& nu) {
            int m = 0;
            for (const auto& b : nu) m = std::max(m, b.max());
            return std::make_shared<const AtlasPresentation>(subbundle(*X->truncate(m), BlockFamily(m, nu)));
          },
          std::move(opt)) {}

Decomposition TowerDecomposition::level(int n) {
  auto A = X_->truncate(n);
  require_valid(*A);
  auto P = engine_.presentation(singleton_blocks(n));
  if (!(*P == *A)) throw SemanticError("truncation " + std::to_string(n) + " is not compatible with the lower ones");
  return engine_.decomposition(singleton_blocks(n));
}

BundleMorphism TowerDecomposition::evaluate(const IndexSet& I, int n) {
  if (!I.subset_of(IndexSet::range(n))) throw InvalidArgument("S(I) needs I inside [n]");
  const Decomposition d = level(n);
  std::vector<IndexSet> bl;
  for (int i : I) bl.push_back(IndexSet{i});
  const BlockFamily fam(n, bl);
  BundleMorphism out{std::make_shared<const AtlasPresentation>(subbundle(*d.m.source, fam)),
                     std::make_shared<const AtlasPresentation>(subbundle(*d.m.target, fam)),
                     {}};
  for (const auto& [key, g] : d.m.data) out.data[key] = fam.restrict(g);
  return out;
}

Certificate TowerDecomposition::check_levels(const std::vector<int>& levels) {
  Certificate cert("S(I) is independent of the truncation level and the tower commutes");
  if (levels.empty()) throw InvalidArgument("no levels given");
  const int lo = *std::min_element(levels.begin(), levels.end());
  std::size_t compared = 0;
  for (const auto& I : subsets(IndexSet::range(lo))) {
    if (I.empty()) continue;
    const BundleMorphism ref = evaluate(I, levels.front());
    for (std::size_t q = 1; q < levels.size(); ++q) {
      const BundleMorphism other = evaluate(I, levels[q]);
      ++compared;
      if (!(*ref.target == *other.target) || !morphism_equal(ref, other))
        cert.fail({{"reason", "S(I) depends on the level"}, {"I", mvb::to_json(I)}, {"levels", {levels.front(), levels[q]}}});
    }
  }
  const int hi = *std::max_element(levels.begin(), levels.end());
  for (int n = lo; n < hi; ++n) {
    const BundleMorphism down = evaluate(IndexSet::range(n), n + 1);
    const Decomposition here = level(n);
    ++compared;
    if (!morphism_equal(down, here.m)) cert.fail({{"reason", "restriction square does not commute"}, {"n", n}});
  }
  cert.witnesses = {{"levels", levels}, {"comparisons", compared}, {"cached_tensors", engine_.cached_tensors()}};
  return cert;
}

}  // namespace mvb
