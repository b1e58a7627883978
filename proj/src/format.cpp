#include "mvb/format.hpp"

#include <set>

#include "mvb/errors.hpp"

namespace mvb {

json to_json(const Rational& x) { return x.str(); }

json to_json(const Vector& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x.str());
  return a;
}

json to_json(const IndexSet& I) {
  json a = json::array();
  for (int i : I) a.push_back(i);
  return a;
}

json to_json(const Partition& p) {
  json a = json::array();
  for (const auto& b : p.blocks()) a.push_back(to_json(b));
  return a;
}

json to_json(const MultiTensor& t) {
  return json{{"out_dim", t.out_dim()}, {"in_dims", t.in_dims()}, {"entries", to_json(t.entries())}};
}

json to_json(const DimAssignment& d) {
  json a = json::array();
  const CubeLayout& L = layout(d.n());
  for (std::size_t s = 0; s < L.count(); ++s) a.push_back(json{{"set", to_json(L.subsets[s])}, {"dim", d[s]}});
  return a;
}

namespace {

json components_json(const Gauge& g) {
  json a = json::array();
  const CubeLayout& L = layout(g.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    for (std::size_t r = 0; r < L.partitions[s].size(); ++r) {
      const MultiTensor& T = g.component(s, r);
      if (T.out_dim() == 0 || T.in_volume() == 0 || T.is_zero()) continue;
      a.push_back(json{{"target", to_json(L.subsets[s])},
                       {"blocks", to_json(L.partitions[s][r])},
                       {"tensor", to_json(T)}});
    }
  return a;
}

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) schema(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema(where, std::string("missing field \"") + key + "\"");
  return *it;
}

long get_int(const json& j, const std::string& where, long lo = 0) {
  if (!j.is_number_integer()) schema(where, "expected an integer");
  const long v = j.get<long>();
  if (v < lo) schema(where, "expected an integer >= " + std::to_string(lo));
  return v;
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) schema(where, "expected a string");
  return j.get<std::string>();
}

const json& get_array(const json& j, const std::string& where) {
  if (!j.is_array()) schema(where, "expected an array");
  return j;
}

Gauge parse_components(const json& comps, const DimAssignment& src, const DimAssignment& tgt,
                       const std::string& where) {
  Gauge g(src, tgt);
  const CubeLayout& L = layout(src.n());
  std::vector<std::vector<bool>> seen(L.count());
  for (std::size_t s = 0; s < L.count(); ++s) seen[s].assign(L.partitions[s].size(), false);
  const json& arr = get_array(comps, where);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const IndexSet J = parse_indexset(field(arr[i], "target", w), w + ".target");
    const Partition rho = parse_partition(field(arr[i], "blocks", w), w + ".blocks");
    if (J.empty() || !J.subset_of(IndexSet::range(src.n()))) schema(w + ".target", "not a nonempty subset of [n]");
    if (!(rho.ground() == J)) schema(w + ".blocks", "not a partition of " + J.str());
    const int s = L.index(J), r = L.partition(s, rho);
    if (seen[s][r]) schema(w, "duplicate component (J=" + J.str() + ", rho=" + rho.str() + ")");
    seen[s][r] = true;
    MultiTensor& T = g.component(s, r);
    const json& tj = field(arr[i], "tensor", w);
    const std::string tw = w + ".tensor";
    const auto out = static_cast<std::size_t>(get_int(field(tj, "out_dim", tw), tw + ".out_dim"));
    std::vector<std::size_t> in;
    const json& ind = get_array(field(tj, "in_dims", tw), tw + ".in_dims");
    for (std::size_t q = 0; q < ind.size(); ++q)
      in.push_back(static_cast<std::size_t>(get_int(ind[q], tw + ".in_dims[" + std::to_string(q) + "]")));
    const std::string at = " for (J=" + J.str() + ", rho=" + rho.str() + ")";
    if (out != T.out_dim() || in != T.in_dims()) schema(tw, "shape does not match the dimensions" + at);
    const json& ent = get_array(field(tj, "entries", tw), tw + ".entries");
    if (ent.size() != T.entries().size())
      schema(tw + ".entries", "tensor has " + std::to_string(ent.size()) + " entries, expected " +
                                  std::to_string(T.entries().size()) + at);
    for (std::size_t q = 0; q < ent.size(); ++q)
      T.entries()[q] = parse_rational(ent[q], tw + ".entries[" + std::to_string(q) + "]");
  }
  return g;
}

}  // namespace

json to_json(const Gauge& g) {
  return json{{"n", g.n()},
              {"source_dims", to_json(g.source())},
              {"target_dims", to_json(g.target())},
              {"components", components_json(g)}};
}

json coords_json(const Coords& c, const DimAssignment& d) {
  json a = json::array();
  const CubeLayout& L = layout(d.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    if (d[s]) a.push_back(json{{"set", to_json(L.subsets[s])}, {"vector", to_json(c[s])}});
  return a;
}

json to_json(const AtlasPresentation& A) {
  json charts = json::array();
  for (const auto& c : A.charts()) {
    json dom = json::array();
    for (int p : c.domain) dom.push_back(A.base()[p]);
    charts.push_back(json{{"id", c.id}, {"domain", dom}});
  }
  json tr = json::array();
  for (const auto& [key, g] : A.transitions()) {
    auto [from, to, p] = key;
    tr.push_back(json{{"from", A.charts()[from].id},
                      {"to", A.charts()[to].id},
                      {"point", A.base()[p]},
                      {"components", components_json(g)}});
  }
  return json{{"format_version", 1},
              {"kind", "atlas"},
              {"n", A.n()},
              {"base", A.base()},
              {"dims", to_json(A.dims())},
              {"charts", charts},
              {"transitions", tr}};
}

json to_json(const AtlasPresentation& A, const BundleElement& e) {
  return json{{"node", to_json(e.node)},
              {"chart", A.charts()[e.chart].id},
              {"point", A.base()[e.point]},
              {"coords", coords_json(e.comps, A.dims())}};
}

json to_json(const BundleMorphism& m) {
  json data = json::array();
  for (const auto& [key, g] : m.data)
    data.push_back(json{{"chart", m.target->charts()[key.first].id},
                        {"point", m.target->base()[key.second]},
                        {"components", components_json(g)}});
  return json{{"format_version", 1},
              {"kind", "morphism"},
              {"n", m.target->n()},
              {"source_dims", to_json(m.source->dims())},
              {"target_dims", to_json(m.target->dims())},
              {"data", data}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SyntaxError(std::string("JSON syntax error at byte ") + std::to_string(e.byte) + ": " + e.what(), e.byte);
  }
}

Rational parse_rational(const json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (!j.is_string()) schema(where, "expected a rational \"p/q\"");
  try {
    return Rational::parse(j.get<std::string>());
  } catch (const Error&) {
    schema(where, "malformed rational \"" + j.get<std::string>() + "\"");
  }
}

IndexSet parse_indexset(const json& j, const std::string& where) {
  const json& a = get_array(j, where);
  std::vector<int> v;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long x = get_int(a[i], where + "[" + std::to_string(i) + "]", 1);
    if (!v.empty() && x <= v.back()) schema(where, "elements must be strictly increasing");
    v.push_back(static_cast<int>(x));
  }
  return IndexSet(v);
}

Partition parse_partition(const json& j, const std::string& where) {
  const json& a = get_array(j, where);
  std::vector<IndexSet> blocks;
  IndexSet seen;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    IndexSet b = parse_indexset(a[i], w);
    if (b.empty()) schema(w, "empty block");
    if (!b.disjoint(seen)) schema(w, "blocks overlap");
    seen = seen.unite(b);
    blocks.push_back(std::move(b));
  }
  if (blocks.empty()) schema(where, "empty partition");
  return Partition(blocks);
}

MultiTensor parse_tensor(const json& j, const std::string& where) {
  const auto out = static_cast<std::size_t>(get_int(field(j, "out_dim", where), where + ".out_dim"));
  std::vector<std::size_t> in;
  const json& ind = get_array(field(j, "in_dims", where), where + ".in_dims");
  for (std::size_t q = 0; q < ind.size(); ++q)
    in.push_back(static_cast<std::size_t>(get_int(ind[q], where + ".in_dims[" + std::to_string(q) + "]")));
  MultiTensor T(out, in);
  const json& ent = get_array(field(j, "entries", where), where + ".entries");
  if (ent.size() != T.entries().size())
    schema(where + ".entries", "tensor has " + std::to_string(ent.size()) + " entries, expected " +
                                   std::to_string(T.entries().size()));
  for (std::size_t q = 0; q < ent.size(); ++q)
    T.entries()[q] = parse_rational(ent[q], where + ".entries[" + std::to_string(q) + "]");
  return T;
}

DimAssignment parse_dims(const json& j, int n, const std::string& where, std::vector<std::string>* missing) {
  DimAssignment d(n);
  const CubeLayout& L = layout(n);
  std::vector<bool> seen(L.count(), false);
  const json& a = get_array(j, where);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const IndexSet J = parse_indexset(field(a[i], "set", w), w + ".set");
    if (J.empty() || !J.subset_of(IndexSet::range(n))) schema(w + ".set", "not a nonempty subset of [" + std::to_string(n) + "]");
    const int s = L.index(J);
    if (seen[s]) schema(w, "duplicate dimension for " + J.str());
    seen[s] = true;
    d[s] = static_cast<std::size_t>(get_int(field(a[i], "dim", w), w + ".dim"));
  }
  for (std::size_t s = 0; s < L.count(); ++s)
    if (!seen[s]) {
      if (!missing) schema(where, "missing dimension for " + L.subsets[s].str());
      missing->push_back("no dimension given for " + L.subsets[s].str() + " (taken as 0)");
    }
  return d;
}

Gauge parse_gauge(const json& j, const std::string& where) {
  const int n = static_cast<int>(get_int(field(j, "n", where), where + ".n"));
  if (n > 8) schema(where + ".n", "n too large");
  const DimAssignment src = parse_dims(field(j, "source_dims", where), n, where + ".source_dims");
  const DimAssignment tgt = parse_dims(field(j, "target_dims", where), n, where + ".target_dims");
  return parse_components(field(j, "components", where), src, tgt, where + ".components");
}

ParsedAtlas parse_atlas(const json& j) {
  const std::string w = "$";
  if (j.contains("format_version") && get_int(j["format_version"], "$.format_version") != 1)
    schema("$.format_version", "unsupported format version");
  const int n = static_cast<int>(get_int(field(j, "n", w), "$.n"));
  if (n > 8) schema("$.n", "n too large");
  std::vector<std::string> structural;
  const DimAssignment dims = parse_dims(field(j, "dims", w), n, "$.dims", &structural);
  std::vector<std::string> base;
  const json& bj = get_array(field(j, "base", w), "$.base");
  for (std::size_t i = 0; i < bj.size(); ++i) base.push_back(get_string(bj[i], "$.base[" + std::to_string(i) + "]"));
  std::map<std::string, int> pidx;
  for (std::size_t i = 0; i < base.size(); ++i)
    if (!pidx.emplace(base[i], static_cast<int>(i)).second) schema("$.base", "duplicate point \"" + base[i] + "\"");
  std::vector<Chart> charts;
  const json& cj = get_array(field(j, "charts", w), "$.charts");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < cj.size(); ++i) {
    const std::string cw = "$.charts[" + std::to_string(i) + "]";
    Chart c;
    c.id = get_string(field(cj[i], "id", cw), cw + ".id");
    if (!ids.insert(c.id).second) schema(cw + ".id", "duplicate chart id \"" + c.id + "\"");
    const json& dj = get_array(field(cj[i], "domain", cw), cw + ".domain");
    for (std::size_t q = 0; q < dj.size(); ++q) {
      const std::string pw = cw + ".domain[" + std::to_string(q) + "]";
      auto it = pidx.find(get_string(dj[q], pw));
      if (it == pidx.end()) schema(pw, "unknown base point");
      c.domain.push_back(it->second);
    }
    charts.push_back(std::move(c));
  }
  AtlasPresentation A(dims, base, charts);
  const json& tj = get_array(field(j, "transitions", w), "$.transitions");
  for (std::size_t i = 0; i < tj.size(); ++i) {
    const std::string tw = "$.transitions[" + std::to_string(i) + "]";
    const std::string from = get_string(field(tj[i], "from", tw), tw + ".from");
    const std::string to = get_string(field(tj[i], "to", tw), tw + ".to");
    const std::string pt = get_string(field(tj[i], "point", tw), tw + ".point");
    if (!ids.count(from)) schema(tw + ".from", "unknown chart \"" + from + "\"");
    if (!ids.count(to)) schema(tw + ".to", "unknown chart \"" + to + "\"");
    if (!pidx.count(pt)) schema(tw + ".point", "unknown base point \"" + pt + "\"");
    const int a = A.chart_index(from), b = A.chart_index(to), p = pidx.at(pt);
    if (!A.in_chart(a, p) || !A.in_chart(b, p)) schema(tw, "point \"" + pt + "\" is not in both chart domains");
    if (A.has_transition(a, b, p)) schema(tw, "duplicate transition");
    A.set_transition(a, b, p, parse_components(field(tj[i], "components", tw), dims, dims, tw + ".components"));
  }
  return ParsedAtlas{std::move(A), std::move(structural)};
}

Coords parse_coords(const json& j, const DimAssignment& d, const std::string& where) {
  Coords c = zero_coords(d);
  const CubeLayout& L = layout(d.n());
  const json& a = get_array(j, where);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const IndexSet J = parse_indexset(field(a[i], "set", w), w + ".set");
    if (J.empty() || !J.subset_of(IndexSet::range(d.n()))) schema(w + ".set", "not a nonempty subset of [n]");
    const int s = L.index(J);
    const json& v = get_array(field(a[i], "vector", w), w + ".vector");
    if (v.size() != d[s]) schema(w + ".vector", "expected " + std::to_string(d[s]) + " entries for " + J.str());
    for (std::size_t q = 0; q < v.size(); ++q) c[s][q] = parse_rational(v[q], w + ".vector[" + std::to_string(q) + "]");
  }
  return c;
}

BundleMorphism parse_morphism(const json& j, std::shared_ptr<const AtlasPresentation> source,
                              std::shared_ptr<const AtlasPresentation> target) {
  const std::string w = "$";
  if (j.contains("kind") && j["kind"] != "morphism") schema("$.kind", "expected \"morphism\"");
  const int n = static_cast<int>(get_int(field(j, "n", w), "$.n"));
  if (n != target->n() || n != source->n()) schema("$.n", "does not match the atlas");
  const DimAssignment src = parse_dims(field(j, "source_dims", w), n, "$.source_dims");
  const DimAssignment tgt = parse_dims(field(j, "target_dims", w), n, "$.target_dims");
  if (!(src == source->dims())) schema("$.source_dims", "do not match the source atlas");
  if (!(tgt == target->dims())) schema("$.target_dims", "do not match the target atlas");
  BundleMorphism m{source, target, {}};
  const json& dj = get_array(field(j, "data", w), "$.data");
  for (std::size_t i = 0; i < dj.size(); ++i) {
    const std::string dw = "$.data[" + std::to_string(i) + "]";
    int c, p;
    try {
      c = target->chart_index(get_string(field(dj[i], "chart", dw), dw + ".chart"));
      p = target->point_index(get_string(field(dj[i], "point", dw), dw + ".point"));
    } catch (const InvalidArgument& e) {
      schema(dw, e.what());
    }
    if (!target->in_chart(c, p)) schema(dw, "point not in chart domain");
    if (m.data.count({c, p})) schema(dw, "duplicate entry");
    m.data[{c, p}] = parse_components(field(dj[i], "components", dw), src, tgt, dw + ".components");
  }
  for (std::size_t c = 0; c < target->charts().size(); ++c)
    for (int p : target->charts()[c].domain)
      if (!m.data.count({static_cast<int>(c), p}))
        schema("$.data", "no entry for chart " + target->charts()[c].id + " at " + target->base()[p]);
  return m;
}

BundleElement parse_element(const AtlasPresentation& A, const json& j) {
  const std::string w = "$";
  const IndexSet node = parse_indexset(field(j, "node", w), "$.node");
  if (!node.subset_of(IndexSet::range(A.n()))) schema("$.node", "not a subset of [n]");
  const std::string chart = get_string(field(j, "chart", w), "$.chart");
  const std::string pt = get_string(field(j, "point", w), "$.point");
  int c, p;
  try {
    c = A.chart_index(chart);
    p = A.point_index(pt);
  } catch (const InvalidArgument& e) {
    schema(w, e.what());
  }
  if (!A.in_chart(c, p)) schema(w, "point not in chart domain");
  Coords comps = parse_coords(field(j, "coords", w), A.dims(), "$.coords");
  const CubeLayout& L = layout(A.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    if (!L.subsets[s].subset_of(node) && !is_zero(comps[s]))
      schema("$.coords", "component " + L.subsets[s].str() + " lies outside the node");
  return BundleElement{node, c, p, std::move(comps)};
}

}  // namespace mvb
