#include "mvb/bundle.hpp"

#include <algorithm>

#include "mvb/errors.hpp"

namespace mvb {

namespace {

void check_node(const AtlasPresentation& A, const IndexSet& node) {
  if (!node.empty() && node.max() > A.n())
    throw InvalidArgument("node " + node.str() + " is not inside [" + std::to_string(A.n()) + "]");
}

void check_point(const AtlasPresentation& A, int chart, int point) {
  if (point < 0 || point >= static_cast<int>(A.base().size())) throw InvalidArgument("point out of range");
  if (chart < 0 || chart >= static_cast<int>(A.charts().size())) throw InvalidArgument("chart out of range");
  if (!A.in_chart(chart, point))
    throw InvalidArgument("point \"" + A.base()[point] + "\" is not in chart \"" + A.charts()[chart].id + "\"");
}

}  // namespace

BundleElement make_element(const AtlasPresentation& A, const IndexSet& node, int chart, int point,
                           const std::map<IndexSet, Vector>& comps) {
  check_node(A, node);
  check_point(A, chart, point);
  BundleElement e{node, chart, point, zero_coords(A.dims())};
  const CubeLayout& L = layout(A.n());
  for (const auto& [J, v] : comps) {
    if (J.empty() || !J.subset_of(node))
      throw InvalidArgument("component " + J.str() + " is not a nonempty subset of the node " + node.str());
    const int s = L.index(J);
    if (v.size() != A.dims()[s])
      throw DimensionMismatch("component " + J.str() + " has dimension " + std::to_string(v.size()) +
                              ", expected " + std::to_string(A.dims()[s]));
    e.comps[s] = v;
  }
  return e;
}

BundleElement zero_element(const AtlasPresentation& A, const IndexSet& node, int point) {
  check_node(A, node);
  return BundleElement{node, A.canonical_chart(point), point, zero_coords(A.dims())};
}

BundleElement random_element(const AtlasPresentation& A, const IndexSet& node, int chart, int point, Rng& rng) {
  check_node(A, node);
  check_point(A, chart, point);
  BundleElement e{node, chart, point, zero_coords(A.dims())};
  const CubeLayout& L = layout(A.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    if (L.subsets[s].subset_of(node))
      for (auto& x : e.comps[s]) x = rng.small_int();
  return e;
}

BundleElement transport(const AtlasPresentation& A, const BundleElement& e, int chart) {
  if (chart == e.chart) return e;
  check_point(A, chart, e.point);
  BundleElement r = e;
  r.chart = chart;
  r.comps = A.transition(e.chart, chart, e.point).evaluate(e.comps);
  return r;
}

BundleElement canonical(const AtlasPresentation& A, const BundleElement& e) {
  return transport(A, e, A.canonical_chart(e.point));
}

bool equal(const AtlasPresentation& A, const BundleElement& a, const BundleElement& b) {
  if (a.node != b.node || a.point != b.point) return false;
  return canonical(A, a).comps == canonical(A, b).comps;
}

BundleElement project(const AtlasPresentation& A, const BundleElement& e, int i) {
  if (!e.node.contains(i))
    throw InvalidArgument("cannot project " + e.node.str() + " along " + std::to_string(i));
  return project_to(A, e, e.node.without(i));
}

BundleElement project_to(const AtlasPresentation& A, const BundleElement& e, const IndexSet& R) {
  if (!R.subset_of(e.node)) throw InvalidArgument(R.str() + " is not inside " + e.node.str());
  const CubeLayout& L = layout(A.n());
  BundleElement r = e;
  r.node = R;
  for (std::size_t s = 0; s < L.count(); ++s)
    if (!L.subsets[s].subset_of(R)) r.comps[s].assign(r.comps[s].size(), Rational());
  return r;
}

BundleElement add(const AtlasPresentation& A, const BundleElement& a, const BundleElement& b0, int i) {
  if (a.node != b0.node || a.point != b0.point)
    throw SemanticError("addition of elements in different fibers");
  if (!a.node.contains(i)) throw InvalidArgument("addition index not in node " + a.node.str());
  const BundleElement b = transport(A, b0, a.chart);
  const CubeLayout& L = layout(A.n());
  BundleElement r = a;
  for (std::size_t s = 0; s < L.count(); ++s) {
    if (!L.subsets[s].subset_of(a.node)) continue;
    if (L.subsets[s].contains(i)) {
      for (std::size_t q = 0; q < r.comps[s].size(); ++q) r.comps[s][q] += b.comps[s][q];
    } else if (a.comps[s] != b.comps[s]) {
      throw SemanticError("base-fiber mismatch: summands over " + a.node.without(i).str() +
                          " differ in component " + L.subsets[s].str());
    }
  }
  return r;
}

BundleElement scale(const AtlasPresentation& A, const Rational& x, const BundleElement& e, int i) {
  if (!e.node.contains(i)) throw InvalidArgument("scaling index not in node " + e.node.str());
  const CubeLayout& L = layout(A.n());
  BundleElement r = e;
  for (std::size_t s = 0; s < L.count(); ++s)
    if (L.subsets[s].contains(i))
      for (auto& q : r.comps[s]) q *= x;
  return r;
}

BundleElement subtract(const AtlasPresentation& A, const BundleElement& a, const BundleElement& b, int i) {
  return add(A, a, scale(A, Rational(-1), transport(A, b, a.chart), i), i);
}

BundleElement zero_lift(const AtlasPresentation& A, const BundleElement& e, const IndexSet& S) {
  if (!e.node.subset_of(S)) throw InvalidArgument(e.node.str() + " is not inside " + S.str());
  check_node(A, S);
  BundleElement r = e;
  r.node = S;
  return r;
}

AtlasPresentation face(const AtlasPresentation& A, const IndexSet& I, const IndexSet& J,
                       const std::map<int, Coords>& frozen) {
  if (!J.subset_of(I)) throw InvalidArgument("face: " + J.str() + " is not inside " + I.str());
  check_node(A, I);
  const IndexSet free = I.minus(J);
  std::vector<IndexSet> singles;
  for (int i : free) singles.push_back(IndexSet{i});
  if (J.empty()) return subbundle(A, BlockFamily(A.n(), singles));

  const int k = static_cast<int>(free.size());
  const CubeLayout& L = layout(A.n());
  const CubeLayout& F = layout(k);
  const auto Jsubs = subsets(J);
  auto lift = [&](const IndexSet& mu) {
    std::vector<int> v;
    for (int q : mu) v.push_back(free.elements()[q - 1]);
    return IndexSet(std::move(v));
  };
  // slot layout of the face building space at mu: blocks R u J' for J' inside J
  std::vector<std::vector<std::pair<int, std::size_t>>> slots(F.count());
  DimAssignment d(k);
  for (std::size_t m = 0; m < F.count(); ++m) {
    const IndexSet R = lift(F.subsets[m]);
    std::size_t off = 0;
    for (const auto& Jp : Jsubs) {
      const int s = L.index(R.unite(Jp));
      slots[m].push_back({s, off});
      off += A.dims()[s];
    }
    d[m] = off;
  }
  auto frozen_at = [&](int chart, int p) {
    auto it = frozen.find(p);
    BundleElement e{J, A.canonical_chart(p), p, zero_coords(A.dims())};
    if (it != frozen.end()) {
      e.comps = it->second;
      for (std::size_t s = 0; s < L.count(); ++s)
        if (!L.subsets[s].subset_of(J)) e.comps[s].assign(A.dims()[s], Rational());
    }
    return transport(A, e, chart).comps;
  };
  AtlasPresentation B(d, A.base(), A.charts());
  for (const auto& [key, t] : A.transitions()) {
    auto [from, to, p] = key;
    const Coords fz = frozen_at(from, p);
    auto map = [&](const Coords& small) {
      Coords full = fz;
      for (std::size_t m = 0; m < F.count(); ++m)
        for (const auto& [s, off] : slots[m])
          std::copy(small[m].begin() + off, small[m].begin() + off + A.dims()[s], full[s].begin());
      Coords out = t.evaluate(full);
      Coords res = zero_coords(d);
      for (std::size_t m = 0; m < F.count(); ++m)
        for (const auto& [s, off] : slots[m])
          std::copy(out[s].begin(), out[s].end(), res[m].begin() + off);
      return res;
    };
    B.set_transition(from, to, p, tabulate(d, d, map));
  }
  return B;
}

AtlasPresentation restrict(const AtlasPresentation& A, const std::vector<std::string>& points) {
  if (points.empty()) throw InvalidArgument("restrict: empty set of points");
  std::vector<int> keep;
  for (const auto& p : points) keep.push_back(A.point_index(p));
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  std::vector<std::string> base;
  std::map<int, int> remap;
  for (int p : keep) {
    remap[p] = static_cast<int>(base.size());
    base.push_back(A.base()[p]);
  }
  std::vector<Chart> charts;
  for (const auto& c : A.charts()) {
    Chart nc{c.id, {}};
    for (int p : c.domain)
      if (remap.count(p)) nc.domain.push_back(remap[p]);
    if (!nc.domain.empty()) charts.push_back(nc);
  }
  AtlasPresentation B(A.dims(), base, charts);
  for (const auto& [key, g] : A.transitions()) {
    auto [from, to, p] = key;
    if (!remap.count(p)) continue;
    B.set_transition(B.chart_index(A.charts()[from].id), B.chart_index(A.charts()[to].id), remap[p], g);
  }
  return B;
}

const Gauge& BundleMorphism::at(int chart, int point) const {
  auto it = data.find({chart, point});
  if (it == data.end()) throw SemanticError("morphism has no data at this chart and point");
  return it->second;
}

void check_compatible(const AtlasPresentation& a, const AtlasPresentation& b) {
  if (a.base() != b.base()) throw SemanticError("presentations live over different bases");
  if (a.charts() != b.charts()) throw SemanticError("presentations use different charts");
  if (a.n() != b.n()) throw SemanticError("presentations have different n");
}

BundleMorphism identity_morphism(std::shared_ptr<const AtlasPresentation> A) {
  BundleMorphism m{A, A, {}};
  for (std::size_t c = 0; c < A->charts().size(); ++c)
    for (int p : A->charts()[c].domain) m.data[{static_cast<int>(c), p}] = A->identity();
  return m;
}

BundleMorphism morphism_from_canonical(std::shared_ptr<const AtlasPresentation> source,
                                       std::shared_ptr<const AtlasPresentation> target,
                                       const std::map<int, Gauge>& at_canonical) {
  check_compatible(*source, *target);
  BundleMorphism m{source, target, {}};
  for (std::size_t pi = 0; pi < source->base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    const int c = source->canonical_chart(p);
    const Gauge& g = at_canonical.at(p);
    for (int a : source->charts_at(p)) {
      if (a == c) {
        m.data[{a, p}] = g;
      } else {
        m.data[{a, p}] = compose(target->transition(c, a, p), compose(g, source->transition(a, c, p)));
      }
    }
  }
  return m;
}

std::vector<NaturalityViolation> naturality_violations(const BundleMorphism& m) {
  check_compatible(*m.source, *m.target);
  std::vector<NaturalityViolation> out;
  const auto& A = *m.source;
  for (std::size_t pi = 0; pi < A.base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    for (int a : A.charts_at(p))
      for (int b : A.charts_at(p)) {
        if (a == b) continue;
        Gauge lhs = compose(m.target->transition(a, b, p), m.at(a, p));
        Gauge rhs = compose(m.at(b, p), A.transition(a, b, p));
        auto d = first_difference(lhs, rhs);
        if (d) out.push_back({a, b, p, d->first, d->second});
      }
  }
  return out;
}

BundleElement apply(const BundleMorphism& m, const BundleElement& e) {
  BundleElement r = e;
  r.comps = m.at(e.chart, e.point).evaluate(e.comps);
  return r;
}

BundleMorphism compose(const BundleMorphism& s, const BundleMorphism& t) {
  if (!(*t.target == *s.source)) throw SemanticError("morphisms are not composable");
  BundleMorphism r{t.source, s.target, {}};
  for (const auto& [key, g] : t.data) r.data[key] = compose(s.at(key.first, key.second), g);
  return r;
}

bool morphism_equal(const BundleMorphism& a, const BundleMorphism& b) {
  return *a.source == *b.source && *a.target == *b.target && a.data == b.data;
}

namespace {

bool linear_parts(const BundleMorphism& m, bool need_square) {
  const CubeLayout& L = layout(m.source->n());
  for (const auto& [key, g] : m.data)
    for (std::size_t s = 0; s < L.count(); ++s) {
      Matrix M = g.linear_part(s);
      if (need_square && M.rows() != M.cols()) return false;
      if (rank(M) != M.cols()) return false;
    }
  return true;
}

}  // namespace

// A gauge-form map is injective (bijective) on every node exactly when all
// of its linear parts are: the components form a triangular system.
bool fiberwise_injective(const BundleMorphism& m) { return linear_parts(m, false); }
bool fiberwise_bijective(const BundleMorphism& m) { return linear_parts(m, true); }

AtlasPresentation hom_bundle(const AtlasPresentation& E, const AtlasPresentation& F) {
  if (E.base() != F.base()) throw SemanticError("hom_bundle: different bases");
  if (E.n() != F.n()) throw SemanticError("hom_bundle: different n");
  const CubeLayout& L = layout(E.n());
  DimAssignment d(E.n());
  for (std::size_t s = 0; s < L.count(); ++s) {
    std::size_t total = 0;
    for (std::size_t r = 0; r < L.partitions[s].size(); ++r) {
      std::size_t v = F.dims()[s];
      for (int b : L.blocks[s][r]) v *= E.dims()[b];
      total += v;
    }
    d[s] = total;
  }
  return decomposed(d, E.base());
}

Gauge hom_element_gauge(const AtlasPresentation& E, const AtlasPresentation& F, const BundleElement& phi) {
  const CubeLayout& L = layout(E.n());
  Gauge g(E.dims(), F.dims());
  for (std::size_t s = 0; s < L.count(); ++s) {
    if (!L.subsets[s].subset_of(phi.node)) continue;
    std::size_t off = 0;
    for (std::size_t r = 0; r < L.partitions[s].size(); ++r) {
      auto& T = g.component(s, r).entries();
      if (off + T.size() > phi.comps[s].size()) throw DimensionMismatch("hom element too short");
      std::copy(phi.comps[s].begin() + off, phi.comps[s].begin() + off + T.size(), T.begin());
      off += T.size();
    }
  }
  return g;
}

BundleElement hom_evaluate(const AtlasPresentation& E, const AtlasPresentation& F,
                           const BundleElement& phi, const BundleElement& e) {
  if (phi.node != e.node || phi.point != e.point) throw SemanticError("hom_evaluate: fibers differ");
  const BundleElement ec = canonical(E, e);
  BundleElement r{e.node, F.canonical_chart(e.point), e.point, {}};
  r.comps = hom_element_gauge(E, F, phi).evaluate(ec.comps);
  return r;
}

AtlasPresentation tangent_prolongation(const AtlasPresentation& A) {
  const int n = A.n();
  const int t = n + 1;
  const CubeLayout& L = layout(n);
  const CubeLayout& T = layout(t);
  DimAssignment d(t);
  for (std::size_t s = 0; s < T.count(); ++s) {
    const IndexSet& K = T.subsets[s];
    const IndexSet J = K.without(t);
    d[s] = J.empty() ? 0 : A.dims().dim(J);
  }
  auto prolong = [&](const Gauge& g) {
    Gauge h(d, d);
    for (std::size_t s = 0; s < T.count(); ++s) {
      const IndexSet& K = T.subsets[s];
      const IndexSet J = K.without(t);
      if (J.empty()) continue;
      const int js = L.index(J);
      for (std::size_t r = 0; r < T.partitions[s].size(); ++r) {
        const Partition& rho = T.partitions[s][r];
        std::vector<IndexSet> blocks;
        bool lone = false;
        for (const auto& b : rho.blocks()) {
          IndexSet nb = b.without(t);
          if (nb.empty()) lone = true;
          blocks.push_back(nb);
        }
        if (lone) continue;  // a block {t} has dimension 0
        h.component(s, r) = g.component(js, L.partition(js, Partition(blocks)));
      }
    }
    return h;
  };
  AtlasPresentation B(d, A.base(), A.charts());
  for (const auto& [key, g] : A.transitions()) {
    auto [from, to, p] = key;
    B.set_transition(from, to, p, prolong(g));
  }
  return B;
}

}  // namespace mvb
