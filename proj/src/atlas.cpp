#include "mvb/atlas.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "mvb/errors.hpp"

namespace mvb {

bool Chart::contains(int point) const {
  return std::binary_search(domain.begin(), domain.end(), point);
}

AtlasPresentation::AtlasPresentation(DimAssignment dims, std::vector<std::string> base,
                                     std::vector<Chart> charts)
    : dims_(std::move(dims)), base_(std::move(base)), charts_(std::move(charts)) {
  for (std::size_t i = 0; i < base_.size(); ++i)
    if (!point_idx_.emplace(base_[i], static_cast<int>(i)).second)
      throw InvalidArgument("duplicate base point \"" + base_[i] + "\"");
  std::sort(charts_.begin(), charts_.end(), [](const Chart& a, const Chart& b) { return a.id < b.id; });
  for (std::size_t c = 0; c < charts_.size(); ++c) {
    if (!chart_idx_.emplace(charts_[c].id, static_cast<int>(c)).second)
      throw InvalidArgument("duplicate chart id \"" + charts_[c].id + "\"");
    auto& d = charts_[c].domain;
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    for (int p : d)
      if (p < 0 || p >= static_cast<int>(base_.size()))
        throw InvalidArgument("chart \"" + charts_[c].id + "\" has a domain point outside the base");
  }
  identity_ = Gauge::identity(dims_);
}

int AtlasPresentation::point_index(const std::string& name) const {
  auto it = point_idx_.find(name);
  if (it == point_idx_.end()) throw InvalidArgument("unknown base point \"" + name + "\"");
  return it->second;
}

int AtlasPresentation::chart_index(const std::string& id) const {
  auto it = chart_idx_.find(id);
  if (it == chart_idx_.end()) throw InvalidArgument("unknown chart \"" + id + "\"");
  return it->second;
}

std::vector<int> AtlasPresentation::charts_at(int point) const {
  std::vector<int> r;
  for (std::size_t c = 0; c < charts_.size(); ++c)
    if (charts_[c].contains(point)) r.push_back(static_cast<int>(c));
  return r;
}

int AtlasPresentation::canonical_chart(int point) const {
  for (std::size_t c = 0; c < charts_.size(); ++c)
    if (charts_[c].contains(point)) return static_cast<int>(c);
  throw SemanticError("base point \"" + base_.at(point) + "\" lies in no chart");
}

void AtlasPresentation::set_transition(int from, int to, int point, Gauge g) {
  if (!in_chart(from, point) || !in_chart(to, point))
    throw InvalidArgument("transition at \"" + base_.at(point) + "\" outside the chart domains");
  transitions_[{from, to, point}] = std::move(g);
}

bool AtlasPresentation::has_transition(int from, int to, int point) const {
  return transitions_.count({from, to, point}) > 0;
}

const Gauge& AtlasPresentation::transition(int from, int to, int point) const {
  auto it = transitions_.find({from, to, point});
  if (it != transitions_.end()) return it->second;
  if (from == to && in_chart(from, point)) return identity_;
  throw SemanticError("no transition from \"" + charts_.at(from).id + "\" to \"" + charts_.at(to).id +
                      "\" at \"" + base_.at(point) + "\"");
}

std::size_t ValidationReport::structural_count() const {
  return std::count_if(violations.begin(), violations.end(), [](const Violation& v) { return v.structural; });
}

std::size_t ValidationReport::semantic_count() const { return violations.size() - structural_count(); }

std::size_t ValidationReport::count(const std::string& kind) const {
  return std::count_if(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.kind == kind; });
}

std::optional<std::pair<int, int>> first_difference(const Gauge& a, const Gauge& b) {
  const CubeLayout& L = layout(a.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    for (std::size_t r = 0; r < L.partitions[s].size(); ++r)
      if (!(a.component(s, r) == b.component(s, r)))
        return std::make_pair(static_cast<int>(s), static_cast<int>(r));
  return std::nullopt;
}

ValidationReport validate(const AtlasPresentation& A) {
  ValidationReport rep;
  const CubeLayout& L = layout(A.n());
  const auto& charts = A.charts();
  const auto& base = A.base();
  auto name = [&](int c) { return charts[c].id; };

  if (base.empty())
    rep.violations.push_back({true, "coverage", "", "", "", "", {}, {}, "the base is empty"});
  for (std::size_t p = 0; p < base.size(); ++p)
    if (A.charts_at(static_cast<int>(p)).empty())
      rep.violations.push_back({true, "coverage", "", "", "", base[p], {}, {},
                                "point \"" + base[p] + "\" lies in no chart"});

  std::set<AtlasPresentation::Key> usable;
  for (const auto& [key, g] : A.transitions()) {
    auto [from, to, p] = key;
    if (g.source() != A.dims() || g.target() != A.dims()) {
      rep.violations.push_back({true, "dims", name(from), name(to), "", base[p], {}, {},
                                "transition dimensions differ from the instance dims"});
      continue;
    }
    usable.insert(key);
  }

  for (std::size_t pi = 0; pi < base.size(); ++pi) {
    const int p = static_cast<int>(pi);
    const auto here = A.charts_at(p);
    for (int a : here)
      for (int b : here)
        if (a != b && !A.has_transition(a, b, p))
          rep.violations.push_back({true, "missing_transition", name(a), name(b), "", base[p], {}, {},
                                    "no transition stored"});
  }
  if (rep.structural_count() > 0) return rep;

  // From here every needed transition exists and has the right shape.
  for (std::size_t pi = 0; pi < base.size(); ++pi) {
    const int p = static_cast<int>(pi);
    const auto here = A.charts_at(p);
    for (int a : here) {
      if (A.has_transition(a, a, p)) {
        auto d = first_difference(A.transition(a, a, p), A.identity());
        if (d)
          rep.violations.push_back({false, "self_transition", name(a), name(a), "", base[p],
                                    L.subsets[d->first], L.partitions[d->first][d->second],
                                    "self-transition is not the identity"});
      }
      for (int b : here) {
        if (a == b) continue;
        try {
          invert(A.transition(a, b, p));
        } catch (const NotInvertible& e) {
          rep.violations.push_back({false, "not_invertible", name(a), name(b), "", base[p],
                                    std::nullopt, std::nullopt, e.what()});
        }
      }
    }
    // pairs: t_ab o t_ba = id, reported at (a, b, a)
    for (std::size_t i = 0; i < here.size(); ++i)
      for (std::size_t j = i + 1; j < here.size(); ++j) {
        const int a = here[i], b = here[j];
        Gauge round = compose(A.transition(b, a, p), A.transition(a, b, p));
        auto d = first_difference(round, A.identity());
        if (d)
          rep.violations.push_back({false, "cocycle", name(a), name(b), name(a), base[p],
                                    L.subsets[d->first], L.partitions[d->first][d->second],
                                    "t(" + name(b) + "->" + name(a) + ") o t(" + name(a) + "->" +
                                        name(b) + ") is not the identity"});
      }
    // triples of distinct charts, each reported once
    for (std::size_t i = 0; i < here.size(); ++i)
      for (std::size_t j = i + 1; j < here.size(); ++j)
        for (std::size_t k = j + 1; k < here.size(); ++k) {
          std::vector<int> t{here[i], here[j], here[k]};
          do {
            const int a = t[0], b = t[1], c = t[2];
            Gauge via = compose(A.transition(b, c, p), A.transition(a, b, p));
            auto d = first_difference(via, A.transition(a, c, p));
            if (d) {
              rep.violations.push_back({false, "cocycle", name(a), name(b), name(c), base[p],
                                        L.subsets[d->first], L.partitions[d->first][d->second],
                                        "t(" + name(a) + "->" + name(c) + ") differs from t(" + name(b) +
                                            "->" + name(c) + ") o t(" + name(a) + "->" + name(b) + ")"});
              break;
            }
          } while (std::next_permutation(t.begin(), t.end()));
        }
  }
  return rep;
}

void require_valid(const AtlasPresentation& A) {
  auto rep = validate(A);
  if (!rep.ok()) {
    const auto& v = rep.violations.front();
    throw SemanticError("invalid atlas: " + v.kind + " at point \"" + v.point + "\": " + v.message);
  }
}

namespace {

std::vector<Chart> single_chart(const std::vector<std::string>& base) {
  Chart c{"U", {}};
  for (std::size_t i = 0; i < base.size(); ++i) c.domain.push_back(static_cast<int>(i));
  return {c};
}

}  // namespace

AtlasPresentation decomposed(const DimAssignment& dims, const std::vector<std::string>& base) {
  return AtlasPresentation(dims, base, single_chart(base));
}

AtlasPresentation vacant(const std::vector<std::size_t>& singleton_dims, const std::vector<std::string>& base) {
  const int n = static_cast<int>(singleton_dims.size());
  DimAssignment d(n);
  for (int i = 1; i <= n; ++i) d.set(IndexSet{i}, singleton_dims[i - 1]);
  return decomposed(d, base);
}

AtlasPresentation diagonal(const std::map<IndexSet, std::size_t>& dims, const Partition& rho,
                           const std::vector<std::string>& base) {
  const IndexSet& S = rho.ground();
  if (S.empty()) throw InvalidArgument("diagonal: empty ground set");
  for (const auto& [J, d] : dims)
    if (!J.subset_of(S) || J.empty()) throw InvalidArgument("diagonal: dims given for " + J.str() + " outside " + S.str());
  const int k = static_cast<int>(rho.size());
  DimAssignment d(k);
  const CubeLayout& L = layout(k);
  for (std::size_t s = 0; s < L.count(); ++s) {
    IndexSet u;
    for (int i : L.subsets[s]) u = u.unite(rho[i - 1]);
    auto it = dims.find(u);
    if (it == dims.end()) throw InvalidArgument("diagonal: no dim for " + u.str());
    d[s] = it->second;
  }
  return decomposed(d, base);
}

DimAssignment vacant_dims(const DimAssignment& d) {
  DimAssignment v(d.n());
  const CubeLayout& L = layout(d.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    if (L.subsets[s].size() == 1) v[s] = d[s];
  return v;
}

AtlasPresentation associated_decomposed(const AtlasPresentation& A) {
  AtlasPresentation B(A.dims(), A.base(), A.charts());
  for (const auto& [key, g] : A.transitions()) {
    auto [from, to, p] = key;
    B.set_transition(from, to, p, linear_part(g));
  }
  return B;
}

AtlasPresentation associated_vacant(const AtlasPresentation& A) {
  DimAssignment v = vacant_dims(A.dims());
  AtlasPresentation B(v, A.base(), A.charts());
  const CubeLayout& L = layout(A.n());
  for (const auto& [key, g] : A.transitions()) {
    auto [from, to, p] = key;
    Gauge h(v, v);
    for (std::size_t s = 0; s < L.count(); ++s)
      if (L.subsets[s].size() == 1) h.component(s, 0) = g.component(s, 0);
    B.set_transition(from, to, p, std::move(h));
  }
  return B;
}

AtlasPresentation subbundle(const AtlasPresentation& A, const BlockFamily& family) {
  if (family.ambient() != A.n()) throw InvalidArgument("block family lives over a different cube");
  AtlasPresentation B(family.restrict(A.dims()), A.base(), A.charts());
  for (const auto& [key, g] : A.transitions()) {
    auto [from, to, p] = key;
    B.set_transition(from, to, p, family.restrict(g));
  }
  return B;
}

Gauge relabel(const Gauge& g, const std::vector<int>& perm) {
  const int n = g.n();
  if (static_cast<int>(perm.size()) != n) throw InvalidArgument("relabel: permutation has the wrong length");
  {
    std::vector<int> chk(perm);
    std::sort(chk.begin(), chk.end());
    for (int i = 0; i < n; ++i)
      if (chk[i] != i + 1) throw InvalidArgument("relabel: not a permutation");
  }
  const CubeLayout& L = layout(n);
  auto map_set = [&](const IndexSet& J) {
    std::vector<int> v;
    for (int i : J) v.push_back(perm[i - 1]);
    return IndexSet(std::move(v));
  };
  DimAssignment src(n), tgt(n);
  for (std::size_t s = 0; s < L.count(); ++s) {
    src.set(map_set(L.subsets[s]), g.source()[s]);
    tgt.set(map_set(L.subsets[s]), g.target()[s]);
  }
  Gauge h(src, tgt);
  for (std::size_t s = 0; s < L.count(); ++s) {
    for (std::size_t r = 0; r < L.partitions[s].size(); ++r) {
      const Partition& rho = L.partitions[s][r];
      std::vector<IndexSet> nb;
      for (const auto& b : rho.blocks()) nb.push_back(map_set(b));
      Partition nrho(nb);
      // slot q of the new component reads original block order[q]
      std::vector<int> order;
      for (const auto& b : nrho.blocks())
        order.push_back(static_cast<int>(std::find(nb.begin(), nb.end(), b) - nb.begin()));
      const MultiTensor& T = g.component(s, r);
      MultiTensor& U = h.component(map_set(L.subsets[s]), nrho);
      const auto& od = T.in_dims();
      const std::size_t k = od.size();
      const std::size_t vol = T.in_volume();
      std::vector<std::size_t> idx(k), nidx(k);
      for (std::size_t flat = 0; flat < vol; ++flat) {
        std::size_t rem = flat;
        for (std::size_t b = k; b-- > 0;) {
          idx[b] = rem % od[b];
          rem /= od[b];
        }
        std::size_t nflat = 0;
        for (std::size_t q = 0; q < k; ++q) nflat = nflat * od[order[q]] + idx[order[q]];
        for (std::size_t o = 0; o < T.out_dim(); ++o) U.at(o, nflat) = T.at(o, flat);
      }
    }
  }
  return h;
}

AtlasPresentation relabel(const AtlasPresentation& A, const std::vector<int>& perm) {
  Gauge probe = relabel(A.identity(), perm);
  AtlasPresentation B(probe.source(), A.base(), A.charts());
  for (const auto& [key, g] : A.transitions()) {
    auto [from, to, p] = key;
    B.set_transition(from, to, p, relabel(g, perm));
  }
  return B;
}

AtlasPresentation trivial_atlas(const DimAssignment& dims, const std::vector<std::string>& base,
                                std::vector<Chart> charts) {
  AtlasPresentation A(dims, base, std::move(charts));
  for (std::size_t p = 0; p < base.size(); ++p) {
    auto here = A.charts_at(static_cast<int>(p));
    for (int a : here)
      for (int b : here)
        if (a != b) A.set_transition(a, b, static_cast<int>(p), Gauge::identity(dims));
  }
  return A;
}

AtlasPresentation twist(const AtlasPresentation& A,
                        const std::map<std::pair<int, int>, Gauge>& per_chart_point) {
  AtlasPresentation B(A.dims(), A.base(), A.charts());
  std::map<std::pair<int, int>, Gauge> inverses;
  auto g = [&](int c, int p) -> const Gauge& {
    auto it = per_chart_point.find({c, p});
    return it == per_chart_point.end() ? A.identity() : it->second;
  };
  auto ginv = [&](int c, int p) -> const Gauge& {
    auto it = inverses.find({c, p});
    if (it == inverses.end()) it = inverses.emplace(std::make_pair(c, p), invert(g(c, p))).first;
    return it->second;
  };
  for (const auto& [key, t] : A.transitions()) {
    auto [from, to, p] = key;
    B.set_transition(from, to, p, compose(g(to, p), compose(t, ginv(from, p))));
  }
  return B;
}

}  // namespace mvb
