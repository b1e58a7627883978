// Splittings are built per block family nu (a bundle C_nu obtained from the
// ambient one by taking faces and iterated cores). Only the top tensor of
// each C_nu is computed; the lower components come from the smaller
// families, which is what makes all the splittings compatible.
//
// Top map of C_nu at a point, in a chart:
//   theta: pullback coordinates with a chosen top slot (zero by default),
//   then for j = 2..k the frame step
//     X_j(e) = sum over l of e_j[l] ._j X_{j-1}(e_1, .., b_l, .., e_k)
//   and finally the charts are pasted with weights over +_1.
#include "mvb/split.hpp"

#include <algorithm>

#include "mvb/atlas.hpp"
#include "mvb/corepull.hpp"
#include "mvb/errors.hpp"
#include "mvb/format.hpp"

namespace mvb {

const char* strategy_name(PasteStrategy s) { return s == PasteStrategy::Uniform ? "uniform" : "least-chart"; }

PasteStrategy parse_strategy(const std::string& s) {
  if (s == "least-chart") return PasteStrategy::LeastChart;
  if (s == "uniform" || s == "uniform-average") return PasteStrategy::Uniform;
  throw InvalidArgument("unknown strategy \"" + s + "\" (least-chart or uniform)");
}

Blocks singleton_blocks(int n) {
  Blocks b;
  for (int i = 1; i <= n; ++i) b.push_back(IndexSet{i});
  return b;
}

namespace {

IndexSet block_union(const Blocks& nu) {
  IndexSet u;
  for (const auto& b : nu) u = u.unite(b);
  return u;
}

Blocks sub_blocks(const Blocks& nu, const IndexSet& mu) {
  Blocks out;
  for (int q : mu) out.push_back(nu[q - 1]);
  return out;
}

Blocks merge_pair(const Blocks& nu, int a, int b) {
  Blocks out;
  for (int q = 1; q <= static_cast<int>(nu.size()); ++q)
    if (q != a && q != b) out.push_back(nu[q - 1]);
  out.push_back(nu[a - 1].unite(nu[b - 1]));
  std::sort(out.begin(), out.end(), [](const IndexSet& x, const IndexSet& y) { return x.min() < y.min(); });
  return out;
}

int discrete_index(const CubeLayout& L, int s) {
  std::vector<IndexSet> singles;
  for (int i : L.subsets[s]) singles.push_back(IndexSet{i});
  return L.partition(s, Partition(singles));
}

Gauge inclusion_gauge(const DimAssignment& from, const DimAssignment& to) {
  Gauge g(from, to);
  const CubeLayout& L = layout(from.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    if (from[s] == to[s]) g.component(s, 0) = MultiTensor::identity(from[s]);
  return g;
}

std::string where(const AtlasPresentation& A, int chart, int p) {
  return "chart " + A.charts()[chart].id + ", point " + A.base()[p];
}

}  // namespace

SplittingEngine::SplittingEngine(std::shared_ptr<const AtlasPresentation> A, SplitOptions opt)
    : opt_(std::move(opt)) {
  require_valid(*A);
  provider_ = [A](const Blocks& nu) {
    return std::make_shared<const AtlasPresentation>(subbundle(*A, BlockFamily(A->n(), nu)));
  };
}

SplittingEngine::SplittingEngine(Provider provider, SplitOptions opt)
    : provider_(std::move(provider)), opt_(std::move(opt)) {}

std::shared_ptr<const AtlasPresentation> SplittingEngine::presentation(const Blocks& nu) {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  auto it = pres_.find(nu);
  if (it != pres_.end()) return it->second;
  auto P = provider_(nu);
  pres_[nu] = P;
  return P;
}

std::size_t SplittingEngine::cached_tensors() const { return sigma_.size(); }

Gauge SplittingEngine::lower_splitting(const Blocks& nu, const AtlasPresentation& C, int point) {
  const int k = static_cast<int>(nu.size());
  const CubeLayout& L = layout(k);
  Gauge g(vacant_dims(C.dims()), C.dims());
  for (std::size_t s = 0; s < L.count(); ++s) {
    const IndexSet& mu = L.subsets[s];
    if (mu.size() == 1) {
      g.component(s, 0) = MultiTensor::identity(C.dims()[s]);
    } else if (static_cast<int>(mu.size()) < k) {
      g.component(s, discrete_index(L, static_cast<int>(s))) = sigma(sub_blocks(nu, mu)).at(point);
    }
  }
  return g;
}

BundleElement SplittingEngine::local_top(const AtlasPresentation& C, const std::vector<Gauge>& lower, int chart,
                                         int point, const Coords& vac) {
  const int k = C.n();
  const CubeLayout& L = layout(k);
  const IndexSet top = IndexSet::range(k);
  const int ts = L.index(top);
  std::function<BundleElement(int, const Coords&)> frame = [&](int j, const Coords& e) -> BundleElement {
    Coords low = lower[chart].evaluate(e);
    if (j == 1) {
      low[ts].assign(C.dims()[ts], Rational());
      if (opt_.theta) {
        Vector t = opt_.theta(C, chart, point, low);
        if (t.size() != C.dims()[ts]) throw DimensionMismatch("theta hook returned a vector of the wrong size");
        low[ts] = std::move(t);
      }
      return BundleElement{top, chart, point, std::move(low)};
    }
    BundleElement acc = zero_lift(C, project_to(C, BundleElement{top, chart, point, low}, top.without(j)), top);
    const int js = L.index(IndexSet{j});
    for (std::size_t l = 0; l < e[js].size(); ++l) {
      if (e[js][l].is_zero()) continue;
      Coords f = e;
      f[js].assign(f[js].size(), Rational());
      f[js][l] = 1;
      acc = add(C, acc, scale(C, e[js][l], frame(j - 1, f), j), j);
    }
    return acc;
  };
  return frame(k, vac);
}

BundleElement SplittingEngine::pasted_top(const AtlasPresentation& C, const std::vector<Gauge>& lower, int point,
                                          const Coords& vac) {
  const int c = C.canonical_chart(point);
  if (opt_.strategy == PasteStrategy::LeastChart) return local_top(C, lower, c, point, vac);
  const IndexSet top = IndexSet::range(C.n());
  const auto charts = C.charts_at(point);
  const Rational w(1, static_cast<long>(charts.size()));
  BundleElement acc{top, c, point, lower[c].evaluate(vac)};
  acc = zero_lift(C, project_to(C, acc, top.without(1)), top);
  const DimAssignment vd = vacant_dims(C.dims());
  for (int a : charts) {
    Coords ea = vac;
    if (a != c) {
      const Gauge& t = C.transition(c, a, point);
      for (std::size_t s = 0; s < ea.size(); ++s)
        if (vd[s]) ea[s] = t.linear_part(s).apply(vac[s]);
    }
    BundleElement X = transport(C, local_top(C, lower, a, point, ea), c);
    acc = add(C, acc, scale(C, w, X, 1), 1);
  }
  return acc;
}

const std::map<int, MultiTensor>& SplittingEngine::sigma(const Blocks& nu) {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  if (auto it = sigma_.find(nu); it != sigma_.end()) return it->second;
  const int k = static_cast<int>(nu.size());
  if (k < 2) throw InvalidArgument("splitting tensors exist for families of at least two blocks");
  auto C = presentation(nu);
  const AtlasPresentation vacC = associated_vacant(*C);
  const DimAssignment vd = vacC.dims();
  const CubeLayout& L = layout(k);
  const int ts = L.index(IndexSet::range(k));
  const int disc = discrete_index(L, ts);

  std::map<int, MultiTensor> out;
  for (std::size_t pi = 0; pi < C->base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    const int c = C->canonical_chart(p);
    std::vector<Gauge> lower(C->charts().size());
    lower[c] = lower_splitting(nu, *C, p);
    for (int a : C->charts_at(p))
      if (a != c) lower[a] = compose(C->transition(c, a, p), compose(lower[c], vacC.transition(a, c, p)));

    std::vector<std::size_t> in;
    for (int i = 1; i <= k; ++i) in.push_back(vd[L.index(IndexSet{i})]);
    MultiTensor T(C->dims()[ts], in);
    const std::size_t vol = T.in_volume();
    for (std::size_t flat = 0; flat < vol && T.out_dim(); ++flat) {
      Coords e = zero_coords(vd);
      std::size_t rem = flat;
      for (int i = k; i >= 1; --i) {
        e[L.index(IndexSet{i})][rem % in[i - 1]] = 1;
        rem /= in[i - 1];
      }
      const BundleElement X = pasted_top(*C, lower, p, e);
      for (std::size_t o = 0; o < T.out_dim(); ++o) T.at(o, flat) = X.comps[ts][o];
    }
    if (opt_.verify) {
      Gauge full = lower[c];
      full.component(ts, disc) = T;
      Rng rng(0x51 + 7919 * pi + 104729 * static_cast<std::uint64_t>(k));
      Coords e = zero_coords(vd);
      for (auto& v : e)
        for (auto& x : v) x = rng.small_rational();
      const BundleElement X = pasted_top(*C, lower, p, e);
      if (full.evaluate(e) != X.comps)
        throw SemanticError("top map for " + block_union(nu).str() + " is not multilinear at point " +
                            C->base()[p] + " (theta must be linear over E_{[k]-1})");
    }
    out.emplace(p, std::move(T));
  }
  return sigma_.emplace(nu, std::move(out)).first->second;
}

Splitting SplittingEngine::splitting(const Blocks& nu) {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  auto C = presentation(nu);
  auto src = std::make_shared<const AtlasPresentation>(associated_vacant(*C));
  const int k = static_cast<int>(nu.size());
  std::map<int, Gauge> canon;
  for (std::size_t pi = 0; pi < C->base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    Gauge g = k >= 2 ? lower_splitting(nu, *C, p) : Gauge::identity(C->dims());
    if (k >= 2) {
      const CubeLayout& L = layout(k);
      const int ts = L.index(IndexSet::range(k));
      g.component(ts, discrete_index(L, ts)) = sigma(nu).at(p);
    }
    canon[p] = g;
  }
  return Splitting{morphism_from_canonical(src, C, canon)};
}

Decomposition SplittingEngine::decomposition(const Blocks& nu) {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  if (auto it = dec_.find(nu); it != dec_.end()) return it->second;
  auto C = presentation(nu);
  const int k = static_cast<int>(nu.size());
  Decomposition d;
  if (k <= 1) {
    auto src = std::make_shared<const AtlasPresentation>(associated_decomposed(*C));
    std::map<int, Gauge> canon;
    for (std::size_t p = 0; p < C->base().size(); ++p) canon[static_cast<int>(p)] = Gauge::identity(C->dims());
    d = Decomposition{morphism_from_canonical(src, C, canon)};
  } else {
    std::map<IndexSet, Decomposition> cores;
    for (int a = 1; a <= k; ++a)
      for (int b = a + 1; b <= k; ++b) cores.emplace(IndexSet{a, b}, decomposition(merge_pair(nu, a, b)));
    d = splitting_to_decomposition(C, splitting(nu), cores);
  }
  return dec_.emplace(nu, std::move(d)).first->second;
}

Decomposition SplittingEngine::assembled(const Blocks& nu) {
  std::lock_guard<std::recursive_mutex> lock(mu_);
  auto C = presentation(nu);
  const int k = static_cast<int>(nu.size());
  const CubeLayout& L = layout(k);
  auto src = std::make_shared<const AtlasPresentation>(associated_decomposed(*C));
  std::map<int, Gauge> canon;
  for (std::size_t pi = 0; pi < C->base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    Gauge g = Gauge::identity(C->dims());
    for (std::size_t s = 0; s < L.count(); ++s)
      for (std::size_t r = 1; r < L.partitions[s].size(); ++r) {
        Blocks fam;
        for (const auto& b : L.partitions[s][r].blocks()) {
          IndexSet u;
          for (int q : b) u = u.unite(nu[q - 1]);
          fam.push_back(u);
        }
        g.component(s, r) = sigma(fam).at(p);
      }
    canon[p] = g;
  }
  return Decomposition{morphism_from_canonical(src, C, canon)};
}

Splitting find_splitting(std::shared_ptr<const AtlasPresentation> A, const SplitOptions& opt) {
  SplittingEngine eng(A, opt);
  return eng.splitting(singleton_blocks(A->n()));
}

Certificate check_splitting(const Splitting& s) {
  Certificate cert{"linear splitting: natural, injective, identity on singletons"};
  const auto& A = *s.m.target;
  const CubeLayout& L = layout(A.n());
  if (!naturality_violations(s.m).empty()) cert.fail({{"reason", "not natural"}});
  if (!fiberwise_injective(s.m)) cert.fail({{"reason", "not injective"}});
  for (const auto& [key, g] : s.m.data)
    for (std::size_t q = 0; q < L.count(); ++q)
      if (L.subsets[q].size() == 1 && !g.component(q, 0).is_identity())
        cert.fail({{"reason", "not the identity on a singleton"}, {"at", where(A, key.first, key.second)}});
  // linearity in every slot, in every chart, on sampled inputs
  Rng rng(17);
  std::size_t samples = 0;
  for (const auto& [key, g] : s.m.data) {
    const DimAssignment& vd = g.source();
    for (int i = 1; i <= A.n(); ++i) {
      Coords x = zero_coords(vd), y = zero_coords(vd);
      for (std::size_t q = 0; q < vd.values().size(); ++q)
        for (std::size_t r = 0; r < vd[q]; ++r) {
          x[q][r] = rng.small_int();
          y[q][r] = L.subsets[q].contains(i) ? rng.small_int() : x[q][r];
        }
      Coords xy = x;
      for (std::size_t q = 0; q < vd.values().size(); ++q)
        if (L.subsets[q].contains(i))
          for (std::size_t r = 0; r < vd[q]; ++r) xy[q][r] += y[q][r];
      const IndexSet top = IndexSet::range(A.n());
      BundleElement sx{top, key.first, key.second, g.evaluate(x)}, sy{top, key.first, key.second, g.evaluate(y)};
      BundleElement sxy{top, key.first, key.second, g.evaluate(xy)};
      ++samples;
      if (!equal(A, sxy, add(A, sx, sy, i)))
        cert.fail({{"reason", "not linear"}, {"index", i}, {"at", where(A, key.first, key.second)}});
    }
  }
  cert.witnesses = {{"n", A.n()}, {"fibers", s.m.data.size()}, {"linearity_samples", samples}};
  return cert;
}

Decomposition splitting_to_decomposition(std::shared_ptr<const AtlasPresentation> A, const Splitting& sigma,
                                         const std::map<IndexSet, Decomposition>& cores) {
  const int n = A->n();
  const CubeLayout& L = layout(n);
  const IndexSet top = IndexSet::range(n);
  auto dec = std::make_shared<const AtlasPresentation>(associated_decomposed(*A));
  const DimAssignment vd = vacant_dims(A->dims());
  if (!(*sigma.m.target == *A)) throw SemanticError("the splitting is not a splitting of this presentation");

  std::vector<IndexSet> pairs;
  for (const auto& J : L.subsets)
    if (J.size() == 2) pairs.push_back(J);
  std::map<IndexSet, BlockFamily> fam;
  for (const auto& J : pairs) {
    auto it = cores.find(J);
    if (it == cores.end()) throw SemanticError("missing decomposition of the core " + top.str() + "/" + J.str());
    fam.emplace(J, core_spec(n, top, J).family);
    if (!(*it->second.m.target == subbundle(*A, fam.at(J))))
      throw SemanticError("the decomposition given for " + J.str() + " is not on the core " + top.str() + "/" + J.str());
  }

  // compatibility: each core decomposition restricts to the splitting on the
  // opposite face, and any two agree on the intersection of their cores
  for (const auto& [key, sg] : sigma.m.data) {
    auto [chart, p] = key;
    for (const auto& I : pairs) {
      const BlockFamily& fI = fam.at(I);
      const Gauge& gI = cores.at(I).m.at(chart, p);
      std::vector<IndexSet> singles, in_ambient;
      for (int q = 1; q <= fI.k(); ++q)
        if (fI.blocks()[q - 1].size() == 1) {
          singles.push_back(IndexSet{q});
          in_ambient.push_back(fI.blocks()[q - 1]);
        }
      if (!singles.empty()) {
        const BlockFamily face_in_core(fI.k(), singles), face(n, in_ambient);
        const Gauge a = face_in_core.restrict(gI);
        const Gauge b = face.restrict(sg);
        if (!(reshape(a, b.source(), b.target()) == b))
          throw SemanticError("incompatible inputs: the decomposition of core " + I.str() +
                              " does not restrict to the splitting on " + top.minus(I).str() + " at " +
                              where(*A, chart, p));
      }
      for (const auto& J : pairs) {
        if (!(I < J)) continue;
        std::vector<IndexSet> common;
        if (I.disjoint(J)) {
          common = {I, J};
        } else {
          common = {I.unite(J)};
        }
        for (int q : top.minus(I.unite(J))) common.push_back(IndexSet{q});
        auto local = [&](const BlockFamily& f) {
          std::vector<IndexSet> bl;
          for (const auto& blk : common) {
            std::vector<int> pos;
            for (int q = 1; q <= f.k(); ++q)
              if (f.blocks()[q - 1].subset_of(blk)) pos.push_back(q);
            bl.push_back(IndexSet(pos));
          }
          return BlockFamily(f.k(), bl);
        };
        const Gauge a = local(fI).restrict(gI);
        const Gauge b = local(fam.at(J)).restrict(cores.at(J).m.at(chart, p));
        if (!(a == b))
          throw SemanticError("incompatible core decompositions: " + I.str() + " and " + J.str() +
                              " differ on the intersection of their cores at " + where(*A, chart, p));
      }
    }
  }

  std::map<int, Gauge> canon;
  for (std::size_t pi = 0; pi < A->base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    const int c = A->canonical_chart(p);
    const Gauge& sg = sigma.m.at(c, p);
    bool mismatch = false;
    std::function<BundleElement(std::size_t, const Coords&)> chain = [&](std::size_t m, const Coords& x) {
      if (m == 0) {
        Coords v = zero_coords(vd);
        for (std::size_t s = 0; s < L.count(); ++s)
          if (L.subsets[s].size() == 1) v[s] = x[s];
        return BundleElement{top, c, p, sg.evaluate(v)};
      }
      const IndexSet& J = pairs[m - 1];
      const int s0 = J.min(), t0 = J.max();
      auto covered = [&](const IndexSet& I) {
        for (std::size_t i = 0; i + 1 < m; ++i)
          if (pairs[i].subset_of(I)) return true;
        return false;
      };
      Coords y = zero_coords(A->dims()), z = zero_coords(A->dims());
      for (std::size_t s = 0; s < L.count(); ++s) {
        const IndexSet& I = L.subsets[s];
        if (I.size() == 1 || covered(I)) y[s] = x[s];
      }
      for (std::size_t s = 0; s < L.count(); ++s) {
        const IndexSet& I = L.subsets[s];
        if (I.disjoint(J)) {
          z[s] = y[s];
        } else if (J.subset_of(I) && !covered(I)) {
          z[s] = x[s];
        }
      }
      {
        // x = y +_s (0_{p_s y} +_t z) in decomposed coordinates
        BundleElement Y{top, c, p, y}, Z{top, c, p, z};
        BundleElement back = add(*dec, Y, add(*dec, zero_lift(*dec, project(*dec, Y, s0), top), Z, t0), s0);
        if (back.comps != x) throw Error("internal: chain decomposition of the input failed");
      }
      const BundleElement w = chain(m - 1, y);
      const BlockFamily& f = fam.at(J);
      const BundleElement SZ{top, c, p, f.scatter(cores.at(J).m.at(c, p).evaluate(f.gather(z)), A->dims())};
      const BundleElement r1 = add(*A, w, add(*A, zero_lift(*A, project(*A, w, s0), top), SZ, t0), s0);
      const BundleElement r2 = add(*A, w, add(*A, zero_lift(*A, project(*A, w, t0), top), SZ, s0), t0);
      if (r1.comps != r2.comps) mismatch = true;
      return r1;
    };
    Gauge g = tabulate(A->dims(), A->dims(), [&](const Coords& x) { return chain(pairs.size(), x).comps; });
    if (mismatch) throw SemanticError("the two bracketings of the chain step disagree at point " + A->base()[p]);
    Rng rng(0xdec + pi);
    Coords x = zero_coords(A->dims());
    for (auto& v : x)
      for (auto& q : v) q = rng.small_rational();
    if (g.evaluate(x) != chain(pairs.size(), x).comps)
      throw SemanticError("chain construction is not of gauge form at point " + A->base()[p]);
    if (!is_statomorphism(g)) throw SemanticError("chain construction does not fix the building bundles");
    if (!(reshape(g, vd, A->dims()) == sg)) throw SemanticError("decomposition does not restrict to the splitting");
    for (const auto& J : pairs)
      if (!(fam.at(J).restrict(g) == cores.at(J).m.at(c, p)))
        throw SemanticError("decomposition does not restrict to the core decomposition " + J.str());
    canon[p] = std::move(g);
  }
  return Decomposition{morphism_from_canonical(dec, A, canon)};
}

Splitting splitting_of(const Decomposition& d) {
  auto A = d.m.target;
  auto src = std::make_shared<const AtlasPresentation>(associated_vacant(*A));
  BundleMorphism m{src, A, {}};
  for (const auto& [key, g] : d.m.data) m.data[key] = reshape(g, src->dims(), A->dims());
  return Splitting{m};
}

std::map<IndexSet, Decomposition> core_decompositions(const Decomposition& d) {
  std::map<IndexSet, Decomposition> out;
  const int n = d.m.target->n();
  const IndexSet top = IndexSet::range(n);
  for (const auto& J : layout(n).subsets)
    if (J.size() == 2) out.emplace(J, Decomposition{core_morphism(d.m, top, J)});
  return out;
}

Decomposition decompose(std::shared_ptr<const AtlasPresentation> A, const SplitOptions& opt) {
  SplittingEngine eng(A, opt);
  return eng.decomposition(singleton_blocks(A->n()));
}

Certificate check_decomposition(const Decomposition& d) {
  Certificate cert{"decomposition: natural, fiberwise bijective, identity on all building bundles"};
  const auto& A = *d.m.target;
  const IndexSet top = IndexSet::range(A.n());
  if (!naturality_violations(d.m).empty()) cert.fail({{"reason", "not natural"}});
  if (!fiberwise_bijective(d.m)) cert.fail({{"reason", "not fiberwise bijective"}});
  std::size_t building = 0;
  for (const auto& I : layout(A.n()).subsets) {
    const BundleMorphism c = core_morphism(d.m, I, I);
    ++building;
    for (const auto& [key, g] : c.data)
      if (!(g == Gauge::identity(g.source())))
        cert.fail({{"reason", "not the identity on a building bundle"},
                   {"building", to_json(I)},
                   {"at", where(A, key.first, key.second)}});
  }
  cert.witnesses = {{"n", A.n()}, {"fibers", d.m.data.size()}, {"building_bundles", building},
                    {"dim_total", A.dims().node_dim(top)}};
  return cert;
}

BundleMorphism torsor(const Decomposition& d1, const Decomposition& d2) {
  if (!(*d1.m.target == *d2.m.target) || !(*d1.m.source == *d2.m.source))
    throw SemanticError("torsor: decompositions of different presentations");
  BundleMorphism tau{d1.m.source, d1.m.source, {}};
  for (const auto& [key, g] : d1.m.data) tau.data[key] = compose(invert(g), d2.m.at(key.first, key.second));
  return tau;
}

Decomposition act(const Decomposition& d, const BundleMorphism& tau) { return Decomposition{compose(d.m, tau)}; }

Certificate check_torsor(const Decomposition& d1, const Decomposition& d2, const BundleMorphism& tau) {
  Certificate cert{"two decompositions differ by a statomorphism"};
  std::size_t nontrivial = 0;
  for (const auto& [key, g] : tau.data) {
    if (!is_statomorphism(g)) cert.fail({{"reason", "not a statomorphism"}, {"at", where(*d1.m.target, key.first, key.second)}});
    if (!(g == Gauge::identity(g.source()))) ++nontrivial;
  }
  if (!naturality_violations(tau).empty()) cert.fail({{"reason", "not natural"}});
  if (!morphism_equal(act(d1, tau).m, d2.m)) cert.fail({{"reason", "d1 o tau differs from d2"}});
  const bool same = morphism_equal(d1.m, d2.m);
  if (same != (nontrivial == 0)) cert.fail({{"reason", "action is not free"}});
  cert.witnesses = {{"fibers", tau.data.size()}, {"nontrivial_fibers", nontrivial}, {"identical", same}};
  return cert;
}

AtlasPresentation normalize_atlas(const AtlasPresentation& A, const Decomposition& d) {
  if (!(*d.m.target == A)) throw SemanticError("normalize: decomposition of a different presentation");
  AtlasPresentation B(A.dims(), A.base(), A.charts());
  for (const auto& [key, t] : A.transitions()) {
    auto [from, to, p] = key;
    B.set_transition(from, to, p, compose(invert(d.m.at(to, p)), compose(t, d.m.at(from, p))));
  }
  return B;
}

PullbackSplitting split_pullback(std::shared_ptr<const AtlasPresentation> A, const SplitOptions& opt) {
  const Decomposition d = decompose(A, opt);
  PullbackPresentation pb = pullback(A);
  const DimAssignment& Pd = pb.P->dims();
  PullbackSplitting out{pb.P, BundleMorphism{pb.P, A, {}}, pb.pi,
                        Certificate{"pullback splitting: pi o Sigma^P = id, natural, linear over every side"}};
  const Gauge incl = inclusion_gauge(Pd, A->dims());
  for (const auto& [key, S] : d.m.data) {
    const Gauge SP = reshape(S, Pd, Pd);
    out.sigma.data[key] = compose(S, compose(incl, invert(SP)));
  }
  Certificate& cert = out.cert;
  for (const auto& [key, g] : out.sigma.data)
    if (!(compose(pb.pi.at(key.first, key.second), g) == Gauge::identity(Pd)))
      cert.fail({{"reason", "pi o Sigma^P is not the identity"}, {"at", where(*A, key.first, key.second)}});
  if (!naturality_violations(out.sigma).empty()) cert.fail({{"reason", "not natural"}});
  if (!fiberwise_injective(out.sigma)) cert.fail({{"reason", "not injective"}});
  Rng rng(99);
  const IndexSet top = IndexSet::range(A->n());
  const CubeLayout& L = layout(A->n());
  std::size_t samples = 0;
  for (int k = 1; k <= A->n() && cert.passed; ++k)
    for (const auto& [key, g] : out.sigma.data) {
      BundleElement x = random_element(*pb.P, top, key.first, key.second, rng);
      BundleElement y = random_element(*pb.P, top, key.first, key.second, rng);
      for (std::size_t s = 0; s < L.count(); ++s)
        if (!L.subsets[s].contains(k)) y.comps[s] = x.comps[s];
      const BundleElement lhs = apply(out.sigma, add(*pb.P, x, y, k));
      const BundleElement rhs = add(*A, apply(out.sigma, x), apply(out.sigma, y), k);
      ++samples;
      if (!equal(*A, lhs, rhs)) cert.fail({{"reason", "not linear over E_{[n]-k}"}, {"k", k}});
    }
  cert.witnesses = {{"fibers", out.sigma.data.size()}, {"linearity_samples", samples},
                    {"dim_P", Pd.node_dim(top)}, {"dim_E", A->dims().node_dim(top)}};
  return out;
}

}  // namespace mvb
