#include "mvb/corepull.hpp"

#include <algorithm>
#include <numeric>

#include "mvb/errors.hpp"
#include "mvb/format.hpp"

namespace mvb {

CoreSpec core_spec(int n, const IndexSet& S, const IndexSet& J) {
  if (J.empty()) throw InvalidArgument("core: J must be nonempty");
  if (!J.subset_of(S)) throw InvalidArgument("core: " + J.str() + " is not inside " + S.str());
  if (!S.empty() && S.max() > n) throw InvalidArgument("core: " + S.str() + " is not inside [" + std::to_string(n) + "]");
  DiagonalPartition rho(S, J);
  return CoreSpec{S, J, rho, BlockFamily(n, rho.as_partition().blocks())};
}

namespace {

bool is_union_of(const BlockFamily& f, const IndexSet& K) {
  for (const auto& b : f.blocks())
    if (!b.disjoint(K) && !b.subset_of(K)) return false;
  IndexSet u;
  for (const auto& b : f.blocks())
    if (b.subset_of(K)) u = u.unite(b);
  return u == K;
}

struct ClosureFailure {
  int subset;
  Coords probe;
};

// Probes g on every block pattern supported on the family and checks that
// nothing leaks outside it and that the restricted gauge reproduces g.
std::optional<ClosureFailure> closure_failure(const Gauge& g, const BlockFamily& f) {
  const CubeLayout& L = layout(g.n());
  const DimAssignment src = f.restrict(g.source());
  const DimAssignment tgt = f.restrict(g.target());
  std::optional<ClosureFailure> bad;
  auto map = [&](const Coords& small) {
    Coords full = f.scatter(small, g.source());
    Coords out = g.evaluate(full);
    for (std::size_t s = 0; s < L.count() && !bad; ++s)
      if (!is_union_of(f, L.subsets[s]))
        for (const auto& x : out[s])
          if (!x.is_zero()) {
            bad = ClosureFailure{static_cast<int>(s), full};
            break;
          }
    return f.gather(out);
  };
  Gauge probed = tabulate(src, tgt, map);
  if (bad) return bad;
  if (!(probed == f.restrict(g))) return ClosureFailure{-1, {}};
  return std::nullopt;
}

}  // namespace

Certificate core_closure(const AtlasPresentation& A, const IndexSet& S, const IndexSet& J) {
  const CoreSpec spec = core_spec(A.n(), S, J);
  Certificate cert{"transitions preserve the core " + S.str() + "/" + J.str()};
  std::size_t checked = 0;
  for (const auto& [key, t] : A.transitions()) {
    auto [from, to, p] = key;
    ++checked;
    if (auto bad = closure_failure(t, spec.family)) {
      json ce{{"from", A.charts()[from].id}, {"to", A.charts()[to].id}, {"point", A.base()[p]}};
      if (bad->subset >= 0) {
        ce["leaks_into"] = to_json(layout(A.n()).subsets[bad->subset]);
        ce["input"] = coords_json(bad->probe, A.dims());
      } else {
        ce["reason"] = "restricted gauge differs from probed action";
      }
      cert.fail(ce);
    }
  }
  cert.witnesses = {{"S", to_json(S)}, {"J", to_json(J)}, {"transitions_checked", checked}};
  return cert;
}

AtlasPresentation core(const AtlasPresentation& A, const IndexSet& S, const IndexSet& J) {
  const CoreSpec spec = core_spec(A.n(), S, J);
  Certificate c = core_closure(A, S, J);
  if (!c.passed) throw SemanticError("core " + S.str() + "/" + J.str() + " is not closed: " + c.counterexample.dump());
  return subbundle(A, spec.family);
}

bool in_core(const AtlasPresentation& A, const BundleElement& e, const IndexSet& S, const IndexSet& J) {
  const CoreSpec spec = core_spec(A.n(), S, J);
  if (e.node != S) return false;
  const CubeLayout& L = layout(A.n());
  for (std::size_t s = 0; s < L.count(); ++s) {
    if (!L.subsets[s].subset_of(S) || is_union_of(spec.family, L.subsets[s])) continue;
    for (const auto& x : e.comps[s])
      if (!x.is_zero()) return false;
  }
  return true;
}

namespace {

BlockFamily compose_families(const BlockFamily& outer, const BlockFamily& inner) {
  std::vector<IndexSet> blocks;
  for (const auto& b : inner.blocks()) blocks.push_back(outer.unite(b));
  return BlockFamily(outer.ambient(), blocks);
}

}  // namespace

Certificate core_by_stages(const AtlasPresentation& A, const IndexSet& S, const IndexSet& K, const IndexSet& J,
                           Rng& rng, int samples) {
  if (K.empty() || !K.subset_of(J)) throw InvalidArgument("core_by_stages: need nonempty K inside J");
  const CoreSpec outer = core_spec(A.n(), S, K);
  const CoreSpec direct = core_spec(A.n(), S, J);
  Certificate cert{"core " + S.str() + "/" + J.str() + " equals a core of the core " + S.str() + "/" + K.str()};

  const AtlasPresentation CK = core(A, S, K);
  const int k1 = CK.n();
  std::vector<int> jp;
  for (int q = 0; q < k1; ++q)
    if (outer.family.blocks()[q].subset_of(J)) jp.push_back(q + 1);
  const IndexSet Sp = IndexSet::range(k1), Jp(jp);
  const CoreSpec inner = core_spec(k1, Sp, Jp);
  const AtlasPresentation staged = core(CK, Sp, Jp);
  const AtlasPresentation once = core(A, S, J);
  const bool families_match = compose_families(outer.family, inner.family) == direct.family;
  const bool same = staged == once;
  if (!families_match || !same)
    cert.fail({{"reason", families_match ? "presentations differ" : "block families differ"}});

  // membership: e in E^S_J iff its image in E^S_K lies in the inner core
  const CubeLayout& L = layout(A.n());
  int agree = 0;
  for (int t = 0; t < samples && cert.passed; ++t) {
    const int p = static_cast<int>(rng.range(0, static_cast<long>(A.base().size()) - 1));
    const auto charts = A.charts_at(p);
    const int chart = charts[rng.range(0, static_cast<long>(charts.size()) - 1)];
    BundleElement e = random_element(A, S, chart, p, rng);
    BundleElement c = canonical(A, e);
    for (std::size_t s = 0; s < L.count(); ++s) {
      const IndexSet& Q = L.subsets[s];
      const bool keep_outer = is_union_of(outer.family, Q);
      const bool keep_direct = is_union_of(direct.family, Q);
      if (!keep_outer || (!keep_direct && rng.coin())) c.comps[s].assign(c.comps[s].size(), Rational());
    }
    e = transport(A, c, chart);
    const bool direct_member = in_core(A, e, S, J);
    const bool canonical_member = in_core(A, canonical(A, e), S, J);
    BundleElement small{Sp, A.canonical_chart(p), p, outer.family.gather(canonical(A, e).comps)};
    const bool staged_member = in_core(CK, small, Sp, Jp);
    if (direct_member != staged_member || direct_member != canonical_member) {
      cert.fail({{"element", to_json(A, e)},
                 {"direct", direct_member},
                 {"staged", staged_member},
                 {"canonical_chart", canonical_member}});
    } else {
      ++agree;
    }
  }
  cert.witnesses = {{"S", to_json(S)},
                    {"K", to_json(K)},
                    {"J", to_json(J)},
                    {"inner_S", to_json(Sp)},
                    {"inner_J", to_json(Jp)},
                    {"presentations_equal", same},
                    {"membership_samples_agreeing", agree}};
  return cert;
}

BundleMorphism core_morphism(const BundleMorphism& tau, const IndexSet& S, const IndexSet& J) {
  if (!naturality_violations(tau).empty()) throw SemanticError("core_morphism: the morphism is not natural");
  const CoreSpec spec = core_spec(tau.source->n(), S, J);
  auto src = std::make_shared<const AtlasPresentation>(core(*tau.source, S, J));
  auto tgt = std::make_shared<const AtlasPresentation>(core(*tau.target, S, J));
  BundleMorphism m{src, tgt, {}};
  for (const auto& [key, g] : tau.data) {
    if (closure_failure(g, spec.family))
      throw SemanticError("core_morphism: image of the core leaves the core at chart " +
                          tau.source->charts()[key.first].id + ", point " + tau.source->base()[key.second]);
    m.data[key] = spec.family.restrict(g);
  }
  return m;
}

namespace {

Gauge projection_gauge(const DimAssignment& from, const DimAssignment& to) {
  Gauge g(from, to);
  const CubeLayout& L = layout(from.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    if (from[s] == to[s]) g.component(s, 0) = MultiTensor::identity(from[s]);
  return g;
}

AtlasPresentation with_dims(const AtlasPresentation& A, const DimAssignment& d) {
  AtlasPresentation B(d, A.base(), A.charts());
  for (const auto& [key, t] : A.transitions()) {
    auto [from, to, p] = key;
    B.set_transition(from, to, p, reshape(t, d, d));
  }
  return B;
}

Matrix total_linear_map(const Gauge& g, const IndexSet& node) {
  const CubeLayout& L = layout(g.n());
  std::size_t rows = 0, cols = 0;
  std::vector<std::size_t> ro(L.count()), co(L.count());
  for (std::size_t s = 0; s < L.count(); ++s)
    if (L.subsets[s].subset_of(node)) {
      ro[s] = rows;
      co[s] = cols;
      rows += g.target()[s];
      cols += g.source()[s];
    }
  Matrix M(rows, cols);
  for (std::size_t s = 0; s < L.count(); ++s) {
    if (!L.subsets[s].subset_of(node)) continue;
    const MultiTensor& T = g.component(s, 0);
    for (std::size_t r = 0; r < T.out_dim(); ++r)
      for (std::size_t c = 0; c < T.in_volume(); ++c) M(ro[s] + r, co[s] + c) = T.at(r, c);
  }
  return M;
}

}  // namespace

PullbackPresentation pullback(std::shared_ptr<const AtlasPresentation> A) {
  DimAssignment d = A->dims();
  if (A->n() == 0) throw InvalidArgument("pullback of a 0-fold bundle");
  d.set(IndexSet::range(A->n()), 0);
  auto P = std::make_shared<const AtlasPresentation>(with_dims(*A, d));
  std::map<int, Gauge> canon;
  for (std::size_t p = 0; p < A->base().size(); ++p) canon[static_cast<int>(p)] = projection_gauge(A->dims(), d);
  return PullbackPresentation{P, morphism_from_canonical(A, P, canon)};
}

Certificate pullback_surjective(const PullbackPresentation& pb) {
  Certificate cert{"the projection onto the n-pullback is fiberwise surjective"};
  const IndexSet top = IndexSet::range(pb.P->n());
  std::size_t fibers = 0;
  for (const auto& [key, g] : pb.pi.data) {
    ++fibers;
    Matrix M = total_linear_map(g, top);
    if (rank(M) != pb.P->dims().node_dim(top))
      cert.fail({{"chart", pb.P->charts()[key.first].id}, {"point", pb.P->base()[key.second]}});
  }
  if (!naturality_violations(pb.pi).empty()) cert.fail({{"reason", "projection is not natural"}});
  cert.witnesses = {{"fibers_checked", fibers},
                    {"dim_E", pb.pi.source->dims().node_dim(top)},
                    {"dim_P", pb.P->dims().node_dim(top)}};
  return cert;
}

namespace {

std::vector<int> default_order(int n, int k) {
  std::vector<int> o;
  for (int i = 1; i <= n; ++i)
    if (i != k) o.push_back(i);
  return o;
}

void check_order(int n, int k, const std::vector<int>& order) {
  std::vector<int> s = order;
  std::sort(s.begin(), s.end());
  if (s != default_order(n, k)) throw InvalidArgument("ordering is not a permutation of [n] minus k");
}

}  // namespace

BundleElement iota_element(const AtlasPresentation& A, int k, const BundleElement& z, const BundleElement& b0,
                           const std::vector<int>& order) {
  const int n = A.n();
  check_order(n, k, order);
  const IndexSet top = IndexSet::range(n);
  if (z.node != top || b0.node != top.without(k) || z.point != b0.point)
    throw InvalidArgument("iota: expects a top element and an element of E_{[n]-k} over one point");
  const BundleElement b = transport(A, b0, z.chart);
  BundleElement acc = z;
  std::vector<int> R;
  for (int l = n - 2; l >= 0; --l) {
    R.push_back(order[l]);
    std::sort(R.begin(), R.end());
    acc = add(A, acc, zero_lift(A, project_to(A, b, IndexSet(R)), top), order[l]);
  }
  return acc;
}

BundleElement kernel_retraction(const AtlasPresentation& A, int k, const BundleElement& e,
                                const std::vector<int>& order) {
  const int n = A.n();
  check_order(n, k, order);
  const IndexSet top = IndexSet::range(n);
  BundleElement f = e;
  IndexSet R = top.without(k);
  for (int j : order) {
    f = subtract(A, f, zero_lift(A, project_to(A, e, R), top), j);
    R = R.without(j);
  }
  return f;
}

UltracoreSequence ultracore_sequence(std::shared_ptr<const AtlasPresentation> A, int k, Rng& rng, int orderings) {
  const int n = A->n();
  if (k < 1 || k > n) throw InvalidArgument("ultracore: k must lie in [n]");
  const CubeLayout& L = layout(n);
  const IndexSet top = IndexSet::range(n), base_node = top.without(k);
  const int ts = L.index(top);

  DimAssignment dsrc = A->dims();
  for (std::size_t s = 0; s < L.count(); ++s)
    if (L.subsets[s] != top && !L.subsets[s].subset_of(base_node)) dsrc[s] = 0;
  auto src = std::make_shared<const AtlasPresentation>(with_dims(*A, dsrc));
  PullbackPresentation pb = pullback(A);

  const std::vector<int> order = default_order(n, k);
  auto widen = [&](const Coords& x) {
    Coords full = zero_coords(A->dims());
    for (std::size_t s = 0; s < L.count(); ++s)
      if (dsrc[s] == A->dims()[s]) full[s] = x[s];
    return full;
  };
  auto split_input = [&](const Coords& full, int chart, int p) {
    BundleElement z{top, chart, p, zero_coords(A->dims())};
    z.comps[ts] = full[ts];
    BundleElement b{base_node, chart, p, full};
    b.comps[ts].assign(A->dims()[ts], Rational());
    b = project_to(*A, b, base_node);
    return std::make_pair(z, b);
  };

  UltracoreSequence seq{k, src, BundleMorphism{src, A, {}}, pb.pi, Certificate{}};
  for (std::size_t ci = 0; ci < A->charts().size(); ++ci)
    for (int p : A->charts()[ci].domain) {
      const int c = static_cast<int>(ci);
      auto map = [&](const Coords& x) {
        auto [z, b] = split_input(widen(x), c, p);
        return iota_element(*A, k, z, b, order).comps;
      };
      seq.iota.data[{c, p}] = tabulate(dsrc, A->dims(), map);
    }

  Certificate& cert = seq.exactness;
  cert.claim = "0 -> ultracore x E_{[n]-k} -> E -> P -> 0 is exact over E_{[n]-k}, k=" + std::to_string(k);
  std::vector<std::vector<int>> orders{order};
  {
    std::vector<int> o = order;
    std::reverse(o.begin(), o.end());
    if (o != order) orders.push_back(o);
    o = order;
    while (static_cast<int>(orders.size()) < orderings && std::next_permutation(o.begin(), o.end()))
      if (std::find(orders.begin(), orders.end(), o) == orders.end()) orders.push_back(o);
  }

  const std::size_t dtop = A->dims()[ts];
  std::size_t fibers = 0, order_checks = 0;
  auto fiber_slots = [&]() {
    std::vector<int> v;
    for (std::size_t s = 0; s < L.count(); ++s)
      if (L.subsets[s].contains(k)) v.push_back(static_cast<int>(s));
    return v;
  }();
  std::size_t fiber_dim = 0;
  for (int s : fiber_slots) fiber_dim += A->dims()[s];

  for (std::size_t ci = 0; ci < A->charts().size() && cert.passed; ++ci)
    for (int p : A->charts()[ci].domain) {
      const int c = static_cast<int>(ci);
      for (int trial = 0; trial < 3 && cert.passed; ++trial) {
        BundleElement b = trial == 0 ? BundleElement{base_node, c, p, zero_coords(A->dims())}
                                     : random_element(*A, base_node, c, p, rng);
        ++fibers;
        // iota over b as a linear map V_top -> (fiber coordinates of E over E_{[n]-k})
        Matrix I(fiber_dim, dtop);
        BundleElement z0{top, c, p, zero_coords(A->dims())};
        const BundleElement base_image = iota_element(*A, k, z0, b, order);
        if (!equal(*A, base_image, zero_lift(*A, b, top))) cert.fail({{"reason", "iota(0, b) is not the zero over b"}});
        for (std::size_t q = 0; q < dtop; ++q) {
          BundleElement z = z0;
          z.comps[ts][q] = 1;
          const BundleElement img = iota_element(*A, k, z, b, order);
          std::size_t off = 0;
          for (int s : fiber_slots)
            for (std::size_t r = 0; r < A->dims()[s]; ++r) I(off++, q) = img.comps[s][r];
        }
        // linearity of iota over E_{[n]-k}, ordering independence, gauge form
        BundleElement z1 = random_element(*A, top, c, p, rng), z2 = random_element(*A, top, c, p, rng);
        for (auto* z : {&z1, &z2})
          for (std::size_t s = 0; s < L.count(); ++s)
            if (static_cast<int>(s) != ts) z->comps[s].assign(A->dims()[s], Rational());
        BundleElement zs = z1;
        for (std::size_t q = 0; q < dtop; ++q) zs.comps[ts][q] += z2.comps[ts][q];
        const BundleElement i1 = iota_element(*A, k, z1, b, order), i2 = iota_element(*A, k, z2, b, order);
        const BundleElement is = iota_element(*A, k, zs, b, order);
        if (!equal(*A, is, add(*A, i1, i2, k)))
          cert.fail({{"reason", "iota is not additive over E_{[n]-k}"}, {"element", to_json(*A, b)}});
        for (std::size_t oi = 1; oi < orders.size(); ++oi) {
          ++order_checks;
          const BundleElement alt = iota_element(*A, k, z1, b, orders[oi]);
          if (!equal(*A, alt, i1))
            cert.fail({{"reason", "iota depends on the ordering"},
                       {"ordering", orders[oi]},
                       {"z", to_json(*A, z1)},
                       {"b", to_json(*A, b)}});
          // computed in another chart and carried back
          for (int beta : A->charts_at(p)) {
            const BundleElement other = iota_element(*A, k, transport(*A, z1, beta), transport(*A, b, beta), orders[oi]);
            if (!equal(*A, other, i1)) cert.fail({{"reason", "iota is not chart independent"}});
          }
        }
        Coords x = zero_coords(dsrc);
        for (std::size_t s = 0; s < L.count(); ++s)
          if (dsrc[s] == A->dims()[s]) x[s] = (static_cast<int>(s) == ts) ? z1.comps[s] : b.comps[s];
        if (seq.iota.at(c, p).evaluate(x) != i1.comps)
          cert.fail({{"reason", "tabulated iota differs from the nested sum"}});

        // pi over b: drop the top slot
        std::size_t pdim = fiber_dim - dtop;
        Matrix Pm(pdim, fiber_dim);
        {
          std::size_t r = 0, col = 0;
          for (int s : fiber_slots)
            for (std::size_t q = 0; q < A->dims()[s]; ++q, ++col)
              if (s != ts) Pm(r++, col) = 1;
        }
        const std::size_t ri = rank(I), rp = rank(Pm);
        const bool composite_zero = (Pm * I).is_zero();
        const std::size_t ker_pi = fiber_dim - rp;
        if (ri != dtop || rp != pdim || !composite_zero || ker_pi != ri)
          cert.fail({{"reason", "rank conditions fail"},
                     {"rank_iota", ri},
                     {"rank_pi", rp},
                     {"dim_ker_pi", ker_pi},
                     {"b", to_json(*A, b)}});

        // kernel retraction recovers z
        BundleElement e = i1;
        for (const auto& ord : orders) {
          const BundleElement z = kernel_retraction(*A, k, e, ord);
          if (!equal(*A, z, z1)) cert.fail({{"reason", "kernel retraction does not invert iota"}, {"ordering", ord}});
        }
      }
    }

  const std::size_t dim_E = A->dims().node_dim(top), dim_P = pb.P->dims().node_dim(top);
  if (dim_E != dtop + dim_P) cert.fail({{"reason", "dimension identity fails"}});
  if (!pullback_surjective(pb).passed) cert.fail({{"reason", "pullback projection not surjective"}});
  if (!naturality_violations(seq.iota).empty()) cert.fail({{"reason", "iota is not natural"}});
  json ords = json::array();
  for (const auto& o : orders) ords.push_back(o);
  cert.witnesses = {{"k", k},
                    {"dim_E", dim_E},
                    {"dim_ultracore", dtop},
                    {"dim_P", dim_P},
                    {"orderings", ords},
                    {"fibers_checked", fibers},
                    {"ordering_comparisons", order_checks}};
  return seq;
}

}  // namespace mvb
