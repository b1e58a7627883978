// Gauges act on decomposed coordinates by
//   out_J = sum over rho in P(J) of g[J,rho](v_{I_1}, ..., v_{I_k}).
//
// Inversion is triangular in the block count: in (g o f)[J,rho] the only
// term involving a k-block component of f is g[J,{J}] o f[J,rho] (the
// one-group coarsening); every other term uses f on groups of fewer
// blocks. So f[J,{J}] = g[J,{J}]^-1 and, for k >= 2,
//   f[J,rho] = -g[J,{J}]^-1 o (remaining terms),
// which only needs components already computed.
#include "mvb/gauge.hpp"

#include <algorithm>

#include "mvb/errors.hpp"

namespace mvb {

DimAssignment::DimAssignment(int n, std::size_t fill) : n_(n), dims_(layout(n).count(), fill) {}

DimAssignment::DimAssignment(int n, const std::map<IndexSet, std::size_t>& dims) : DimAssignment(n) {
  for (const auto& [J, d] : dims) set(J, d);
}

std::size_t DimAssignment::dim(const IndexSet& J) const { return dims_[layout(n_).index(J)]; }

void DimAssignment::set(const IndexSet& J, std::size_t d) { dims_[layout(n_).index(J)] = d; }

std::size_t DimAssignment::node_dim(const IndexSet& I) const {
  std::size_t t = 0;
  for (const auto& J : nonempty_subsets(I)) t += dim(J);
  return t;
}

Coords zero_coords(const DimAssignment& d) {
  Coords c(d.values().size());
  for (std::size_t s = 0; s < c.size(); ++s) c[s].assign(d[s], Rational());
  return c;
}

bool coords_equal(const Coords& a, const Coords& b) { return a == b; }

Gauge::Gauge(DimAssignment source, DimAssignment target)
    : source_(std::move(source)), target_(std::move(target)) {
  if (source_.n() != target_.n()) throw DimensionMismatch("gauge source and target differ in n");
  const CubeLayout& L = layout(source_.n());
  comps_.resize(L.count());
  for (std::size_t s = 0; s < L.count(); ++s) {
    for (std::size_t r = 0; r < L.partitions[s].size(); ++r) {
      std::vector<std::size_t> in;
      for (int b : L.blocks[s][r]) in.push_back(source_[b]);
      comps_[s].emplace_back(target_[s], std::move(in));
    }
  }
}

Gauge Gauge::identity(const DimAssignment& dims) {
  Gauge g(dims, dims);
  for (std::size_t s = 0; s < g.comps_.size(); ++s) g.comps_[s][0] = MultiTensor::identity(dims[s]);
  return g;
}

const MultiTensor& Gauge::component(const IndexSet& J, const Partition& rho) const {
  const CubeLayout& L = layout(n());
  int s = L.index(J);
  return comps_[s][L.partition(s, rho)];
}

MultiTensor& Gauge::component(const IndexSet& J, const Partition& rho) {
  const CubeLayout& L = layout(n());
  int s = L.index(J);
  return comps_[s][L.partition(s, rho)];
}

Coords Gauge::evaluate(const Coords& v) const {
  const CubeLayout& L = layout(n());
  if (v.size() != L.count()) throw DimensionMismatch("coordinate tuple has the wrong number of components");
  for (std::size_t s = 0; s < v.size(); ++s)
    if (v[s].size() != source_[s])
      throw DimensionMismatch("component " + L.subsets[s].str() + " has dimension " +
                              std::to_string(v[s].size()) + ", expected " +
                              std::to_string(source_[s]));
  Coords out = zero_coords(target_);
  std::vector<const Vector*> args;
  for (std::size_t s = 0; s < L.count(); ++s) {
    for (std::size_t r = 0; r < L.partitions[s].size(); ++r) {
      const MultiTensor& T = comps_[s][r];
      if (T.out_dim() == 0 || T.in_volume() == 0) continue;
      args.clear();
      for (int b : L.blocks[s][r]) args.push_back(&v[b]);
      apply_accumulate(T, args, out[s]);
    }
  }
  return out;
}

namespace {

// Contribution of all cocycle-law terms to (g o f)[s, r], optionally
// skipping the one-group term (index 0).
MultiTensor compose_component(const Gauge& g, const Gauge& f, std::size_t s, std::size_t r,
                              bool skip_one_group) {
  const CubeLayout& L = layout(g.n());
  const auto& blocks = L.blocks[s][r];
  std::vector<std::size_t> in;
  for (int b : blocks) in.push_back(f.source()[b]);
  MultiTensor result(g.target()[s], in);
  const std::size_t vol = result.in_volume();
  if (vol == 0 || result.out_dim() == 0) return result;
  const auto& terms = L.terms[s][r];
  std::vector<std::size_t> idx(blocks.size());
  for (std::size_t t = skip_one_group ? 1 : 0; t < terms.size(); ++t) {
    const auto& term = terms[t];
    const MultiTensor& G = g.component(s, term.coarse);
    if (G.is_zero()) continue;
    std::vector<const MultiTensor*> F;
    bool zero = false;
    for (const auto& grp : term.groups) {
      const MultiTensor& Fm = f.component(grp.subset, grp.partition);
      if (Fm.is_zero()) zero = true;
      F.push_back(&Fm);
    }
    if (zero) continue;
    std::vector<Vector> w(term.groups.size());
    std::vector<const Vector*> args(term.groups.size());
    for (std::size_t flat = 0; flat < vol; ++flat) {
      std::size_t rem = flat;
      for (std::size_t b = blocks.size(); b-- > 0;) {
        idx[b] = rem % in[b];
        rem /= in[b];
      }
      for (std::size_t m = 0; m < term.groups.size(); ++m) {
        const auto& grp = term.groups[m];
        const MultiTensor& Fm = *F[m];
        std::size_t sub = 0;
        for (std::size_t q = 0; q < grp.positions.size(); ++q)
          sub = sub * in[grp.positions[q]] + idx[grp.positions[q]];
        w[m].assign(Fm.out_dim(), Rational());
        for (std::size_t o = 0; o < Fm.out_dim(); ++o) w[m][o] = Fm.at(o, sub);
        args[m] = &w[m];
      }
      Vector col = mvb::apply(G, args);
      for (std::size_t o = 0; o < col.size(); ++o)
        if (!col[o].is_zero()) result.at(o, flat) += col[o];
    }
  }
  return result;
}

MultiTensor left_multiply(const Matrix& M, const MultiTensor& T) {
  if (M.cols() != T.out_dim()) throw DimensionMismatch("left multiplication size mismatch");
  MultiTensor R(M.rows(), T.in_dims());
  const std::size_t vol = T.in_volume();
  for (std::size_t i = 0; i < M.rows(); ++i)
    for (std::size_t k = 0; k < M.cols(); ++k) {
      if (M(i, k).is_zero()) continue;
      for (std::size_t j = 0; j < vol; ++j)
        if (!T.at(k, j).is_zero()) R.at(i, j).add_product(M(i, k), T.at(k, j));
    }
  return R;
}

}  // namespace

Gauge compose(const Gauge& g, const Gauge& f) {
  if (f.target() != g.source()) throw DimensionMismatch("compose: f.target differs from g.source");
  const CubeLayout& L = layout(g.n());
  Gauge h(f.source(), g.target());
  for (std::size_t s = 0; s < L.count(); ++s)
    for (std::size_t r = 0; r < L.partitions[s].size(); ++r)
      h.component(s, r) = compose_component(g, f, s, r, false);
  return h;
}

Gauge invert(const Gauge& g) {
  const CubeLayout& L = layout(g.n());
  Gauge f(g.target(), g.source());
  std::vector<Matrix> lin_inv(L.count());
  for (std::size_t s = 0; s < L.count(); ++s) {
    if (g.source()[s] != g.target()[s])
      throw NotInvertible("linear part at " + L.subsets[s].str() + " is not square", L.subsets[s].str());
    try {
      lin_inv[s] = inverse(g.linear_part(s));
    } catch (const SingularMatrix&) {
      throw NotInvertible("linear part at " + L.subsets[s].str() + " is singular", L.subsets[s].str());
    }
    f.component(s, 0) = MultiTensor::from_matrix(lin_inv[s]);
  }
  for (int k = 2; k <= g.n(); ++k) {
    for (std::size_t s = 0; s < L.count(); ++s) {
      for (std::size_t r = 0; r < L.partitions[s].size(); ++r) {
        if (L.partitions[s][r].size() != static_cast<std::size_t>(k)) continue;
        MultiTensor rest = compose_component(g, f, s, r, true);
        f.component(s, r) = -left_multiply(lin_inv[s], rest);
      }
    }
  }
  return f;
}

bool is_statomorphism(const Gauge& g) {
  if (g.source() != g.target()) return false;
  const CubeLayout& L = layout(g.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    if (!g.component(s, 0).is_identity()) return false;
  return true;
}

Gauge linear_part(const Gauge& g) {
  Gauge h(g.source(), g.target());
  const CubeLayout& L = layout(g.n());
  for (std::size_t s = 0; s < L.count(); ++s) h.component(s, 0) = g.component(s, 0);
  return h;
}

bool is_block_diagonal(const Gauge& g) {
  const CubeLayout& L = layout(g.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    for (std::size_t r = 1; r < L.partitions[s].size(); ++r)
      if (!g.component(s, r).is_zero()) return false;
  return true;
}

Gauge reshape(const Gauge& g, const DimAssignment& source, const DimAssignment& target) {
  Gauge h(source, target);
  const CubeLayout& L = layout(g.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    for (std::size_t r = 0; r < L.partitions[s].size(); ++r) {
      MultiTensor& T = h.component(s, r);
      const MultiTensor& G = g.component(s, r);
      if (T.same_shape(G)) {
        T = G;
      } else if (T.in_volume() * T.out_dim() != 0) {
        throw DimensionMismatch("reshape changes the nonempty component " + L.subsets[s].str() + " " +
                                L.partitions[s][r].str());
      }
    }
  return h;
}

BlockFamily::BlockFamily(int ambient_n, std::vector<IndexSet> blocks)
    : n_(ambient_n), blocks_(std::move(blocks)) {
  std::sort(blocks_.begin(), blocks_.end(),
            [](const IndexSet& a, const IndexSet& b) { return a.min() < b.min(); });
  IndexSet seen;
  for (const auto& b : blocks_) {
    if (b.empty()) throw InvalidArgument("block family contains an empty block");
    if (!b.disjoint(seen)) throw InvalidArgument("block family is not disjoint");
    if (b.max() > n_) throw InvalidArgument("block " + b.str() + " exceeds [" + std::to_string(n_) + "]");
    seen = seen.unite(b);
  }
  const CubeLayout& small = layout(k());
  const CubeLayout& big = layout(n_);
  for (const auto& mu : small.subsets) subset_map_.push_back(big.index(unite(mu)));
}

BlockFamily BlockFamily::singletons(int n) {
  std::vector<IndexSet> b;
  for (int i = 1; i <= n; ++i) b.push_back(IndexSet{i});
  return BlockFamily(n, std::move(b));
}

IndexSet BlockFamily::unite(const IndexSet& mu) const {
  IndexSet u;
  for (int i : mu) u = u.unite(blocks_.at(i - 1));
  return u;
}

int BlockFamily::position_of(const IndexSet& block) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i] == block) return static_cast<int>(i);
  throw InvalidArgument(block.str() + " is not a block of the family");
}

DimAssignment BlockFamily::restrict(const DimAssignment& d) const {
  DimAssignment r(k());
  for (std::size_t s = 0; s < subset_map_.size(); ++s) r[s] = d[subset_map_[s]];
  return r;
}

Gauge BlockFamily::restrict(const Gauge& g) const {
  const CubeLayout& small = layout(k());
  const CubeLayout& big = layout(n_);
  Gauge h(restrict(g.source()), restrict(g.target()));
  for (std::size_t s = 0; s < small.count(); ++s) {
    const int bs = subset_map_[s];
    for (std::size_t r = 0; r < small.partitions[s].size(); ++r) {
      std::vector<IndexSet> coarse;
      for (const auto& grp : small.partitions[s][r].blocks()) coarse.push_back(unite(grp));
      h.component(s, r) = g.component(bs, big.partition(bs, Partition(std::move(coarse))));
    }
  }
  return h;
}

Coords BlockFamily::gather(const Coords& ambient) const {
  Coords c(subset_map_.size());
  for (std::size_t s = 0; s < subset_map_.size(); ++s) c[s] = ambient[subset_map_[s]];
  return c;
}

Coords BlockFamily::scatter(const Coords& small, const DimAssignment& ambient_dims) const {
  Coords c = zero_coords(ambient_dims);
  for (std::size_t s = 0; s < subset_map_.size(); ++s) c[subset_map_[s]] = small[s];
  return c;
}

}  // namespace mvb
