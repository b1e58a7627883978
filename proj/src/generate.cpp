#include "mvb/generate.hpp"

#include <algorithm>

namespace mvb {

namespace {

Matrix random_invertible(std::size_t d, Rng& rng) {
  Matrix L = Matrix::identity(d), U = Matrix::identity(d);
  static const long diag[] = {1, -1, 2, -2};
  for (std::size_t i = 0; i < d; ++i) {
    U(i, i) = diag[rng.range(0, 3)];
    for (std::size_t j = 0; j < i; ++j) {
      L(i, j) = rng.small_int(2);
      U(j, i) = rng.small_int(2);
    }
  }
  return L * U;
}

}  // namespace

Gauge random_statomorphism(const DimAssignment& dims, Rng& rng) {
  Gauge g = Gauge::identity(dims);
  const CubeLayout& L = layout(dims.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    for (std::size_t r = 1; r < L.partitions[s].size(); ++r)
      for (auto& x : g.component(s, r).entries()) x = rng.small_int(2);
  return g;
}

Gauge random_gauge(const DimAssignment& dims, Rng& rng) {
  Gauge g = random_statomorphism(dims, rng);
  const CubeLayout& L = layout(dims.n());
  for (std::size_t s = 0; s < L.count(); ++s)
    if (dims[s]) g.component(s, 0) = MultiTensor::from_matrix(random_invertible(dims[s], rng));
  return g;
}

DimAssignment random_dims(int n, std::size_t max_dim, Rng& rng) {
  DimAssignment d(n);
  const CubeLayout& L = layout(n);
  for (std::size_t s = 0; s < L.count(); ++s) {
    const long lo = L.subsets[s].size() == 1 ? 1 : 0;
    d[s] = static_cast<std::size_t>(rng.range(lo, static_cast<long>(max_dim)));
  }
  return d;
}

AtlasPresentation twisted(const AtlasPresentation& A, Rng& rng, bool linear_too) {
  std::map<std::pair<int, int>, Gauge> g;
  for (std::size_t c = 0; c < A.charts().size(); ++c)
    for (int p : A.charts()[c].domain)
      g.emplace(std::make_pair(static_cast<int>(c), p),
                linear_too ? random_gauge(A.dims(), rng) : random_statomorphism(A.dims(), rng));
  return twist(A, g);
}

AtlasPresentation random_instance(const GenOptions& opt, Rng& rng) {
  const DimAssignment dims = opt.all_ones ? DimAssignment(opt.n, 1) : random_dims(opt.n, opt.max_dim, rng);
  std::vector<std::string> base;
  for (int p = 0; p < opt.points; ++p) base.push_back("p" + std::to_string(p));
  std::vector<std::vector<int>> dom(opt.charts);
  for (int p = 0; p < opt.points; ++p) {
    bool any = false;
    for (int c = 0; c < opt.charts; ++c)
      if (p == 0 || rng.coin()) {  // every chart meets p0, so twists are visible
        dom[c].push_back(p);
        any = true;
      }
    if (!any) dom[rng.range(0, opt.charts - 1)].push_back(p);
  }
  std::vector<Chart> charts;
  for (int c = 0; c < opt.charts; ++c) {
    if (dom[c].empty()) dom[c].push_back(static_cast<int>(rng.range(0, opt.points - 1)));
    std::sort(dom[c].begin(), dom[c].end());
    charts.push_back(Chart{"U" + std::to_string(c), dom[c]});
  }
  AtlasPresentation A = trivial_atlas(dims, base, charts);
  return opt.twisted ? twisted(A, rng) : A;
}

}  // namespace mvb
