#pragma once

#include <map>
#include <vector>

#include "mvb/cubecat.hpp"
#include "mvb/linalg.hpp"

namespace mvb {

// dim V_J for every nonempty J of [n], indexed like layout(n).subsets.
class DimAssignment {
 public:
  DimAssignment() = default;
  explicit DimAssignment(int n, std::size_t fill = 0);
  DimAssignment(int n, const std::map<IndexSet, std::size_t>& dims);

  int n() const { return n_; }
  std::size_t operator[](std::size_t subset) const { return dims_[subset]; }
  std::size_t& operator[](std::size_t subset) { return dims_[subset]; }
  std::size_t dim(const IndexSet& J) const;
  void set(const IndexSet& J, std::size_t d);
  const std::vector<std::size_t>& values() const { return dims_; }
  // total dimension of the fiber of E_I over a base point
  std::size_t node_dim(const IndexSet& I) const;

  friend bool operator==(const DimAssignment& a, const DimAssignment& b) = default;

 private:
  int n_ = 0;
  std::vector<std::size_t> dims_;
};

// Decomposed coordinates: one vector per nonempty subset (layout order).
using Coords = std::vector<Vector>;

Coords zero_coords(const DimAssignment& d);
bool coords_equal(const Coords& a, const Coords& b);

// Partition-indexed family of multilinear maps, the common carrier of
// chart changes, statomorphisms and morphisms over a point.
class Gauge {
 public:
  Gauge() = default;
  Gauge(DimAssignment source, DimAssignment target);  // all components zero
  static Gauge identity(const DimAssignment& dims);

  int n() const { return source_.n(); }
  const DimAssignment& source() const { return source_; }
  const DimAssignment& target() const { return target_; }

  MultiTensor& component(std::size_t subset, std::size_t partition) { return comps_[subset][partition]; }
  const MultiTensor& component(std::size_t subset, std::size_t partition) const {
    return comps_[subset][partition];
  }
  const MultiTensor& component(const IndexSet& J, const Partition& rho) const;
  MultiTensor& component(const IndexSet& J, const Partition& rho);
  Matrix linear_part(std::size_t subset) const { return comps_[subset][0].as_matrix(); }

  Coords evaluate(const Coords& v) const;

  friend bool operator==(const Gauge& a, const Gauge& b) = default;

 private:
  DimAssignment source_, target_;
  std::vector<std::vector<MultiTensor>> comps_;
};

Gauge compose(const Gauge& g, const Gauge& f);  // g after f
Gauge invert(const Gauge& g);
bool is_statomorphism(const Gauge& g);
// Only the trivial-partition components survive.
Gauge linear_part(const Gauge& g);
bool is_block_diagonal(const Gauge& g);
// Same components on new dimensions; a component whose shape changes must
// become empty (some dimension dropped to zero).
Gauge reshape(const Gauge& g, const DimAssignment& source, const DimAssignment& target);

// Black-box multilinear data read off a map on coordinates: component
// (J, rho) is obtained by feeding basis vectors into the blocks of rho
// and zero everywhere else.
template <class F>
Gauge tabulate(const DimAssignment& source, const DimAssignment& target, F&& map);

// A family of disjoint nonempty subsets of [n] used as the index set of a
// smaller cube (cores, faces, diagonal cubes). Blocks in canonical order.
class BlockFamily {
 public:
  BlockFamily(int ambient_n, std::vector<IndexSet> blocks);
  static BlockFamily singletons(int n);

  int ambient() const { return n_; }
  int k() const { return static_cast<int>(blocks_.size()); }
  const std::vector<IndexSet>& blocks() const { return blocks_; }
  IndexSet unite(const IndexSet& mu) const;  // [mu] for mu a subset of [k]
  int position_of(const IndexSet& block) const;

  DimAssignment restrict(const DimAssignment& d) const;
  Gauge restrict(const Gauge& g) const;
  Coords gather(const Coords& ambient) const;
  Coords scatter(const Coords& small, const DimAssignment& ambient_dims) const;

  friend bool operator==(const BlockFamily& a, const BlockFamily& b) = default;
  friend bool operator<(const BlockFamily& a, const BlockFamily& b) {
    if (a.n_ != b.n_) return a.n_ < b.n_;
    return a.blocks_ < b.blocks_;
  }

 private:
  int n_;
  std::vector<IndexSet> blocks_;
  std::vector<int> subset_map_;  // small subset index -> ambient subset index
};

// ---- template implementation ----

template <class F>
Gauge tabulate(const DimAssignment& source, const DimAssignment& target, F&& map) {
  const CubeLayout& L = layout(source.n());
  Gauge g(source, target);
  for (std::size_t s = 0; s < L.count(); ++s) {
    for (std::size_t r = 0; r < L.partitions[s].size(); ++r) {
      MultiTensor& T = g.component(s, r);
      const auto& blocks = L.blocks[s][r];
      const std::size_t vol = T.in_volume();
      if (vol == 0 || T.out_dim() == 0) continue;
      std::vector<std::size_t> idx(blocks.size(), 0);
      for (std::size_t flat = 0; flat < vol; ++flat) {
        std::size_t rem = flat;
        for (std::size_t b = blocks.size(); b-- > 0;) {
          idx[b] = rem % T.in_dims()[b];
          rem /= T.in_dims()[b];
        }
        Coords v = zero_coords(source);
        for (std::size_t b = 0; b < blocks.size(); ++b) v[blocks[b]][idx[b]] = 1;
        Coords out = map(v);
        for (std::size_t o = 0; o < T.out_dim(); ++o) T.at(o, flat) = out[s][o];
      }
    }
  }
  return g;
}

}  // namespace mvb
