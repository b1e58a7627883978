#pragma once

#include <compare>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

namespace mvb {

// A finite subset of {1,2,3,...}, kept strictly increasing.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::initializer_list<int> elems);
  explicit IndexSet(std::vector<int> elems);

  static IndexSet range(int n);  // {1,...,n}

  const std::vector<int>& elements() const { return elems_; }
  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  int min() const { return elems_.front(); }
  int max() const { return elems_.back(); }

  bool contains(int i) const;
  bool subset_of(const IndexSet& other) const;
  bool disjoint(const IndexSet& other) const;

  IndexSet unite(const IndexSet& other) const;
  IndexSet intersect(const IndexSet& other) const;
  IndexSet minus(const IndexSet& other) const;
  IndexSet with(int i) const;
  IndexSet without(int i) const;

  std::string str() const;

  // cardinality first, then lexicographic
  friend std::strong_ordering operator<=>(const IndexSet& a, const IndexSet& b);
  friend bool operator==(const IndexSet& a, const IndexSet& b) = default;

  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }

 private:
  std::vector<int> elems_;
};

// Blocks are kept in canonical order: sorted by minimum element.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<IndexSet> blocks);

  const std::vector<IndexSet>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  const IndexSet& ground() const { return ground_; }
  const IndexSet& operator[](std::size_t i) const { return blocks_[i]; }
  bool is_trivial() const { return blocks_.size() == 1; }
  bool is_discrete() const;
  int block_of(int element) const;  // position of the block containing element

  std::string str() const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.blocks_ == b.blocks_;
  }
  friend bool operator<(const Partition& a, const Partition& b) {
    return a.blocks_ < b.blocks_;
  }

 private:
  std::vector<IndexSet> blocks_;
  IndexSet ground_;
};

// rho^S_J: the block J together with the singletons of S minus J.
class DiagonalPartition {
 public:
  DiagonalPartition(IndexSet ground, IndexSet distinguished);

  const IndexSet& ground() const { return ground_; }
  const IndexSet& distinguished() const { return distinguished_; }
  std::vector<IndexSet> singletons() const;
  const Partition& as_partition() const { return partition_; }
  // index (0-based, canonical order) of the distinguished block
  int distinguished_position() const;

 private:
  IndexSet ground_;
  IndexSet distinguished_;
  Partition partition_;
};

std::vector<IndexSet> subsets(const IndexSet& I);
std::vector<IndexSet> nonempty_subsets(const IndexSet& I);
std::vector<Partition> partitions(const IndexSet& I);
Partition coarsen(const Partition& rho, const Partition& pi);
IndexSet unions_of_blocks(const Partition& rho, const std::vector<IndexSet>& nu);
IndexSet unions_of_blocks(const DiagonalPartition& rho, const std::vector<IndexSet>& nu);

// Precomputed tables for the cube over [n]. Subset indices follow the
// canonical order of nonempty_subsets([n]); partition indices follow
// partitions(J).
struct CubeLayout {
  struct Group {
    int subset;                 // union of the grouped blocks
    int partition;              // the sub-partition formed by the grouped blocks
    std::vector<int> positions; // positions of those blocks inside rho
  };
  struct Term {
    int coarse;                 // partition index of coarsen(rho, pi) in P(J)
    std::vector<Group> groups;  // one per block of the coarse partition, canonical order
  };

  int n = 0;
  std::vector<IndexSet> subsets;
  std::map<IndexSet, int> subset_index;
  std::vector<std::vector<Partition>> partitions;
  std::vector<std::map<Partition, int>> partition_index;
  std::vector<std::vector<std::vector<int>>> blocks;  // subset indices of blocks
  std::vector<std::vector<std::vector<Term>>> terms;  // cocycle-law terms per (J, rho)

  std::size_t count() const { return subsets.size(); }
  int index(const IndexSet& J) const;
  int partition(int subset, const Partition& rho) const;
  int trivial(int subset) const;   // index of {J}
};

const CubeLayout& layout(int n);

}  // namespace mvb
