#include "mvb/cubecat.hpp"

#include <algorithm>
#include <memory>
#include <mutex>
#include <sstream>

#include "mvb/errors.hpp"

namespace mvb {

IndexSet::IndexSet(std::initializer_list<int> elems) : IndexSet(std::vector<int>(elems)) {}

IndexSet::IndexSet(std::vector<int> elems) : elems_(std::move(elems)) {
  std::sort(elems_.begin(), elems_.end());
  if (std::adjacent_find(elems_.begin(), elems_.end()) != elems_.end())
    throw InvalidArgument("index set has repeated elements");
  if (!elems_.empty() && elems_.front() < 1)
    throw InvalidArgument("index set elements must be positive");
}

IndexSet IndexSet::range(int n) {
  std::vector<int> v(n > 0 ? n : 0);
  for (int i = 0; i < n; ++i) v[i] = i + 1;
  return IndexSet(std::move(v));
}

bool IndexSet::contains(int i) const {
  return std::binary_search(elems_.begin(), elems_.end(), i);
}

bool IndexSet::subset_of(const IndexSet& other) const {
  return std::includes(other.elems_.begin(), other.elems_.end(), elems_.begin(), elems_.end());
}

bool IndexSet::disjoint(const IndexSet& other) const { return intersect(other).empty(); }

IndexSet IndexSet::unite(const IndexSet& other) const {
  IndexSet r;
  std::set_union(elems_.begin(), elems_.end(), other.elems_.begin(), other.elems_.end(),
                 std::back_inserter(r.elems_));
  return r;
}

IndexSet IndexSet::intersect(const IndexSet& other) const {
  IndexSet r;
  std::set_intersection(elems_.begin(), elems_.end(), other.elems_.begin(), other.elems_.end(),
                        std::back_inserter(r.elems_));
  return r;
}

IndexSet IndexSet::minus(const IndexSet& other) const {
  IndexSet r;
  std::set_difference(elems_.begin(), elems_.end(), other.elems_.begin(), other.elems_.end(),
                      std::back_inserter(r.elems_));
  return r;
}

IndexSet IndexSet::with(int i) const { return unite(IndexSet{i}); }
IndexSet IndexSet::without(int i) const { return minus(IndexSet{i}); }

std::string IndexSet::str() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < elems_.size(); ++i) os << (i ? "," : "") << elems_[i];
  os << '}';
  return os.str();
}

std::strong_ordering operator<=>(const IndexSet& a, const IndexSet& b) {
  if (a.size() != b.size()) return a.size() <=> b.size();
  return a.elems_ <=> b.elems_;
}

Partition::Partition(std::vector<IndexSet> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_)
    if (b.empty()) throw InvalidArgument("partition has an empty block");
  std::sort(blocks_.begin(), blocks_.end(),
            [](const IndexSet& x, const IndexSet& y) { return x.min() < y.min(); });
  std::size_t total = 0;
  for (const auto& b : blocks_) {
    ground_ = ground_.unite(b);
    total += b.size();
  }
  if (total != ground_.size()) throw InvalidArgument("partition blocks overlap");
}

bool Partition::is_discrete() const { return blocks_.size() == ground_.size(); }

int Partition::block_of(int element) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i].contains(element)) return static_cast<int>(i);
  return -1;
}

std::string Partition::str() const {
  std::string s = "{";
  for (std::size_t i = 0; i < blocks_.size(); ++i) s += (i ? "," : "") + blocks_[i].str();
  return s + "}";
}

DiagonalPartition::DiagonalPartition(IndexSet ground, IndexSet distinguished)
    : ground_(std::move(ground)), distinguished_(std::move(distinguished)) {
  if (distinguished_.empty()) throw InvalidArgument("distinguished block must be nonempty");
  if (!distinguished_.subset_of(ground_))
    throw InvalidArgument("distinguished block " + distinguished_.str() + " not inside " +
                          ground_.str());
  std::vector<IndexSet> blocks{distinguished_};
  for (int s : ground_.minus(distinguished_)) blocks.push_back(IndexSet{s});
  partition_ = Partition(std::move(blocks));
}

std::vector<IndexSet> DiagonalPartition::singletons() const {
  std::vector<IndexSet> r;
  for (int s : ground_.minus(distinguished_)) r.push_back(IndexSet{s});
  return r;
}

int DiagonalPartition::distinguished_position() const {
  return partition_.block_of(distinguished_.min());
}

std::vector<IndexSet> subsets(const IndexSet& I) {
  const auto& e = I.elements();
  const std::size_t n = e.size();
  std::vector<IndexSet> out;
  out.reserve(std::size_t{1} << n);
  // by cardinality, then lexicographic: walk k-combinations in lex order
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      std::vector<int> v(k);
      for (std::size_t i = 0; i < k; ++i) v[i] = e[idx[i]];
      out.emplace_back(std::move(v));
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

std::vector<IndexSet> nonempty_subsets(const IndexSet& I) {
  auto all = subsets(I);
  all.erase(all.begin());
  return all;
}

std::vector<Partition> partitions(const IndexSet& I) {
  if (I.empty()) throw InvalidArgument("partitions of the empty set are not enumerated");
  const auto& e = I.elements();
  const std::size_t n = e.size();
  // restricted growth strings in lexicographic order; one block comes first
  std::vector<int> a(n, 0), m(n, 0);
  std::vector<Partition> out;
  while (true) {
    int blocks = *std::max_element(a.begin(), a.end()) + 1;
    std::vector<std::vector<int>> parts(blocks);
    for (std::size_t i = 0; i < n; ++i) parts[a[i]].push_back(e[i]);
    std::vector<IndexSet> bs;
    for (auto& p : parts) bs.emplace_back(std::move(p));
    out.emplace_back(std::move(bs));
    std::size_t i = n;
    while (i > 1 && a[i - 1] == m[i - 1] + 1) --i;
    if (i <= 1) break;
    ++a[i - 1];
    for (std::size_t j = i; j < n; ++j) {
      a[j] = 0;
      m[j] = std::max(m[j - 1], a[j - 1]);
    }
  }
  return out;
}

Partition coarsen(const Partition& rho, const Partition& pi) {
  if (pi.ground() != IndexSet::range(static_cast<int>(rho.size())))
    throw InvalidArgument("coarsening partition " + pi.str() + " does not partition {1.." +
                          std::to_string(rho.size()) + "}");
  std::vector<IndexSet> blocks;
  for (const auto& g : pi.blocks()) {
    IndexSet u;
    for (int pos : g) u = u.unite(rho[pos - 1]);
    blocks.push_back(u);
  }
  return Partition(std::move(blocks));
}

IndexSet unions_of_blocks(const Partition& rho, const std::vector<IndexSet>& nu) {
  IndexSet u;
  for (const auto& b : nu) {
    if (std::find(rho.blocks().begin(), rho.blocks().end(), b) == rho.blocks().end())
      throw InvalidArgument(b.str() + " is not a block of " + rho.str());
    u = u.unite(b);
  }
  return u;
}

IndexSet unions_of_blocks(const DiagonalPartition& rho, const std::vector<IndexSet>& nu) {
  return unions_of_blocks(rho.as_partition(), nu);
}

int CubeLayout::index(const IndexSet& J) const {
  auto it = subset_index.find(J);
  if (it == subset_index.end())
    throw InvalidArgument(J.str() + " is not a nonempty subset of [" + std::to_string(n) + "]");
  return it->second;
}

int CubeLayout::partition(int subset, const Partition& rho) const {
  auto it = partition_index[subset].find(rho);
  if (it == partition_index[subset].end())
    throw InvalidArgument(rho.str() + " is not a partition of " + subsets[subset].str());
  return it->second;
}

int CubeLayout::trivial(int) const { return 0; }

namespace {

std::unique_ptr<CubeLayout> build_layout(int n) {
  auto L = std::make_unique<CubeLayout>();
  L->n = n;
  L->subsets = nonempty_subsets(IndexSet::range(n));
  for (std::size_t s = 0; s < L->subsets.size(); ++s)
    L->subset_index[L->subsets[s]] = static_cast<int>(s);
  const std::size_t N = L->subsets.size();
  L->partitions.resize(N);
  L->partition_index.resize(N);
  L->blocks.resize(N);
  for (std::size_t s = 0; s < N; ++s) {
    L->partitions[s] = partitions(L->subsets[s]);
    for (std::size_t r = 0; r < L->partitions[s].size(); ++r) {
      L->partition_index[s][L->partitions[s][r]] = static_cast<int>(r);
      std::vector<int> bi;
      for (const auto& b : L->partitions[s][r].blocks()) bi.push_back(L->subset_index.at(b));
      L->blocks[s].push_back(std::move(bi));
    }
  }
  std::vector<std::vector<Partition>> small(n + 1);
  for (int k = 1; k <= n; ++k) small[k] = partitions(IndexSet::range(k));
  L->terms.resize(N);
  for (std::size_t s = 0; s < N; ++s) {
    L->terms[s].resize(L->partitions[s].size());
    for (std::size_t r = 0; r < L->partitions[s].size(); ++r) {
      const Partition& rho = L->partitions[s][r];
      for (const Partition& pi : small[rho.size()]) {
        CubeLayout::Term t;
        t.coarse = L->partition(static_cast<int>(s), coarsen(rho, pi));
        for (const auto& g : pi.blocks()) {
          CubeLayout::Group grp;
          std::vector<IndexSet> sub;
          IndexSet u;
          for (int pos : g) {
            grp.positions.push_back(pos - 1);
            sub.push_back(rho[pos - 1]);
            u = u.unite(rho[pos - 1]);
          }
          grp.subset = L->subset_index.at(u);
          grp.partition = L->partition(grp.subset, Partition(std::move(sub)));
          t.groups.push_back(std::move(grp));
        }
        L->terms[s][r].push_back(std::move(t));
      }
    }
  }
  return L;
}

}  // namespace

const CubeLayout& layout(int n) {
  static std::mutex mu;
  static std::vector<std::unique_ptr<CubeLayout>> cache;
  if (n < 0 || n > 10) throw InvalidArgument("cube dimension out of range: " + std::to_string(n));
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() <= static_cast<std::size_t>(n)) cache.resize(n + 1);
  if (!cache[n]) cache[n] = build_layout(n);
  return *cache[n];
}

}  // namespace mvb
