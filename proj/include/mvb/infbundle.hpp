#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "mvb/certificate.hpp"
#include "mvb/split.hpp"

namespace mvb {

// A tower of n-fold presentations over one base and one set of charts, the
// truncation to [n] being a face of the truncation to [n+1].
class InfinityPresentation {
 public:
  // dims vanish on every J not inside [N]
  static std::shared_ptr<InfinityPresentation> stabilizing(const AtlasPresentation& A);
  // dim V_J = dims_by_size[#J - 1] (0 beyond the list); transitions are
  // identities or twists with hash-seeded statomorphisms independent of n
  static std::shared_ptr<InfinityPresentation> rule(std::vector<std::size_t> dims_by_size,
                                                    std::vector<std::string> base, std::vector<Chart> charts,
                                                    bool twisted, std::uint64_t seed);

  std::shared_ptr<const AtlasPresentation> truncate(int n) const;  // memoized
  json to_json() const;
  const std::string& kind() const { return kind_; }

 private:
  InfinityPresentation() = default;
  std::shared_ptr<const AtlasPresentation> build(int n) const;

  std::string kind_;
  // stabilizing
  std::shared_ptr<const AtlasPresentation> instance_;
  // rule
  std::vector<std::size_t> dims_by_size_;
  std::vector<std::string> base_;
  std::vector<Chart> charts_;
  bool twisted_ = false;
  std::uint64_t seed_ = 0;

  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const AtlasPresentation>> memo_;
};

std::shared_ptr<InfinityPresentation> parse_infinity(const json& j);

// Decompositions of all truncations from one shared splitting cache.
class TowerDecomposition {
 public:
  explicit TowerDecomposition(std::shared_ptr<const InfinityPresentation> X, SplitOptions opt = {});

  Decomposition level(int n);
  // S(I) read off level n (requires I inside [n])
  BundleMorphism evaluate(const IndexSet& I, int n);
  // S(I) agrees across the given levels for every I inside the smallest one,
  // and each level restricts to the previous one
  Certificate check_levels(const std::vector<int>& levels);
  std::size_t cached_tensors() const { return engine_.cached_tensors(); }

 private:
  std::shared_ptr<const InfinityPresentation> X_;
  SplittingEngine engine_;
};

}  // namespace mvb
