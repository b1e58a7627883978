#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "mvb/bundle.hpp"
#include "mvb/certificate.hpp"

namespace mvb {

enum class PasteStrategy { LeastChart, Uniform };

const char* strategy_name(PasteStrategy s);
PasteStrategy parse_strategy(const std::string& s);

// Right inverse of the ultracore projection used as the first guess for a
// top map. Receives the pullback coordinates (top slot zero) in the given
// chart and returns the top component; it must be linear in the slots
// containing the local index 1. The default returns zero.
using ThetaHook =
    std::function<Vector(const AtlasPresentation& C, int chart, int point, const Coords& pullback_coords)>;

struct SplitOptions {
  PasteStrategy strategy = PasteStrategy::LeastChart;
  ThetaHook theta;
  bool verify = true;  // compare tabulated tensors with the literal construction
};

// Morphism from the associated vacant presentation, identity on singletons.
struct Splitting {
  BundleMorphism m;
};

// Morphism from the associated decomposed presentation with identity
// linear parts in every chart.
struct Decomposition {
  BundleMorphism m;
};

using Blocks = std::vector<IndexSet>;  // disjoint, canonical order

// Splittings of all iterated cores and faces, cached per block family so
// that every occurring bundle is split exactly once.
class SplittingEngine {
 public:
  using Provider = std::function<std::shared_ptr<const AtlasPresentation>(const Blocks&)>;

  SplittingEngine(std::shared_ptr<const AtlasPresentation> A, SplitOptions opt = {});
  SplittingEngine(Provider provider, SplitOptions opt = {});

  std::shared_ptr<const AtlasPresentation> presentation(const Blocks& nu);
  // top splitting tensor of the bundle on nu, per point, in canonical charts
  const std::map<int, MultiTensor>& sigma(const Blocks& nu);
  Splitting splitting(const Blocks& nu);
  Decomposition decomposition(const Blocks& nu);
  // decomposition read directly off the cached tensors
  Decomposition assembled(const Blocks& nu);

  std::size_t cached_tensors() const;
  const SplitOptions& options() const { return opt_; }

 private:
  Gauge lower_splitting(const Blocks& nu, const AtlasPresentation& C, int point);
  BundleElement local_top(const AtlasPresentation& C, const std::vector<Gauge>& lower, int chart, int point,
                          const Coords& vac);
  BundleElement pasted_top(const AtlasPresentation& C, const std::vector<Gauge>& lower, int point,
                           const Coords& vac);

  Provider provider_;
  SplitOptions opt_;
  std::recursive_mutex mu_;
  std::map<Blocks, std::shared_ptr<const AtlasPresentation>> pres_;
  std::map<Blocks, std::map<int, MultiTensor>> sigma_;
  std::map<Blocks, Decomposition> dec_;
};

Blocks singleton_blocks(int n);

Splitting find_splitting(std::shared_ptr<const AtlasPresentation> A, const SplitOptions& opt = {});
Certificate check_splitting(const Splitting& s);

// Chain construction over the pairs of [n]. The core decompositions are
// keyed by the pair J and act on the core presentation for rho^{[n]}_J.
Decomposition splitting_to_decomposition(std::shared_ptr<const AtlasPresentation> A, const Splitting& sigma,
                                         const std::map<IndexSet, Decomposition>& cores);
Splitting splitting_of(const Decomposition& d);
std::map<IndexSet, Decomposition> core_decompositions(const Decomposition& d);

Decomposition decompose(std::shared_ptr<const AtlasPresentation> A, const SplitOptions& opt = {});
Certificate check_decomposition(const Decomposition& d);

// tau with d1 o tau = d2
BundleMorphism torsor(const Decomposition& d1, const Decomposition& d2);
Certificate check_torsor(const Decomposition& d1, const Decomposition& d2, const BundleMorphism& tau);
Decomposition act(const Decomposition& d, const BundleMorphism& tau);

AtlasPresentation normalize_atlas(const AtlasPresentation& A, const Decomposition& d);

struct PullbackSplitting {
  std::shared_ptr<const AtlasPresentation> P;
  BundleMorphism sigma;  // P -> A
  BundleMorphism pi;     // A -> P
  Certificate cert;
};
PullbackSplitting split_pullback(std::shared_ptr<const AtlasPresentation> A, const SplitOptions& opt = {});

}  // namespace mvb
