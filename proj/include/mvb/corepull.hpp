#pragma once

#include <memory>
#include <vector>

#include "mvb/bundle.hpp"
#include "mvb/certificate.hpp"

namespace mvb {

struct CoreSpec {
  IndexSet S, J;
  DiagonalPartition rho;
  BlockFamily family;  // blocks of rho inside [n]
};

CoreSpec core_spec(int n, const IndexSet& S, const IndexSet& J);

// (S,J)-core as a presentation over the diagonal cube; the closure of the
// transitions on core coordinates is checked, not assumed.
AtlasPresentation core(const AtlasPresentation& A, const IndexSet& S, const IndexSet& J);
bool in_core(const AtlasPresentation& A, const BundleElement& e, const IndexSet& S, const IndexSet& J);
Certificate core_closure(const AtlasPresentation& A, const IndexSet& S, const IndexSet& J);

// E^S_J obtained from E^S_K by a second core construction.
Certificate core_by_stages(const AtlasPresentation& A, const IndexSet& S, const IndexSet& K, const IndexSet& J,
                           Rng& rng, int samples = 64);

BundleMorphism core_morphism(const BundleMorphism& tau, const IndexSet& S, const IndexSet& J);

struct PullbackPresentation {
  std::shared_ptr<const AtlasPresentation> P;
  BundleMorphism pi;
};

PullbackPresentation pullback(std::shared_ptr<const AtlasPresentation> A);
Certificate pullback_surjective(const PullbackPresentation& pb);

// Nested sum z + 0_{b_{j_{n-1}}} + ... + 0_b along an ordering j_1..j_{n-1}
// of [n] minus k; z is a top-node element with only the top component.
BundleElement iota_element(const AtlasPresentation& A, int k, const BundleElement& z, const BundleElement& b,
                           const std::vector<int>& order);
// Inverse direction: e in the kernel of the pullback projection over its
// image in E_{[n]-k} is retracted onto the ultracore.
BundleElement kernel_retraction(const AtlasPresentation& A, int k, const BundleElement& e,
                                const std::vector<int>& order);

struct UltracoreSequence {
  int k = 0;
  std::shared_ptr<const AtlasPresentation> source;  // ultracore x_M E_{[n]-k}
  BundleMorphism iota, pi;
  Certificate exactness;
};

UltracoreSequence ultracore_sequence(std::shared_ptr<const AtlasPresentation> A, int k, Rng& rng,
                                     int orderings = 3);

}  // namespace mvb
