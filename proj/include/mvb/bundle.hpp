#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mvb/atlas.hpp"
#include "mvb/random.hpp"

namespace mvb {

// An element of E_I in the fiber over a base point, written in a chart.
// Coordinates are stored for every nonempty J of [n]; those with J not
// inside the node are zero.
struct BundleElement {
  IndexSet node;
  int chart = 0;
  int point = 0;
  Coords comps;
};

BundleElement make_element(const AtlasPresentation& A, const IndexSet& node, int chart, int point,
                           const std::map<IndexSet, Vector>& comps);
BundleElement zero_element(const AtlasPresentation& A, const IndexSet& node, int point);
BundleElement random_element(const AtlasPresentation& A, const IndexSet& node, int chart, int point, Rng& rng);

BundleElement transport(const AtlasPresentation& A, const BundleElement& e, int chart);
BundleElement canonical(const AtlasPresentation& A, const BundleElement& e);
bool equal(const AtlasPresentation& A, const BundleElement& a, const BundleElement& b);

BundleElement project(const AtlasPresentation& A, const BundleElement& e, int i);
BundleElement project_to(const AtlasPresentation& A, const BundleElement& e, const IndexSet& R);
// Addition over E_{node minus i}; b is moved into a's chart first.
BundleElement add(const AtlasPresentation& A, const BundleElement& a, const BundleElement& b, int i);
BundleElement scale(const AtlasPresentation& A, const Rational& s, const BundleElement& e, int i);
BundleElement subtract(const AtlasPresentation& A, const BundleElement& a, const BundleElement& b, int i);
BundleElement zero_lift(const AtlasPresentation& A, const BundleElement& e, const IndexSet& S);

// (I,J)-face. For J nonempty the base node E_J is frozen along a section
// given per point in canonical-chart coordinates (zero section if absent).
AtlasPresentation face(const AtlasPresentation& A, const IndexSet& I, const IndexSet& J,
                       const std::map<int, Coords>& frozen = {});
AtlasPresentation restrict(const AtlasPresentation& A, const std::vector<std::string>& points);

// Natural transformation over the identity of the base, stored per chart
// and point (the chart sets of source and target coincide).
struct BundleMorphism {
  std::shared_ptr<const AtlasPresentation> source, target;
  std::map<std::pair<int, int>, Gauge> data;

  const Gauge& at(int chart, int point) const;
};

struct NaturalityViolation {
  int from, to, point;
  int subset, partition;
};

void check_compatible(const AtlasPresentation& a, const AtlasPresentation& b);
BundleMorphism identity_morphism(std::shared_ptr<const AtlasPresentation> A);
// Per-point gauges given in canonical charts; the other charts follow by naturality.
BundleMorphism morphism_from_canonical(std::shared_ptr<const AtlasPresentation> source,
                                       std::shared_ptr<const AtlasPresentation> target,
                                       const std::map<int, Gauge>& at_canonical);
std::vector<NaturalityViolation> naturality_violations(const BundleMorphism& m);
BundleElement apply(const BundleMorphism& m, const BundleElement& e);
BundleMorphism compose(const BundleMorphism& s, const BundleMorphism& t);  // s after t
bool morphism_equal(const BundleMorphism& a, const BundleMorphism& b);
// Fiberwise rank of the map on the top node at every (chart, point).
bool fiberwise_injective(const BundleMorphism& m);
bool fiberwise_bijective(const BundleMorphism& m);

// Hom bundle in decomposed form. A hom element at node I collects, for each
// nonempty J inside I, the tensors of all (J, rho) concatenated in layout
// order; it acts through the canonical charts of E and F.
AtlasPresentation hom_bundle(const AtlasPresentation& E, const AtlasPresentation& F);
Gauge hom_element_gauge(const AtlasPresentation& E, const AtlasPresentation& F, const BundleElement& phi);
BundleElement hom_evaluate(const AtlasPresentation& E, const AtlasPresentation& F,
                           const BundleElement& phi, const BundleElement& e);

AtlasPresentation tangent_prolongation(const AtlasPresentation& A);

}  // namespace mvb
