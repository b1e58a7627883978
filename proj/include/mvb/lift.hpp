#pragma once

#include <functional>
#include <map>
#include <memory>

#include "mvb/split.hpp"

namespace mvb {

// ---- double vector bundles (n = 2, sides A = 1, B = 2, core C = 12) ----
//
// Sections are stored per point in canonical-chart coordinates. Over a
// finite base a section is just its value at every point.

// a -> (a, b, X a): linear over the section b of B
struct LinearSection {
  Vector b;
  Matrix X;  // d12 x d1
};

Vector flatten(const LinearSection& s);
LinearSection unflatten_linear(const AtlasPresentation& D, const Vector& v);
BundleElement evaluate(const AtlasPresentation& D, int point, const LinearSection& s, const Vector& a);
// Reads a section off a map on A-fibers and checks that it has that form.
LinearSection read_linear_section(const AtlasPresentation& D, int point,
                                  const std::function<BundleElement(const Vector&)>& f);

LinearSection tilde(const AtlasPresentation& D, int point, const Matrix& phi);
LinearSection hat(const AtlasPresentation& D, int point, const Vector& b, const Splitting& s);
// f s1 + g s2 with the module operations of linear sections
LinearSection combine(const AtlasPresentation& D, int point, const Rational& f, const LinearSection& s1,
                      const Rational& g, const LinearSection& s2);

// 0 -> Hom(A, C) -> linear sections -> sections of B -> 0, per point
Certificate fat_sequence(std::shared_ptr<const AtlasPresentation> D);

struct LocalSplitOptions {
  PasteStrategy strategy = PasteStrategy::LeastChart;
  // section of the core sequence in a chart, linear in a; default (a, b, 0)
  std::function<Vector(const AtlasPresentation& D, int chart, int point, const Vector& a, const Vector& b)> sigma;
};

Splitting local_split_double(std::shared_ptr<const AtlasPresentation> D, const LocalSplitOptions& opt = {});

// ---- triple vector bundles (A = 1, B = 2, C = 3; D = 12, E = 23, F = 13) ----

// d = (a, b, k) -> (a, b, c, k, XF a, XE b, R(a, b) + Q k)
struct DoublyLinearSection {
  Vector c;
  Matrix XF, XE;
  MultiTensor R;
  Matrix Q;
};
struct SectionPair {
  Vector c;
  Matrix XF, XE;
};
// double vector bundle morphisms D -> S
struct Mor2 {
  MultiTensor P;
  Matrix Q;
};

struct TripleShape {
  std::size_t a, b, c, ab, ca, bc, s;
  explicit TripleShape(const DimAssignment& d);
  std::size_t mor2() const { return a * b * s + ab * s; }
  std::size_t pairs() const { return c + a * ca + b * bc; }
  std::size_t sections() const { return pairs() + mor2(); }
};

Vector flatten(const DoublyLinearSection& s);
Vector flatten(const SectionPair& p);
Vector flatten(const Mor2& m);
DoublyLinearSection unflatten_section(const TripleShape& sh, const Vector& v);
SectionPair unflatten_pair(const TripleShape& sh, const Vector& v);
Mor2 unflatten_mor2(const TripleShape& sh, const Vector& v);

// d given in T-coordinates (components 1, 2, 12 used)
BundleElement evaluate(const AtlasPresentation& T, int point, const DoublyLinearSection& s, const Coords& d);
DoublyLinearSection read_doubly_linear(const AtlasPresentation& T, int point,
                                       const std::function<BundleElement(const Coords&)>& f);

DoublyLinearSection tilde(const AtlasPresentation& T, int point, const Mor2& phi);
SectionPair project_pair(const DoublyLinearSection& s);
DoublyLinearSection hat(const AtlasPresentation& T, int point, const SectionPair& xi);

struct DoublyLinearSequence {
  std::map<int, Matrix> tilde, pi, hat;  // per point
  Certificate exactness;
};
DoublyLinearSequence doubly_linear_sequence(std::shared_ptr<const AtlasPresentation> T);

// Per point a matrix from pair coordinates to section coordinates.
struct HorizontalLift {
  std::map<int, Matrix> sigma;
};

struct LiftData {
  Splitting D, E, F, LDE, LFD;
  HorizontalLift lift;
};

struct TripleSplittings {
  Splitting total, D, E, F, LDE, LFD, LEF;
};

BlockFamily triple_family(const std::string& name);  // "D", "E", "F", "LDE", "LFD", "LEF"

LiftData lift_from_decomposition(std::shared_ptr<const AtlasPresentation> T, const Decomposition& S);
Certificate check_lift_compatibility(std::shared_ptr<const AtlasPresentation> T, const LiftData& data);
TripleSplittings splittings_from_lift(std::shared_ptr<const AtlasPresentation> T, const LiftData& data);
Decomposition decomposition_from_lift(std::shared_ptr<const AtlasPresentation> T, const LiftData& data);
bool lift_data_equal(const LiftData& x, const LiftData& y);

// S(a, b, c, k_AB, k_BC, k_CA, s) assembled from the seven splittings with
// the bundle operations only; x is in decomposed coordinates.
Coords seven_argument_formula(const AtlasPresentation& T, const TripleSplittings& sp, int point, const Coords& x);
Certificate formula_vs_pipeline(std::shared_ptr<const AtlasPresentation> T, const TripleSplittings& sp,
                                const Decomposition& S);
// decomposition -> lift data -> decomposition, and the other way round
Certificate lift_round_trip(std::shared_ptr<const AtlasPresentation> T, const Decomposition& S);

Decomposition identity_decomposition(std::shared_ptr<const AtlasPresentation> A);
BundleMorphism face_morphism(const BundleMorphism& m, const BlockFamily& fam);

}  // namespace mvb
