#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mvb/bundle.hpp"
#include "mvb/certificate.hpp"

namespace mvb {

// Writers. Everything is emitted in canonical order so that dumping the
// same object twice is byte-identical.
json to_json(const Rational& x);
json to_json(const Vector& v);
json to_json(const IndexSet& I);
json to_json(const Partition& p);
json to_json(const MultiTensor& t);
json to_json(const DimAssignment& d);
json to_json(const Gauge& g);
json coords_json(const Coords& c, const DimAssignment& d);
json to_json(const AtlasPresentation& A);
json to_json(const AtlasPresentation& A, const BundleElement& e);
json to_json(const BundleMorphism& m);
std::string dump(const json& j);  // two-space indent, trailing newline

// Readers. Syntax errors carry a byte offset, schema errors a JSON path
// (and the offending (J, rho) for tensors).
json parse_text(std::string_view text);
Rational parse_rational(const json& j, const std::string& where);
IndexSet parse_indexset(const json& j, const std::string& where);
Partition parse_partition(const json& j, const std::string& where);
MultiTensor parse_tensor(const json& j, const std::string& where);
DimAssignment parse_dims(const json& j, int n, const std::string& where,
                         std::vector<std::string>* missing = nullptr);
Gauge parse_gauge(const json& j, const std::string& where = "gauge");

struct ParsedAtlas {
  AtlasPresentation atlas;
  std::vector<std::string> structural;  // missing dims are recorded here
};
ParsedAtlas parse_atlas(const json& j);
// Morphism data per (chart, point); the charts of source and target coincide.
BundleMorphism parse_morphism(const json& j, std::shared_ptr<const AtlasPresentation> source,
                              std::shared_ptr<const AtlasPresentation> target);
BundleElement parse_element(const AtlasPresentation& A, const json& j);
Coords parse_coords(const json& j, const DimAssignment& d, const std::string& where);

}  // namespace mvb
