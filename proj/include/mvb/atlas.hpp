#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mvb/gauge.hpp"

namespace mvb {

struct Chart {
  std::string id;
  std::vector<int> domain;  // point indices, increasing
  bool contains(int point) const;
};

// Finite base, charts with domains, and per-point transitions. The
// transition stored under (from, to, p) maps coordinates in chart `from`
// to coordinates in chart `to`.
class AtlasPresentation {
 public:
  using Key = std::tuple<int, int, int>;  // (from, to, point)

  AtlasPresentation() = default;
  AtlasPresentation(DimAssignment dims, std::vector<std::string> base, std::vector<Chart> charts);

  int n() const { return dims_.n(); }
  const DimAssignment& dims() const { return dims_; }
  const std::vector<std::string>& base() const { return base_; }
  const std::vector<Chart>& charts() const { return charts_; }  // sorted by id
  const std::map<Key, Gauge>& transitions() const { return transitions_; }

  int point_index(const std::string& name) const;
  int chart_index(const std::string& id) const;
  bool in_chart(int chart, int point) const { return charts_[chart].contains(point); }
  std::vector<int> charts_at(int point) const;
  int canonical_chart(int point) const;  // least chart id containing the point

  void set_transition(int from, int to, int point, Gauge g);
  void erase_transition(int from, int to, int point) { transitions_.erase({from, to, point}); }
  bool has_transition(int from, int to, int point) const;
  // identity when from == to and nothing is stored
  const Gauge& transition(int from, int to, int point) const;
  const Gauge& identity() const { return identity_; }

  friend bool operator==(const AtlasPresentation& a, const AtlasPresentation& b) {
    return a.dims_ == b.dims_ && a.base_ == b.base_ && a.charts_ == b.charts_ &&
           a.transitions_ == b.transitions_;
  }

 private:
  DimAssignment dims_;
  std::vector<std::string> base_;
  std::vector<Chart> charts_;
  std::map<Key, Gauge> transitions_;
  std::map<std::string, int> point_idx_, chart_idx_;
  Gauge identity_;
};

inline bool operator==(const Chart& a, const Chart& b) { return a.id == b.id && a.domain == b.domain; }

struct Violation {
  bool structural = false;
  std::string kind;  // coverage, dims, missing_transition, self_transition, not_invertible, cocycle
  std::string alpha, beta, gamma, point;
  std::optional<IndexSet> J;
  std::optional<Partition> rho;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::size_t structural_count() const;
  std::size_t semantic_count() const;
  std::size_t count(const std::string& kind) const;
};

ValidationReport validate(const AtlasPresentation& A);
void require_valid(const AtlasPresentation& A);  // throws SemanticError with the first violation

// First component at which two gauges differ, if any.
std::optional<std::pair<int, int>> first_difference(const Gauge& a, const Gauge& b);

AtlasPresentation decomposed(const DimAssignment& dims, const std::vector<std::string>& base);
AtlasPresentation vacant(const std::vector<std::size_t>& singleton_dims, const std::vector<std::string>& base);
AtlasPresentation diagonal(const std::map<IndexSet, std::size_t>& dims, const Partition& rho,
                           const std::vector<std::string>& base);

// Same charts, transitions reduced to their linear parts (the decomposed
// model built from the building bundles), resp. only singleton slots.
AtlasPresentation associated_decomposed(const AtlasPresentation& A);
AtlasPresentation associated_vacant(const AtlasPresentation& A);
DimAssignment vacant_dims(const DimAssignment& d);

// Reindex along a block family: node mu carries the components [mu'].
AtlasPresentation subbundle(const AtlasPresentation& A, const BlockFamily& family);

// Rename indices: i becomes perm[i-1].
AtlasPresentation relabel(const AtlasPresentation& A, const std::vector<int>& perm);
Gauge relabel(const Gauge& g, const std::vector<int>& perm);

// Several charts, identity transitions on every overlap.
AtlasPresentation trivial_atlas(const DimAssignment& dims, const std::vector<std::string>& base,
                                std::vector<Chart> charts);

// Replace every transition by its conjugate g_to o t o g_from^-1.
AtlasPresentation twist(const AtlasPresentation& A,
                        const std::map<std::pair<int, int>, Gauge>& per_chart_point);

}  // namespace mvb
