#pragma once

#include <cstdint>
#include <map>

#include "mvb/atlas.hpp"
#include "mvb/random.hpp"

namespace mvb {

struct GenOptions {
  int n = 2;
  std::size_t max_dim = 2;
  bool all_ones = false;  // every dim 1
  int charts = 2;
  int points = 2;
  bool twisted = true;
};

// Identity linear parts, small random integer entries elsewhere.
Gauge random_statomorphism(const DimAssignment& dims, Rng& rng);
// Random invertible linear parts (unit triangular up to a diagonal of +-1,+-2)
// plus random nonlinear components.
Gauge random_gauge(const DimAssignment& dims, Rng& rng);
DimAssignment random_dims(int n, std::size_t max_dim, Rng& rng);

// Decomposed presentation over several charts, twisted by random gauges per
// (chart, point); valid by construction.
AtlasPresentation random_instance(const GenOptions& opt, Rng& rng);
AtlasPresentation twisted(const AtlasPresentation& A, Rng& rng, bool linear_too = true);

}  // namespace mvb
