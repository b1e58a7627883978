#pragma once

#include <string>

#include "json.hpp"

namespace mvb {

using json = nlohmann::ordered_json;

// Outcome of a verified claim. A failed certificate keeps the first
// counterexample found.
struct Certificate {
  Certificate() = default;
  explicit Certificate(std::string c) : claim(std::move(c)) {}

  std::string claim;
  bool passed = true;
  json witnesses = json::object();
  json counterexample;

  void fail(json ce) {
    if (passed) counterexample = std::move(ce);
    passed = false;
  }
  json to_json() const {
    json j{{"claim", claim}, {"status", passed ? "passed" : "failed"}, {"witnesses", witnesses}};
    if (!passed) j["counterexample"] = counterexample;
    return j;
  }
};

}  // namespace mvb
