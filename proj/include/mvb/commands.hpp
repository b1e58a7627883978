#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mvb/certificate.hpp"

namespace mvb {

struct CommandReport {
  std::string command;
  std::string fingerprint;  // sha256 over the canonical dump of every input
  std::string status = "ok";  // ok | failed | error
  int exit_code = 0;          // 0 ok, 1 semantic failure, 2 usage / io / parse
  json result = json::object();
  json certificates = json::array();
  json counterexamples = json::array();
  json error;  // set when status == "error"
  double timing_ms = 0;

  void add(const Certificate& c);
  json to_json() const;  // includes report_hash
  std::string to_text() const;
};

std::string sha256_hex(std::string_view data);
// Hash of the report with timing_ms and report_hash removed.
std::string report_hash(const json& report);

struct RunResult {
  int exit_code = 0;
  std::string out, err;
};

// args excludes the program name, e.g. {"decompose", "x.json", "--strategy", "uniform"}
RunResult run_command(const std::vector<std::string>& args);

// Input files given by relative path are also looked up in $MVB_FIXTURE_DIR.
std::string resolve_input(const std::string& path);
std::string read_input(const std::string& path);

}  // namespace mvb
