#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace rgsym::cli {

struct CheckRecord {
  std::string name;
  std::string kind;  // symbolic | numeric
  double residual = 0;
  double tolerance = 0;
  bool pass = false;
  double ms = 0;
  std::string detail;
};

struct RunReport {
  std::string scenario;
  std::string kind;
  std::string suite;
  std::vector<CheckRecord> checks;
  std::map<std::string, std::string> notes;

  bool all_pass() const;
  std::size_t failures() const;
};

nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

struct Outcome {
  double residual;
  std::string detail;
};

struct Check {
  std::string name;
  std::string kind;
  double tolerance;
  std::function<Outcome()> run;
};

// RGSYM_THREADS if set, otherwise the hardware concurrency
unsigned thread_count();

/// Runs the checks on a small worker pool; records keep the input order.
std::vector<CheckRecord> run_checks(const std::vector<Check>& checks, unsigned threads);

}  // namespace rgsym::cli
