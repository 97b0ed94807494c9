#pragma once

#include <string>
#include <vector>

#include "report.hpp"
#include "rgsym/scenarios.hpp"

namespace rgsym::cli {

enum class Suite { Symbolic, Numeric, All };

Suite parse_suite(const std::string& s);
std::string_view suite_name(Suite s);

/// Verification battery for a scenario, filtered by suite.
std::vector<Check> build_checks(const Scenario& sc, Suite suite);

/// Derived quantities worth keeping next to the check records.
std::map<std::string, std::string> scenario_notes(const Scenario& sc);

}  // namespace rgsym::cli
