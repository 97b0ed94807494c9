#pragma once

#include <iosfwd>
#include <string>

namespace rgsym::cli {

inline constexpr const char* kDefaultReport = "rgsym-report.json";

int cmd_verify(const std::string& scenario, const std::string& suite, const std::string& report_path, std::ostream& out,
               std::ostream& err);
// degree < 0 keeps the scenario value
int cmd_detq(const std::string& scenario, int degree, const std::string& out_path, std::ostream& out,
             std::ostream& err);
int cmd_figure(const std::string& which, const std::string& scenario, const std::string& out_path, std::ostream& out,
               std::ostream& err);
int cmd_report(const std::string& json_out, const std::string& from, std::ostream& out, std::ostream& err);

}  // namespace rgsym::cli
