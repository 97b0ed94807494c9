#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace rgsym::cli;
  CLI::App app{"RG symmetry toolkit for boundary value problems"};
  app.require_subcommand(1);

  std::string scenario, suite = "all", report = kDefaultReport, out, from = kDefaultReport, which;
  int degree = -1;

  auto* verify = app.add_subcommand("verify", "run the verification battery of a scenario");
  verify->add_option("scenario", scenario, "scenario file")->required();
  verify->add_option("--suite", suite, "symbolic, numeric or all")->check(CLI::IsMember({"symbolic", "numeric", "all"}));
  verify->add_option("--report", report, "where to store the run report");

  auto* detq = app.add_subcommand("detq", "solve the determining equations of a scenario");
  detq->add_option("scenario", scenario, "scenario file")->required();
  detq->add_option("--degree", degree, "polynomial degree of the ansatz")->check(CLI::NonNegativeNumber);
  detq->add_option("--out", out, "also write the basis to this file");

  auto* figure = app.add_subcommand("figure", "write figure data as CSV");
  figure->add_option("figure", which, "fig2 or fig3")->required()->check(CLI::IsMember({"fig2", "fig3"}));
  figure->add_option("scenario", scenario, "scenario file")->required();
  figure->add_option("--out", out, "output file, stdout when omitted");

  auto* rep = app.add_subcommand("report", "dump the last verification run");
  rep->add_option("--json", out, "output file, - for stdout")->required();
  rep->add_option("--from", from, "report written by verify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*verify) return cmd_verify(scenario, suite, report, std::cout, std::cerr);
  if (*detq) return cmd_detq(scenario, degree, out, std::cout, std::cerr);
  if (*figure) return cmd_figure(which, scenario, out, std::cout, std::cerr);
  return cmd_report(out, from, std::cout, std::cerr);
}
