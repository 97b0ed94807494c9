#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "checks.hpp"
#include "report.hpp"
#include "rgsym/errors.hpp"
#include "rgsym/scenarios.hpp"

namespace rgsym::cli {

namespace {

std::string g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0 ? 0.0 : v);
  return buf;
}

bool write_text(const std::string& path, const std::string& text, std::ostream& out, std::ostream& err) {
  if (path.empty() || path == "-") {
    out << text;
    return true;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    err << "error: cannot write " << path << "\n";
    return false;
  }
  f << text;
  return static_cast<bool>(f);
}

ModelSystem scenario_system(const Scenario& sc) {
  if (sc.kind == "hopf") return hopf_system();
  if (sc.kind == "optics") return optics_system(sc.optics->nu);
  if (sc.kind == "plasma") return vlasov_system();
  return advection_system(Rational(sc.detq.advection_speed));
}

}  // namespace

int cmd_verify(const std::string& scenario, const std::string& suite, const std::string& report_path, std::ostream& out,
               std::ostream& err) {
  Scenario sc;
  Suite s;
  try {
    s = parse_suite(suite);
    sc = load_scenario(scenario);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  RunReport rep;
  rep.scenario = scenario;
  rep.kind = sc.kind;
  rep.suite = std::string(suite_name(s));
  try {
    rep.notes = scenario_notes(sc);
  } catch (const Error& e) {
    rep.notes["error"] = e.what();
  }
  rep.checks = run_checks(build_checks(sc, s), thread_count());

  std::size_t w = 0;
  for (const auto& c : rep.checks) w = std::max(w, c.name.size());
  for (const auto& c : rep.checks) {
    out << (c.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(w) + 2) << c.name << std::setw(10)
        << c.kind << "residual " << std::setw(18) << g12(c.residual) << " tol " << std::setw(8) << g12(c.tolerance)
        << std::right << std::setw(9) << std::fixed << std::setprecision(1) << c.ms << " ms";
    out.unsetf(std::ios::fixed);
    if (!c.detail.empty()) out << "  " << c.detail;
    out << "\n";
  }
  out << rep.checks.size() - rep.failures() << "/" << rep.checks.size() << " checks passed\n";
  if (!report_path.empty() && !write_text(report_path, to_json(rep).dump(2) + "\n", out, err)) return 2;
  return rep.all_pass() ? 0 : 1;
}

int cmd_detq(const std::string& scenario, int degree, const std::string& out_path, std::ostream& out,
             std::ostream& err) {
  Scenario sc;
  try {
    sc = load_scenario(scenario);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  Ansatz a;
  a.degree = degree >= 0 ? degree : sc.detq.degree;
  a.mode = sc.detq.mode;
  a.coordinate_degree = sc.detq.coordinate_degree;
  a.parameters = sc.detq.parameters;
  a.parameter_degree = sc.detq.parameter_degree;
  DeterminingResult r;
  try {
    r = determining_system(scenario_system(sc), a);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  std::ostringstream text;
  text << "; " << sc.kind << " determining system, degree " << a.degree << ", "
       << (a.mode == Ansatz::Mode::Total ? "total" : "per-variable") << " ansatz\n";
  text << "; unknowns " << r.unknowns << ", equations " << r.equations << ", rank " << r.rank << "\n";
  text << "; dimension " << r.dimension() << "\n";
  for (const auto& g : r.basis) {
    text << "\n[generator." << g.name << "]\n";
    for (const auto& [k, c] : g.xi) text << "xi_" << k << " = " << c << "\n";
    for (const auto& [k, c] : g.eta) text << "eta_" << k << " = " << c << "\n";
  }
  if (!out_path.empty() && out_path != "-") {
    if (!write_text(out_path, text.str(), out, err)) return 2;
  }
  out << text.str();
  out << "dimension " << r.dimension() << "\n";
  int expected = sc.detq.expected_dimension;
  if (expected >= 0 && a.degree == sc.detq.degree) {
    if (static_cast<int>(r.dimension()) != expected) {
      err << "dimension mismatch: computed " << r.dimension() << ", scenario declares " << expected << "\n";
      return 1;
    }
    out << "matches the declared dimension\n";
  }
  return 0;
}

int cmd_figure(const std::string& which, const std::string& scenario, const std::string& out_path, std::ostream& out,
               std::ostream& err) {
  Scenario sc;
  try {
    sc = load_scenario(scenario);
    if (which == "fig2" && sc.kind != "optics") throw ConfigError("fig2 needs an optics scenario");
    if (which == "fig3" && sc.kind != "plasma") throw ConfigError("fig3 needs a plasma scenario");
    if (which != "fig2" && which != "fig3") throw ConfigError("unknown figure '" + which + "' (fig2 or fig3)");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  std::ostringstream csv;
  try {
    if (which == "fig2") {
      if (!(sc.optics->alpha > 0)) throw ConfigError("fig2 needs alpha > 0");
      csv << "z_over_zsing,I0_parabolic,W0_parabolic,I0_soliton,W0_soliton\n";
      for (const auto& r : fig2_data(sc.optics->alpha))
        csv << g12(r.z_over_zsing) << "," << g12(r.I0_par) << "," << g12(r.W0_par) << "," << g12(r.I0_sol) << ","
            << g12(r.W0_sol) << "\n";
    } else {
      PlasmaModel m(*sc.plasma);
      csv << "chi_squared,N_carbon,N_proton,n_cold_electron,n_hot_electron\n";
      for (const auto& r : fig3_data(m))
        csv << g12(r.chi_squared) << "," << g12(r.N_carbon) << "," << g12(r.N_proton) << "," << g12(r.n_cold) << ","
            << g12(r.n_hot) << "\n";
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return write_text(out_path, csv.str(), out, err) ? 0 : 2;
}

int cmd_report(const std::string& json_out, const std::string& from, std::ostream& out, std::ostream& err) {
  std::ifstream in(from);
  if (!in) {
    err << "error: no report at " << from << " (run verify first)\n";
    return 2;
  }
  RunReport rep;
  try {
    rep = report_from_json(nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    err << "error: cannot read " << from << ": " << e.what() << "\n";
    return 2;
  }
  if (!write_text(json_out, to_json(rep).dump(2) + "\n", out, err)) return 2;
  if (json_out != "-" && !json_out.empty())
    out << rep.checks.size() << " records, " << rep.failures() << " failing, written to " << json_out << "\n";
  return rep.all_pass() ? 0 : 1;
}

}  // namespace rgsym::cli
