#include "report.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace rgsym::cli {

bool RunReport::all_pass() const { return failures() == 0; }

std::size_t RunReport::failures() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.pass ? 0 : 1;
  return n;
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

double number(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  std::string s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["scenario"] = r.scenario;
  j["kind"] = r.kind;
  j["suite"] = r.suite;
  j["passed"] = r.all_pass();
  j["notes"] = r.notes;
  auto& arr = j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks) {
    nlohmann::json e;
    e["name"] = c.name;
    e["kind"] = c.kind;
    e["residual"] = number(c.residual);
    e["tolerance"] = number(c.tolerance);
    e["pass"] = c.pass;
    e["ms"] = c.ms;
    if (!c.detail.empty()) e["detail"] = c.detail;
    arr.push_back(std::move(e));
  }
  return j;
}

RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.scenario = j.value("scenario", "");
  r.kind = j.value("kind", "");
  r.suite = j.value("suite", "");
  if (j.contains("notes")) r.notes = j.at("notes").get<std::map<std::string, std::string>>();
  for (const auto& e : j.at("checks")) {
    CheckRecord c;
    c.name = e.at("name").get<std::string>();
    c.kind = e.at("kind").get<std::string>();
    c.residual = number(e.at("residual"));
    c.tolerance = number(e.at("tolerance"));
    c.pass = e.at("pass").get<bool>();
    c.ms = e.value("ms", 0.0);
    c.detail = e.value("detail", "");
    r.checks.push_back(std::move(c));
  }
  return r;
}

unsigned thread_count() {
  if (const char* env = std::getenv("RGSYM_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<CheckRecord> run_checks(const std::vector<Check>& checks, unsigned threads) {
  std::vector<CheckRecord> out(checks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < checks.size(); i = next++) {
      const Check& c = checks[i];
      CheckRecord& r = out[i];
      r.name = c.name;
      r.kind = c.kind;
      r.tolerance = c.tolerance;
      auto t0 = std::chrono::steady_clock::now();
      try {
        Outcome o = c.run();
        r.residual = o.residual;
        r.detail = std::move(o.detail);
      } catch (const std::exception& e) {
        r.residual = std::numeric_limits<double>::infinity();
        r.detail = e.what();
      }
      r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      r.pass = r.residual <= r.tolerance;
    }
  };
  unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(checks.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace rgsym::cli
