#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "checks.hpp"
#include "commands.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using namespace rgsym::cli;

namespace {

const std::string kScn = RGSYM_SCENARIO_DIR;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rgsym-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    std::string cmd = "cd '" + dir_.string() + "' && '" RGSYM_EXE "' " + args + " > out.txt 2> err.txt";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }
  std::string read(const std::string& name) {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  void write(const std::string& name, const std::string& text) { std::ofstream(dir_ / name) << text; }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, VerifyPasses) {
  EXPECT_EQ(run("verify " + kScn + "/advection.scn"), 0) << read("out.txt") << read("err.txt");
  EXPECT_NE(read("out.txt").find("PASS"), std::string::npos);
  auto j = nlohmann::json::parse(read(kDefaultReport));
  RunReport r = report_from_json(j);
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.kind, "advection");
  EXPECT_GE(r.checks.size(), 4u);
}

TEST_F(Cli, InjectedToleranceFails) {
  write("tight.scn", "[hopf]\neps = 0.1\nprofile = -x\n[tolerances]\ncharacteristics.closed_form = 1e-300\n");
  EXPECT_EQ(run("verify tight.scn --suite numeric --report r.json"), 1);
  RunReport r = report_from_json(nlohmann::json::parse(read("r.json")));
  bool seen = false;
  for (const auto& c : r.checks)
    if (c.name == "characteristics.closed_form") {
      seen = true;
      EXPECT_FALSE(c.pass);
      EXPECT_EQ(c.tolerance, 1e-300);
    } else {
      EXPECT_TRUE(c.pass) << c.name;
    }
  EXPECT_TRUE(seen);
  EXPECT_NE(read("out.txt").find("FAIL"), std::string::npos);
  EXPECT_EQ(run("report --json - --from r.json"), 1);
}

TEST_F(Cli, UsageAndConfigErrors) {
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("verify"), 2);
  EXPECT_EQ(run("verify missing.scn"), 2);
  EXPECT_EQ(run("verify " + kScn + "/hopf.scn --suite everything"), 2);
  write("bad.scn", "[optics]\nalpha = -0.1\n");
  EXPECT_EQ(run("verify bad.scn"), 2);
  EXPECT_NE(read("err.txt").find("alpha"), std::string::npos);
  EXPECT_EQ(run("figure fig3 " + kScn + "/hopf.scn"), 2);
  EXPECT_EQ(run("report --json -"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, Fig2IsByteDeterministic) {
  ASSERT_EQ(run("figure fig2 " + kScn + "/optics.scn --out a.csv"), 0);
  ASSERT_EQ(run("figure fig2 " + kScn + "/optics.scn --out b.csv"), 0);
  std::string a = read("a.csv");
  EXPECT_EQ(a, read("b.csv"));
  ASSERT_EQ(run("figure fig2 " + kScn + "/optics.scn"), 0);
  EXPECT_EQ(a, read("out.txt"));
  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "z_over_zsing,I0_parabolic,W0_parabolic,I0_soliton,W0_soliton");
  std::getline(in, line);
  EXPECT_EQ(line, "0,1,0,1,0");
  EXPECT_EQ(a.find("-0,"), std::string::npos);
}

TEST_F(Cli, Fig3IsByteDeterministic) {
  ASSERT_EQ(run("figure fig3 " + kScn + "/plasma.scn --out a.csv"), 0);
  ASSERT_EQ(run("figure fig3 " + kScn + "/plasma.scn --out b.csv"), 0);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
  EXPECT_EQ(read("a.csv").rfind("chi_squared,N_carbon,N_proton,n_cold_electron,n_hot_electron\n", 0), 0u);
}

TEST_F(Cli, ReportCarriesDerivedFieldCoordinate) {
  int rc = run("verify " + kScn + "/plasma.scn --suite symbolic");
  EXPECT_EQ(rc, 0) << read("out.txt");
  ASSERT_EQ(run("report --json full.json"), 0);
  auto j = nlohmann::json::parse(read("full.json"));
  std::string eta = j["notes"]["eta_E"];
  EXPECT_NE(eta.find("Omega^2"), std::string::npos);
  EXPECT_NE(eta.find("E"), std::string::npos);
  EXPECT_NE(eta.find("-3"), std::string::npos);
  for (const auto& c : j["checks"]) EXPECT_EQ(c["kind"], "symbolic");
}

TEST_F(Cli, DetqListsBasis) {
  EXPECT_EQ(run("detq " + kScn + "/advection.scn --out basis.txt"), 0) << read("err.txt");
  std::string out = read("out.txt");
  EXPECT_EQ(out.rfind(read("basis.txt"), 0), 0u);
  EXPECT_NE(out.find("[generator.Y1]"), std::string::npos);
  EXPECT_NE(out.find("dimension 3"), std::string::npos);
  write("adv.scn", "[advection]\nc = 1\n[detq]\ndegree = 0\nexpected_dimension = 5\n");
  EXPECT_EQ(run("detq adv.scn"), 1);
}

TEST(Threads, EnvironmentCapsParallelism) {
  ::setenv("RGSYM_THREADS", "3", 1);
  EXPECT_EQ(thread_count(), 3u);
  ::setenv("RGSYM_THREADS", "1", 1);
  EXPECT_EQ(thread_count(), 1u);

  std::atomic<int> live{0}, peak{0};
  std::vector<Check> checks;
  for (int i = 0; i < 8; ++i)
    checks.push_back({"c" + std::to_string(i), "numeric", 1, [&, i] {
                        int now = ++live;
                        int p = peak.load();
                        while (now > p && !peak.compare_exchange_weak(p, now)) {
                        }
                        std::this_thread::sleep_for(std::chrono::milliseconds(20));
                        --live;
                        return Outcome{i * 0.25, ""};
                      }});
  auto serial = run_checks(checks, thread_count());
  EXPECT_EQ(peak.load(), 1);
  peak = 0;
  auto parallel = run_checks(checks, 4);
  EXPECT_GT(peak.load(), 1);
  EXPECT_LE(peak.load(), 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].name, parallel[i].name);
    EXPECT_EQ(serial[i].pass, parallel[i].pass);
    EXPECT_EQ(serial[i].pass, i <= 4);
  }
  ::unsetenv("RGSYM_THREADS");
}

TEST(Checks, ExceptionsBecomeFailures) {
  std::vector<Check> checks{{"boom", "numeric", 1, []() -> Outcome { throw std::runtime_error("kaput"); }}};
  auto r = run_checks(checks, 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_FALSE(r[0].pass);
  EXPECT_NE(r[0].detail.find("kaput"), std::string::npos);
}

TEST(Checks, SuiteFilter) {
  auto sc = rgsym::load_scenario(kScn + "/hopf.scn");
  auto sym = build_checks(sc, Suite::Symbolic);
  auto num = build_checks(sc, Suite::Numeric);
  auto all = build_checks(sc, Suite::All);
  EXPECT_EQ(sym.size() + num.size(), all.size());
  for (const auto& c : sym) EXPECT_EQ(c.kind, "symbolic");
  for (const auto& c : num) EXPECT_EQ(c.kind, "numeric");
  EXPECT_THROW(parse_suite("most"), rgsym::ConfigError);
}

TEST(Report, JsonRoundTrip) {
  RunReport r{"s.scn", "hopf", "all", {{"a", "symbolic", 0, 0, true, 1.5, "0"}}, {{"k", "v"}}};
  r.checks.push_back({"b", "numeric", std::numeric_limits<double>::infinity(), 1e-8, false, 2, "x"});
  RunReport back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
  ASSERT_EQ(back.checks.size(), 2u);
  EXPECT_TRUE(std::isinf(back.checks[1].residual));
  EXPECT_EQ(back.notes.at("k"), "v");
  EXPECT_EQ(back.failures(), 1u);
}
