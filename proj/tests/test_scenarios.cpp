#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rgsym/scenarios.hpp"

using namespace rgsym;

namespace {

// charge balance at chi = 0 written out from the Boltzmann factors
double charge_balance(const PlasmaScenario& p, double e) {
  double g = -p.nc0() - p.nh0() * std::exp((1 - 1 / p.Th_over_Tc) * e);
  for (const auto& s : p.species) g += s.Z * s.n0 * std::exp((1 + s.Z / s.T_ratio) * e);
  return g;
}

double bisect(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200; ++i) {
    double m = 0.5 * (a + b);
    double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

PlasmaScenario fig3_plasma() {
  return load_scenario(std::string(RGSYM_SCENARIO_DIR) + "/plasma.scn").plasma.value();
}

}  // namespace

TEST(Hopf, ExactExamples) {
  HopfScenario h;
  EXPECT_NEAR(hopf_exact(h, 5, 1), -2, 1e-12);
  for (double x : {-1.5, -0.2, 0.9}) EXPECT_NEAR(hopf_exact(h, 0, x), h.U(x), 1e-13);
  EXPECT_THROW(hopf_exact(h, 10.5, 1), SolveError);
}

TEST(Hopf, ExactSatisfiesThePde) {
  for (const char* profile : {"-x", "-tanh(x)", "-x - x^3/3"}) {
    HopfScenario h;
    h.profile = parse(profile);
    h.x_min = -1.5;
    h.x_max = 1.5;
    std::mt19937_64 rng(1);
    // the cubic profile breaks at z = 1/(eps*(1 + x_min^2)) ~ 3.08 on this window
    std::uniform_real_distribution<double> Z(0.1, 2.5), X(-0.8, 0.8);
    const double d = 1e-3;
    auto D = [&](auto f) { return (8 * (f(d) - f(-d)) - (f(2 * d) - f(-2 * d))) / (12 * d); };
    for (int k = 0; k < 40; ++k) {
      double z = Z(rng), x = X(rng);
      double u = hopf_exact(h, z, x);
      double uz = D([&](double s) { return hopf_exact(h, z + s, x); });
      double ux = D([&](double s) { return hopf_exact(h, z, x + s); });
      EXPECT_LT(std::abs(uz + h.eps * u * ux), 1e-6) << profile << " z=" << z << " x=" << x;
    }
  }
}

TEST(Hopf, ProfileValidation) {
  HopfScenario h;
  h.profile = parse("x^2");
  EXPECT_THROW(h.validate(), ConfigError);
  h.profile = parse("-x");
  h.eps = -1;
  EXPECT_THROW(h.validate(), ConfigError);
  h.eps = 0.1;
  h.profile = parse("-x*y");
  EXPECT_THROW(h.validate(), ConfigError);
}

TEST(Optics, ClosedFormExamples) {
  OpticsScenario o;
  auto a = optics_axis_closed_form(o, 0);
  EXPECT_DOUBLE_EQ(a.I0, 1);
  EXPECT_DOUBLE_EQ(a.W0, 0);
  auto h = optics_axis_closed_form(o, o.z_sing() / 2);
  EXPECT_NEAR(h.I0, 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(h.W0, -4.0 / 3.0 * std::sqrt(0.1 / 2), 1e-14);
  EXPECT_NEAR(h.W0, -0.29814, 1e-5);
  EXPECT_THROW(optics_axis_closed_form(o, o.z_sing()), SolveError);

  OpticsScenario s;
  s.profile = OpticsScenario::Profile::Soliton;
  s.nu = 0;
  EXPECT_NEAR(s.z_sing(), 1 / (2 * std::sqrt(0.1)), 1e-15);
  EXPECT_NEAR(optics_axis_closed_form(s, s.z_sing() * (1 - 1e-9)).I0, 2, 1e-3);
  auto z0 = optics_axis_closed_form(s, 0);
  EXPECT_EQ(z0.I0, 1);
  EXPECT_EQ(z0.W0, 0);
}

TEST(Optics, SingularityLocations) {
  OpticsScenario o;
  EXPECT_NEAR(o.z_sing(), 1 / std::sqrt(0.2), 1e-15);
  o.alpha = 0;
  EXPECT_TRUE(std::isinf(o.z_sing()));
}

TEST(Optics, ClosedFormsSatisfyReducedConditions) {
  OpticsScenario par;
  Generator r = parabolic_functional_generator();
  for (double f : {0.1, 0.4, 0.7, 0.9}) {
    double z = f * par.z_sing(), d = 1e-5;
    auto c = optics_axis_closed_form(par, z);
    double I0z = (optics_axis_closed_form(par, z + d).I0 - optics_axis_closed_form(par, z - d).I0) / (2 * d);
    double W0z = (optics_axis_closed_form(par, z + d).W0 - optics_axis_closed_form(par, z - d).W0) / (2 * d);
    Point p{{"z", z}, {"I0", c.I0}, {"W0", c.W0}, {"alpha", par.alpha}};
    EXPECT_NEAR(eval(r.coefficient("I0"), p) - eval(r.coefficient("z"), p) * I0z, 0, 1e-7);
    EXPECT_NEAR(eval(r.coefficient("W0"), p) - eval(r.coefficient("z"), p) * W0z, 0, 1e-7);
  }

  OpticsScenario sol;
  sol.profile = OpticsScenario::Profile::Soliton;
  sol.nu = 0;
  auto kappa = soliton_functional_kappa();
  ModelSystem sys = optics_system(0);
  FunctionalContext ctx = optics_context();
  ctx.relations = derive_axis_relations(sys, soliton_axis_specs(), optics_functionals(), ctx);
  auto fg = prolong_to_functional(sys, soliton_generator(), optics_functionals(), ctx);
  ASSERT_TRUE(fg.closed());
  for (double f : {0.2, 0.5, 0.8}) {
    double z = f * sol.z_sing(), d = 1e-3;
    auto I = [&](double zz) { return optics_axis_closed_form(sol, zz).I0; };
    double i0 = I(z);
    double i1 = (I(z + d) - I(z - d)) / (2 * d);
    double i2 = (I(z + d) - 2 * i0 + I(z - d)) / (d * d);
    double i3 = (I(z + 2 * d) - 2 * I(z + d) + 2 * I(z - d) - I(z - 2 * d)) / (2 * d * d * d);
    std::map<std::string, double> b{{"z", z},     {"I0", i0},       {"I0_z", i1},
                                    {"I0_zz", i2}, {"I0_zzz", i3},   {"alpha", sol.alpha},
                                    {"W0", optics_axis_closed_form(sol, z).W0}};
    EXPECT_NEAR(eval(kappa.at("I0"), b), 0, 1e-4) << z;
    EXPECT_NEAR(eval(fg.canonical.kappa.at("I0"), b), 0, 1e-4) << z;
    EXPECT_NEAR(eval(fg.canonical.kappa.at("W0"), b), 0, 1e-3) << z;
  }
}

TEST(Optics, Validation) {
  OpticsScenario o;
  o.nu = 2;
  EXPECT_THROW(o.validate(), ConfigError);
  o.nu = 1;
  o.alpha = -0.1;
  EXPECT_THROW(o.validate(), ConfigError);
  o.alpha = 0.1;
  o.cfl = 1.5;
  EXPECT_THROW(o.validate(), ConfigError);
}

TEST(Plasma, ScriptEAgreesWithBruteForce) {
  PlasmaScenario p = fig3_plasma();
  PlasmaModel m(p);
  double oracle = bisect([&](double e) { return charge_balance(p, e); }, -50, 50);
  EXPECT_NEAR(m.script_e(0), oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
  EXPECT_LT(std::abs(m.quasineutrality_residual(m.script_e(0), 0)), 1e-10 * p.nc0());
}

TEST(Plasma, QuasineutralityAcrossChi) {
  PlasmaScenario p = fig3_plasma();
  PlasmaModel m(p);
  for (double chi : {0.0, 0.3, 1.0, 2.0, 5.0, 20.0}) {
    double e = m.script_e(chi);
    EXPECT_LT(std::abs(m.quasineutrality_residual(e, chi)), 1e-10 * p.nc0()) << chi;
  }
}

TEST(Plasma, NeutralityAtTheOrigin) {
  PlasmaScenario p = fig3_plasma();
  double ions = 0;
  for (const auto& s : p.species) ions += s.Z * s.n0;
  EXPECT_NEAR(ions, p.nc0() + p.nh0(), 1e-15);
}

TEST(Plasma, DistributionAtStart) {
  PlasmaModel m(fig3_plasma());
  for (std::size_t c = 0; c < m.components().size(); ++c) {
    const auto& k = m.components()[c];
    for (double x : {0.0, 0.4, 1.3})
      for (double v : {-0.5, 0.0, 0.2}) {
        double I = v * v / 2 + m.omega() * m.omega() * x * x / 2 + k.charge / k.mass * m.phi0(x);
        double want = k.n0 * std::sqrt(k.mass / (2 * std::numbers::pi * k.T)) * std::exp(-k.mass * I / k.T);
        EXPECT_NEAR(m.distribution(c, 0, x, v), want, 1e-12 * std::max(1e-300, want)) << k.name;
      }
  }
}

TEST(Plasma, DistributionIsConstantAlongTheGroupOrbit) {
  PlasmaModel m(fig3_plasma());
  Generator g = plasma_generator();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> T(0, 2), X(-1, 1), V(-0.5, 0.5), A(-0.5, 0.5);
  for (int k = 0; k < 30; ++k) {
    Point p{{"t", T(rng)}, {"x", X(rng)}, {"v", V(rng)}, {"Omega", m.omega()}};
    Point q = flow(g, p, A(rng));
    for (std::size_t c = 0; c < m.ions(); ++c) {
      double a = m.distribution(c, p["t"], p["x"], p["v"]);
      double b = m.distribution(c, q["t"], q["x"], q["v"]);
      EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, a));
    }
  }
}

TEST(Plasma, DistributionDecaysInVelocity) {
  PlasmaModel m(fig3_plasma());
  for (std::size_t c = 0; c < m.ions(); ++c) {
    EXPECT_LT(m.distribution(c, 1, 0.2, 50), 1e-100);
    EXPECT_LT(m.distribution(c, 1, 0.2, -50), 1e-100);
  }
}

TEST(Plasma, DensityClosedForm) {
  PlasmaScenario p = fig3_plasma();
  PlasmaModel m(p);
  for (std::size_t q = 0; q < m.ions(); ++q) {
    EXPECT_NEAR(m.density(q, 0, 0), p.species[q].n0 * m.universal_density(q, 0), 1e-15);
    for (double t : {0.0, 1.0, 5.0})
      for (double x : {0.0, 0.5, 2.0}) {
        double n = m.density(q, t, x);
        EXPECT_NEAR(m.density_quadrature(q, t, x), n, 1e-9 * std::max(n, 1e-12)) << q << " " << t << " " << x;
      }
  }
}

TEST(Plasma, SelfSimilarCollapse) {
  PlasmaModel m(fig3_plasma());
  const double W = m.omega();
  for (std::size_t q = 0; q < m.ions(); ++q)
    for (double chi : {0.0, 0.4, 1.1}) {
      double ref = m.density(q, 0, chi);
      for (double wt : {1.0, 10.0, 100.0}) {
        double t = wt / W, s = std::sqrt(1 + wt * wt);
        EXPECT_NEAR(m.density(q, t, chi * s) * s, ref, 1e-9 * ref);
      }
    }
}

TEST(Plasma, SpectrumApproachesAsymptote) {
  PlasmaModel m(fig3_plasma());
  const double W = m.omega();
  for (std::size_t q = 0; q < m.ions(); ++q) {
    const auto& k = m.components()[q];
    double worst100 = 0, worst300 = 0;
    for (double f : {0.2, 0.5, 1.0, 2.0}) {
      double e = f * k.T * 10;
      double a = m.spectrum_asymptote(q, e);
      worst100 = std::max(worst100, std::abs(m.spectrum(q, 100 / W, e) - a) / a);
      worst300 = std::max(worst300, std::abs(m.spectrum(q, 300 / W, e) - a) / a);
    }
    EXPECT_LT(worst300, 0.02) << k.name;
    EXPECT_LE(worst300, worst100 * 1.01) << k.name;
  }
}

TEST(Plasma, TailFallsMonotonically) {
  PlasmaModel m(fig3_plasma());
  auto rows = fig3_data(m, 101, 4);
  std::size_t knee = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].N_proton > rows[knee].N_proton) knee = i;
  EXPECT_LT(knee, rows.size() / 2);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].N_carbon, 0);
    EXPECT_GT(rows[i].N_proton, 0);
    EXPECT_LE(rows[i].N_carbon, rows[i - 1].N_carbon);
    if (i > knee) EXPECT_LE(rows[i].N_proton, rows[i - 1].N_proton) << rows[i].chi_squared;
  }
  EXPECT_LT(rows.back().N_carbon / rows.front().N_carbon, rows.back().N_proton / rows.front().N_proton);
}

TEST(Plasma, Validation) {
  PlasmaScenario p = PlasmaScenario::defaults();
  p.species[0].T_ratio = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = PlasmaScenario::defaults();
  p.nh0_fraction = 10;
  EXPECT_THROW(p.validate(), ConfigError);
  p = PlasmaScenario::defaults();
  p.species.clear();
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(ScenarioFiles, ShippedFilesLoad) {
  for (const char* f : {"hopf.scn", "optics.scn", "optics_soliton.scn", "plasma.scn", "advection.scn"}) {
    Scenario s = load_scenario(std::string(RGSYM_SCENARIO_DIR) + "/" + f);
    EXPECT_FALSE(s.kind.empty()) << f;
  }
}

TEST(ScenarioFiles, ParsesSections) {
  Scenario s = parse_scenario("[optics]\nalpha = 0.2\nnu = 0\nprofile = soliton\n[tolerances]\ngrid.order = 0.5\n");
  EXPECT_EQ(s.kind, "optics");
  EXPECT_DOUBLE_EQ(s.optics->alpha, 0.2);
  EXPECT_EQ(s.optics->nu, 0);
  EXPECT_EQ(s.optics->profile, OpticsScenario::Profile::Soliton);
  EXPECT_DOUBLE_EQ(s.tol.get("grid.order", 0), 0.5);

  Scenario p = parse_scenario("[plasma]\nTh_over_Tc = 100\n[species.He]\nZ = 2\nmass = 4\nn0 = 0.5\n");
  ASSERT_EQ(p.plasma->species.size(), 1u);
  EXPECT_EQ(p.plasma->species[0].name, "He");
  EXPECT_DOUBLE_EQ(p.plasma->Th_over_Tc, 100);
}

TEST(ScenarioFiles, Errors) {
  EXPECT_THROW(parse_scenario(""), ConfigError);
  EXPECT_THROW(parse_scenario("[hopf]\neps = 0.1\n[optics]\nalpha = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_scenario("[hopf]\nepsilon = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_scenario("[hopf]\neps = abc\n"), ConfigError);
  EXPECT_THROW(parse_scenario("[hopf]\nprofile = 1 +\n"), ConfigError);
  EXPECT_THROW(parse_scenario("[optics]\nalpha = -1\n"), ConfigError);
  EXPECT_THROW(parse_scenario("[optics]\nprofile = gaussian\n"), ConfigError);
  EXPECT_THROW(parse_scenario("[mystery]\na = 1\n"), ConfigError);
  EXPECT_THROW(parse_scenario("[hopf]\n[tolerances]\nx = -1\n"), ConfigError);
  EXPECT_THROW(parse_scenario("[detq]\nmode = sideways\n[hopf]\n"), ConfigError);
  EXPECT_THROW(load_scenario("/nonexistent/file.scn"), ConfigError);
}
