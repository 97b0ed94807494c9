#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rgsym/scenarios.hpp"
#include "rgsym/solvers.hpp"
#include "rgsym/symmetry.hpp"

using namespace rgsym;

namespace {

bool same(const Expr& a, const Expr& b) { return is_zero(simplify(a - b)); }

Generator gen(std::string name, std::map<std::string, std::string> xi, std::map<std::string, std::string> eta,
              const ModelSystem& sys) {
  Generator g{std::move(name), {}, {}};
  for (const auto& [k, v] : xi) g.xi[k] = sys.parse(v);
  for (const auto& [k, v] : eta) g.eta[k] = sys.parse(v);
  return g;
}

Generator r3_unit() {
  ModelSystem h = hopf_system();
  return gen("R3", {{"eps", "1"}, {"x", "z*u"}}, {}, h);
}

std::vector<Expr> jets_up_to(const ModelSystem& sys, int order) {
  std::vector<Expr> out;
  for (const auto& d : sys.dependents) {
    std::vector<std::string> args = d.args.empty() ? sys.independents : d.args;
    std::vector<std::vector<std::string>> layer{{}};
    for (int k = 1; k <= order; ++k) {
      std::vector<std::vector<std::string>> next;
      for (const auto& m : layer)
        for (const auto& a : args) {
          if (!m.empty() && a < m.back()) continue;
          auto n = m;
          n.push_back(a);
          next.push_back(n);
          out.push_back(jet(d.name, n));
        }
      layer = next;
    }
  }
  return out;
}

Generator restricted_r3() {
  HopfScenario h;
  return restrict_on_solution(hopf_system(), hopf_family(), hopf_boundary(h)).generators.at(2);
}

}  // namespace

TEST(Prolong, Examples) {
  ModelSystem h = hopf_system();
  Generator x3 = gen("X3", {{"x", "x"}}, {{"u", "u"}}, h);
  auto p = prolong(x3, h, {h.parse("u_x")});
  EXPECT_TRUE(simplify(p.zeta.at(h.parse("u_x"))).is_zero());

  Generator dx = gen("X2", {{"x", "1"}}, {}, h);
  for (const auto& [j, z] : prolong(dx, h, 2).zeta) EXPECT_TRUE(simplify(z).is_zero()) << to_string(j);
}

TEST(Prolong, ParabolicZetaMatchesFlowDifferentiation) {
  ModelSystem s = optics_system(1);
  Generator r = parabolic_generator();
  Expr vx = s.parse("v_x");
  Expr zeta = prolong(r, s, {vx}).zeta.at(vx);
  EXPECT_TRUE(same(zeta, s.parse("-2*alpha*(1 - 2*z*v_x)")));

  // image of the graph v = s x + r z + c under the flow; v' and x' stay linear in x
  const double alpha = 0.1, z0 = 0.3, x0 = 0.7, sl = 0.4, rz = 0.2, c = 0.1, h = 0.5;
  auto vx_image = [&](double a) {
    auto image = [&](double x) {
      return flow(r, {{"z", z0}, {"x", x}, {"v", sl * x + rz * z0 + c}, {"I", 1}, {"alpha", alpha}}, a, 1e-13);
    };
    Point p = image(x0 + h), m = image(x0 - h);
    return (p["v"] - m["v"]) / (p["x"] - m["x"]);
  };
  const double da = 1e-2;
  double d = (-vx_image(2 * da) + 8 * vx_image(da) - 8 * vx_image(-da) + vx_image(-2 * da)) / (12 * da);
  double want = eval(zeta, {{"alpha", alpha}, {"z", z0}, {"v_x", sl}});
  EXPECT_NEAR(d, want, 1e-8);
}

TEST(Prolong, Recursion) {
  std::vector<std::pair<ModelSystem, Generator>> cases{
      {hopf_system(), restricted_r3()},
      {hopf_system(), hopf_generators()[0]},
      {optics_system(1), parabolic_generator()},
      {vlasov_system(), plasma_generator()},
  };
  for (const auto& [sys, g] : cases) {
    auto pg = prolong(g, sys, 3);
    CanonicalGenerator cg = canonical(g, sys);
    for (const auto& j : jets_up_to(sys, 2)) {
      if (!pg.zeta.count(j)) continue;
      for (const auto& i : sys.independents) {
        if (!sys.depends(jet_base(j), i)) continue;
        Expr ji = prolong_jet(j, i);
        ASSERT_TRUE(pg.zeta.count(ji)) << to_string(ji);
        // zeta_{J,i} = D_i zeta_J - sum_k u_{J,k} D_i xi^k
        Expr rec = total_derivative(pg.zeta.at(j), i, sys);
        for (const auto& k : sys.independents)
          if (sys.depends(jet_base(j), k))
            rec -= prolong_jet(j, k) * total_derivative(g.coefficient(k), i, sys);
        EXPECT_TRUE(same(pg.zeta.at(ji), rec)) << g.name << " " << to_string(ji);
        // zeta_{J,i} = D_J D_i kappa + xi^k u_{J,i,k}
        Expr kap = cg.kappa.at(jet_base(j));
        for (const auto& d : jet_derivs(ji)) kap = total_derivative(kap, d, sys);
        for (const auto& k : sys.independents)
          if (sys.depends(jet_base(j), k)) kap += g.coefficient(k) * prolong_jet(ji, k);
        EXPECT_TRUE(same(pg.zeta.at(ji), kap)) << g.name << " " << to_string(ji);
      }
    }
  }
}

TEST(Canonical, Examples) {
  ModelSystem h = hopf_system();
  EXPECT_TRUE(same(canonical(r3_unit(), h).kappa.at("u"), h.parse("-z*u*u_x - u_eps")));
  EXPECT_TRUE(same(canonical(gen("X2", {{"x", "1"}}, {}, h), h).kappa.at("u"), h.parse("-u_x")));
  Generator already = gen("K", {}, {{"u", "1 + u_x - eps*z*u_x"}}, h);
  EXPECT_TRUE(same(canonical(already, h).kappa.at("u"), already.eta.at("u")));
}

TEST(Canonical, EquivalentToPointFormOnFrame) {
  std::mt19937_64 rng(3);
  std::vector<std::pair<ModelSystem, Generator>> cases{
      {hopf_system(), hopf_generators()[0]}, {hopf_system(), hopf_generators()[3]},
      {optics_system(1), parabolic_generator()}, {vlasov_system(), plasma_generator()}};
  for (const auto& [sys, g] : cases) {
    auto pg = prolong(g, sys, 2);
    CanonicalGenerator cg = canonical(g, sys);
    std::vector<Expr> atoms = jets_up_to(sys, 1);
    for (const auto& d : sys.dependents) atoms.push_back(symbol(d.name));
    for (const auto& i : sys.independents) atoms.push_back(symbol(i));
    std::uniform_int_distribution<std::size_t> pick(0, atoms.size() - 1);
    for (int k = 0; k < 10; ++k) {
      Expr f = atoms[pick(rng)] * atoms[pick(rng)] + atoms[pick(rng)] * atoms[pick(rng)] * atoms[pick(rng)];
      Expr rhs = apply(cg, f, sys);
      for (const auto& i : sys.independents) rhs += g.coefficient(i) * total_derivative(f, i, sys);
      EXPECT_TRUE(same(apply(pg, f), rhs)) << g.name << " on " << to_string(f);
    }
    for (const auto& eq : sys.equations) {
      InvarianceResult a = check_invariance(sys, g), b = check_invariance(sys, cg);
      EXPECT_EQ(a.invariant(), b.invariant()) << g.name << " " << to_string(eq);
    }
  }
}

TEST(Invariance, Examples) {
  ModelSystem h = hopf_system();
  for (const auto& g : hopf_generators()) {
    auto r = check_invariance(h, g);
    EXPECT_EQ(r.status, InvarianceResult::Status::SymbolicZero) << g.name;
    for (const auto& e : r.residuals) EXPECT_TRUE(e.is_zero());
  }
  EXPECT_EQ(check_invariance(optics_system(1), parabolic_generator()).status,
            InvarianceResult::Status::SymbolicZero);
  auto bad = check_invariance(h, gen("bad", {}, {{"u", "x"}}, h));
  EXPECT_EQ(bad.status, InvarianceResult::Status::NonZero);
  EXPECT_FALSE(bad.residuals.at(0).is_zero());
  EXPECT_GT(bad.max_numeric, 1e-3);
}

TEST(Invariance, NumericPrecheckAgreesWithSymbolicZero) {
  auto r = check_invariance(optics_system(1), parabolic_generator(), {100, 42, 0.3, 1.7, 1e-10});
  EXPECT_TRUE(r.invariant());
  EXPECT_LT(r.max_numeric, 1e-10);
}

TEST(SolveUnknown, Examples) {
  ModelSystem v = vlasov_system();
  EXPECT_TRUE(same(solve_unknown_coordinate(v, plasma_generator(), "E"), v.parse("-3*Omega^2*t*E")));

  ModelSystem h = hopf_system();
  EXPECT_TRUE(solve_unknown_coordinate(h, gen("Dz", {{"z", "1"}}, {}, h), "u").is_zero());

  ModelSystem o = optics_system(1);
  Generator r = parabolic_generator();
  r.eta.erase("I");
  EXPECT_TRUE(same(solve_unknown_coordinate(o, r, "I"), o.parse("4*alpha*I*z")));
}

TEST(SolveUnknown, DerivedFieldCoordinateKeepsPotentialForm) {
  // E = -phi_x; the derived coordinate must be compatible with the potential representation
  ModelSystem v = vlasov_system();
  Expr eta_e = solve_unknown_coordinate(v, plasma_generator(), "E");
  Expr ratio = simplify(eta_e / v.parse("E"));
  EXPECT_FALSE(depends_on(ratio, symbol("x")));
  EXPECT_FALSE(depends_on(ratio, symbol("E")));
}

TEST(SolveUnknown, InconsistentIsReported) {
  ModelSystem h = hopf_system();
  EXPECT_THROW(solve_unknown_coordinate(h, gen("bad", {{"x", "x^2"}}, {}, h), "u"), SolveError);
}

TEST(Determining, AdvectionTranslations) {
  ModelSystem s = advection_system(Rational(1));
  Ansatz a;
  a.degree = 0;
  auto r = determining_system(s, a);
  EXPECT_GE(r.dimension(), 2u);
  EXPECT_TRUE(express_in_basis(r, gen("Dz", {{"z", "1"}}, {}, s)).has_value());
  EXPECT_TRUE(express_in_basis(r, gen("Dx", {{"x", "1"}}, {}, s)).has_value());
  EXPECT_FALSE(express_in_basis(r, gen("bad", {}, {{"u", "x"}}, s)).has_value());
}

TEST(Determining, HopfBasisContainsTheFourGenerators) {
  ModelSystem h = hopf_system();
  Ansatz a;
  a.degree = 1;
  a.mode = Ansatz::Mode::PerVariable;
  a.coordinate_degree["xi_z"] = 0;
  auto r = determining_system(h, a);
  for (const auto& g : hopf_generators()) {
    auto c = express_in_basis(r, g);
    ASSERT_TRUE(c.has_value()) << g.name;
    Generator back{"back", {}, {}};
    for (std::size_t k = 0; k < r.basis.size(); ++k)
      for (const auto& v : r.basis[k].variables()) {
        Expr term = Expr((*c)[k]) * r.basis[k].coefficient(v);
        if (h.is_independent(v)) back.xi[v] = back.coefficient(v) + term;
        else back.eta[v] = back.coefficient(v) + term;
      }
    for (const auto& v : h.independents) EXPECT_TRUE(same(back.coefficient(v), g.coefficient(v))) << g.name;
    EXPECT_TRUE(same(back.coefficient("u"), g.coefficient("u"))) << g.name;
  }
  for (const auto& b : r.basis) EXPECT_TRUE(check_invariance(h, b).invariant()) << to_string(b.coefficient("x"));
}

TEST(Determining, PlaneOpticsBasisIsAdmitted) {
  ModelSystem s = optics_system(0);
  Ansatz a;
  a.degree = 2;
  a.parameters = {"alpha"};
  auto r = determining_system(s, a);
  ASSERT_GT(r.dimension(), 0u);
  for (const auto& b : r.basis) EXPECT_TRUE(check_invariance(s, b).invariant()) << b.name;
  Generator boost{"boost", {{"x", s.parse("z")}}, {{"v", Expr(1)}}};
  boost.eta["I"] = solve_unknown_coordinate(s, boost, "I");
  EXPECT_TRUE(boost.eta["I"].is_zero());
  EXPECT_TRUE(check_invariance(s, boost).invariant());
  EXPECT_TRUE(express_in_basis(r, boost).has_value());
  // the projective transformation survives only in the axisymmetric geometry
  Generator proj = parabolic_generator();
  proj.eta.erase("I");
  EXPECT_THROW(solve_unknown_coordinate(s, proj, "I"), SolveError);
  EXPECT_FALSE(express_in_basis(r, parabolic_generator()).has_value());
}

TEST(Restriction, HopfFamily) {
  HopfScenario hs;
  ModelSystem h = hopf_system();
  Restriction r = restrict_on_solution(h, hopf_family(), hopf_boundary(hs));
  ASSERT_EQ(r.generators.size(), 3u);
  EXPECT_TRUE(same(r.generators[0].coefficient("z"), Expr(1)));
  EXPECT_TRUE(same(r.generators[0].coefficient("x"), h.parse("eps*u")));
  EXPECT_TRUE(same(r.generators[2].coefficient("eps"), h.parse("eps")));
  EXPECT_TRUE(same(r.generators[2].coefficient("x"), h.parse("eps*u*z")));
  for (const auto& g : r.generators) EXPECT_TRUE(check_invariance(h, g).invariant()) << g.name;
}

TEST(Restriction, VanishingFamilyUnchanged) {
  HopfScenario hs;
  ModelSystem h = hopf_system();
  GeneratorFamily f;
  f.members = {hopf_generators()[0]};
  Restriction r = restrict_on_solution(h, f, hopf_boundary(hs));
  ASSERT_EQ(r.generators.size(), 1u);
  for (const auto& v : h.independents)
    EXPECT_TRUE(same(r.generators[0].coefficient(v), f.members[0].coefficient(v)));
}

TEST(Restriction, CanonicalGeneratorVanishesOnBoundary) {
  ModelSystem h = hopf_system();
  Expr kappa = h.parse("1 - u_x/Ux - eps*z*u_x");
  Expr on_bd = substitute(kappa, {{symbol("z"), Expr(0)}, {h.parse("u_x"), h.parse("Ux")}});
  EXPECT_TRUE(on_bd.is_zero());
}

TEST(Restriction, SoundOnExactSolutions) {
  // canonical coordinates of the restricted generators vanish on u(z, x) for several profiles
  for (const char* profile : {"-x", "-x - x^3/3", "-tanh(x)"}) {
    HopfScenario hs;
    hs.profile = parse(profile);
    hs.x_min = -1;
    hs.x_max = 1;
    hs.validate();
    auto r = restrict_on_solution(hopf_system(), hopf_family(), hopf_boundary(hs));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> Z(0, 2), X(-0.5, 0.5);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
      double z = Z(rng), x = X(rng);
      double u = hopf_exact(hs, z, x);
      double x0 = x - hs.eps * z * u;
      double den = hs.eps * z + 1 / hs.dU(x0);
      double ux = 1 / den, uz = -hs.eps * u / den, ue = -z * u / den;
      Point p{{"z", z}, {"x", x}, {"u", u}, {"eps", hs.eps}};
      for (const auto& g : r.generators) {
        double kap = eval(g.coefficient("u"), p) - eval(g.coefficient("z"), p) * uz -
                     eval(g.coefficient("x"), p) * ux - eval(g.coefficient("eps"), p) * ue;
        worst = std::max(worst, std::abs(kap));
      }
    }
    EXPECT_LT(worst, 1e-9) << profile;
  }
}

TEST(FunctionalProlongation, HopfR4) {
  ModelSystem h = hopf_system();
  Generator r3 = scaled(restricted_r3(), parse("1/eps"), "R4");
  auto fg = prolong_to_functional(h, r3, hopf_functionals(), hopf_context());
  ASSERT_TRUE(fg.closed());
  ASSERT_TRUE(fg.point.has_value());
  Generator want = hopf_functional_generator();
  for (const auto& v : {"z", "eps", "u0x"}) EXPECT_TRUE(same(fg.point->coefficient(v), want.coefficient(v))) << v;
}

TEST(FunctionalProlongation, ParabolicBeam) {
  auto fg = prolong_to_functional(optics_system(1), parabolic_generator(), optics_functionals(), optics_context());
  ASSERT_TRUE(fg.closed());
  ASSERT_TRUE(fg.point.has_value());
  Generator want = parabolic_functional_generator();
  for (const auto& v : {"z", "I0", "W0"}) EXPECT_TRUE(same(fg.point->coefficient(v), want.coefficient(v))) << v;
}

TEST(FunctionalProlongation, ZeroGenerator) {
  Generator zero{"0", {}, {}};
  auto fg = prolong_to_functional(optics_system(1), zero, optics_functionals(), optics_context());
  ASSERT_TRUE(fg.closed());
  for (const auto& [k, v] : fg.canonical.kappa) EXPECT_TRUE(simplify(v).is_zero()) << k;
}

TEST(FunctionalProlongation, ForeignJetsAreReported) {
  ModelSystem s = optics_system(0);
  CanonicalGenerator g{"g", {{"v", s.parse("v_xx")}, {"I", Expr(0)}}};
  auto fg = prolong_to_functional(s, g, optics_functionals(), optics_context());
  EXPECT_FALSE(fg.closed());
}

TEST(FunctionalProlongation, AgreesWithFlowOfExactSolutions) {
  // R3 maps the solution for eps onto the solution for eps e^a; the prolonged
  // coordinate must match d/da of the axis slope
  Generator r4 = hopf_functional_generator();
  for (double eps : {0.05, 0.1, 0.2})
    for (double z : {0.5, 2.0, 4.0}) {
      auto slope = [&](double a) {
        HopfScenario hs;
        hs.eps = eps * std::exp(a);
        return hopf_axis_slope(hs, z, 1e-3);
      };
      const double a = 1e-3;
      double d = (8 * (slope(a) - slope(-a)) - (slope(2 * a) - slope(-2 * a))) / (12 * a);
      double u0x = slope(0);
      double want = eps * eval(r4.coefficient("u0x"), {{"z", z}, {"u0x", u0x}, {"eps", eps}});
      EXPECT_NEAR(d, want, 1e-6 * std::max(1.0, std::abs(want))) << eps << " " << z;
    }
}

TEST(VerifyInvariant, Examples) {
  EXPECT_TRUE(verify_invariant(hopf_functional_generator(), hopf_invariant()).is_zero());
  Generator r = parabolic_functional_generator();
  for (const auto& j : parabolic_invariants()) EXPECT_TRUE(verify_invariant(r, j).is_zero()) << to_string(j);
  for (const auto& j : plasma_invariants())
    EXPECT_TRUE(verify_invariant(plasma_generator(), j).is_zero()) << to_string(j);
  EXPECT_TRUE(verify_invariant(plasma_density_generator(), plasma_density_invariant()).is_zero());
  EXPECT_FALSE(verify_invariant(r, parse("I0")).is_zero());
}

TEST(Flow, Examples) {
  Point p{{"z", 0.7}, {"x", -0.3}, {"eps", 0.1}, {"u", 1.2}};
  const double a = 0.37;
  Point q = flow(r3_unit(), p, a);
  EXPECT_NEAR(q["z"], 0.7, 1e-10);
  EXPECT_NEAR(q["x"], -0.3 + a * 0.7 * 1.2, 1e-10);
  EXPECT_NEAR(q["eps"], 0.1 + a, 1e-10);
  EXPECT_NEAR(q["u"], 1.2, 1e-10);
  EXPECT_EQ(flow(r3_unit(), p, 0.0), p);
}

TEST(Flow, GroupLaw) {
  std::vector<std::pair<Generator, Point>> cases{{restricted_r3(), {}},
                                                 {hopf_functional_generator(), {}},
                                                 {parabolic_generator(), {{"alpha", 0.1}}},
                                                 {parabolic_functional_generator(), {{"alpha", 0.1}}},
                                                 {plasma_generator(), {{"Omega", 0.8}}},
                                                 {plasma_density_generator(), {{"Omega", 0.8}}}};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.3, 1.7), A(-0.25, 0.25);
  for (const auto& [g, fixed] : cases) {
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
      Point p = fixed;
      for (const auto& v : g.variables()) p.try_emplace(v, U(rng));
      for (const auto& v : g.variables())
        for (const auto& s : variables(g.coefficient(v))) p.try_emplace(to_string(s), U(rng));
      double a = A(rng), b = A(rng);
      Point q1 = flow(g, flow(g, p, a), b), q2 = flow(g, p, a + b);
      for (const auto& [n, x] : q2) worst = std::max(worst, std::abs(q1.at(n) - x));
    }
    EXPECT_LT(worst, 1e-8) << g.name;
  }
}

TEST(Flow, TangentMatchesGenerator) {
  Generator g = parabolic_generator();
  Point p{{"z", 0.4}, {"x", 0.9}, {"v", -0.2}, {"I", 1.3}, {"alpha", 0.1}};
  auto err = [&](double a) {
    Point q = flow(g, p, a, 1e-14);
    double e = 0;
    for (const auto& v : g.variables()) e = std::max(e, std::abs((q[v] - p[v]) / a - eval(g.coefficient(v), p)));
    return e;
  };
  double ratio = err(1e-4) / err(1e-5);
  EXPECT_GT(ratio, 8);
  EXPECT_LT(ratio, 12);
}

TEST(Flow, SingularityIsReported) {
  Generator g{"blow", {{"z", parse("z^2")}}, {}};
  EXPECT_THROW(flow(g, {{"z", 1.0}}, 2.0), Error);
}

TEST(InvariantSolution, ParabolicBeam) {
  auto inv = parabolic_invariants();
  std::vector<InvariantRelation> rel{{inv[0], "I0", [](const Point&) { return 1.0; }},
                                     {inv[1], "W0", [](const Point&) { return 0.0; }}};
  const double alpha = 0.1;
  auto sol = invariant_solution(rel, "z", 0, {{"alpha", alpha}}, {{"I0", 1}, {"W0", 0}});
  for (double z : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    auto p = sol.at(z);
    double d = 1 - 2 * alpha * z * z;
    EXPECT_NEAR(p.at("I0"), 1 / d, 1e-12);
    EXPECT_NEAR(p.at("W0"), -2 * alpha * z / d, 1e-12);
  }
}

TEST(InvariantSolution, HopfSlope) {
  InvariantRelation rel{hopf_invariant(), "u0x", [](const Point&) { return 1.0; }};
  auto sol = invariant_solution({rel}, "z", 0, {{"eps", 0.1}}, {{"u0x", -1}});
  for (double z : {0.0, 3.0, 6.0, 9.0}) EXPECT_NEAR(sol.at(z).at("u0x"), -1 / (1 - 0.1 * z), 1e-10);
}

TEST(InvariantSolution, PlasmaDensity) {
  const double N = 0.37, W = 0.8;
  InvariantRelation rel{plasma_density_invariant(), "n", [=](const Point&) { return N; }};
  auto sol = invariant_solution({rel}, "t", 0, {{"Omega", W}}, {{"n", N}});
  for (double t : {0.0, 1.0, 10.0}) EXPECT_NEAR(sol.at(t).at("n"), N / std::sqrt(1 + W * W * t * t), 1e-12);
}
