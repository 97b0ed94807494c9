#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>

#include "rgsym/errors.hpp"
#include "rgsym/solvers.hpp"

namespace rgsym::cli {

Suite parse_suite(const std::string& s) {
  if (s == "symbolic") return Suite::Symbolic;
  if (s == "numeric") return Suite::Numeric;
  if (s == "all") return Suite::All;
  throw ConfigError("unknown suite '" + s + "' (symbolic, numeric or all)");
}

std::string_view suite_name(Suite s) {
  switch (s) {
    case Suite::Symbolic: return "symbolic";
    case Suite::Numeric: return "numeric";
    case Suite::All: return "all";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Battery {
 public:
  Battery(const Scenario& sc, Suite suite) : sc_(sc), suite_(suite) {}

  void symbolic(std::string name, double tol, std::function<Outcome()> f) {
    add(std::move(name), "symbolic", tol, std::move(f));
  }
  void numeric(std::string name, double tol, std::function<Outcome()> f) {
    add(std::move(name), "numeric", tol, std::move(f));
  }
  std::vector<Check> take() { return std::move(out_); }

 private:
  void add(std::string name, std::string kind, double tol, std::function<Outcome()> f) {
    if (suite_ == Suite::Symbolic && kind != "symbolic") return;
    if (suite_ == Suite::Numeric && kind != "numeric") return;
    double t = sc_.tol.get(name, tol);
    out_.push_back({std::move(name), std::move(kind), t, std::move(f)});
  }

  const Scenario& sc_;
  Suite suite_;
  std::vector<Check> out_;
};

std::string str(const Expr& e) { return to_string(e); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Outcome invariance_outcome(const InvarianceResult& r) {
  std::string d(status_name(r.status));
  if (r.status == InvarianceResult::Status::SymbolicZero) return {0, d};
  for (const auto& e : r.residuals)
    if (!is_zero(e)) {
      d += ": " + str(e);
      break;
    }
  return {r.max_numeric > 0 ? r.max_numeric : 1, d};
}

Outcome literal_zero(const Expr& e) {
  Expr s = simplify(e);
  if (is_zero(s)) return {0, "0"};
  return {1, str(s)};
}

Outcome same_generator(const Generator& a, const Generator& b) {
  std::vector<std::string> vars = a.variables();
  for (const auto& v : b.variables())
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  int bad = 0;
  std::string detail;
  for (const auto& v : vars) {
    Expr d = simplify(a.coefficient(v) - b.coefficient(v));
    if (!is_zero(d)) {
      ++bad;
      detail += (detail.empty() ? "" : "; ") + v + ": " + str(a.coefficient(v)) + " vs " + str(b.coefficient(v));
    }
  }
  return {double(bad), bad ? detail : "coordinate-wise equal"};
}

Generator point_form(const FunctionalGenerator& fg) {
  if (!fg.closed()) {
    std::string f;
    for (const auto& e : fg.foreign) f += " " + str(e);
    throw ReductionError("functional prolongation left foreign jets:" + f);
  }
  if (!fg.point) throw ReductionError("functional generator has no point form");
  return *fg.point;
}

// max |flow(flow(p, a), b) - flow(p, a + b)| over random points
Outcome group_law(const std::vector<Generator>& gens, const Point& fixed, double lo, double hi, int samples,
                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi), A(-0.25, 0.25);
  double worst = 0;
  std::string where;
  for (const auto& g : gens) {
    for (int k = 0; k < samples; ++k) {
      Point p = fixed;
      for (const auto& v : g.variables())
        if (!fixed.count(v)) p[v] = U(rng);
      for (const auto& c : g.variables())
        for (const auto& s : variables(g.coefficient(c)))
          if (!p.count(str(s))) p[str(s)] = U(rng);
      double a = A(rng), b = A(rng);
      Point q1 = flow(g, flow(g, p, a), b);
      Point q2 = flow(g, p, a + b);
      for (const auto& [k2, v] : q2) {
        double d = std::abs(q1.at(k2) - v);
        if (!(d <= worst)) {
          worst = d;
          where = g.name;
        }
      }
    }
  }
  return {worst, "worst generator " + where};
}

Bindings sample_point(const std::vector<Expr>& vars, std::mt19937_64& rng, const Point& fixed) {
  std::uniform_real_distribution<double> U(0.3, 1.7);
  Bindings b;
  for (const auto& v : vars) {
    auto it = fixed.find(str(v));
    b[v] = it != fixed.end() ? it->second : U(rng);
  }
  return b;
}

std::vector<Expr> union_vars(std::initializer_list<Expr> es) {
  std::vector<Expr> out;
  for (const auto& e : es)
    for (const auto& v : variables(e))
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

Outcome numeric_agreement(const Expr& a, const Expr& b, int points, std::uint64_t seed, const Point& fixed = {}) {
  std::mt19937_64 rng(seed);
  auto vars = union_vars({a, b});
  double worst = 0;
  for (int k = 0; k < points; ++k) {
    Bindings p = sample_point(vars, rng, fixed);
    double x = eval(a, p), y = eval(b, p);
    double d = std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)});
    if (!(d <= worst)) worst = d;
  }
  return {worst, std::to_string(points) + " random jet points"};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

void detq_checks(Battery& b, const Scenario& sc, const ModelSystem& sys, std::vector<Generator> expected) {
  const DetqSpec& d = sc.detq;
  if (d.expected_dimension < 0) return;
  Ansatz a;
  a.degree = d.degree;
  a.mode = d.mode;
  a.coordinate_degree = d.coordinate_degree;
  a.parameters = d.parameters;
  a.parameter_degree = d.parameter_degree;
  auto result = std::make_shared<std::optional<DeterminingResult>>();
  auto mtx = std::make_shared<std::mutex>();
  auto get = [=] {
    std::lock_guard lock(*mtx);
    if (!*result) *result = determining_system(sys, a);
    return **result;
  };
  b.symbolic("detq.dimension", 0, [=] {
    auto r = get();
    return Outcome{std::abs(double(r.dimension()) - d.expected_dimension),
                   "dimension " + std::to_string(r.dimension()) + ", declared " +
                       std::to_string(d.expected_dimension)};
  });
  b.symbolic("detq.membership", 0, [=] {
    auto r = get();
    int missing = 0;
    std::string detail;
    for (const auto& g : expected) {
      bool in = express_in_basis(r, g).has_value();
      missing += in ? 0 : 1;
      detail += (detail.empty() ? "" : ", ") + g.name + (in ? " in span" : " missing");
    }
    return Outcome{double(missing), detail};
  });
}

// ---------------------------------------------------------------------------
// Hopf

void hopf_checks(Battery& b, const Scenario& sc) {
  const HopfScenario h = *sc.hopf;
  const ModelSystem sys = hopf_system();

  for (const auto& g : hopf_generators())
    b.symbolic("invariance." + g.name, 0, [=] { return invariance_outcome(check_invariance(sys, g)); });

  auto restricted = [=] { return restrict_on_solution(sys, hopf_family(), hopf_boundary(h, false)); };
  b.symbolic("restriction.R1", 0, [=] {
    Generator want{"R1", {{"z", Expr(1)}, {"x", parse("eps*u")}}, {}};
    return same_generator(restricted().generators.at(0), want);
  });
  b.symbolic("restriction.R3", 0, [=] {
    Generator want{"R3", {{"eps", parse("eps")}, {"x", parse("eps*u*z")}}, {}};
    return same_generator(restricted().generators.at(2), want);
  });
  b.symbolic("restriction.invariance", 0, [=] {
    double worst = 0;
    std::string d;
    for (const auto& g : restricted().generators) {
      auto o = invariance_outcome(check_invariance(sys, g));
      worst = std::max(worst, o.residual);
      d += (d.empty() ? "" : ", ") + g.name + " " + o.detail;
    }
    return Outcome{worst, d};
  });
  auto functional = [=] {
    Generator r3 = scaled(restricted().generators.at(2), parse("1/eps"), "R4");
    return point_form(prolong_to_functional(sys, r3, hopf_functionals(), hopf_context()));
  };
  b.symbolic("functional.R4", 0, [=] { return same_generator(functional(), hopf_functional_generator()); });
  b.symbolic("invariant.J0", 0, [=] { return literal_zero(verify_invariant(functional(), hopf_invariant())); });
  detq_checks(b, sc, sys, hopf_generators());

  const double zc = hopf_crossing_distance(h);
  const double zmax = std::isfinite(zc) ? 0.9 * zc : 10.0;
  b.numeric("characteristics.closed_form", 1e-8, [=] {
    auto xs = linspace(h.x_min, h.x_max, 41);
    double worst = 0;
    for (double z : linspace(0, zmax, 10)) {
      auto u = hopf_characteristics(h, z, xs);
      for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, std::abs(u[i] - hopf_exact(h, z, xs[i])));
    }
    return Outcome{worst, "z in [0, " + fmt(zmax) + "]"};
  });
  const double slope0 = h.dU(0);
  b.numeric("axis.slope", 1e-6, [=] {
    if (slope0 == 0) return Outcome{0, "flat profile at the axis"};
    InvariantRelation rel{hopf_invariant(), "u0x", [=](const Point&) { return -1 / slope0; }};
    auto sol = invariant_solution({rel}, "z", 0, {{"eps", h.eps}}, {{"u0x", slope0}});
    double worst = 0;
    for (double z : linspace(0, zmax, 12)) {
      double a = hopf_axis_slope(h, z);
      double r = sol.at(z).at("u0x");
      worst = std::max(worst, std::abs(a - r) / std::max(1.0, std::abs(r)));
    }
    return Outcome{worst, "characteristics vs invariant J0"};
  });
  b.numeric("axis.singularity", 1e-6, [=] {
    double z_axis = h.eps * slope0 < 0 ? -1 / (h.eps * slope0) : kInf;
    double d = (std::isinf(zc) && std::isinf(z_axis)) ? 0 : std::abs(zc - z_axis);
    return Outcome{d, "crossing " + fmt(zc) + ", axis blow-up " + fmt(z_axis)};
  });
  b.numeric("restriction.soundness", 1e-9, [=] {
    auto gens = restricted().generators;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> Z(0, zmax), X(0.5 * h.x_min, 0.5 * h.x_max);
    double worst = 0;
    for (int k = 0; k < 200; ++k) {
      double z = Z(rng), x = X(rng);
      double u = hopf_exact(h, z, x);
      double x0 = x - h.eps * z * u;
      double den = h.eps * z + 1 / h.dU(x0);
      double ux = 1 / den, uz = -h.eps * u / den, ue = -z * u / den;
      Point p{{"z", z}, {"x", x}, {"u", u}, {"eps", h.eps}};
      for (const auto& g : gens) {
        double kappa = eval(g.coefficient("u"), p) - eval(g.coefficient("z"), p) * uz -
                       eval(g.coefficient("x"), p) * ux - eval(g.coefficient("eps"), p) * ue;
        worst = std::max(worst, std::abs(kappa));
      }
    }
    return Outcome{worst, "canonical coordinates on the exact solution"};
  });
  b.numeric("flow.group_law", 1e-8, [=] {
    auto gens = restricted().generators;
    gens.push_back(hopf_functional_generator());
    return group_law(gens, {}, 0.3, 1.7, 50, 11);
  });
  b.numeric("flow.orbit", 1e-8, [=] {
    Generator r3 = restricted().generators.at(2);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.3, 1.7), A(-1, 1);
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
      Point p{{"z", U(rng)}, {"x", U(rng)}, {"u", U(rng)}, {"eps", U(rng)}};
      double a = A(rng);
      Point q = flow(r3, p, a);
      double e = p["eps"] * std::exp(a);
      double x = p["x"] + p["u"] * p["z"] * (e - p["eps"]);
      worst = std::max({worst, std::abs(q["eps"] - e), std::abs(q["x"] - x), std::abs(q["u"] - p["u"]),
                        std::abs(q["z"] - p["z"])});
    }
    return Outcome{worst, "flow of R3 vs its closed-form orbit"};
  });
}

// ---------------------------------------------------------------------------
// optics

void optics_checks(Battery& b, const Scenario& sc) {
  const OpticsScenario o = *sc.optics;
  const ModelSystem sys = optics_system(o.nu);
  const bool parabolic = o.profile == OpticsScenario::Profile::Parabolic;
  const double alpha = o.alpha;

  if (o.nu == 1) {
    b.symbolic("invariance.Rpar", 0, [=] { return invariance_outcome(check_invariance(sys, parabolic_generator())); });
    auto functional = [=] {
      return point_form(prolong_to_functional(sys, parabolic_generator(), optics_functionals(), optics_context()));
    };
    b.symbolic("functional.R4par", 0, [=] { return same_generator(functional(), parabolic_functional_generator()); });
    auto inv = parabolic_invariants();
    b.symbolic("invariant.J1", 0, [=] { return literal_zero(verify_invariant(functional(), inv[0])); });
    b.symbolic("invariant.J2", 0, [=] { return literal_zero(verify_invariant(functional(), inv[1])); });
  } else {
    auto soliton = [=] {
      FunctionalContext ctx = optics_context();
      ctx.relations = derive_axis_relations(sys, soliton_axis_specs(), optics_functionals(), ctx);
      auto fg = prolong_to_functional(sys, soliton_generator(), optics_functionals(), ctx);
      if (!fg.closed()) throw ReductionError("soliton functional prolongation did not close");
      return std::make_pair(fg, ctx);
    };
    b.symbolic("functional.soliton.I0", 1e-10, [=] {
      auto [fg, ctx] = soliton();
      return numeric_agreement(fg.canonical.kappa.at("I0"), soliton_functional_kappa().at("I0"), 100, 3);
    });
    b.symbolic("functional.soliton.W0", 1e-10, [=] {
      auto [fg, ctx] = soliton();
      ModelSystem red = reduced_system(optics_functionals(), ctx);
      Expr k = fg.canonical.kappa.at("I0");
      Expr I0 = symbol("I0"), I0z = red.parse("I0_z");
      Expr oracle = -total_derivative(k, "z", red) / I0 + I0z * k / (I0 * I0);
      return numeric_agreement(fg.canonical.kappa.at("W0"), oracle, 100, 4);
    });
  }
  {
    std::vector<Generator> expect;
    if (o.nu == 1) expect.push_back(parabolic_generator());
    expect.push_back({"Dz", {{"z", Expr(1)}}, {}});
    detq_checks(b, sc, sys, expect);
  }

  const double zs = o.z_sing();
  const double zmax = std::isfinite(zs) ? 0.8 * zs : 1.0;
  b.numeric("fig2.endpoints", 1e-12, [=] {
    auto rows = fig2_data(0.1, 200, 0.995);
    const auto& r0 = rows.front();
    OpticsScenario p;
    p.alpha = 0.1;
    double half = optics_axis_closed_form(p, 0.5 * p.z_sing()).I0;
    double d = std::max({std::abs(r0.z_over_zsing), std::abs(r0.I0_par - 1), std::abs(r0.W0_par),
                         std::abs(r0.I0_sol - 1), std::abs(r0.W0_sol), std::abs(half - 4.0 / 3.0),
                         std::abs(rows.back().z_over_zsing - 0.995)});
    return Outcome{d, std::to_string(rows.size()) + " rows"};
  });

  if (parabolic && o.nu == 1) {
    auto study = std::make_shared<std::optional<GridStudy>>();
    auto mtx = std::make_shared<std::mutex>();
    auto get = [=] {
      std::lock_guard lock(*mtx);
      if (!*study) {
        int n = o.nodes;
        *study = optics_grid_study(o, zmax, {(n - 1) / 4 + 1, (n - 1) / 2 + 1, n});
      }
      return **study;
    };
    b.numeric("grid.axis_intensity", 1e-3, [=] {
      auto s = get();
      return Outcome{s.error.back(), "N=" + std::to_string(s.nodes.back()) + " at z=" + fmt(zmax)};
    });
    b.numeric("grid.order", 0, [=] {
      auto s = get();
      double p = *std::min_element(s.order.begin(), s.order.end());
      std::string d = "observed orders";
      for (double q : s.order) d += " " + fmt(q);
      return Outcome{std::max(0.0, 1.5 - p), d};
    });
    b.numeric("grid.cfl", 0.9, [=] {
      auto s = get();
      double c = 0;
      for (const auto& r : s.runs) c = std::max(c, r.max_cfl);
      return Outcome{c, "largest accepted CFL number"};
    });
    b.numeric("axis.invariants", 1e-10, [=] {
      auto inv = parabolic_invariants();
      std::vector<InvariantRelation> rel{{inv[0], "I0", [](const Point&) { return 1.0; }},
                                         {inv[1], "W0", [](const Point&) { return 0.0; }}};
      auto sol = invariant_solution(rel, "z", 0, {{"alpha", alpha}}, {{"I0", 1}, {"W0", 0}});
      double worst = 0;
      for (double z : linspace(0, zmax, 20)) {
        auto p = sol.at(z);
        auto c = optics_axis_closed_form(o, z);
        worst = std::max({worst, std::abs(p.at("I0") - c.I0) / c.I0, std::abs(p.at("W0") - c.W0)});
      }
      return Outcome{worst, "continuation from z=0"};
    });
    b.numeric("flow.group_law", 1e-8, [=] {
      return group_law({parabolic_generator(), parabolic_functional_generator()}, {{"alpha", alpha}}, 0.3, 1.7, 50,
                       13);
    });
  }
  if (!parabolic && o.nu == 0 && alpha > 0) {
    auto axis = std::make_shared<std::optional<SolitonAxis>>();
    auto mtx = std::make_shared<std::mutex>();
    auto get = [=] {
      std::lock_guard lock(*mtx);
      if (!*axis) *axis = soliton_axis_ode(o);
      return **axis;
    };
    b.numeric("axis_ode.relation", 1e-6, [=] { return Outcome{get().max_relation_residual, "implicit relation"}; });
    b.numeric("axis_ode.blowup_z", 1e-3, [=] {
      auto a = get();
      if (!a.blowup_detected) return Outcome{kInf, "no blow-up detected"};
      return Outcome{std::abs(a.z_blowup - zs) / zs, "z_blowup " + fmt(a.z_blowup)};
    });
    b.numeric("axis_ode.blowup_I", 1e-3, [=] {
      auto a = get();
      if (!a.blowup_detected) return Outcome{kInf, "no blow-up detected"};
      return Outcome{std::abs(a.I_blowup - 2), "I_blowup " + fmt(a.I_blowup)};
    });
    b.numeric("grid.soliton_axis", 1e-3, [=] {
      // two-level Richardson value on coarse grids
      int n = o.nodes;
      auto st = optics_grid_study(o, zmax, {(n - 1) / 2 + 1, n});
      double a = st.runs[0].I0.back(), c = st.runs[1].I0.back();
      double rich = c + (c - a) / 3;
      double ref = optics_axis_closed_form(o, zmax).I0;
      return Outcome{std::abs(rich - ref) / ref, "N=" + std::to_string(n) + " errors " + fmt(st.error[0]) + ", " +
                                                     fmt(st.error[1]) + ", observed order " + fmt(st.order[0])};
    });
  }
}

// ---------------------------------------------------------------------------
// plasma

Generator plasma_full_generator() {
  Generator g = plasma_generator();
  g.eta["E"] = solve_unknown_coordinate(vlasov_system(), g, "E");
  return g;
}

void plasma_checks(Battery& b, const Scenario& sc) {
  const PlasmaScenario ps = *sc.plasma;
  const ModelSystem sys = vlasov_system();

  b.symbolic("coordinate.eta_E", 0, [=] {
    Expr e = solve_unknown_coordinate(sys, plasma_generator(), "E");
    auto o = literal_zero(e - parse("-3*Omega^2*t*E"));
    o.detail = "eta^E = " + str(e);
    return o;
  });
  b.symbolic("invariance.R6", 0, [=] { return invariance_outcome(check_invariance(sys, plasma_full_generator())); });
  auto functional = [=] {
    return point_form(prolong_to_functional(sys, plasma_full_generator(), plasma_functionals(), plasma_context()));
  };
  b.symbolic("functional.R7", 0, [=] { return same_generator(functional(), plasma_density_generator()); });
  auto inv = plasma_invariants();
  b.symbolic("invariant.J3", 0, [=] { return literal_zero(verify_invariant(plasma_full_generator(), inv[0])); });
  b.symbolic("invariant.J4", 0, [=] { return literal_zero(verify_invariant(plasma_full_generator(), inv[1])); });
  b.symbolic("invariant.density", 0,
             [=] { return literal_zero(verify_invariant(functional(), plasma_density_invariant())); });
  detq_checks(b, sc, sys, {plasma_full_generator()});

  auto model = std::make_shared<const PlasmaModel>(ps);
  const double W = model->omega();
  const double nc0 = ps.nc0();

  b.numeric("vlasov.residual", 1e-6, [=] {
    const auto& comp = model->components();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> T(0, 3 / W), X(-2 * ps.L0, 2 * ps.L0), G(-2, 2);
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
      std::size_t c = k % comp.size();
      double t = T(rng), x = X(rng);
      double s = 1 + W * W * t * t;
      double v = W * W * t * x / s + G(rng) * std::sqrt(comp[c].T / comp[c].mass / s);
      auto f = [&](double tt, double xx, double vv) { return model->distribution(c, tt, xx, vv); };
      auto d5 = [](auto g, double h) { return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h); };
      double ht = 1e-3 / W, hx = 1e-3 * ps.L0, hv = 1e-3 * std::sqrt(comp[c].T / comp[c].mass / s);
      double ft = d5([&](double e) { return f(t + e, x, v); }, ht);
      double fx = d5([&](double e) { return f(t, x + e, v); }, hx);
      double fv = d5([&](double e) { return f(t, x, v + e); }, hv);
      double force = comp[c].charge / comp[c].mass * model->electric_field(t, x) * fv;
      double scale = std::abs(ft) + std::abs(v * fx) + std::abs(force);
      if (scale == 0) continue;
      worst = std::max(worst, std::abs(ft + v * fx + force) / scale);
    }
    return Outcome{worst, "1000 points over all components"};
  });
  auto qn = [=](bool current) {
    double worst = 0;
    for (double wt : {0.0, 1.0, 10.0})
      for (double chi : {0.0, 0.3, 1.0, 2.0}) {
        double t = wt / W, x = chi * ps.L0 * std::sqrt(1 + wt * wt);
        double sum = 0;
        for (std::size_t c = 0; c < model->components().size(); ++c)
          sum += model->components()[c].charge *
                 (current ? model->current_quadrature(c, t, x) : model->density_quadrature(c, t, x));
        worst = std::max(worst, std::abs(sum) / nc0);
      }
    return worst;
  };
  b.numeric("quasineutrality.charge", 1e-10, [=] { return Outcome{qn(false), "sum of charge densities / n_c0"}; });
  b.numeric("quasineutrality.current", 1e-10, [=] { return Outcome{qn(true), "sum of currents / n_c0"}; });
  b.numeric("density.closed_form", 1e-8, [=] {
    double worst = 0;
    for (std::size_t q = 0; q < ps.species.size(); ++q)
      for (double wt : {0.0, 1.0, 10.0})
        for (double chi : {0.0, 0.5, 1.5}) {
          double t = wt / W, x = chi * std::sqrt(1 + wt * wt);
          double a = model->density(q, t, x), c = model->density_quadrature(q, t, x);
          worst = std::max(worst, std::abs(a - c) / std::max(a, 1e-300));
        }
    return Outcome{worst, "closed form vs velocity quadrature"};
  });
  b.numeric("self_similar.collapse", 1e-8, [=] {
    double worst = 0;
    for (std::size_t q = 0; q < ps.species.size(); ++q)
      for (double chi : {0.0, 0.25, 0.5, 1.0, 1.5}) {
        double ref = 0;
        for (double wt : {0.0, 1.0, 10.0, 100.0}) {
          double s = std::sqrt(1 + wt * wt);
          double n = model->density_quadrature(q, wt / W, chi * s) * s;
          if (wt == 0) ref = n;
          else worst = std::max(worst, std::abs(n - ref) / ref);
        }
      }
    return Outcome{worst, "n sqrt(1 + Omega^2 t^2) at fixed chi"};
  });
  b.numeric("spectrum.asymptote", 0.02, [=] {
    const double wt = 300;
    double worst = 0;
    std::string at;
    for (std::size_t q = 0; q < ps.species.size(); ++q) {
      const auto& k = model->components()[q];
      double e_lo = 10 * k.T / (2 * wt * wt);
      double e_hi = e_lo;
      while (model->universal_density(q, std::sqrt(2 * e_hi / k.mass) / W) > 1e-8 && e_hi < 1e6) e_hi *= 1.5;
      for (double le : linspace(std::log(e_lo), std::log(e_hi), 25)) {
        double e = std::exp(le);
        double a = model->spectrum(q, wt / W, e), r = model->spectrum_asymptote(q, e);
        double d = std::abs(a - r) / r;
        if (d > worst) {
          worst = d;
          at = k.name + " at energy " + fmt(e);
        }
      }
    }
    return Outcome{worst, "worst " + at};
  });
  b.numeric("fig3.shape", 0, [=] {
    auto rows = fig3_data(*model);
    int bad = 0;
    std::string d;
    for (const auto& r : rows)
      if (!(r.N_carbon > 0 && r.n_cold > 0 && r.n_hot > 0 && (ps.species.size() < 2 || r.N_proton > 0))) {
        ++bad;
        d += " non-positive row at chi^2=" + fmt(r.chi_squared) + ";";
        break;
      }
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].N_carbon > rows[i - 1].N_carbon) {
        ++bad;
        d += " N_carbon increases at chi^2=" + fmt(rows[i].chi_squared) + ";";
        break;
      }
    if (ps.species.size() > 1) {
      auto fall = [&](auto col) {
        double n0 = col(rows.front());
        for (const auto& r : rows)
          if (col(r) < 1e-2 * n0) return r.chi_squared;
        return kInf;
      };
      double fc = fall([](const Fig3Row& r) { return r.N_carbon; });
      double fp = fall([](const Fig3Row& r) { return r.N_proton; });
      if (!(fc < fp)) {
        ++bad;
        d += " heavy species cutoff not steeper;";
      }
      d += " 1% level at chi^2 " + fmt(fc) + " (carbon) vs " + fmt(fp) + " (proton)";
    }
    return Outcome{double(bad), d};
  });
  b.numeric("flow.group_law", 1e-8, [=] {
    return group_law({plasma_full_generator(), plasma_density_generator()}, {{"Omega", W}}, 0.3, 1.7, 50, 19);
  });
}

// ---------------------------------------------------------------------------
// advection

void advection_checks(Battery& b, const Scenario& sc) {
  Rational c(sc.detq.advection_speed);
  ModelSystem sys = advection_system(c);
  std::vector<Generator> tr{{"Dz", {{"z", Expr(1)}}, {}}, {"Dx", {{"x", Expr(1)}}, {}}, {"Du", {}, {{"u", Expr(1)}}}};
  for (const auto& g : tr)
    b.symbolic("invariance." + g.name, 0, [=] { return invariance_outcome(check_invariance(sys, g)); });
  detq_checks(b, sc, sys, tr);
}

}  // namespace

std::vector<Check> build_checks(const Scenario& sc, Suite suite) {
  Battery b(sc, suite);
  if (sc.kind == "hopf") hopf_checks(b, sc);
  else if (sc.kind == "optics") optics_checks(b, sc);
  else if (sc.kind == "plasma") plasma_checks(b, sc);
  else if (sc.kind == "advection") advection_checks(b, sc);
  else throw ConfigError("unknown scenario kind " + sc.kind);
  return b.take();
}

std::map<std::string, std::string> scenario_notes(const Scenario& sc) {
  std::map<std::string, std::string> n;
  n["kind"] = sc.kind;
  if (sc.kind == "plasma") {
    n["eta_E"] = str(solve_unknown_coordinate(vlasov_system(), plasma_generator(), "E"));
    n["Omega"] = fmt(sc.plasma->omega());
    n["n_c0"] = fmt(sc.plasma->nc0());
  } else if (sc.kind == "optics") {
    n["z_sing"] = fmt(sc.optics->z_sing());
  } else if (sc.kind == "hopf") {
    n["crossing_distance"] = fmt(hopf_crossing_distance(*sc.hopf));
  }
  return n;
}

}  // namespace rgsym::cli
