#include "rgsym/scenarios.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rgsym/numerics.hpp"

namespace rgsym {

double Tolerances::get(const std::string& key, double fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

// ---------------------------------------------------------------------------
// Hopf

double HopfScenario::U(double x) const { return eval(profile, {{"x", x}}); }

double HopfScenario::dU(double x) const { return eval(diff(profile, symbol("x")), {{"x", x}}); }

double HopfScenario::H(double u) const {
  auto g = [&](double x) { return U(x) - u; };
  double a = x_min, b = x_max;
  if (!numeric::expand_bracket(g, a, b, 40)) throw SolveError("profile value " + std::to_string(u) + " is not attained");
  return numeric::brent(g, a, b).x;
}

void HopfScenario::validate() const {
  if (!std::isfinite(eps) || eps < 0) throw ConfigError("hopf: eps must be a non-negative number");
  if (!(x_min < x_max)) throw ConfigError("hopf: x_min must be below x_max");
  for (const auto& v : variables(profile))
    if (v != symbol("x")) throw ConfigError("hopf: profile may depend on x only");
  int sign = 0;
  for (int i = 0; i <= 200; ++i) {
    double x = x_min + (x_max - x_min) * i / 200;
    double d = dU(x);
    int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) throw ConfigError("hopf: profile is not invertible on [x_min, x_max]");
    sign = s;
  }
}

// ---------------------------------------------------------------------------
// optics

double OpticsScenario::z_sing() const {
  if (alpha <= 0) return std::numeric_limits<double>::infinity();
  return profile == Profile::Parabolic ? 1 / std::sqrt(2 * alpha) : 1 / (2 * std::sqrt(alpha));
}

Expr OpticsScenario::boundary_intensity() const {
  return parse(profile == Profile::Parabolic ? "1 - x^2" : "cosh(x)^-2");
}

void OpticsScenario::validate() const {
  if (!std::isfinite(alpha) || alpha < 0) throw ConfigError("optics: alpha must be non-negative");
  if (nu != 0 && nu != 1) throw ConfigError("optics: nu must be 0 or 1");
  if (nodes < 11) throw ConfigError("optics: too few nodes");
  if (!(cfl > 0 && cfl <= 0.9)) throw ConfigError("optics: cfl must lie in (0, 0.9]");
  if (half_width < 0) throw ConfigError("optics: half_width must be positive");
}

// ---------------------------------------------------------------------------
// plasma

double PlasmaScenario::omega() const {
  if (Omega > 0) return Omega;
  const Species& s = species.front();
  return std::sqrt(s.Z * Tc / s.mass) / L0;
}

double PlasmaScenario::nh0() const { return nh0_fraction * species.front().Z * species.front().n0; }

double PlasmaScenario::nc0() const {
  double q = 0;
  for (const auto& s : species) q += s.Z * s.n0;
  return q - nh0();
}

void PlasmaScenario::validate() const {
  if (species.empty()) throw ConfigError("plasma: no ion species");
  for (const auto& s : species) {
    if (s.Z <= 0) throw ConfigError("plasma: species " + s.name + " needs a positive charge number");
    if (!(s.mass > 0)) throw ConfigError("plasma: species " + s.name + " needs a positive mass");
    if (!(s.n0 > 0)) throw ConfigError("plasma: species " + s.name + " needs a positive density");
    if (!(s.T_ratio > 0)) throw ConfigError("plasma: species " + s.name + " needs a positive temperature");
  }
  if (!(Th_over_Tc > 0) || !(Tc > 0)) throw ConfigError("plasma: electron temperatures must be positive");
  if (nh0_fraction < 0) throw ConfigError("plasma: nh0_fraction must be non-negative");
  if (!(me_over_mp > 0) || !(L0 > 0) || Omega < 0) throw ConfigError("plasma: invalid scale parameters");
  if (!(nc0() > 0)) throw ConfigError("plasma: hot electrons exceed the total ion charge");
}

PlasmaScenario PlasmaScenario::defaults() {
  PlasmaScenario p;
  p.species = {{"carbon", 6, 12, 1.0 / 6, 0.1}, {"proton", 1, 1, 0.1, 0.1}};
  return p;
}

// ---------------------------------------------------------------------------
// scenario files

namespace {

using boost::property_tree::ptree;

double as_double(const ptree& t, const std::string& section, const std::string& key) {
  try {
    std::size_t pos = 0;
    std::string s = t.data();
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("[" + section + "] " + key + ": not a number: '" + t.data() + "'");
  }
}

int as_int(const ptree& t, const std::string& section, const std::string& key) {
  double v = as_double(t, section, key);
  if (v != std::floor(v)) throw ConfigError("[" + section + "] " + key + ": expected an integer");
  return static_cast<int>(v);
}

std::vector<std::string> as_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

[[noreturn]] void unknown_key(const std::string& section, const std::string& key) {
  throw ConfigError("[" + section + "] unknown key '" + key + "'");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  ptree root;
  try {
    std::istringstream in(text);
    boost::property_tree::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("scenario syntax error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  Scenario sc;
  std::vector<Species> species;
  double charge_ratio = -1;
  for (const auto& [section, body] : root) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside of a section");
    if (section == "hopf") {
      HopfScenario h;
      for (const auto& [k, v] : body) {
        if (k == "eps") h.eps = as_double(v, section, k);
        else if (k == "profile") {
          try {
            h.profile = parse(v.data());
          } catch (const ParseError& e) {
            throw ConfigError("[hopf] profile: " + std::string(e.what()));
          }
        } else if (k == "x_min") h.x_min = as_double(v, section, k);
        else if (k == "x_max") h.x_max = as_double(v, section, k);
        else unknown_key(section, k);
      }
      sc.hopf = h;
    } else if (section == "optics") {
      OpticsScenario o;
      for (const auto& [k, v] : body) {
        if (k == "alpha") o.alpha = as_double(v, section, k);
        else if (k == "nu") o.nu = as_int(v, section, k);
        else if (k == "profile") {
          if (v.data() == "parabolic") o.profile = OpticsScenario::Profile::Parabolic;
          else if (v.data() == "soliton") o.profile = OpticsScenario::Profile::Soliton;
          else throw ConfigError("[optics] profile must be parabolic or soliton");
        } else if (k == "nodes") o.nodes = as_int(v, section, k);
        else if (k == "half_width") o.half_width = as_double(v, section, k);
        else if (k == "cfl") o.cfl = as_double(v, section, k);
        else unknown_key(section, k);
      }
      sc.optics = o;
    } else if (section == "plasma") {
      PlasmaScenario p = PlasmaScenario::defaults();
      for (const auto& [k, v] : body) {
        if (k == "Omega") p.Omega = as_double(v, section, k);
        else if (k == "Th_over_Tc") p.Th_over_Tc = as_double(v, section, k);
        else if (k == "nh0_fraction") p.nh0_fraction = as_double(v, section, k);
        else if (k == "L0") p.L0 = as_double(v, section, k);
        else if (k == "me_over_mp") p.me_over_mp = as_double(v, section, k);
        else if (k == "charge_density_ratio") charge_ratio = as_double(v, section, k);
        else unknown_key(section, k);
      }
      sc.plasma = p;
    } else if (section.rfind("species.", 0) == 0) {
      Species s;
      s.name = section.substr(8);
      s.n0 = -1;
      for (const auto& [k, v] : body) {
        if (k == "Z") s.Z = as_int(v, section, k);
        else if (k == "mass") s.mass = as_double(v, section, k);
        else if (k == "n0") s.n0 = as_double(v, section, k);
        else if (k == "T_ratio") s.T_ratio = as_double(v, section, k);
        else unknown_key(section, k);
      }
      species.push_back(s);
    } else if (section == "advection") {
      for (const auto& [k, v] : body) {
        if (k == "c") sc.detq.advection_speed = as_double(v, section, k);
        else unknown_key(section, k);
      }
      sc.kind = "advection";
    } else if (section == "detq") {
      for (const auto& [k, v] : body) {
        if (k == "degree") sc.detq.degree = as_int(v, section, k);
        else if (k == "mode") {
          if (v.data() == "total") sc.detq.mode = Ansatz::Mode::Total;
          else if (v.data() == "per-variable") sc.detq.mode = Ansatz::Mode::PerVariable;
          else throw ConfigError("[detq] mode must be total or per-variable");
        } else if (k == "expected_dimension") sc.detq.expected_dimension = as_int(v, section, k);
        else if (k == "parameters") sc.detq.parameters = as_list(v.data());
        else if (k == "parameter_degree") sc.detq.parameter_degree = as_int(v, section, k);
        else if (k.rfind("xi_", 0) == 0 || k.rfind("eta_", 0) == 0) sc.detq.coordinate_degree[k] = as_int(v, section, k);
        else unknown_key(section, k);
      }
    } else if (section == "tolerances") {
      for (const auto& [k, v] : body) sc.tol.values[k] = as_double(v, section, k);
    } else {
      throw ConfigError("unknown section [" + section + "]");
    }
  }
  int kinds = (sc.hopf ? 1 : 0) + (sc.optics ? 1 : 0) + (sc.plasma || !species.empty() ? 1 : 0) +
              (sc.kind == "advection" ? 1 : 0);
  if (kinds != 1) throw ConfigError("a scenario needs exactly one of [hopf], [optics], [plasma], [advection]");
  if (sc.hopf) {
    sc.kind = "hopf";
    sc.hopf->validate();
  } else if (sc.optics) {
    sc.kind = "optics";
    sc.optics->validate();
  } else if (sc.kind != "advection") {
    sc.kind = "plasma";
    if (!sc.plasma) sc.plasma = PlasmaScenario::defaults();
    if (!species.empty()) {
      if (charge_ratio < 0) charge_ratio = 0.1;
      for (std::size_t i = 0; i < species.size(); ++i)
        if (species[i].n0 < 0) {
          if (i == 0) throw ConfigError("[species." + species[0].name + "] n0 is required");
          species[i].n0 = charge_ratio * species[0].Z * species[0].n0 / species[i].Z;
        }
      sc.plasma->species = species;
    } else if (charge_ratio >= 0) {
      auto& sp = sc.plasma->species;
      sp[1].n0 = charge_ratio * sp[0].Z * sp[0].n0 / sp[1].Z;
    }
    sc.plasma->validate();
  }
  for (const auto& [k, v] : sc.tol.values)
    if (!(v > 0)) throw ConfigError("[tolerances] " + k + " must be positive");
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// ---------------------------------------------------------------------------
// model systems and generators

namespace {

Generator make(const ModelSystem& sys, std::string name, std::map<std::string, std::string> xi,
               std::map<std::string, std::string> eta) {
  Generator g{std::move(name), {}, {}};
  for (const auto& [k, v] : xi) g.xi[k] = simplify(sys.parse(v));
  for (const auto& [k, v] : eta) g.eta[k] = simplify(sys.parse(v));
  return g;
}

Generator make(std::string name, std::map<std::string, std::string> xi, std::map<std::string, std::string> eta) {
  ModelSystem none;
  return make(none, std::move(name), std::move(xi), std::move(eta));
}

}  // namespace

ModelSystem hopf_system() {
  ModelSystem s;
  s.name = "hopf";
  s.independents = {"z", "x", "eps"};
  s.dependents = {{"u", {}}};
  s.equations = {s.parse("u_z + eps*u*u_x")};
  s.leading = {{s.parse("u_z"), s.parse("-eps*u*u_x")}};
  return s;
}

ModelSystem optics_system(int nu) {
  ModelSystem s;
  s.name = "optics";
  s.independents = {"z", "x"};
  s.dependents = {{"v", {}}, {"I", {}}};
  s.parameters = {"alpha"};
  Expr n(nu);
  s.equations = {s.parse("v_z + v*v_x - alpha*I_x"), s.parse("I_z + v*I_x + I*v_x") + n * s.parse("I*v/x")};
  s.leading = {{s.parse("v_z"), s.parse("-v*v_x + alpha*I_x")},
               {s.parse("I_z"), s.parse("-v*I_x - I*v_x") - n * s.parse("I*v/x")}};
  return s;
}

ModelSystem vlasov_system() {
  ModelSystem s;
  s.name = "vlasov";
  s.independents = {"t", "x", "v"};
  s.dependents = {{"f", {}}, {"E", {"t", "x"}}};
  s.parameters = {"Omega", "em"};
  s.equations = {s.parse("f_t + v*f_x + em*E*f_v")};
  s.leading = {{s.parse("f_t"), s.parse("-v*f_x - em*E*f_v")}};
  return s;
}

ModelSystem advection_system(const Rational& c) {
  ModelSystem s;
  s.name = "advection";
  s.independents = {"z", "x"};
  s.dependents = {{"u", {}}};
  s.equations = {s.parse("u_z") + num(c) * s.parse("u_x")};
  s.leading = {{s.parse("u_z"), -num(c) * s.parse("u_x")}};
  return s;
}

Generator scaled(const Generator& g, const Expr& factor, std::string name) {
  Generator r{name.empty() ? g.name : std::move(name), {}, {}};
  for (const auto& [k, c] : g.xi) r.xi[k] = simplify(factor * c);
  for (const auto& [k, c] : g.eta) r.eta[k] = simplify(factor * c);
  return r;
}

std::vector<Generator> hopf_generators() {
  return {make("X1", {{"z", "1"}, {"x", "eps*u"}}, {}), make("X2", {{"x", "1"}}, {}),
          make("X3", {{"x", "x"}}, {{"u", "u"}}), make("X4", {{"eps", "eps"}, {"x", "x"}}, {})};
}

GeneratorFamily hopf_family() {
  GeneratorFamily f;
  f.members = hopf_generators();
  f.coefficient_args = {"eps", "u", "chi"};
  f.lift = {{symbol("chi"), parse("x - eps*u*z")}};
  return f;
}

BoundarySurface hopf_boundary(const HopfScenario& s, bool symbolic_derivative) {
  BoundarySurface b;
  b.variable = "z";
  b.value = Expr(0);
  b.data = {{"u", s.profile}};
  b.profile_variable = "x";
  b.symbolic_derivative = symbolic_derivative;
  return b;
}

std::vector<LinearFunctional> hopf_functionals() {
  return {LinearFunctional::point_eval("u0x", "u", {"x"}, {{"x", Expr(0)}})};
}

FunctionalContext hopf_context() {
  FunctionalContext c;
  c.reduced_independents = {"z", "eps"};
  c.parity = {{"u", 1}};
  return c;
}

Generator hopf_functional_generator() { return make("R4", {{"eps", "1"}}, {{"u0x", "-z*u0x^2"}}); }

Expr hopf_invariant() { return parse("eps*z - 1/u0x"); }

Generator parabolic_generator() {
  return make("Rpar", {{"z", "1 - 2*alpha*z^2"}, {"x", "-2*alpha*z*x"}},
              {{"v", "-2*alpha*(x - v*z)"}, {"I", "4*alpha*I*z"}});
}

CanonicalGenerator soliton_generator() {
  ModelSystem sys = optics_system(0);
  const std::string common = "(v^2 + 4*alpha*(1 - I))";
  const std::string curv = "(I_xx - I_x^2/(2*I))";
  const std::string pre = "I/(I*v_x^2 + alpha*I_x^2)^2";
  std::string kv = pre + "*(((1/2)*(I*v_x^2 - alpha*I_x^2)*" + common + " + 4*alpha*v*I*I_x*v_x)*v_xx + (2*alpha*v*(alpha*I_x^2 - I*v_x^2) + alpha*v_x*I_x*" +
                   common + ")*" + curv + ") - v*(1 - z*v_x) - alpha*z*I_x";
  std::string ki = pre + "*(((1/2)*(I*v_x^2 - alpha*I_x^2)*" + common + " + 4*alpha*v*I*v_x*I_x)*" + curv +
                   " - (2*v*(alpha*I_x^2 - I*v_x^2) + v_x*I_x*" + common +
                   ")*I*v_xx + 1/(4*I)*(I*v_x^2 + alpha*I_x^2)*(4*alpha*I_x^2 + (I_x*v - 2*I*v_x)^2)) - I*(2 - z*v_x) + z*v*I_x";
  CanonicalGenerator g;
  g.name = "Rsol";
  g.kappa["v"] = sys.parse(kv);
  g.kappa["I"] = sys.parse(ki);
  return g;
}

std::vector<LinearFunctional> optics_functionals() {
  return {LinearFunctional::point_eval("I0", "I", {}, {{"x", Expr(0)}}),
          LinearFunctional::point_eval("W0", "v", {"x"}, {{"x", Expr(0)}})};
}

FunctionalContext optics_context() {
  FunctionalContext c;
  c.reduced_independents = {"z"};
  c.parity = {{"v", 1}, {"I", 0}};
  return c;
}

std::vector<AxisRelationSpec> soliton_axis_specs() {
  ModelSystem sys = optics_system(0);
  return {{sys.parse("v_x"), 1, {}}, {sys.parse("I_xx"), 0, {"x"}}, {sys.parse("v_xxx"), 1, {"x", "x"}}};
}

Generator parabolic_functional_generator() {
  return make("R4par", {{"z", "1 - 2*alpha*z^2"}}, {{"I0", "4*alpha*I0*z"}, {"W0", "-2*alpha*(1 - 2*z*W0)"}});
}

std::map<std::string, Expr> soliton_functional_kappa() {
  ParseOptions po{{"z"}};
  return {{"I0", parse("4 - 5*I0 - z*I0_z + 2*(I0 - 1)*I0*I0_zz/I0_z^2", po)},
          {"W0", parse("I0_z/I0 + z*I0_zz/I0 - z*(I0_z/I0)^2 - 2*(I0 - 1)*(I0_zzz/I0_z^2 + 2*I0_z/I0^2 - "
                       "2*I0_zz^2/I0_z^3)",
                       po)}};
}

std::vector<Expr> parabolic_invariants() {
  return {parse("(1 - 2*alpha*z^2)*I0"), parse("W0*(1 - 2*alpha*z^2) + 2*alpha*z")};
}

Generator plasma_generator() {
  return make("R6", {{"t", "1 + Omega^2*t^2"}, {"x", "Omega^2*t*x"}, {"v", "Omega^2*(x - v*t)"}}, {});
}

std::vector<LinearFunctional> plasma_functionals() {
  return {LinearFunctional::moment("n", "f", "v", Expr(1))};
}

FunctionalContext plasma_context() {
  FunctionalContext c;
  c.reduced_independents = {"t", "x"};
  return c;
}

Generator plasma_density_generator() {
  return make("R7", {{"t", "1 + Omega^2*t^2"}, {"x", "Omega^2*t*x"}}, {{"n", "-Omega^2*t*n"}});
}

std::vector<Expr> plasma_invariants() {
  return {parse("x/sqrt(1 + Omega^2*t^2)"), parse("v^2 + Omega^2*(x - v*t)^2")};
}

Expr plasma_density_invariant() { return parse("n*sqrt(1 + Omega^2*t^2)"); }

// ---------------------------------------------------------------------------
// closed forms

double hopf_exact(const HopfScenario& s, double z, double x) {
  auto F = [&](double u) { return x - s.eps * z * u - s.H(u); };
  auto dF = [&](double u) { return -s.eps * z - 1 / s.dU(s.H(u)); };
  double u0 = s.U(std::clamp(x, s.x_min, s.x_max));
  double a = u0 - 1e-2 * (1 + std::abs(u0));
  double b = u0 + 1e-2 * (1 + std::abs(u0));
  if (!numeric::expand_bracket(F, a, b, 80))
    throw SolveError("no single-valued solution at z=" + std::to_string(z) + " (beyond the gradient catastrophe)");
  double u = numeric::brent(F, a, b).x;
  double start_sign = -1 / s.dU(s.H(u0));
  if ((dF(u) > 0) != (start_sign > 0))
    throw SolveError("characteristics have crossed at z=" + std::to_string(z) + " (multivalued region)");
  return u;
}

AxisValues optics_axis_closed_form(const OpticsScenario& s, double z) {
  if (z < 0) throw DomainError("z must be non-negative", "z");
  if (z >= s.z_sing()) throw SolveError("z=" + std::to_string(z) + " is at or beyond the axis singularity");
  const double a = s.alpha;
  if (s.profile == OpticsScenario::Profile::Parabolic) {
    double f = 1 - 2 * a * z * z;
    return {1 / f, -2 * a * z / f};
  }
  if (z == 0) return {1, 0};
  auto g = [&](double I) { return std::sqrt(I - 1) / (std::sqrt(a) * I) - z; };
  double I = numeric::brent(g, 1, 2).x;
  return {I, -2 * a * z * I / (1 - 2 * a * z * z * I)};
}

// ---------------------------------------------------------------------------
// plasma

PlasmaModel::PlasmaModel(PlasmaScenario s) : s_(std::move(s)) {
  s_.validate();
  omega_ = s_.omega();
  nc0_ = s_.nc0();
  nh0_ = s_.nh0();
  for (const auto& sp : s_.species) comp_.push_back({sp.name, double(sp.Z), sp.mass, sp.T_ratio * s_.Tc, sp.n0});
  comp_.push_back({"cold electrons", -1, s_.me_over_mp, s_.Tc, nc0_});
  comp_.push_back({"hot electrons", -1, s_.me_over_mp, s_.Th_over_Tc * s_.Tc, nh0_});
}

double PlasmaModel::quasineutrality_residual(double e, double chi) const {
  const double U = omega_ * chi;
  double g = -nc0_ * std::exp(-e);
  for (const auto& sp : s_.species) {
    double T = sp.T_ratio * s_.Tc;
    double vt2 = T / sp.mass;
    g += sp.Z * sp.n0 * std::exp(sp.Z * s_.Tc / T * e - U * U / (2 * vt2) * (1 + sp.Z * s_.me_over_mp / sp.mass));
  }
  g -= nh0_ * std::exp(-e / s_.Th_over_Tc);
  return g;
}

double PlasmaModel::script_e(double chi) const {
  // log of positive charge minus log of negative charge, free of overflow
  const double U = omega_ * chi;
  auto g = [&](double e) {
    std::vector<double> pos, neg{std::log(nc0_)};
    for (const auto& sp : s_.species) {
      double T = sp.T_ratio * s_.Tc;
      pos.push_back(std::log(sp.Z * sp.n0) + (1 + sp.Z * s_.Tc / T) * e -
                    U * U * sp.mass / (2 * T) * (1 + sp.Z * s_.me_over_mp / sp.mass));
    }
    if (nh0_ > 0) neg.push_back(std::log(nh0_) + (1 - 1 / s_.Th_over_Tc) * e);
    auto lse = [](const std::vector<double>& v) {
      double m = *std::max_element(v.begin(), v.end());
      double acc = 0;
      for (double x : v) acc += std::exp(x - m);
      return m + std::log(acc);
    };
    return lse(pos) - lse(neg);
  };
  double a = -1, b = 1;
  for (int i = 0; i < 200 && g(a) > 0; ++i) a *= 2;
  for (int i = 0; i < 200 && g(b) < 0; ++i) b *= 2;
  if (g(a) * g(b) > 0) throw NotBracketed(a, b, g(a), g(b));
  numeric::RootOptions ro;
  ro.xtol = 0;
  return numeric::brent(g, a, b, ro).x;
}

double PlasmaModel::universal_density(std::size_t q, double chi) const {
  const Species& sp = s_.species.at(q);
  double T = sp.T_ratio * s_.Tc;
  double U = omega_ * chi;
  return std::exp(script_e(chi) * sp.Z * s_.Tc / T -
                  U * U * sp.mass / (2 * T) * (1 + sp.Z * s_.me_over_mp / sp.mass));
}

double PlasmaModel::cold_electron_density(double chi) const { return std::exp(-script_e(chi)); }

double PlasmaModel::hot_electron_density(double chi) const {
  return nh0_ / nc0_ * std::exp(-script_e(chi) / s_.Th_over_Tc);
}

double PlasmaModel::phi0(double chi) const {
  return s_.me_over_mp * omega_ * omega_ * chi * chi / 2 - script_e(chi) * s_.Tc;
}

double PlasmaModel::dphi0(double chi) const {
  double e = script_e(chi);
  double U = omega_ * chi;
  double ge = -nh0_ * (1 - 1 / s_.Th_over_Tc) * std::exp((1 - 1 / s_.Th_over_Tc) * e);
  double gc = 0;
  for (const auto& sp : s_.species) {
    double T = sp.T_ratio * s_.Tc;
    double k = sp.mass / T * (1 + sp.Z * s_.me_over_mp / sp.mass);
    double w = sp.Z * sp.n0 * std::exp((1 + sp.Z * s_.Tc / T) * e - U * U * k / 2);
    ge += (1 + sp.Z * s_.Tc / T) * w;
    gc += -w * k * U * omega_;
  }
  double de = -gc / ge;
  return s_.me_over_mp * omega_ * omega_ * chi - de * s_.Tc;
}

double PlasmaModel::electric_field(double t, double x) const {
  double s = 1 + omega_ * omega_ * t * t;
  return -dphi0(x / std::sqrt(s)) / (s * std::sqrt(s));
}

double PlasmaModel::distribution(std::size_t c, double t, double x, double v) const {
  const Component& k = comp_.at(c);
  double s = 1 + omega_ * omega_ * t * t;
  double chi = x / std::sqrt(s);
  double j4 = v * v + omega_ * omega_ * (x - v * t) * (x - v * t);
  double I = j4 / 2 + k.charge / k.mass * phi0(chi);
  return k.n0 * std::sqrt(k.mass / (2 * std::numbers::pi * k.T)) * std::exp(-k.mass * I / k.T);
}

double PlasmaModel::density(std::size_t q, double t, double x) const {
  double s = std::sqrt(1 + omega_ * omega_ * t * t);
  return s_.species.at(q).n0 * universal_density(q, x / s) / s;
}

namespace {

numeric::QuadOptions moment_quad(double scale) {
  numeric::QuadOptions o;
  o.abs_tol = 1e-14 * scale;
  o.rel_tol = 0;
  o.max_subdivisions = 20000;
  return o;
}

}  // namespace

double PlasmaModel::density_quadrature(std::size_t c, double t, double x) const {
  const Component& k = comp_.at(c);
  double s = 1 + omega_ * omega_ * t * t;
  double V = omega_ * omega_ * t * x / s;
  double w = std::sqrt(k.T / k.mass / s);
  double phi = phi0(x / std::sqrt(s));
  double pre = k.n0 * std::sqrt(k.mass / (2 * std::numbers::pi * k.T));
  auto f = [&](double v) {
    double j4 = v * v + omega_ * omega_ * (x - v * t) * (x - v * t);
    return pre * std::exp(-k.mass * (j4 / 2 + k.charge / k.mass * phi) / k.T);
  };
  return numeric::integrate_peak(f, V, w, 12, moment_quad(k.n0)).value;
}

double PlasmaModel::current_quadrature(std::size_t c, double t, double x) const {
  const Component& k = comp_.at(c);
  double s = 1 + omega_ * omega_ * t * t;
  double V = omega_ * omega_ * t * x / s;
  double w = std::sqrt(k.T / k.mass / s);
  double phi = phi0(x / std::sqrt(s));
  double pre = k.n0 * std::sqrt(k.mass / (2 * std::numbers::pi * k.T));
  auto f = [&](double v) {
    double j4 = v * v + omega_ * omega_ * (x - v * t) * (x - v * t);
    return v * pre * std::exp(-k.mass * (j4 / 2 + k.charge / k.mass * phi) / k.T);
  };
  return numeric::integrate_peak(f, V, w, 12, moment_quad(k.n0 * (std::abs(V) + w))).value;
}

double PlasmaModel::spectrum(std::size_t q, double t, double energy) const {
  const Component& k = comp_.at(q);
  double v = std::sqrt(2 * energy / k.mass);
  double s = std::sqrt(1 + omega_ * omega_ * t * t);
  // the integrand is negligible once the universal density has died out
  double chi_max = 1;
  while (universal_density(q, chi_max) > 1e-40 && chi_max < 1e3) chi_max *= 1.5;
  double w = std::sqrt(k.T / k.mass) / omega_;
  double X = chi_max * s + std::abs(v) * t + 12 * w;
  auto f = [&](double x) { return distribution(q, t, x, v) + distribution(q, t, x, -v); };
  numeric::QuadOptions o;
  o.abs_tol = 1e-300;
  o.rel_tol = 1e-11;
  o.max_subdivisions = 20000;
  double c = v * t;
  double total = 0;
  // split at the two peaks x = +-vt
  std::vector<double> cuts{-X, -c - 12 * w, -c + 12 * w, c - 12 * w, c + 12 * w, X};
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += numeric::integrate(f, cuts[i], cuts[i + 1], o).value;
  return total / (k.mass * v);
}

double PlasmaModel::spectrum_asymptote(std::size_t q, double energy) const {
  const Species& sp = s_.species.at(q);
  double v = std::sqrt(2 * energy / sp.mass);
  return std::sqrt(2 / (sp.mass * energy)) * sp.n0 / omega_ * universal_density(q, v / omega_);
}

std::vector<Fig2Row> fig2_data(double alpha, int rows, double last) {
  OpticsScenario par;
  par.alpha = alpha;
  OpticsScenario sol = par;
  sol.profile = OpticsScenario::Profile::Soliton;
  sol.nu = 0;
  std::vector<Fig2Row> out;
  for (int i = 0; i < rows; ++i) {
    double r = rows == 1 ? 0 : last * i / (rows - 1);
    AxisValues p = optics_axis_closed_form(par, r * par.z_sing());
    AxisValues s = optics_axis_closed_form(sol, r * sol.z_sing());
    out.push_back({r, p.I0, p.W0, s.I0, s.W0});
  }
  return out;
}

std::vector<Fig3Row> fig3_data(const PlasmaModel& m, int rows, double chi2_max) {
  std::vector<Fig3Row> out;
  const auto& sp = m.scenario().species;
  double nc0 = m.scenario().nc0();
  for (int i = 0; i < rows; ++i) {
    double c2 = rows == 1 ? 0 : chi2_max * i / (rows - 1);
    double chi = std::sqrt(c2) * m.scenario().L0;
    Fig3Row r{c2, sp[0].n0 / nc0 * m.universal_density(0, chi), 0, m.cold_electron_density(chi),
              m.hot_electron_density(chi)};
    if (sp.size() > 1) r.N_proton = sp[1].n0 / nc0 * m.universal_density(1, chi);
    out.push_back(r);
  }
  return out;
}

}  // namespace rgsym
