#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rgsym/expr.hpp"
#include "rgsym/jet.hpp"
#include "rgsym/symmetry.hpp"

namespace rgsym {

// ---------------------------------------------------------------------------
// configuration

struct Tolerances {
  std::map<std::string, double> values;
  double get(const std::string& key, double fallback) const;
};

struct HopfScenario {
  double eps = 0.1;
  Expr profile = parse("-x");  // U(x)
  double x_min = -2;
  double x_max = 2;

  double U(double x) const;
  double dU(double x) const;
  // Inverse profile H = U^{-1}.
  double H(double u) const;
  // Throws ConfigError unless U is strictly monotone on [x_min, x_max].
  void validate() const;
};

struct OpticsScenario {
  enum class Profile { Parabolic, Soliton };
  double alpha = 0.1;
  int nu = 1;
  Profile profile = Profile::Parabolic;
  // grid solver settings
  int nodes = 4001;
  double half_width = 0;  // 0 picks a default per profile
  double cfl = 0.4;

  double z_sing() const;
  Expr boundary_intensity() const;
  void validate() const;
};

struct Species {
  std::string name;
  int Z = 1;
  double mass = 1;     // in proton masses
  double n0 = 0;       // initial density weight
  double T_ratio = 0.1;  // T_q / T_c
};

struct PlasmaScenario {
  std::vector<Species> species;
  double Th_over_Tc = 1000;
  double nh0_fraction = 5e-4;  // n_h0 / (Z_1 n_10)
  double Omega = 0;            // 0 selects sqrt(Z_1 T_c / m_1) / L0
  double L0 = 1;
  double me_over_mp = 1.0 / 1836;
  double Tc = 1;

  double omega() const;
  double nh0() const;
  double nc0() const;
  void validate() const;
  static PlasmaScenario defaults();
};

struct DetqSpec {
  int degree = 1;
  Ansatz::Mode mode = Ansatz::Mode::Total;
  std::map<std::string, int> coordinate_degree;
  std::vector<std::string> parameters;
  int parameter_degree = 1;
  int expected_dimension = -1;
  double advection_speed = 1;
};

struct Scenario {
  std::string kind;  // hopf | optics | plasma | advection
  std::optional<HopfScenario> hopf;
  std::optional<OpticsScenario> optics;
  std::optional<PlasmaScenario> plasma;
  DetqSpec detq;
  Tolerances tol;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// model systems

ModelSystem hopf_system();
ModelSystem optics_system(int nu);
ModelSystem vlasov_system();
ModelSystem advection_system(const Rational& c);

Generator scaled(const Generator& g, const Expr& factor, std::string name = {});

// Hopf
std::vector<Generator> hopf_generators();
GeneratorFamily hopf_family();
BoundarySurface hopf_boundary(const HopfScenario& s, bool symbolic_derivative = false);
std::vector<LinearFunctional> hopf_functionals();
FunctionalContext hopf_context();
Generator hopf_functional_generator();
Expr hopf_invariant();

// optics
Generator parabolic_generator();
CanonicalGenerator soliton_generator();
std::vector<LinearFunctional> optics_functionals();
FunctionalContext optics_context();
std::vector<AxisRelationSpec> soliton_axis_specs();
Generator parabolic_functional_generator();
std::map<std::string, Expr> soliton_functional_kappa();
std::vector<Expr> parabolic_invariants();

// plasma
Generator plasma_generator();
std::vector<LinearFunctional> plasma_functionals();
FunctionalContext plasma_context();
Generator plasma_density_generator();
std::vector<Expr> plasma_invariants();
Expr plasma_density_invariant();

// ---------------------------------------------------------------------------
// closed forms

double hopf_exact(const HopfScenario& s, double z, double x);

struct AxisValues {
  double I0;
  double W0;
};

AxisValues optics_axis_closed_form(const OpticsScenario& s, double z);

/// Maxwellian plasma slab in the quasi-neutral self-similar regime.
class PlasmaModel {
 public:
  struct Component {
    std::string name;
    double charge;  // in units of e, electrons -1
    double mass;    // in proton masses
    double T;       // in units of T_c
    double n0;
  };

  explicit PlasmaModel(PlasmaScenario s);

  const PlasmaScenario& scenario() const { return s_; }
  // ions first, then the cold and hot electrons
  const std::vector<Component>& components() const { return comp_; }
  std::size_t ions() const { return s_.species.size(); }
  double omega() const { return omega_; }

  // Root of the implicit quasi-neutrality relation at U = Omega chi.
  double script_e(double chi) const;
  double quasineutrality_residual(double script_e, double chi) const;
  double universal_density(std::size_t q, double chi) const;
  // Electron densities n_c / n_c0 and n_h / n_c0 at t = 0.
  double cold_electron_density(double chi) const;
  double hot_electron_density(double chi) const;

  double phi0(double chi) const;
  double dphi0(double chi) const;
  double electric_field(double t, double x) const;

  double distribution(std::size_t c, double t, double x, double v) const;
  double density(std::size_t q, double t, double x) const;
  double density_quadrature(std::size_t c, double t, double x) const;
  double current_quadrature(std::size_t c, double t, double x) const;

  // Energy spectrum dN/de of ion species q at time t and energy e.
  double spectrum(std::size_t q, double t, double energy) const;
  double spectrum_asymptote(std::size_t q, double energy) const;

 private:
  PlasmaScenario s_;
  std::vector<Component> comp_;
  double omega_;
  double nc0_;
  double nh0_;
};

struct Fig2Row {
  double z_over_zsing, I0_par, W0_par, I0_sol, W0_sol;
};
std::vector<Fig2Row> fig2_data(double alpha, int rows = 200, double last = 0.995);

struct Fig3Row {
  double chi_squared, N_carbon, N_proton, n_cold, n_hot;
};
std::vector<Fig3Row> fig3_data(const PlasmaModel& m, int rows = 201, double chi2_max = 4);

}  // namespace rgsym
