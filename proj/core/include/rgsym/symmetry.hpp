#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rgsym/expr.hpp"
#include "rgsym/jet.hpp"

namespace rgsym {

using Point = std::map<std::string, double>;

/// Point generator xi^i d_{x^i} + eta^a d_{u^a}. Missing coordinates are zero.
struct Generator {
  std::string name;
  std::map<std::string, Expr> xi;
  std::map<std::string, Expr> eta;

  Expr coefficient(const std::string& var) const;
  // Coordinates in xi-then-eta order.
  std::vector<std::string> variables() const;
  Generator simplified() const;
};

/// Evolutionary (Lie-Backlund) form kappa^a d_{u^a}.
struct CanonicalGenerator {
  std::string name;
  std::map<std::string, Expr> kappa;
};

struct ProlongedGenerator {
  Generator base;
  std::map<Expr, Expr> zeta;  // jet -> coordinate
};

/// Generators X_j multiplied by arbitrary functions of coefficient_args.
struct GeneratorFamily {
  std::vector<Generator> members;
  std::vector<std::string> coefficient_args;
  // Expresses coefficient arguments through group variables, e.g. chi -> x - eps*u*z.
  Substitution lift;
};

CanonicalGenerator canonical(const Generator& g, const ModelSystem& sys);
ProlongedGenerator prolong(const Generator& g, const ModelSystem& sys, const std::vector<Expr>& jets,
                           bool raw = false);
/// All jets up to the given order.
ProlongedGenerator prolong(const Generator& g, const ModelSystem& sys, int order);

/// Action of a prolonged generator on an expression in jet space.
Expr apply(const ProlongedGenerator& pg, const Expr& f, bool raw = false);
Expr apply(const CanonicalGenerator& cg, const Expr& f, const ModelSystem& sys, bool raw = false);

struct InvarianceResult {
  enum class Status { SymbolicZero, NumericOnly, NonZero, Inconsistent };
  Status status = Status::NonZero;
  std::vector<Expr> residuals;
  double max_numeric = 0;  // largest |residual| over random sample points
  bool invariant() const { return status == Status::SymbolicZero || status == Status::NumericOnly; }
};

std::string_view status_name(InvarianceResult::Status s);

struct SampleOptions {
  int points = 8;
  std::uint64_t seed = 1;
  double lo = 0.3;
  double hi = 1.7;
  double tol = 1e-8;
};

InvarianceResult check_invariance(const ModelSystem& sys, const Generator& g, const SampleOptions& so = {});
InvarianceResult check_invariance(const ModelSystem& sys, const CanonicalGenerator& g,
                                  const SampleOptions& so = {});

/// Determines eta^dep from the point invariance condition, the other coordinates being fixed.
Expr solve_unknown_coordinate(const ModelSystem& sys, const Generator& g, const std::string& dep);

struct Ansatz {
  enum class Mode { Total, PerVariable };
  int degree = 1;
  Mode mode = Mode::Total;
  // "xi_z" -> 0 forces a constant, -1 forces zero
  std::map<std::string, int> coordinate_degree;
  // parameters allowed to multiply the monomials, each up to parameter_degree
  std::vector<std::string> parameters;
  int parameter_degree = 1;
};

struct DeterminingResult {
  std::vector<Generator> basis;
  std::vector<std::string> coordinates;          // "xi_z", "eta_u", ...
  std::vector<std::vector<Expr>> monomials;      // per coordinate
  std::vector<std::vector<Rational>> vectors;    // basis in unknown space
  std::size_t unknowns = 0;
  std::size_t equations = 0;
  std::size_t rank = 0;
  std::size_t dimension() const { return basis.size(); }
};

DeterminingResult determining_system(const ModelSystem& sys, const Ansatz& ansatz);
/// Exact coefficients of g in the computed basis, if g lies in its span.
std::optional<std::vector<Rational>> express_in_basis(const DeterminingResult& r, const Generator& g);

struct BoundarySurface {
  std::string variable;                 // e.g. z
  Expr value = Expr(0);                 // surface variable = value
  std::map<std::string, Expr> data;     // dependent -> boundary profile in the other variables
  std::string profile_variable;         // e.g. x, the argument of the profile
  std::string invariant_name = "chi";   // name of the lifted profile argument
  bool symbolic_derivative = false;     // keep U_chi as a symbol
};

struct Restriction {
  std::vector<Generator> generators;
  std::vector<bool> trivial;        // per family member: kappa vanishes on the frame
  std::vector<Expr> relation;       // coefficient of each member in the boundary relation
  int pivot = -1;
};

Restriction restrict_on_solution(const ModelSystem& sys, const GeneratorFamily& fam, const BoundarySurface& bs);

/// Data needed to evaluate jets on the functional support.
struct FunctionalContext {
  std::vector<std::string> reduced_independents;  // e.g. z
  std::map<std::string, int> parity;              // dependent -> 0 even, 1 odd in the point variable
  // jet -> expression in functional variables, used before the direct mapping
  std::vector<std::pair<Expr, Expr>> relations;
};

struct FunctionalGenerator {
  CanonicalGenerator canonical;     // kappa per functional name
  std::optional<Generator> point;   // point form when kappa is linear in first-order jets
  std::vector<Expr> foreign;        // jets that could not be expressed, empty on success
  bool closed() const { return foreign.empty(); }
};

ModelSystem reduced_system(const std::vector<LinearFunctional>& fs, const FunctionalContext& ctx);

FunctionalGenerator prolong_to_functional(const ModelSystem& sys, const CanonicalGenerator& g,
                                          const std::vector<LinearFunctional>& fs, const FunctionalContext& ctx);
FunctionalGenerator prolong_to_functional(const ModelSystem& sys, const Generator& g,
                                          const std::vector<LinearFunctional>& fs, const FunctionalContext& ctx);

struct AxisRelationSpec {
  Expr target;                       // jet to solve for
  int equation = 0;                  // index into sys.equations
  std::vector<std::string> derivs;   // differentiate the equation first
};

/// Solves differentiated equations on the functional support for the requested jets.
std::vector<std::pair<Expr, Expr>> derive_axis_relations(const ModelSystem& sys,
                                                         const std::vector<AxisRelationSpec>& specs,
                                                         const std::vector<LinearFunctional>& fs,
                                                         FunctionalContext ctx);

/// Residual X J after simplification; zero means J is an invariant of g.
Expr verify_invariant(const Generator& g, const Expr& invariant);
bool is_invariant(const Generator& g, const Expr& invariant, const SampleOptions& so = {});

/// Integrates dX/da = (xi, eta)(X) from p over the parameter interval [0, a].
Point flow(const Generator& g, const Point& p, double a, double tol = 1e-10);

struct InvariantRelation {
  Expr invariant;        // J_k in group variables
  std::string unknown;   // functional value solved from this relation
  // value of J_k fixed by the boundary data, given the current point
  std::function<double(const Point&)> boundary;
};

/// Evaluates the functional values along `variable` by continuation from the
/// boundary, solving each relation with a bracketing root finder.
class InvariantSolution {
 public:
  InvariantSolution(std::vector<InvariantRelation> rel, std::string variable, double start, Point fixed,
                    Point start_values);
  Point at(double s, int substeps = 64) const;

 private:
  std::vector<InvariantRelation> rel_;
  std::vector<Expr> drel_;  // derivative with respect to the unknown
  std::string var_;
  double start_;
  Point fixed_;
  Point start_values_;
};

InvariantSolution invariant_solution(std::vector<InvariantRelation> rel, std::string variable, double start,
                                     Point fixed, Point start_values);

}  // namespace rgsym
