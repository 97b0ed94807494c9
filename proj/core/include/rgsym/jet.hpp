#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rgsym/expr.hpp"

namespace rgsym {

struct Dependent {
  std::string name;
  // Independents this function depends on; empty means all of them.
  std::vector<std::string> args;
};

/// A system of differential equations together with its solved (leading) form.
struct ModelSystem {
  std::string name;
  std::vector<std::string> independents;
  std::vector<Dependent> dependents;
  std::vector<std::string> parameters;
  std::vector<Expr> equations;
  // u_J -> rhs; each entry is a solved form of one equation
  std::vector<std::pair<Expr, Expr>> leading;
  std::vector<std::pair<Expr, Expr>> boundary;
  std::vector<Expr> nonlocal;

  ParseOptions parse_options() const { return {independents}; }
  Expr parse(std::string_view text) const { return rgsym::parse(text, parse_options()); }
  Expr var(const std::string& n) const { return symbol(n); }

  bool is_independent(const std::string& n) const;
  bool is_dependent(const std::string& n) const;
  bool depends(const std::string& dep, const std::string& indep) const;
  // True when e is a dependent variable or one of its derivatives.
  bool is_jet(const Expr& e) const;
};

// Base name and derivative multiset of a jet variable (or plain dependent).
std::string jet_base(const Expr& v);
std::vector<std::string> jet_derivs(const Expr& v);
Expr prolong_jet(const Expr& v, const std::string& indep);
int jet_order(const Expr& v);

/// D_i e = d_i e + sum u_{J,i} d e / d u_J
Expr total_derivative(const Expr& e, const std::string& indep, const ModelSystem& sys, bool raw = false);
Expr total_derivative(const Expr& e, const std::vector<std::string>& indeps, const ModelSystem& sys,
                      bool raw = false);

/// Eliminates leading jets and all of their prolongations.
class FrameReducer {
 public:
  explicit FrameReducer(const ModelSystem& sys, int max_depth = 32, bool raw = false);
  Expr reduce(const Expr& e);
  // Reduced form of a single jet, or nullopt when it is not a leading prolongation.
  std::optional<Expr> reduce_jet(const Expr& v);

 private:
  const ModelSystem& sys_;
  int max_depth_;
  bool raw_;
  ExprMap<Expr> cache_;
};

Expr frame_reduce(const Expr& e, const ModelSystem& sys, int max_depth = 32);

/// Either a delta-kernel point evaluation of a jet, or a velocity moment.
struct LinearFunctional {
  enum class Type { PointEval, Moment };
  std::string name;
  Type type = Type::PointEval;
  std::string dependent;
  // PointEval: derivative multi-index, evaluation point
  std::vector<std::string> derivs;
  std::map<std::string, Expr> point;
  // Moment: integration variable and polynomial weight
  std::string variable;
  Expr weight = Expr(1);

  static LinearFunctional point_eval(std::string name, std::string dependent, std::vector<std::string> derivs,
                                     std::map<std::string, Expr> point);
  static LinearFunctional moment(std::string name, std::string dependent, std::string variable,
                                 Expr weight = Expr(1));
};

}  // namespace rgsym
