#include "rgsym/jet.hpp"

#include <algorithm>

#include "rgsym/poly.hpp"

namespace rgsym {

bool ModelSystem::is_independent(const std::string& n) const {
  return std::find(independents.begin(), independents.end(), n) != independents.end();
}

bool ModelSystem::is_dependent(const std::string& n) const {
  return std::any_of(dependents.begin(), dependents.end(), [&](const Dependent& d) { return d.name == n; });
}

bool ModelSystem::depends(const std::string& dep, const std::string& indep) const {
  for (const auto& d : dependents) {
    if (d.name != dep) continue;
    if (d.args.empty()) return is_independent(indep);
    return std::find(d.args.begin(), d.args.end(), indep) != d.args.end();
  }
  return false;
}

bool ModelSystem::is_jet(const Expr& e) const {
  return (e.is(Kind::Symbol) || e.is(Kind::Jet)) && is_dependent(e.name());
}

std::string jet_base(const Expr& v) { return v.name(); }

std::vector<std::string> jet_derivs(const Expr& v) {
  if (v.is(Kind::Jet)) return v.derivs();
  return {};
}

Expr prolong_jet(const Expr& v, const std::string& indep) {
  auto d = jet_derivs(v);
  d.push_back(indep);
  return jet(v.name(), std::move(d));
}

int jet_order(const Expr& v) { return static_cast<int>(jet_derivs(v).size()); }

Expr total_derivative(const Expr& e, const std::string& indep, const ModelSystem& sys, bool raw) {
  if (!sys.is_independent(indep)) throw Error("'" + indep + "' is not an independent variable of " + sys.name);
  auto vars = variables(e);
  if (raw) {
    std::vector<Expr> terms{diff_raw(e, symbol(indep))};
    for (const auto& v : vars)
      if (sys.is_jet(v) && sys.depends(v.name(), indep)) terms.push_back(prolong_jet(v, indep) * diff_raw(e, v));
    return add(std::move(terms));
  }
  RatFunc r = to_ratfunc(e);
  RatFunc out = rf_diff(r, symbol(indep));
  for (const auto& v : vars) {
    if (!sys.is_jet(v) || !sys.depends(v.name(), indep)) continue;
    RatFunc dv = rf_diff(r, v);
    if (dv.is_zero()) continue;
    out = rf_add(out, rf_mul(RatFunc{Poly::atom(prolong_jet(v, indep)), {}}, dv));
  }
  return from_ratfunc(out);
}

Expr total_derivative(const Expr& e, const std::vector<std::string>& indeps, const ModelSystem& sys, bool raw) {
  Expr r = e;
  for (const auto& i : indeps) r = total_derivative(r, i, sys, raw);
  return r;
}

// ---------------------------------------------------------------------------

FrameReducer::FrameReducer(const ModelSystem& sys, int max_depth, bool raw)
    : sys_(sys), max_depth_(max_depth), raw_(raw) {}

namespace {

// Returns K - L when L is a sub-multiset of K.
bool multiset_minus(const std::vector<std::string>& k, const std::vector<std::string>& l,
                    std::vector<std::string>& rest) {
  rest = k;
  for (const auto& x : l) {
    auto it = std::find(rest.begin(), rest.end(), x);
    if (it == rest.end()) return false;
    rest.erase(it);
  }
  return true;
}

}  // namespace

std::optional<Expr> FrameReducer::reduce_jet(const Expr& v) {
  if (!sys_.is_jet(v)) return std::nullopt;
  if (auto it = cache_.find(v); it != cache_.end()) return it->second;
  auto k = jet_derivs(v);
  for (const auto& [lhs, rhs] : sys_.leading) {
    if (lhs.name() != v.name()) continue;
    std::vector<std::string> rest;
    if (!multiset_minus(k, jet_derivs(lhs), rest)) continue;
    if (static_cast<int>(rest.size()) > max_depth_)
      throw ReductionError("frame reduction depth bound exceeded for " + to_string(v));
    Expr r;
    if (rest.empty()) {
      r = reduce(rhs);
    } else {
      std::string m = rest.back();
      auto lower = k;
      lower.erase(std::find(lower.begin(), lower.end(), m));
      Expr w = jet(v.name(), lower);
      auto rw = reduce_jet(w);
      r = reduce(total_derivative(*rw, m, sys_, raw_));
    }
    cache_.emplace(v, r);
    return r;
  }
  return std::nullopt;
}

Expr FrameReducer::reduce(const Expr& e) {
  static thread_local int depth = 0;
  struct Guard {
    int& d;
    explicit Guard(int& x) : d(x) { ++d; }
    ~Guard() { --d; }
  } guard(depth);
  if (depth > 4 * max_depth_ + 8) throw ReductionError("frame reduction does not terminate");
  Substitution s;
  for (const auto& v : variables(e)) {
    if (auto r = reduce_jet(v)) s.emplace(v, *r);
  }
  if (s.empty()) return raw_ ? e : simplify(e);
  return substitute(e, s, raw_);
}

Expr frame_reduce(const Expr& e, const ModelSystem& sys, int max_depth) {
  FrameReducer fr(sys, max_depth);
  return fr.reduce(e);
}

// ---------------------------------------------------------------------------

LinearFunctional LinearFunctional::point_eval(std::string name, std::string dependent,
                                              std::vector<std::string> derivs,
                                              std::map<std::string, Expr> point) {
  LinearFunctional f;
  f.name = std::move(name);
  f.type = Type::PointEval;
  f.dependent = std::move(dependent);
  f.derivs = std::move(derivs);
  f.point = std::move(point);
  return f;
}

LinearFunctional LinearFunctional::moment(std::string name, std::string dependent, std::string variable,
                                          Expr weight) {
  LinearFunctional f;
  f.name = std::move(name);
  f.type = Type::Moment;
  f.dependent = std::move(dependent);
  f.variable = std::move(variable);
  f.weight = std::move(weight);
  return f;
}

}  // namespace rgsym
