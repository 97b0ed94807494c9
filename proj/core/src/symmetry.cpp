#include "rgsym/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "rgsym/numerics.hpp"
#include "rgsym/poly.hpp"

namespace rgsym {

Expr Generator::coefficient(const std::string& var) const {
  if (auto it = xi.find(var); it != xi.end()) return it->second;
  if (auto it = eta.find(var); it != eta.end()) return it->second;
  return Expr();
}

std::vector<std::string> Generator::variables() const {
  std::vector<std::string> v;
  for (const auto& [k, c] : xi) v.push_back(k);
  for (const auto& [k, c] : eta) v.push_back(k);
  return v;
}

Generator Generator::simplified() const {
  Generator g{name, {}, {}};
  for (const auto& [k, c] : xi) {
    Expr s = simplify(c);
    if (!s.is_zero()) g.xi[k] = s;
  }
  for (const auto& [k, c] : eta) {
    Expr s = simplify(c);
    if (!s.is_zero()) g.eta[k] = s;
  }
  return g;
}

std::string_view status_name(InvarianceResult::Status s) {
  switch (s) {
    case InvarianceResult::Status::SymbolicZero: return "symbolic-zero";
    case InvarianceResult::Status::NumericOnly: return "numeric-only";
    case InvarianceResult::Status::NonZero: return "non-zero";
    case InvarianceResult::Status::Inconsistent: return "inconsistent";
  }
  return "?";
}

CanonicalGenerator canonical(const Generator& g, const ModelSystem& sys) {
  CanonicalGenerator c{g.name, {}};
  for (const auto& d : sys.dependents) {
    std::vector<Expr> terms{g.coefficient(d.name)};
    for (const auto& [i, xi] : g.xi)
      if (sys.depends(d.name, i)) terms.push_back(-(xi * jet(d.name, {i})));
    c.kappa[d.name] = simplify(add(std::move(terms)));
  }
  return c;
}

namespace {

// D_K kappa^a with memoisation on the multi-index prefix.
class KappaDerivatives {
 public:
  KappaDerivatives(const ModelSystem& sys, const std::map<std::string, Expr>& kappa, bool raw)
      : sys_(sys), kappa_(kappa), raw_(raw) {}

  Expr get(const std::string& dep, std::vector<std::string> derivs) {
    std::sort(derivs.begin(), derivs.end());
    auto key = std::make_pair(dep, derivs);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Expr r;
    if (derivs.empty()) {
      auto it = kappa_.find(dep);
      r = it == kappa_.end() ? Expr() : it->second;
    } else {
      std::string last = derivs.back();
      auto lower = derivs;
      lower.pop_back();
      r = total_derivative(get(dep, lower), last, sys_, raw_);
    }
    memo_.emplace(key, r);
    return r;
  }

 private:
  const ModelSystem& sys_;
  const std::map<std::string, Expr>& kappa_;
  bool raw_;
  std::map<std::pair<std::string, std::vector<std::string>>, Expr> memo_;
};

std::vector<Expr> equation_jets(const ModelSystem& sys) {
  std::set<Expr> s;
  for (const auto& f : sys.equations)
    for (const auto& v : variables(f))
      if (sys.is_jet(v) && v.is(Kind::Jet)) s.insert(v);
  return {s.begin(), s.end()};
}

void all_multi_indices(const std::vector<std::string>& vars, int order, std::vector<std::string>& cur,
                       std::size_t start, std::vector<std::vector<std::string>>& out) {
  if (static_cast<int>(cur.size()) == order) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < vars.size(); ++i) {
    cur.push_back(vars[i]);
    all_multi_indices(vars, order, cur, i, out);
    cur.pop_back();
  }
}

}  // namespace

ProlongedGenerator prolong(const Generator& g, const ModelSystem& sys, const std::vector<Expr>& jets, bool raw) {
  ProlongedGenerator pg;
  pg.base = g;
  std::map<std::string, Expr> kappa;
  for (const auto& d : sys.dependents) {
    std::vector<Expr> terms{g.coefficient(d.name)};
    for (const auto& [i, xi] : g.xi)
      if (sys.depends(d.name, i)) terms.push_back(-(xi * jet(d.name, {i})));
    kappa[d.name] = raw ? add(std::move(terms)) : simplify(add(std::move(terms)));
  }
  KappaDerivatives dk(sys, kappa, raw);
  for (const auto& j : jets) {
    if (!sys.is_jet(j) || !j.is(Kind::Jet)) continue;
    std::vector<Expr> terms{dk.get(j.name(), j.derivs())};
    for (const auto& [i, xi] : g.xi)
      if (sys.depends(j.name(), i)) terms.push_back(xi * prolong_jet(j, i));
    pg.zeta[j] = raw ? add(std::move(terms)) : simplify(add(std::move(terms)));
  }
  return pg;
}

ProlongedGenerator prolong(const Generator& g, const ModelSystem& sys, int order) {
  std::vector<Expr> jets;
  for (const auto& d : sys.dependents) {
    std::vector<std::string> vars;
    for (const auto& i : sys.independents)
      if (sys.depends(d.name, i)) vars.push_back(i);
    for (int k = 1; k <= order; ++k) {
      std::vector<std::vector<std::string>> idx;
      std::vector<std::string> cur;
      all_multi_indices(vars, k, cur, 0, idx);
      for (auto& m : idx) jets.push_back(jet(d.name, m));
    }
  }
  return prolong(g, sys, jets);
}

Expr apply(const ProlongedGenerator& pg, const Expr& f, bool raw) {
  std::vector<std::pair<Expr, Expr>> parts;  // variable, coefficient
  for (const auto& [k, c] : pg.base.xi) parts.emplace_back(symbol(k), c);
  for (const auto& [k, c] : pg.base.eta) parts.emplace_back(symbol(k), c);
  for (const auto& [j, c] : pg.zeta) parts.emplace_back(j, c);
  if (raw) {
    std::vector<Expr> terms;
    for (const auto& [v, c] : parts)
      if (depends_on(f, v)) terms.push_back(c * diff_raw(f, v));
    return add(std::move(terms));
  }
  RatFunc r = to_ratfunc(f);
  RatFunc out;
  for (const auto& [v, c] : parts) {
    if (!depends_on(f, v)) continue;
    RatFunc d = rf_diff(r, v);
    if (d.is_zero()) continue;
    out = rf_add(out, rf_mul(to_ratfunc(c), d));
  }
  return from_ratfunc(out);
}

Expr apply(const CanonicalGenerator& cg, const Expr& f, const ModelSystem& sys, bool raw) {
  std::map<std::string, Expr> kappa = cg.kappa;
  KappaDerivatives dk(sys, kappa, raw);
  std::vector<Expr> terms;
  RatFunc r = raw ? RatFunc{} : to_ratfunc(f);
  RatFunc out;
  for (const auto& v : variables(f)) {
    if (!sys.is_jet(v) || !cg.kappa.count(v.name())) continue;
    Expr c = dk.get(v.name(), jet_derivs(v));
    if (raw) {
      terms.push_back(c * diff_raw(f, v));
    } else {
      RatFunc d = rf_diff(r, v);
      if (!d.is_zero()) out = rf_add(out, rf_mul(to_ratfunc(c), d));
    }
  }
  return raw ? add(std::move(terms)) : from_ratfunc(out);
}

// ---------------------------------------------------------------------------

namespace {

struct Sampler {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> dist;
  Sampler(const SampleOptions& so) : rng(so.seed), dist(so.lo, so.hi) {}
  Bindings draw(const std::vector<Expr>& vars) {
    Bindings b;
    for (const auto& v : vars) b[v] = dist(rng);
    return b;
  }
};

std::vector<Expr> union_vars(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  std::set<Expr> s;
  for (const auto& e : a)
    for (const auto& v : variables(e)) s.insert(v);
  for (const auto& e : b)
    for (const auto& v : variables(e)) s.insert(v);
  return {s.begin(), s.end()};
}

// Compares symbolic residuals against their unnormalised counterparts at random points.
InvarianceResult classify(std::vector<Expr> sym, const std::vector<Expr>& raw, const SampleOptions& so) {
  InvarianceResult res;
  bool sym_zero = std::all_of(sym.begin(), sym.end(), [](const Expr& e) { return e.is_zero(); });
  auto vars = union_vars(sym, raw);
  Sampler s(so);
  double max_raw = 0;
  double max_mismatch = 0;
  int good = 0;
  for (int attempt = 0; good < so.points && attempt < 20 * so.points; ++attempt) {
    Bindings b = s.draw(vars);
    try {
      for (std::size_t i = 0; i < sym.size(); ++i) {
        double r = eval(raw[i], b);
        double c = eval(sym[i], b);
        if (!std::isfinite(r) || !std::isfinite(c)) throw DomainError("non-finite value", "residual");
        max_raw = std::max(max_raw, std::abs(r));
        max_mismatch = std::max(max_mismatch, std::abs(r - c) / (1 + std::abs(r)));
      }
      ++good;
    } catch (const DomainError&) {
    }
  }
  res.residuals = std::move(sym);
  res.max_numeric = max_raw;
  using S = InvarianceResult::Status;
  if (good == 0) {
    res.status = sym_zero ? S::SymbolicZero : S::NonZero;
  } else if (sym_zero) {
    res.status = max_raw <= so.tol ? S::SymbolicZero : S::Inconsistent;
  } else {
    res.status = max_raw <= so.tol ? S::NumericOnly : S::NonZero;
    if (max_mismatch > 1e-6 && max_raw > so.tol) res.status = S::Inconsistent;
  }
  return res;
}

}  // namespace

InvarianceResult check_invariance(const ModelSystem& sys, const Generator& g, const SampleOptions& so) {
  auto jets = equation_jets(sys);
  ProlongedGenerator pg = prolong(g, sys, jets);
  ProlongedGenerator pr = prolong(g, sys, jets, true);
  FrameReducer fr(sys);
  FrameReducer frr(sys, 32, true);
  std::vector<Expr> sym, raw;
  for (const auto& f : sys.equations) {
    sym.push_back(fr.reduce(apply(pg, f)));
    raw.push_back(frr.reduce(apply(pr, f, true)));
  }
  return classify(std::move(sym), raw, so);
}

InvarianceResult check_invariance(const ModelSystem& sys, const CanonicalGenerator& g, const SampleOptions& so) {
  FrameReducer fr(sys);
  FrameReducer frr(sys, 32, true);
  std::vector<Expr> sym, raw;
  for (const auto& f : sys.equations) {
    sym.push_back(fr.reduce(apply(g, f, sys)));
    raw.push_back(frr.reduce(apply(g, f, sys, true)));
  }
  return classify(std::move(sym), raw, so);
}

// ---------------------------------------------------------------------------
// determining system

namespace {

void monomials_rec(const std::vector<Expr>& vars, std::size_t i, int budget, bool per_var, int degree,
                   Expr cur, std::vector<Expr>& out) {
  if (i == vars.size()) {
    out.push_back(cur);
    return;
  }
  int maxk = per_var ? degree : budget;
  for (int k = 0; k <= maxk; ++k)
    monomials_rec(vars, i + 1, per_var ? budget : budget - k, per_var, degree, cur * pow(vars[i], Expr(k)), out);
}

std::vector<Expr> ansatz_monomials(const std::vector<Expr>& vars, int degree, bool per_var,
                                   const std::vector<Expr>& params, int pdeg) {
  std::vector<Expr> base;
  monomials_rec(vars, 0, degree, per_var, degree, Expr(1), base);
  std::vector<Expr> pm;
  monomials_rec(params, 0, pdeg, true, pdeg, Expr(1), pm);
  std::vector<Expr> out;
  for (const auto& p : pm)
    for (const auto& b : base) out.push_back(simplify(p * b));
  std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) {
    return compare(to_ratfunc(a).num.leading().m, to_ratfunc(b).num.leading().m) < 0;
  });
  return out;
}

const std::string kUnknownPrefix = "cdet";

using SparseRow = std::map<std::size_t, Rational>;

struct MonoLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }
};

class Eliminator {
 public:
  void add_row(SparseRow r) {
    for (;;) {
      auto it = std::find_if(r.begin(), r.end(), [&](const auto& kv) { return pivots_.count(kv.first) > 0; });
      if (it == r.end()) break;
      Rational f = it->second;
      for (const auto& [c, v] : pivots_.at(it->first)) {
        Rational nv = r[c] - f * v;
        if (nv == 0)
          r.erase(c);
        else
          r[c] = nv;
      }
    }
    if (r.empty()) return;
    std::size_t pc = r.begin()->first;
    Rational inv = 1 / r.begin()->second;
    for (auto& [c, v] : r) v *= inv;
    // keep existing pivot rows free of the new pivot column
    for (auto& [pcol, row] : pivots_) {
      auto jt = row.find(pc);
      if (jt == row.end()) continue;
      Rational f = jt->second;
      for (const auto& [c, v] : r) {
        Rational nv = row[c] - f * v;
        if (nv == 0)
          row.erase(c);
        else
          row[c] = nv;
      }
    }
    pivots_.emplace(pc, std::move(r));
  }

  std::vector<std::vector<Rational>> null_space(std::size_t n) const {
    std::vector<std::vector<Rational>> out;
    for (std::size_t f = 0; f < n; ++f) {
      if (pivots_.count(f)) continue;
      std::vector<Rational> v(n, Rational(0));
      v[f] = 1;
      for (const auto& [pc, row] : pivots_) {
        auto it = row.find(f);
        if (it != row.end()) v[pc] = -it->second;
      }
      out.push_back(std::move(v));
    }
    return out;
  }

  std::size_t rank() const { return pivots_.size(); }

  // columns below n are unknowns, column n holds the constant term
  std::optional<std::vector<Rational>> particular(std::size_t n) const {
    if (pivots_.count(n)) return std::nullopt;
    std::vector<Rational> x(n, Rational(0));
    for (const auto& [pc, row] : pivots_) {
      auto it = row.find(n);
      if (it != row.end()) x[pc] = -it->second;
    }
    return x;
  }

 private:
  std::map<std::size_t, SparseRow> pivots_;
};

Expr solve_by_ansatz(const ModelSystem& sys, const Generator& g, const std::string& dep) {
  std::vector<Expr> gvars;
  for (const auto& i : sys.independents) gvars.push_back(symbol(i));
  for (const auto& d : sys.dependents) gvars.push_back(symbol(d.name));
  std::vector<Expr> params;
  for (const auto& p : sys.parameters) params.push_back(symbol(p));
  auto jets = equation_jets(sys);
  FrameReducer fr(sys);
  for (int degree = 0; degree <= 3; ++degree) {
    auto ms = ansatz_monomials(gvars, degree, false, params, 1);
    std::vector<Expr> unknowns, terms;
    ExprMap<std::size_t> index;
    for (const auto& m : ms) {
      Expr c = symbol(kUnknownPrefix + std::to_string(unknowns.size()));
      index[c] = unknowns.size();
      unknowns.push_back(c);
      terms.push_back(c * m);
    }
    const std::size_t n = unknowns.size();
    Generator g2 = g;
    g2.eta[dep] = add(terms);
    ProlongedGenerator pg = prolong(g2, sys, jets);
    Eliminator elim;
    for (const auto& f : sys.equations) {
      RatFunc r = to_ratfunc(fr.reduce(apply(pg, f)));
      std::map<Monomial, SparseRow, MonoLess> rows;
      for (const auto& t : r.num.terms()) {
        Monomial rest;
        std::size_t col = n;
        for (const auto& [a, e] : t.m.factors) {
          auto it = index.find(a);
          if (it == index.end()) {
            rest.factors.emplace_back(a, e);
          } else {
            if (col != n || e != 1) throw SolveError("condition is not linear in the unknown coordinate");
            col = it->second;
          }
        }
        rows[rest][col] += t.c;
      }
      for (auto& [m, row] : rows) {
        std::erase_if(row, [](const auto& kv) { return kv.second == 0; });
        if (!row.empty()) elim.add_row(std::move(row));
      }
    }
    auto sol = elim.particular(n);
    if (!sol) continue;
    if (elim.rank() < n) throw SolveError("coordinate of " + dep + " is not determined uniquely");
    Substitution s;
    for (std::size_t k = 0; k < n; ++k) s[unknowns[k]] = num((*sol)[k]);
    return simplify(substitute(add(terms), s));
  }
  throw SolveError("no polynomial coordinate of " + dep + " up to degree 3");
}

}  // namespace

Expr solve_unknown_coordinate(const ModelSystem& sys, const Generator& g, const std::string& dep) {
  const Expr h = symbol("Hunknown");
  for (const auto& f : sys.equations)
    for (const auto& v : variables(f))
      if (v.is(Kind::Jet) && v.name() == dep) return solve_by_ansatz(sys, g, dep);
  Generator g2 = g;
  g2.eta[dep] = h;
  auto jets = equation_jets(sys);
  ProlongedGenerator pg = prolong(g2, sys, jets);
  FrameReducer fr(sys);
  std::optional<Expr> sol;
  for (const auto& f : sys.equations) {
    Expr r = fr.reduce(apply(pg, f));
    Expr r1 = diff(r, h);
    if (r1.is_zero()) {
      if (!r.is_zero()) throw SolveError("invariance fails independently of the unknown coordinate");
      continue;
    }
    Expr r0 = substitute(r, {{h, Expr(0)}});
    Expr s = simplify(-r0 / r1);
    if (depends_on(s, h)) throw SolveError("condition is not linear in the unknown coordinate");
    for (const auto& v : variables(s))
      if (v.is(Kind::Jet) && sys.is_jet(v))
        throw SolveError("unknown coordinate depends on derivatives: " + to_string(s));
    if (sol && !is_zero(*sol - s)) throw SolveError("equations give inconsistent coordinates");
    sol = s;
  }
  if (!sol) throw SolveError("no equation involves " + dep);
  return *sol;
}

DeterminingResult determining_system(const ModelSystem& sys, const Ansatz& ansatz) {
  DeterminingResult res;
  std::vector<Expr> gvars;
  for (const auto& i : sys.independents) gvars.push_back(symbol(i));
  for (const auto& d : sys.dependents) gvars.push_back(symbol(d.name));
  std::vector<Expr> params;
  for (const auto& p : ansatz.parameters) params.push_back(symbol(p));
  bool per_var = ansatz.mode == Ansatz::Mode::PerVariable;

  Generator g{"ansatz", {}, {}};
  std::vector<Expr> unknowns;
  auto build = [&](const std::string& coord, const std::string& var, bool is_xi) {
    int deg = ansatz.degree;
    if (auto it = ansatz.coordinate_degree.find(coord); it != ansatz.coordinate_degree.end()) deg = it->second;
    std::vector<Expr> ms;
    if (deg >= 0) ms = ansatz_monomials(gvars, deg, per_var, params, ansatz.parameter_degree);
    std::vector<Expr> terms;
    for (const auto& m : ms) {
      Expr c = symbol(kUnknownPrefix + std::to_string(unknowns.size()));
      unknowns.push_back(c);
      terms.push_back(c * m);
    }
    res.coordinates.push_back(coord);
    res.monomials.push_back(ms);
    if (!terms.empty()) (is_xi ? g.xi : g.eta)[var] = add(std::move(terms));
  };
  for (const auto& i : sys.independents) build("xi_" + i, i, true);
  for (const auto& d : sys.dependents) build("eta_" + d.name, d.name, false);
  res.unknowns = unknowns.size();

  ExprMap<std::size_t> index;
  for (std::size_t k = 0; k < unknowns.size(); ++k) index[unknowns[k]] = k;

  auto jets = equation_jets(sys);
  ProlongedGenerator pg = prolong(g, sys, jets);
  FrameReducer fr(sys);
  Eliminator elim;
  for (const auto& f : sys.equations) {
    RatFunc r = to_ratfunc(fr.reduce(apply(pg, f)));
    std::map<Monomial, SparseRow, MonoLess> rows;
    for (const auto& t : r.num.terms()) {
      Monomial rest;
      std::optional<std::size_t> col;
      for (const auto& [a, e] : t.m.factors) {
        auto it = index.find(a);
        if (it != index.end()) {
          if (col || e != 1) throw SolveError("determining equations are not linear in the unknowns");
          col = it->second;
        } else {
          rest.factors.emplace_back(a, e);
        }
      }
      if (!col) throw SolveError("inhomogeneous determining equation");
      rows[rest][*col] += t.c;
    }
    for (auto& [m, row] : rows) {
      std::erase_if(row, [](const auto& kv) { return kv.second == 0; });
      if (row.empty()) continue;
      ++res.equations;
      elim.add_row(std::move(row));
    }
  }
  res.rank = elim.rank();
  res.vectors = elim.null_space(res.unknowns);
  int n = 0;
  for (const auto& v : res.vectors) {
    Substitution s;
    for (std::size_t k = 0; k < unknowns.size(); ++k) s[unknowns[k]] = num(v[k]);
    Generator b{"Y" + std::to_string(++n), {}, {}};
    for (const auto& [k, c] : g.xi) b.xi[k] = substitute(c, s);
    for (const auto& [k, c] : g.eta) b.eta[k] = substitute(c, s);
    res.basis.push_back(b.simplified());
  }
  return res;
}

std::optional<std::vector<Rational>> express_in_basis(const DeterminingResult& r, const Generator& g) {
  std::vector<Rational> w(r.unknowns, Rational(0));
  std::size_t offset = 0;
  for (std::size_t ci = 0; ci < r.coordinates.size(); ++ci) {
    const std::string& coord = r.coordinates[ci];
    std::string var = coord.substr(coord.find('_') + 1);
    Expr c = coord.rfind("xi_", 0) == 0 ? (g.xi.count(var) ? g.xi.at(var) : Expr())
                                        : (g.eta.count(var) ? g.eta.at(var) : Expr());
    RatFunc rc = to_ratfunc(c);
    if (!rc.is_polynomial()) return std::nullopt;
    const auto& ms = r.monomials[ci];
    for (const auto& t : rc.num.terms()) {
      bool found = false;
      for (std::size_t k = 0; k < ms.size(); ++k) {
        RatFunc mk = to_ratfunc(ms[k]);
        if (mk.num.leading().m == t.m) {
          w[offset + k] = t.c;
          found = true;
          break;
        }
      }
      if (!found) return std::nullopt;
    }
    offset += ms.size();
  }
  // basis vectors are unit vectors on the free columns
  std::vector<Rational> lambda;
  std::vector<Rational> acc(r.unknowns, Rational(0));
  for (const auto& v : r.vectors) {
    std::size_t f = 0;
    while (f < v.size() && v[f] != 1) ++f;
    // the free column is the first unit entry not claimed by a pivot
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (v[k] == 1) {
        bool unit_elsewhere = false;
        for (const auto& u : r.vectors)
          if (&u != &v && u[k] != 0) unit_elsewhere = true;
        if (!unit_elsewhere) {
          f = k;
          break;
        }
      }
    }
    lambda.push_back(w[f]);
    for (std::size_t k = 0; k < v.size(); ++k) acc[k] += w[f] * v[k];
  }
  if (acc != w) return std::nullopt;
  return lambda;
}

// ---------------------------------------------------------------------------
// restriction on a particular solution

Restriction restrict_on_solution(const ModelSystem& sys, const GeneratorFamily& fam, const BoundarySurface& bs) {
  Restriction res;
  FrameReducer fr(sys);
  const Expr chi = symbol(bs.invariant_name);
  const Expr px = symbol(bs.profile_variable);

  std::vector<Expr> reduced;
  for (const auto& m : fam.members) {
    CanonicalGenerator c = canonical(m, sys);
    Expr k;
    for (const auto& d : sys.dependents)
      if (bs.data.count(d.name)) k = fr.reduce(c.kappa.at(d.name));
    reduced.push_back(k);
    res.trivial.push_back(k.is_zero());
  }

  // boundary values: u -> U (symbol), u_{x^k} -> U_{chi^k}, other derivatives vanish
  Substitution on_bd;
  Substitution to_u_form;
  on_bd[symbol(bs.variable)] = bs.value;
  for (const auto& [dep, profile] : bs.data) {
    Expr usym = symbol("U");
    on_bd[symbol(dep)] = usym;
    to_u_form[usym] = symbol(dep);
    for (const auto& r : reduced) {
      for (const auto& v : variables(r)) {
        if (!v.is(Kind::Jet) || v.name() != dep) continue;
        bool pure = std::all_of(v.derivs().begin(), v.derivs().end(),
                                [&](const std::string& d) { return d == bs.profile_variable; });
        if (!pure) {
          on_bd[v] = Expr(0);
          continue;
        }
        std::vector<std::string> cd(v.derivs().size(), bs.invariant_name);
        Expr dsym = jet("U", cd);
        on_bd[v] = dsym;
        if (bs.symbolic_derivative) {
          to_u_form[dsym] = dsym;
        } else {
          Expr d = profile;
          for (std::size_t k = 0; k < v.derivs().size(); ++k) d = diff(d, px);
          to_u_form[dsym] = substitute(d, {{px, chi}});
        }
      }
    }
  }
  to_u_form[px] = chi;

  for (const auto& r : reduced) {
    Expr c = substitute(substitute(r, on_bd), to_u_form);
    res.relation.push_back(c);
  }
  for (std::size_t j = 0; j < fam.members.size(); ++j)
    if (!res.trivial[j] && !res.relation[j].is_zero()) {
      res.pivot = static_cast<int>(j);
      break;
    }

  int n = 0;
  auto lifted = [&](const Expr& e) { return substitute(e, fam.lift); };
  for (std::size_t j = 0; j < fam.members.size(); ++j) {
    if (!res.trivial[j]) continue;
    Generator g = fam.members[j];
    g.name = "R" + std::to_string(++n);
    res.generators.push_back(g.simplified());
  }
  for (std::size_t j = 0; j < fam.members.size(); ++j) {
    if (res.trivial[j] || static_cast<int>(j) == res.pivot) continue;
    Generator g{"R" + std::to_string(++n), {}, {}};
    const Generator& xk = fam.members[j];
    if (res.pivot < 0) {
      g = xk;
      g.name = "R" + std::to_string(n);
      res.generators.push_back(g.simplified());
      continue;
    }
    const Generator& xp = fam.members[res.pivot];
    Expr ratio = lifted(simplify(res.relation[j] / res.relation[res.pivot]));
    for (const auto& v : sys.independents) {
      Expr c = xk.coefficient(v) - ratio * xp.coefficient(v);
      c = simplify(c);
      if (!c.is_zero()) g.xi[v] = c;
    }
    for (const auto& d : sys.dependents) {
      Expr c = simplify(xk.coefficient(d.name) - ratio * xp.coefficient(d.name));
      if (!c.is_zero()) g.eta[d.name] = c;
    }
    res.generators.push_back(g);
  }
  return res;
}

// ---------------------------------------------------------------------------
// prolongation on functionals

ModelSystem reduced_system(const std::vector<LinearFunctional>& fs, const FunctionalContext& ctx) {
  ModelSystem r;
  r.name = "functionals";
  r.independents = ctx.reduced_independents;
  for (const auto& f : fs) r.dependents.push_back({f.name, {}});
  return r;
}

namespace {

bool reduced_only(const std::vector<std::string>& ds, const FunctionalContext& ctx) {
  return std::all_of(ds.begin(), ds.end(), [&](const std::string& d) {
    return std::find(ctx.reduced_independents.begin(), ctx.reduced_independents.end(), d) !=
           ctx.reduced_independents.end();
  });
}

// Evaluates e on the support of point functionals: point values, parity,
// relations, then the direct jet -> functional mapping.
Expr on_support(const ModelSystem& sys, const Expr& e, const std::vector<LinearFunctional>& fs,
                const FunctionalContext& ctx, const ModelSystem& red, std::vector<Expr>& foreign,
                const std::optional<Expr>& keep = std::nullopt) {
  std::map<std::string, Expr> point;
  for (const auto& f : fs)
    if (f.type == LinearFunctional::Type::PointEval)
      for (const auto& [k, v] : f.point) point[k] = v;
  Substitution s;
  for (const auto& [k, v] : point) s[symbol(k)] = v;
  for (const auto& v : variables(e)) {
    if (!sys.is_jet(v) || (keep && v == *keep)) continue;
    auto ds = jet_derivs(v);
    std::vector<std::string> pd, rest;
    for (const auto& d : ds) (point.count(d) ? pd : rest).push_back(d);
    int par = 0;
    if (auto it = ctx.parity.find(v.name()); it != ctx.parity.end()) par = it->second;
    if ((par + static_cast<int>(pd.size())) % 2 == 1) {
      s[v] = Expr(0);
      continue;
    }
    bool done = false;
    for (const auto& [rj, rv] : ctx.relations) {
      if (rj.name() != v.name()) continue;
      std::vector<std::string> extra = ds;
      bool sub = true;
      for (const auto& d : jet_derivs(rj)) {
        auto it = std::find(extra.begin(), extra.end(), d);
        if (it == extra.end()) {
          sub = false;
          break;
        }
        extra.erase(it);
      }
      if (!sub || !reduced_only(extra, ctx)) continue;
      s[v] = total_derivative(rv, extra, red);
      done = true;
      break;
    }
    if (done) continue;
    for (const auto& f : fs) {
      if (f.type != LinearFunctional::Type::PointEval || f.dependent != v.name()) continue;
      auto fd = f.derivs;
      std::sort(fd.begin(), fd.end());
      auto spd = pd;
      std::sort(spd.begin(), spd.end());
      if (fd != spd || !reduced_only(rest, ctx)) continue;
      s[v] = jet(f.name, rest);
      done = true;
      break;
    }
    if (!done) foreign.push_back(v);
  }
  return substitute(e, s);
}

Expr moment_prolongation(const ModelSystem& sys, const Expr& kappa, const LinearFunctional& f,
                         const std::vector<LinearFunctional>& fs, std::vector<Expr>& foreign) {
  const Expr var = symbol(f.variable);
  std::vector<Expr> jets;
  for (const auto& v : variables(kappa))
    if (sys.is_jet(v) && v.name() == f.dependent) jets.push_back(v);
  Expr linear_part;
  std::vector<Expr> out;
  for (const auto& j : jets) {
    Expr a = diff(kappa, j);
    for (const auto& v : variables(a))
      if (sys.is_jet(v) && v.name() == f.dependent) {
        foreign.push_back(j);
        return Expr();
      }
    linear_part += a * j;
    auto ds = jet_derivs(j);
    int k = static_cast<int>(std::count(ds.begin(), ds.end(), f.variable));
    std::vector<std::string> rest;
    for (const auto& d : ds)
      if (d != f.variable) rest.push_back(d);
    Expr w = simplify(f.weight * a);
    for (int i = 0; i < k; ++i) w = diff(w, var);
    if (k % 2 == 1) w = -w;
    RatFunc rw = to_ratfunc(w);
    for (const auto& [fac, m] : rw.den)
      for (const auto& t : fac.terms())
        if (t.m.degree_in(var) > 0) {
          foreign.push_back(j);
          return Expr();
        }
    // split the numerator by powers of the integration variable
    std::map<int, std::vector<Term>> by_power;
    for (const auto& t : rw.num.terms()) {
      int p = t.m.degree_in(var);
      Monomial m;
      for (const auto& fe : t.m.factors)
        if (!(fe.first == var)) m.factors.push_back(fe);
      by_power[p].push_back({m, t.c});
    }
    RatFunc den_only{Poly(1), rw.den};
    for (auto& [p, terms] : by_power) {
      Expr coef = from_ratfunc(rf_mul({Poly::from_terms(terms), {}}, den_only));
      Expr weight = simplify(pow(var, Expr(p)));
      const LinearFunctional* target = nullptr;
      for (const auto& g : fs)
        if (g.type == LinearFunctional::Type::Moment && g.dependent == f.dependent && g.variable == f.variable &&
            is_zero(g.weight - weight))
          target = &g;
      if (!target) {
        foreign.push_back(jet(f.dependent, ds));
        continue;
      }
      out.push_back(coef * jet(target->name, rest));
    }
  }
  if (!is_zero(kappa - linear_part)) foreign.push_back(symbol(f.dependent));
  return simplify(add(std::move(out)));
}

}  // namespace

FunctionalGenerator prolong_to_functional(const ModelSystem& sys, const CanonicalGenerator& g,
                                          const std::vector<LinearFunctional>& fs, const FunctionalContext& ctx) {
  FunctionalGenerator out;
  out.canonical.name = g.name;
  ModelSystem red = reduced_system(fs, ctx);
  for (const auto& f : fs) {
    auto it = g.kappa.find(f.dependent);
    Expr kappa = it == g.kappa.end() ? Expr() : it->second;
    if (f.type == LinearFunctional::Type::PointEval) {
      Expr e = total_derivative(kappa, f.derivs, sys);
      out.canonical.kappa[f.name] = on_support(sys, e, fs, ctx, red, out.foreign);
    } else {
      out.canonical.kappa[f.name] = moment_prolongation(sys, kappa, f, fs, out.foreign);
    }
  }
  if (!out.closed()) return out;

  // point form: kappa^f = eta^f - xi^s f_s with jet-free coordinates
  Generator pt{g.name, {}, {}};
  bool ok = true;
  for (const auto& s : ctx.reduced_independents) {
    std::optional<Expr> xi;
    for (const auto& f : fs) {
      Expr c = simplify(-diff(out.canonical.kappa[f.name], jet(f.name, {s})));
      if (xi && !is_zero(*xi - c)) ok = false;
      xi = c;
    }
    if (xi && !xi->is_zero()) pt.xi[s] = *xi;
  }
  for (const auto& f : fs) {
    Expr eta = out.canonical.kappa[f.name];
    for (const auto& [s, c] : pt.xi) eta += c * jet(f.name, {s});
    eta = simplify(eta);
    for (const auto& v : variables(eta))
      if (red.is_jet(v) && v.is(Kind::Jet)) ok = false;
    if (!eta.is_zero()) pt.eta[f.name] = eta;
  }
  for (const auto& [s, c] : pt.xi)
    for (const auto& v : variables(c))
      if (red.is_jet(v) && v.is(Kind::Jet)) ok = false;
  if (ok) out.point = pt;
  return out;
}

FunctionalGenerator prolong_to_functional(const ModelSystem& sys, const Generator& g,
                                          const std::vector<LinearFunctional>& fs, const FunctionalContext& ctx) {
  return prolong_to_functional(sys, canonical(g, sys), fs, ctx);
}

std::vector<std::pair<Expr, Expr>> derive_axis_relations(const ModelSystem& sys,
                                                         const std::vector<AxisRelationSpec>& specs,
                                                         const std::vector<LinearFunctional>& fs,
                                                         FunctionalContext ctx) {
  ModelSystem red = reduced_system(fs, ctx);
  std::vector<std::pair<Expr, Expr>> out;
  const Expr t = symbol("Tunknown");
  for (const auto& sp : specs) {
    if (sp.equation < 0 || sp.equation >= static_cast<int>(sys.equations.size()))
      throw SolveError("axis relation refers to a missing equation");
    Expr e = total_derivative(sys.equations[sp.equation], sp.derivs, sys);
    std::vector<Expr> foreign;
    e = on_support(sys, e, fs, ctx, red, foreign, sp.target);
    if (!foreign.empty()) throw SolveError("axis relation for " + to_string(sp.target) + " leaves " + to_string(foreign[0]));
    e = substitute(e, {{sp.target, t}});
    Expr e1 = diff(e, t);
    if (e1.is_zero() || depends_on(e1, t)) throw SolveError("cannot solve for " + to_string(sp.target));
    Expr v = simplify(-substitute(e, {{t, Expr(0)}}) / e1);
    out.emplace_back(sp.target, v);
    ctx.relations.emplace_back(sp.target, v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// invariants, flows, invariant solutions

namespace {

Expr act(const Generator& g, const Expr& j, bool raw) {
  std::vector<Expr> terms;
  for (const auto& v : g.variables()) {
    Expr s = symbol(v);
    if (!depends_on(j, s)) continue;
    terms.push_back(g.coefficient(v) * (raw ? diff_raw(j, s) : diff(j, s)));
  }
  return raw ? add(std::move(terms)) : simplify(add(std::move(terms)));
}

}  // namespace

Expr verify_invariant(const Generator& g, const Expr& invariant) { return act(g, invariant, false); }

bool is_invariant(const Generator& g, const Expr& invariant, const SampleOptions& so) {
  Expr r = act(g, invariant, false);
  InvarianceResult c = classify({r}, {act(g, invariant, true)}, so);
  return c.status == InvarianceResult::Status::SymbolicZero;
}

Point flow(const Generator& g, const Point& p, double a, double tol) {
  auto vars = g.variables();
  Bindings fixed;
  for (const auto& [k, v] : p) fixed[symbol(k)] = v;
  numeric::State y0;
  std::vector<Expr> syms, comps;
  for (const auto& v : vars) {
    auto it = p.find(v);
    if (it == p.end()) throw SolveError("flow start point lacks coordinate " + v);
    y0.push_back(it->second);
    syms.push_back(symbol(v));
    comps.push_back(g.coefficient(v));
  }
  numeric::Rhs rhs = [&](double, const numeric::State& y, numeric::State& dy) {
    Bindings b = fixed;
    for (std::size_t i = 0; i < y.size(); ++i) b[syms[i]] = y[i];
    for (std::size_t i = 0; i < y.size(); ++i) dy[i] = eval(comps[i], b);
  };
  numeric::OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  auto r = numeric::ode_solve(rhs, 0.0, y0, a, {}, opt);
  Point out = p;
  for (std::size_t i = 0; i < vars.size(); ++i) out[vars[i]] = r.y_end[i];
  return out;
}

InvariantSolution::InvariantSolution(std::vector<InvariantRelation> rel, std::string variable, double start,
                                     Point fixed, Point start_values)
    : rel_(std::move(rel)),
      var_(std::move(variable)),
      start_(start),
      fixed_(std::move(fixed)),
      start_values_(std::move(start_values)) {
  for (const auto& r : rel_) drel_.push_back(diff(r.invariant, symbol(r.unknown)));
}

Point InvariantSolution::at(double s, int substeps) const {
  Point cur = fixed_;
  for (const auto& [k, v] : start_values_) cur[k] = v;
  cur[var_] = start_;
  std::vector<double> sign0;
  for (const auto& d : drel_) sign0.push_back(eval(d, cur));
  for (int k = 1; k <= substeps; ++k) {
    double sk = start_ + (s - start_) * k / substeps;
    cur[var_] = sk;
    for (std::size_t i = 0; i < rel_.size(); ++i) {
      const auto& r = rel_[i];
      double target = r.boundary(cur);
      Point work = cur;
      auto g = [&](double u) {
        work[r.unknown] = u;
        return eval(r.invariant, work) - target;
      };
      double u0 = cur.at(r.unknown);
      double a = u0 - 1e-3 * (1 + std::abs(u0));
      double b = u0 + 1e-3 * (1 + std::abs(u0));
      if (!numeric::expand_bracket(g, a, b, 80))
        throw SolveError("root not bracketed for " + r.unknown + " at " + var_ + "=" + std::to_string(sk) +
                         " (past singularity)");
      numeric::RootOptions ro;
      ro.xtol = 1e-15;
      auto root = numeric::brent(g, a, b, ro);
      work[r.unknown] = root.x;
      double sg = eval(drel_[i], work);
      if (sign0[i] != 0 && (sg > 0) != (sign0[i] > 0))
        throw SolveError("invariant relation for " + r.unknown + " degenerates at " + var_ + "=" +
                         std::to_string(sk) + " (past singularity)");
      cur[r.unknown] = root.x;
    }
  }
  return cur;
}

InvariantSolution invariant_solution(std::vector<InvariantRelation> rel, std::string variable, double start,
                                     Point fixed, Point start_values) {
  return InvariantSolution(std::move(rel), std::move(variable), start, std::move(fixed), std::move(start_values));
}

}  // namespace rgsym
