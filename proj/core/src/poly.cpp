#include "rgsym/poly.hpp"

#include <algorithm>
#include <unordered_map>

namespace rgsym {

namespace detail {
Expr fn_derivative_expr(Fn f, const Expr& a);
}

// ---------------------------------------------------------------------------
// monomials

namespace {
// Atoms that sort first in Expr order are the leading variables.
std::strong_ordering atom_order(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return std::strong_ordering::equal;
  return b <=> a;
}
}  // namespace

int Monomial::degree() const {
  int d = 0;
  for (const auto& f : factors) d += f.second;
  return d;
}

int Monomial::degree_in(const Expr& a) const {
  for (const auto& f : factors)
    if (f.first == a) return f.second;
  return 0;
}

std::size_t Monomial::hash() const {
  std::size_t h = 0x51ed27;
  for (const auto& [a, e] : factors) {
    h ^= a.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h = h * 31 + static_cast<std::size_t>(e);
  }
  return h;
}

int compare(const Monomial& a, const Monomial& b) {
  const auto& x = a.factors;
  const auto& y = b.factors;
  std::size_t i = 0;
  for (; i < x.size() && i < y.size(); ++i) {
    if (x[i].first.get() != y[i].first.get()) {
      auto c = atom_order(x[i].first, y[i].first);
      if (c > 0) return 1;
      if (c < 0) return -1;
    }
    if (x[i].second != y[i].second) return x[i].second > y[i].second ? 1 : -1;
  }
  if (x.size() == y.size()) return 0;
  return x.size() > y.size() ? 1 : -1;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial r;
  r.factors.reserve(a.factors.size() + b.factors.size());
  std::size_t i = 0, j = 0;
  while (i < a.factors.size() && j < b.factors.size()) {
    const auto& x = a.factors[i];
    const auto& y = b.factors[j];
    auto c = atom_order(x.first, y.first);
    if (c == 0) {
      r.factors.emplace_back(x.first, x.second + y.second);
      ++i;
      ++j;
    } else if (c > 0) {
      r.factors.push_back(x);
      ++i;
    } else {
      r.factors.push_back(y);
      ++j;
    }
  }
  for (; i < a.factors.size(); ++i) r.factors.push_back(a.factors[i]);
  for (; j < b.factors.size(); ++j) r.factors.push_back(b.factors[j]);
  return r;
}

bool divides(const Monomial& d, const Monomial& m) {
  std::size_t j = 0;
  for (const auto& [a, e] : d.factors) {
    while (j < m.factors.size() && atom_order(m.factors[j].first, a) > 0) ++j;
    if (j == m.factors.size() || !(m.factors[j].first == a) || m.factors[j].second < e) return false;
    ++j;
  }
  return true;
}

Monomial quotient(const Monomial& m, const Monomial& d) {
  Monomial r;
  std::size_t j = 0;
  for (const auto& [a, e] : m.factors) {
    int k = e;
    if (j < d.factors.size() && d.factors[j].first == a) {
      k -= d.factors[j].second;
      ++j;
    }
    if (k > 0) r.factors.emplace_back(a, k);
  }
  return r;
}

Monomial gcd(const Monomial& a, const Monomial& b) {
  Monomial r;
  std::size_t j = 0;
  for (const auto& [x, e] : a.factors) {
    while (j < b.factors.size() && atom_order(b.factors[j].first, x) > 0) ++j;
    if (j < b.factors.size() && b.factors[j].first == x)
      r.factors.emplace_back(x, std::min(e, b.factors[j].second));
  }
  return r;
}

// ---------------------------------------------------------------------------
// polynomials

namespace {

struct MonoHash {
  std::size_t operator()(const Monomial& m) const { return m.hash(); }
};

void sort_terms(std::vector<Term>& t) {
  std::sort(t.begin(), t.end(), [](const Term& a, const Term& b) { return compare(a.m, b.m) > 0; });
}

}  // namespace

Poly::Poly(const Rational& c) {
  if (c != 0) terms_.push_back({Monomial{}, c});
}

Poly Poly::atom(const Expr& a, int exp) {
  Poly p;
  p.terms_.push_back({Monomial{{{a, exp}}}, Rational(1)});
  return p;
}

Poly Poly::from_terms(std::vector<Term> terms) {
  std::unordered_map<Monomial, Rational, MonoHash> acc;
  acc.reserve(terms.size());
  for (auto& t : terms) {
    auto [it, fresh] = acc.try_emplace(t.m, t.c);
    if (!fresh) it->second += t.c;
  }
  Poly p;
  p.terms_.reserve(acc.size());
  for (auto& [m, c] : acc)
    if (c != 0) p.terms_.push_back({m, c});
  sort_terms(p.terms_);
  return p;
}

Rational Poly::constant_value() const {
  if (terms_.empty()) return 0;
  return terms_[0].c;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r;
  r.terms_.reserve(terms_.size() + o.terms_.size());
  std::size_t i = 0, j = 0;
  while (i < terms_.size() && j < o.terms_.size()) {
    int c = compare(terms_[i].m, o.terms_[j].m);
    if (c == 0) {
      Rational s = terms_[i].c + o.terms_[j].c;
      if (s != 0) r.terms_.push_back({terms_[i].m, s});
      ++i;
      ++j;
    } else if (c > 0) {
      r.terms_.push_back(terms_[i++]);
    } else {
      r.terms_.push_back(o.terms_[j++]);
    }
  }
  for (; i < terms_.size(); ++i) r.terms_.push_back(terms_[i]);
  for (; j < o.terms_.size(); ++j) r.terms_.push_back(o.terms_[j]);
  return r;
}

Poly Poly::operator-() const {
  Poly r = *this;
  for (auto& t : r.terms_) t.c = -t.c;
  return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Rational& c) const {
  if (c == 0) return {};
  Poly r = *this;
  for (auto& t : r.terms_) t.c *= c;
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  if (terms_.empty() || o.terms_.empty()) return {};
  if (o.is_constant()) return *this * o.terms_[0].c;
  if (is_constant()) return o * terms_[0].c;
  if (o.terms_.size() == 1) {
    Poly r;
    r.terms_.reserve(terms_.size());
    for (const auto& t : terms_) r.terms_.push_back({t.m * o.terms_[0].m, t.c * o.terms_[0].c});
    return r;  // multiplying by a monomial preserves the order
  }
  if (terms_.size() == 1) return o * *this;
  std::unordered_map<Monomial, Rational, MonoHash> acc;
  acc.reserve(terms_.size() * o.terms_.size());
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) {
      Rational c = a.c * b.c;
      auto [it, fresh] = acc.try_emplace(a.m * b.m, c);
      if (!fresh) it->second += c;
    }
  Poly r;
  r.terms_.reserve(acc.size());
  for (auto& [m, c] : acc)
    if (c != 0) r.terms_.push_back({m, c});
  sort_terms(r.terms_);
  return r;
}

Poly Poly::power(int n) const {
  Poly r(1);
  Poly b = *this;
  while (n > 0) {
    if (n & 1) r = r * b;
    n >>= 1;
    if (n) b = b * b;
  }
  return r;
}

bool operator==(const Poly& a, const Poly& b) { return compare(a, b) == 0; }

int compare(const Poly& a, const Poly& b) {
  std::size_t n = std::min(a.terms_.size(), b.terms_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a.terms_[i].m, b.terms_[i].m); c != 0) return c;
    if (int c = cmp(a.terms_[i].c, b.terms_[i].c); c != 0) return c > 0 ? 1 : -1;
  }
  if (a.terms_.size() == b.terms_.size()) return 0;
  return a.terms_.size() > b.terms_.size() ? 1 : -1;
}

bool divide_exact(const Poly& p, const Poly& d, Poly& q) {
  if (d.is_zero()) return false;
  if (d.is_constant()) {
    q = p * Rational(1 / d.constant_value());
    return true;
  }
  std::vector<Term> quo;
  Poly r = p;
  const Term& ld = d.leading();
  std::size_t guard = 0;
  while (!r.is_zero()) {
    const Term& lr = r.leading();
    if (!divides(ld.m, lr.m)) return false;
    Term t{quotient(lr.m, ld.m), lr.c / ld.c};
    Poly tp = Poly::from_terms({t});
    r = r - d * tp;
    quo.push_back(std::move(t));
    if (++guard > 200000) return false;
  }
  q = Poly::from_terms(std::move(quo));
  return true;
}

// ---------------------------------------------------------------------------
// rational functions

namespace {

bool is_root_atom(const Expr& a, unsigned long& q) {
  if (!a.is(Kind::Pow) || !a.exponent().is_number()) return false;
  const Rational& e = a.exponent().value();
  if (e.get_num() != 1 || e.get_den() == 1) return false;
  q = e.get_den().get_ui();
  return true;
}

struct Factored {
  Rational c = 1;
  Monomial m;
  Poly p;  // primitive, positive leading coefficient, no monomial content
};

Factored factor_content(const Poly& in) {
  Factored f;
  const auto& ts = in.terms();
  Monomial g = ts[0].m;
  for (std::size_t i = 1; i < ts.size() && !g.empty(); ++i) g = gcd(g, ts[i].m);
  mpz_class num_gcd = 0;
  mpz_class den_lcm = 1;
  for (const auto& t : ts) {
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), t.c.get_num().get_mpz_t());
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), t.c.get_den().get_mpz_t());
  }
  Rational content(num_gcd, den_lcm);
  content.canonicalize();
  if (ts[0].c < 0) content = -content;
  std::vector<Term> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back({quotient(t.m, g), t.c / content});
  f.c = content;
  f.m = std::move(g);
  f.p = Poly::from_terms(std::move(out));
  return f;
}

RatFunc make_rf(Poly num, std::vector<std::pair<Poly, int>> raw_den);

RatFunc atom_rf(const Expr& a) { return {Poly::atom(a), {}}; }

RatFunc poly_rf(Poly p) { return {std::move(p), {}}; }

const Expr& div_zero_atom() {
  static const Expr z = pow(Expr(0), Expr(-1));
  return z;
}

// Rewrites r^k with k >= q for root atoms r = b^(1/q) in the numerator.
bool reduce_numerator_roots(RatFunc& r) {
  bool any = false;
  for (const auto& t : r.num.terms()) {
    for (const auto& [a, e] : t.m.factors) {
      unsigned long q;
      if (e >= 2 && is_root_atom(a, q) && static_cast<unsigned long>(e) >= q) any = true;
    }
  }
  if (!any) return false;
  std::vector<Term> keep;
  RatFunc acc{Poly(), {}};
  for (const auto& t : r.num.terms()) {
    Monomial rest;
    RatFunc extra{Poly(1), {}};
    bool hit = false;
    for (const auto& [a, e] : t.m.factors) {
      unsigned long q;
      if (is_root_atom(a, q) && static_cast<unsigned long>(e) >= q) {
        int k = e / static_cast<int>(q);
        int rem = e % static_cast<int>(q);
        if (rem) rest.factors.emplace_back(a, rem);
        extra = rf_mul(extra, rf_pow(to_ratfunc(a.base()), k));
        hit = true;
      } else {
        rest.factors.emplace_back(a, e);
      }
    }
    if (!hit) {
      keep.push_back(t);
      continue;
    }
    Poly head = Poly::from_terms({Term{rest, t.c}});
    acc = rf_add(acc, rf_mul(poly_rf(head), extra));
  }
  RatFunc base{Poly::from_terms(std::move(keep)), r.den};
  RatFunc den_only{Poly(1), r.den};
  r = rf_add(base, rf_mul(acc, den_only));
  return true;
}

RatFunc make_rf(Poly num, std::vector<std::pair<Poly, int>> raw_den) {
  if (num.is_zero()) return {};
  std::vector<std::pair<Poly, int>> den;
  std::vector<std::pair<RatFunc, int>> root_bases;
  auto push_factor = [&](const Poly& f, int m) {
    for (auto& [g, k] : den) {
      if (g == f) {
        k += m;
        return;
      }
    }
    den.emplace_back(f, m);
  };
  for (auto& [f, m] : raw_den) {
    if (m == 0) continue;
    if (f.is_zero()) {
      num = num * Poly::atom(div_zero_atom(), m);
      continue;
    }
    if (f.is_constant()) {
      Rational c = f.constant_value();
      Rational cm = 1;
      for (int i = 0; i < m; ++i) cm *= c;
      num = num * Rational(1 / cm);
      continue;
    }
    Factored fc = factor_content(f);
    Rational cm = 1;
    for (int i = 0; i < m; ++i) cm *= fc.c;
    num = num * Rational(1 / cm);
    for (const auto& [a, e] : fc.m.factors) push_factor(Poly::atom(a), e * m);
    if (!fc.p.is_constant()) push_factor(fc.p, m);
  }
  // root atoms in the denominator: r^q = b
  RatFunc extra_den{Poly(1), {}};
  bool have_extra = false;
  for (auto& [f, m] : den) {
    if (f.terms().size() != 1) continue;
    const auto& fm = f.terms()[0].m.factors;
    if (fm.size() != 1 || fm[0].second != 1) continue;
    unsigned long q;
    if (is_root_atom(fm[0].first, q) && static_cast<unsigned long>(m) >= q) {
      int k = m / static_cast<int>(q);
      m -= k * static_cast<int>(q);
      extra_den = rf_mul(extra_den, rf_pow(to_ratfunc(fm[0].first.base()), k));
      have_extra = true;
    }
  }
  std::erase_if(den, [](const auto& fm) { return fm.second == 0; });
  std::sort(den.begin(), den.end(), [](const auto& a, const auto& b) { return compare(a.first, b.first) > 0; });
  RatFunc r{std::move(num), std::move(den)};
  reduce_numerator_roots(r);
  for (auto& [f, m] : r.den) {
    Poly q;
    while (m > 0 && divide_exact(r.num, f, q)) {
      r.num = std::move(q);
      --m;
    }
  }
  std::erase_if(r.den, [](const auto& fm) { return fm.second == 0; });
  if (r.num.is_zero()) return {};
  if (have_extra) return rf_div(r, extra_den);
  return r;
}

// Factors of a with the multiplicities of b removed; b's factors must be a subset.
std::vector<std::pair<Poly, int>> den_union(const std::vector<std::pair<Poly, int>>& a,
                                            const std::vector<std::pair<Poly, int>>& b) {
  std::vector<std::pair<Poly, int>> u = a;
  for (const auto& [f, m] : b) {
    bool found = false;
    for (auto& [g, k] : u) {
      if (g == f) {
        k = std::max(k, m);
        found = true;
        break;
      }
    }
    if (!found) u.emplace_back(f, m);
  }
  return u;
}

Poly cofactor(const std::vector<std::pair<Poly, int>>& all, const std::vector<std::pair<Poly, int>>& part) {
  Poly r(1);
  for (const auto& [f, m] : all) {
    int k = m;
    for (const auto& [g, j] : part)
      if (g == f) {
        k -= j;
        break;
      }
    if (k > 0) r = r * f.power(k);
  }
  return r;
}

}  // namespace

RatFunc rf_add(const RatFunc& a, const RatFunc& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.den.empty() && b.den.empty()) {
    RatFunc r{a.num + b.num, {}};
    reduce_numerator_roots(r);
    return r;
  }
  auto u = den_union(a.den, b.den);
  Poly n = a.num * cofactor(u, a.den) + b.num * cofactor(u, b.den);
  return make_rf(std::move(n), std::move(u));
}

RatFunc rf_mul(const RatFunc& a, const RatFunc& b) {
  if (a.is_zero() || b.is_zero()) return {};
  if (a.den.empty() && b.den.empty()) {
    RatFunc r{a.num * b.num, {}};
    reduce_numerator_roots(r);
    return r;
  }
  auto d = a.den;
  d.insert(d.end(), b.den.begin(), b.den.end());
  return make_rf(a.num * b.num, std::move(d));
}

RatFunc rf_div(const RatFunc& a, const RatFunc& b) {
  if (a.is_zero()) return {};
  std::vector<std::pair<Poly, int>> d = a.den;
  d.emplace_back(b.num, 1);
  Poly n = a.num;
  for (const auto& [f, m] : b.den) n = n * f.power(m);
  return make_rf(std::move(n), std::move(d));
}

RatFunc rf_pow(const RatFunc& a, int n) {
  if (n == 0) return {Poly(1), {}};
  if (n < 0) {
    if (a.is_zero()) return rf_div({Poly(1), {}}, a);
    Poly num(1);
    for (const auto& [f, m] : a.den) num = num * f.power(m * -n);
    return make_rf(std::move(num), {{a.num, -n}});
  }
  RatFunc r{a.num.power(n), a.den};
  for (auto& [f, m] : r.den) m *= n;
  if (!r.den.empty()) return make_rf(r.num, r.den);
  reduce_numerator_roots(r);
  return r;
}

// ---------------------------------------------------------------------------
// conversion

namespace {

RatFunc to_rf_rec(const Expr& e, ExprMap<RatFunc>& memo);

RatFunc pow_rf(const Expr& e, ExprMap<RatFunc>& memo) {
  const Expr& b = e.base();
  const Expr& x = e.exponent();
  if (x.is_number() && x.value().get_den() == 1) {
    RatFunc rb = to_rf_rec(b, memo);
    long k = x.value().get_num().get_si();
    if (rb.is_zero() && k < 0) return {Poly::atom(div_zero_atom(), static_cast<int>(-k)), {}};
    return rf_pow(rb, static_cast<int>(k));
  }
  Expr B = from_ratfunc(to_rf_rec(b, memo));
  if (x.is_number()) {
    const Rational& p = x.value();
    Expr folded = pow(B, x);
    if (!folded.is(Kind::Pow)) return to_rf_rec(folded, memo);
    if (B.is_number() && folded.base().is_number() && !(folded.base() == B)) return to_rf_rec(folded, memo);
    Expr root = pow(B, num(Rational(1, 1) / Rational(p.get_den())));
    if (!root.is(Kind::Pow)) return rf_pow(to_rf_rec(root, memo), static_cast<int>(p.get_num().get_si()));
    return rf_pow(atom_rf(root), static_cast<int>(p.get_num().get_si()));
  }
  Expr X = simplify(x);
  Expr folded = pow(B, X);
  if (!folded.is(Kind::Pow)) return to_rf_rec(folded, memo);
  return atom_rf(folded);
}

RatFunc to_rf_rec(const Expr& e, ExprMap<RatFunc>& memo) {
  switch (e.kind()) {
    case Kind::Number:
      return {Poly(e.value()), {}};
    case Kind::Symbol:
    case Kind::Jet:
      return atom_rf(e);
    default:
      break;
  }
  if (auto it = memo.find(e); it != memo.end()) return it->second;
  RatFunc r;
  switch (e.kind()) {
    case Kind::Add:
      for (const auto& a : e.args()) r = rf_add(r, to_rf_rec(a, memo));
      break;
    case Kind::Mul:
      r = {Poly(1), {}};
      for (const auto& a : e.args()) {
        r = rf_mul(r, to_rf_rec(a, memo));
        if (r.is_zero()) break;
      }
      break;
    case Kind::Pow:
      if (e == div_zero_atom()) {
        r = atom_rf(e);
        break;
      }
      r = pow_rf(e, memo);
      break;
    case Kind::Func: {
      Expr a = from_ratfunc(to_rf_rec(e.args()[0], memo));
      Expr f = call(e.fn(), a);
      r = f.is(Kind::Func) ? atom_rf(f) : to_rf_rec(f, memo);
      break;
    }
    default:
      break;
  }
  memo.emplace(e, r);
  return r;
}

Expr term_expr(const Term& t) {
  std::vector<Expr> fs;
  fs.reserve(t.m.factors.size() + 1);
  fs.push_back(num(t.c));
  for (const auto& [a, k] : t.m.factors) fs.push_back(pow(a, Expr(k)));
  return mul(std::move(fs));
}

}  // namespace

Expr from_poly(const Poly& p) {
  if (p.is_zero()) return Expr();
  if (p.terms().size() == 1) return term_expr(p.terms()[0]);
  std::vector<Expr> ts;
  ts.reserve(p.terms().size());
  for (const auto& t : p.terms()) ts.push_back(term_expr(t));
  return add(std::move(ts));
}

Expr from_ratfunc(const RatFunc& r) {
  Expr n = from_poly(r.num);
  if (r.den.empty() || n.is_zero()) return n;
  std::vector<Expr> fs{n};
  for (const auto& [f, m] : r.den) fs.push_back(pow(from_poly(f), Expr(-m)));
  return mul(std::move(fs));
}

RatFunc to_ratfunc(const Expr& e) {
  ExprMap<RatFunc> memo;
  return to_rf_rec(e, memo);
}

// ---------------------------------------------------------------------------
// differentiation

namespace {

// d/dvar of an atom as a rational function
RatFunc atom_derivative(const Expr& a, const Expr& var) {
  if (a.is_variable()) return a == var ? RatFunc{Poly(1), {}} : RatFunc{};
  if (!depends_on(a, var)) return {};
  return to_ratfunc(diff_raw(a, var));
}

RatFunc poly_derivative(const Poly& p, const Expr& var) {
  // group by atom: sum over atoms of (dP/da) * da/dvar
  std::vector<Expr> atoms;
  for (const auto& t : p.terms())
    for (const auto& f : t.m.factors)
      if (std::find(atoms.begin(), atoms.end(), f.first) == atoms.end()) atoms.push_back(f.first);
  RatFunc out;
  for (const auto& a : atoms) {
    RatFunc da = atom_derivative(a, var);
    if (da.is_zero()) continue;
    std::vector<Term> dp;
    for (const auto& t : p.terms()) {
      int e = t.m.degree_in(a);
      if (e == 0) continue;
      Monomial m;
      for (const auto& f : t.m.factors) {
        if (f.first == a) {
          if (f.second > 1) m.factors.emplace_back(f.first, f.second - 1);
        } else {
          m.factors.push_back(f);
        }
      }
      dp.push_back({std::move(m), t.c * e});
    }
    out = rf_add(out, rf_mul({Poly::from_terms(std::move(dp)), {}}, da));
  }
  return out;
}

}  // namespace

RatFunc rf_diff(const RatFunc& a, const Expr& var) {
  RatFunc out = poly_derivative(a.num, var);
  if (a.den.empty()) return out;
  out = rf_mul(out, RatFunc{Poly(1), a.den});
  for (const auto& [f, m] : a.den) {
    RatFunc df = poly_derivative(f, var);
    if (df.is_zero()) continue;
    auto den = a.den;
    for (auto& [g, k] : den)
      if (g == f) ++k;
    RatFunc t = rf_mul(rf_mul({a.num * Rational(-m), {}}, df), RatFunc{Poly(1), den});
    out = rf_add(out, t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// public entry points

Expr simplify(const Expr& e) { return from_ratfunc(to_ratfunc(e)); }

Expr diff(const Expr& e, const Expr& var) { return from_ratfunc(rf_diff(to_ratfunc(e), var)); }

bool is_zero(const Expr& e) { return to_ratfunc(e).is_zero(); }

Expr numerator(const Expr& e) { return from_poly(to_ratfunc(e).num); }

Expr denominator(const Expr& e) {
  RatFunc r = to_ratfunc(e);
  std::vector<Expr> fs;
  for (const auto& [f, m] : r.den) fs.push_back(pow(from_poly(f), Expr(m)));
  return mul(std::move(fs));
}

}  // namespace rgsym
