#include "rgsym/expr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace rgsym {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::size_t hash_string(const std::string& s) {
  std::size_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::size_t hash_rational(const Rational& q) {
  return mix(hash_string(q.get_num().get_str(16)), hash_string(q.get_den().get_str(16)));
}

std::shared_ptr<Node> make_node(Kind k) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  return n;
}

Expr finish(std::shared_ptr<Node> n) {
  std::size_t h = static_cast<std::size_t>(n->kind) * 31 + 7;
  switch (n->kind) {
    case Kind::Number:
      h = mix(h, hash_rational(n->value));
      break;
    case Kind::Symbol:
      h = mix(h, hash_string(n->name));
      break;
    case Kind::Jet:
      h = mix(h, hash_string(n->name));
      for (const auto& d : n->derivs) h = mix(h, hash_string(d));
      break;
    case Kind::Func:
      h = mix(h, static_cast<std::size_t>(n->fn));
      [[fallthrough]];
    default:
      for (const auto& a : n->args) h = mix(h, a.hash());
  }
  n->hash = h;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

const Expr& zero_expr() {
  static const Expr z = [] {
    auto n = make_node(Kind::Number);
    n->value = 0;
    return finish(n);
  }();
  return z;
}

bool is_integer(const Rational& q) { return q.get_den() == 1; }

// Exact q-th root of a non-negative integer, if there is one.
bool exact_root(const mpz_class& v, unsigned long q, mpz_class& out) {
  if (v < 0) return false;
  return mpz_root(out.get_mpz_t(), v.get_mpz_t(), q) != 0;
}

}  // namespace

// v = k^q w with k as large as small trial factors allow
void split_power(const mpz_class& v, unsigned long q, mpz_class& k, mpz_class& w) {
  k = 1;
  w = v;
  for (unsigned long p = 2; p < 1000; ++p) {
    mpz_class pq;
    mpz_ui_pow_ui(pq.get_mpz_t(), p, q);
    if (pq > w) break;
    while (mpz_divisible_p(w.get_mpz_t(), pq.get_mpz_t())) {
      w /= pq;
      k *= p;
    }
  }
}

std::string_view fn_name(Fn f) {
  switch (f) {
    case Fn::Exp: return "exp";
    case Fn::Log: return "log";
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Cosh: return "cosh";
    case Fn::Sinh: return "sinh";
    case Fn::Tanh: return "tanh";
    case Fn::Erf: return "erf";
  }
  return "?";
}

Expr::Expr() : Expr(zero_expr()) {}
Expr::Expr(int v) : Expr(num(Rational(v))) {}
Expr::Expr(const Rational& q) : Expr(num(q)) {}

Kind Expr::kind() const { return n_->kind; }
bool Expr::is_zero() const { return n_->kind == Kind::Number && n_->value == 0; }
bool Expr::is_one() const { return n_->kind == Kind::Number && n_->value == 1; }
const Rational& Expr::value() const { return n_->value; }
const std::string& Expr::name() const { return n_->name; }
const std::vector<std::string>& Expr::derivs() const { return n_->derivs; }
Fn Expr::fn() const { return n_->fn; }
std::span<const Expr> Expr::args() const { return n_->args; }
std::size_t Expr::hash() const { return n_->hash; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.n_ == b.n_) return true;
  if (a.hash() != b.hash()) return false;
  return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Expr& a, const Expr& b) {
  if (a.n_ == b.n_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  switch (a.kind()) {
    case Kind::Number: {
      int c = cmp(a.value(), b.value());
      return c < 0 ? std::strong_ordering::less
                   : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
    case Kind::Symbol:
      return a.name() <=> b.name();
    case Kind::Jet:
      if (auto c = a.name() <=> b.name(); c != 0) return c;
      if (auto c = a.derivs().size() <=> b.derivs().size(); c != 0) return c;
      return a.derivs() <=> b.derivs();
    case Kind::Func:
      if (auto c = a.fn() <=> b.fn(); c != 0) return c;
      [[fallthrough]];
    default: {
      auto aa = a.args();
      auto bb = b.args();
      if (auto c = aa.size() <=> bb.size(); c != 0) return c;
      for (std::size_t i = 0; i < aa.size(); ++i)
        if (auto c = aa[i] <=> bb[i]; c != 0) return c;
      return std::strong_ordering::equal;
    }
  }
}

Expr num(const Rational& q) {
  auto n = make_node(Kind::Number);
  n->value = q;
  n->value.canonicalize();
  return finish(n);
}

Expr num(long p, long q) { return num(Rational(p, q)); }

Expr symbol(std::string name) {
  auto n = make_node(Kind::Symbol);
  n->name = std::move(name);
  return finish(n);
}

Expr jet(std::string base, std::vector<std::string> derivs) {
  if (derivs.empty()) return symbol(std::move(base));
  std::sort(derivs.begin(), derivs.end());
  auto n = make_node(Kind::Jet);
  n->name = std::move(base);
  n->derivs = std::move(derivs);
  return finish(n);
}

Expr add(std::vector<Expr> terms) {
  std::vector<Expr> out;
  out.reserve(terms.size());
  Rational c = 0;
  int cpos = -1;
  auto push = [&](const Expr& t) {
    if (t.is_number()) {
      c += t.value();
      if (cpos < 0) {
        cpos = static_cast<int>(out.size());
        out.push_back(t);
      }
    } else {
      out.push_back(t);
    }
  };
  for (const auto& t : terms) {
    if (t.is(Kind::Add))
      for (const auto& s : t.args()) push(s);
    else
      push(t);
  }
  if (cpos >= 0) {
    if (c == 0)
      out.erase(out.begin() + cpos);
    else
      out[cpos] = num(c);
  }
  if (out.empty()) return Expr();
  if (out.size() == 1) return out.front();
  auto n = make_node(Kind::Add);
  n->args = std::move(out);
  return finish(n);
}

Expr mul(std::vector<Expr> factors) {
  std::vector<Expr> out;
  out.reserve(factors.size() + 1);
  Rational c = 1;
  auto push = [&](const Expr& f) {
    if (f.is_number())
      c *= f.value();
    else
      out.push_back(f);
  };
  for (const auto& f : factors) {
    if (f.is(Kind::Mul))
      for (const auto& s : f.args()) push(s);
    else
      push(f);
  }
  if (c == 0) return Expr();
  if (out.empty()) return num(c);
  if (c != 1) out.insert(out.begin(), num(c));
  if (out.size() == 1) return out.front();
  auto n = make_node(Kind::Mul);
  n->args = std::move(out);
  return finish(n);
}

Expr pow(const Expr& b, const Expr& e) {
  if (e.is_number()) {
    const Rational& p = e.value();
    if (p == 0) return Expr(1);
    if (p == 1) return b;
    if (b.is_number()) {
      const Rational& v = b.value();
      if (is_integer(p) && (v != 0 || p > 0)) {
        long k = p.get_num().get_si();
        mpz_class nn, dd;
        mpz_pow_ui(nn.get_mpz_t(), v.get_num().get_mpz_t(), std::labs(k));
        mpz_pow_ui(dd.get_mpz_t(), v.get_den().get_mpz_t(), std::labs(k));
        Rational r = k > 0 ? Rational(nn, dd) : Rational(dd, nn);
        r.canonicalize();
        return num(r);
      }
      if (!is_integer(p) && v > 0 && p.get_den().fits_ulong_p()) {
        unsigned long q = p.get_den().get_ui();
        mpz_class rn, rd;
        if (exact_root(v.get_num(), q, rn) && exact_root(v.get_den(), q, rd))
          return pow(num(Rational(rn, rd)), num(Rational(p.get_num())));
        mpz_class kn, wn, kd, wd;
        split_power(v.get_num(), q, kn, wn);
        split_power(v.get_den(), q, kd, wd);
        if (kn != 1 || kd != 1) {
          // (k^q w)^(a/q) = k^a w^(a/q); a denominator is moved into the radicand
          mpz_class w;
          mpz_pow_ui(w.get_mpz_t(), wd.get_mpz_t(), q - 1);
          w *= wn;
          kd *= wd;
          Rational k(kn, kd);
          k.canonicalize();
          Rational a(p.get_num());
          return mul({pow(num(k), num(a)), pow(num(Rational(w)), e)});
        }
      }
      if (v == 1) return Expr(1);
    }
    if (b.is(Kind::Pow) && is_integer(p) && b.exponent().is_number())
      return pow(b.base(), num(b.exponent().value() * p));
  }
  auto n = make_node(Kind::Pow);
  n->args = {b, e};
  return finish(n);
}

Expr call(Fn f, const Expr& a) {
  if (a.is_zero()) {
    switch (f) {
      case Fn::Exp:
      case Fn::Cos:
      case Fn::Cosh:
        return Expr(1);
      case Fn::Sin:
      case Fn::Sinh:
      case Fn::Tanh:
      case Fn::Erf:
        return Expr();
      case Fn::Log:
        break;
    }
  }
  if (f == Fn::Log && a.is_one()) return Expr();
  auto n = make_node(Kind::Func);
  n->fn = f;
  n->args = {a};
  return finish(n);
}

Expr sqrt(const Expr& e) { return pow(e, num(1, 2)); }
Expr exp(const Expr& e) { return call(Fn::Exp, e); }
Expr log(const Expr& e) { return call(Fn::Log, e); }

Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return add({a, mul({Expr(-1), b})}); }
Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return mul({a, pow(b, Expr(-1))}); }
Expr operator-(const Expr& a) { return mul({Expr(-1), a}); }

const Expr& pi() {
  static const Expr p = symbol("pi");
  return p;
}

// ---------------------------------------------------------------------------
// printing

namespace {

enum Prec { kAdd = 1, kMul = 2, kPow = 3, kAtom = 4 };

void print(std::ostream& os, const Expr& e, int ctx);

bool single_char_derivs(const Expr& e) {
  return std::all_of(e.derivs().begin(), e.derivs().end(),
                     [](const std::string& d) { return d.size() == 1; });
}

void print_jet(std::ostream& os, const Expr& e) {
  if (single_char_derivs(e)) {
    os << e.name() << '_';
    for (const auto& d : e.derivs()) os << d;
    return;
  }
  os << "Diff(" << e.name();
  const auto& ds = e.derivs();
  for (std::size_t i = 0; i < ds.size();) {
    std::size_t j = i;
    while (j < ds.size() && ds[j] == ds[i]) ++j;
    os << ", " << ds[i];
    if (j - i > 1) os << ", " << (j - i);
    i = j;
  }
  os << ')';
}

bool negative_coefficient(const Expr& e) {
  if (e.is_number()) return e.value() < 0;
  if (e.is(Kind::Mul)) return e.args()[0].is_number() && e.args()[0].value() < 0;
  return false;
}

bool is_denominator_factor(const Expr& f) {
  return f.is(Kind::Pow) && f.exponent().is_number() && f.exponent().value() < 0;
}

void print_mul(std::ostream& os, const Expr& e, int ctx) {
  std::vector<Expr> numer;
  std::vector<Expr> denom;
  Rational coef = 1;
  // only a trailing run of reciprocals is written with '/', so reparsing keeps the factor order
  std::size_t tail = e.args().size();
  while (tail > 0 && is_denominator_factor(e.args()[tail - 1])) --tail;
  for (std::size_t i = 0; i < e.args().size(); ++i) {
    const Expr& f = e.args()[i];
    if (f.is_number())
      coef *= f.value();
    else if (i >= tail)
      denom.push_back(pow(f.base(), num(-f.exponent().value())));
    else
      numer.push_back(f);
  }
  bool paren = ctx > kMul;
  if (paren) os << '(';
  if (coef < 0) {
    os << '-';
    coef = -coef;
  }
  bool first = true;
  if (coef != 1 || numer.empty()) {
    os << coef.get_str();
    first = false;
  }
  for (const auto& f : numer) {
    if (!first) os << '*';
    print(os, f, kMul + 1);
    first = false;
  }
  for (const auto& d : denom) {
    os << '/';
    print(os, d, kPow);
  }
  if (paren) os << ')';
}

void print(std::ostream& os, const Expr& e, int ctx) {
  switch (e.kind()) {
    case Kind::Number: {
      const auto& v = e.value();
      bool paren = (ctx >= kPow && (v < 0 || !is_integer(v))) || (ctx > kAdd && v < 0);
      if (paren) os << '(';
      os << v.get_str();
      if (paren) os << ')';
      return;
    }
    case Kind::Symbol:
      os << e.name();
      return;
    case Kind::Jet:
      print_jet(os, e);
      return;
    case Kind::Func:
      os << fn_name(e.fn()) << '(';
      print(os, e.args()[0], 0);
      os << ')';
      return;
    case Kind::Add: {
      bool paren = ctx > kAdd;
      if (paren) os << '(';
      bool first = true;
      for (const auto& t : e.args()) {
        if (first) {
          print(os, t, kAdd);
        } else if (negative_coefficient(t)) {
          os << " - ";
          print(os, -t, kMul);
        } else {
          os << " + ";
          print(os, t, kAdd);
        }
        first = false;
      }
      if (paren) os << ')';
      return;
    }
    case Kind::Mul:
      print_mul(os, e, ctx);
      return;
    case Kind::Pow: {
      const Expr& b = e.base();
      const Expr& x = e.exponent();
      if (x.is_number() && x.value() < 0) {
        bool paren = ctx > kMul;
        if (paren) os << '(';
        os << "1/";
        print(os, pow(b, num(-x.value())), kPow);
        if (paren) os << ')';
        return;
      }
      if (x.is_number() && x.value() == Rational(1, 2)) {
        os << "sqrt(";
        print(os, b, 0);
        os << ')';
        return;
      }
      bool paren = ctx > kPow;
      if (paren) os << '(';
      print(os, b, kAtom);
      os << '^';
      if ((x.is_number() && is_integer(x.value()) && x.value() >= 0) || x.is(Kind::Symbol)) {
        print(os, x, kAtom);
      } else {
        os << '(';
        print(os, x, 0);
        os << ')';
      }
      if (paren) os << ')';
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e, 0);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Expr& e) {
  print(os, e, 0);
  return os;
}

// ---------------------------------------------------------------------------
// evaluation

namespace {

double eval_rec(const Expr& e, const Bindings& b, ExprMap<double>& memo) {
  switch (e.kind()) {
    case Kind::Number:
      return e.value().get_d();
    case Kind::Symbol:
    case Kind::Jet: {
      auto it = b.find(e);
      if (it != b.end()) return it->second;
      if (e == pi()) return std::numbers::pi;
      throw UnboundSymbol(to_string(e));
    }
    default:
      break;
  }
  if (auto it = memo.find(e); it != memo.end()) return it->second;
  double r = 0;
  switch (e.kind()) {
    case Kind::Add:
      for (const auto& t : e.args()) r += eval_rec(t, b, memo);
      break;
    case Kind::Mul:
      r = 1;
      for (const auto& t : e.args()) r *= eval_rec(t, b, memo);
      break;
    case Kind::Pow: {
      double x = eval_rec(e.base(), b, memo);
      const Expr& p = e.exponent();
      if (p.is_number() && is_integer(p.value())) {
        long k = p.value().get_num().get_si();
        if (x == 0 && k < 0) throw DomainError("division by zero", to_string(e));
        r = std::pow(x, static_cast<double>(k));
      } else {
        double y = eval_rec(p, b, memo);
        if (x < 0) throw DomainError("non-integer power of negative base", to_string(e));
        if (x == 0 && y < 0) throw DomainError("division by zero", to_string(e));
        r = std::pow(x, y);
      }
      break;
    }
    case Kind::Func: {
      double x = eval_rec(e.args()[0], b, memo);
      switch (e.fn()) {
        case Fn::Exp: r = std::exp(x); break;
        case Fn::Log:
          if (x <= 0) throw DomainError("logarithm of non-positive value", to_string(e));
          r = std::log(x);
          break;
        case Fn::Sin: r = std::sin(x); break;
        case Fn::Cos: r = std::cos(x); break;
        case Fn::Cosh: r = std::cosh(x); break;
        case Fn::Sinh: r = std::sinh(x); break;
        case Fn::Tanh: r = std::tanh(x); break;
        case Fn::Erf: r = std::erf(x); break;
      }
      break;
    }
    default:
      break;
  }
  memo.emplace(e, r);
  return r;
}

}  // namespace

double eval(const Expr& e, const Bindings& b) {
  ExprMap<double> memo;
  return eval_rec(e, b, memo);
}

double eval(const Expr& e, const std::map<std::string, double>& named) {
  Bindings b;
  for (const auto& v : variables(e)) {
    auto it = named.find(to_string(v));
    if (it != named.end()) b[v] = it->second;
  }
  return eval(e, b);
}

// ---------------------------------------------------------------------------
// structural queries

namespace {

void collect_vars(const Expr& e, std::set<Expr>& out, std::unordered_map<const Node*, bool>& seen) {
  if (e.is_variable()) {
    if (!(e == pi())) out.insert(e);
    return;
  }
  if (!seen.emplace(e.get(), true).second) return;
  for (const auto& a : e.args()) collect_vars(a, out, seen);
}

}  // namespace

std::vector<Expr> variables(const Expr& e) {
  std::set<Expr> out;
  std::unordered_map<const Node*, bool> seen;
  collect_vars(e, out, seen);
  return {out.begin(), out.end()};
}

bool depends_on(const Expr& e, const Expr& var) {
  if (e.is_variable()) return e == var;
  for (const auto& a : e.args())
    if (depends_on(a, var)) return true;
  return false;
}

std::size_t node_count(const Expr& e) {
  std::size_t n = 1;
  for (const auto& a : e.args()) n += node_count(a);
  return n;
}

// ---------------------------------------------------------------------------
// tree level operations without normalisation

namespace {

Expr subst_rec(const Expr& e, const Substitution& s, ExprMap<Expr>& memo) {
  if (e.is_variable()) {
    auto it = s.find(e);
    return it == s.end() ? e : it->second;
  }
  if (e.is_number()) return e;
  if (auto it = memo.find(e); it != memo.end()) return it->second;
  std::vector<Expr> args;
  args.reserve(e.args().size());
  bool changed = false;
  for (const auto& a : e.args()) {
    args.push_back(subst_rec(a, s, memo));
    changed = changed || !(args.back().get() == a.get());
  }
  Expr r = e;
  if (changed) {
    switch (e.kind()) {
      case Kind::Add: r = add(std::move(args)); break;
      case Kind::Mul: r = mul(std::move(args)); break;
      case Kind::Pow: r = pow(args[0], args[1]); break;
      case Kind::Func: r = call(e.fn(), args[0]); break;
      default: break;
    }
  }
  memo.emplace(e, r);
  return r;
}

Expr fn_derivative(Fn f, const Expr& a) {
  switch (f) {
    case Fn::Exp: return call(Fn::Exp, a);
    case Fn::Log: return pow(a, Expr(-1));
    case Fn::Sin: return call(Fn::Cos, a);
    case Fn::Cos: return -call(Fn::Sin, a);
    case Fn::Cosh: return call(Fn::Sinh, a);
    case Fn::Sinh: return call(Fn::Cosh, a);
    case Fn::Tanh: return Expr(1) - pow(call(Fn::Tanh, a), Expr(2));
    case Fn::Erf:
      return mul({Expr(2), pow(pi(), num(-1, 2)), call(Fn::Exp, -pow(a, Expr(2)))});
  }
  return Expr();
}

Expr diff_rec(const Expr& e, const Expr& v, ExprMap<Expr>& memo) {
  switch (e.kind()) {
    case Kind::Number:
      return Expr();
    case Kind::Symbol:
    case Kind::Jet:
      return e == v ? Expr(1) : Expr();
    default:
      break;
  }
  if (auto it = memo.find(e); it != memo.end()) return it->second;
  Expr r;
  switch (e.kind()) {
    case Kind::Add: {
      std::vector<Expr> t;
      for (const auto& a : e.args()) t.push_back(diff_rec(a, v, memo));
      r = add(std::move(t));
      break;
    }
    case Kind::Mul: {
      std::vector<Expr> t;
      auto fs = e.args();
      for (std::size_t i = 0; i < fs.size(); ++i) {
        Expr d = diff_rec(fs[i], v, memo);
        if (d.is_zero()) continue;
        std::vector<Expr> p(fs.begin(), fs.end());
        p[i] = d;
        t.push_back(mul(std::move(p)));
      }
      r = add(std::move(t));
      break;
    }
    case Kind::Pow: {
      const Expr& b = e.base();
      const Expr& x = e.exponent();
      Expr db = diff_rec(b, v, memo);
      if (x.is_number()) {
        r = mul({x, pow(b, num(x.value() - 1)), db});
      } else {
        Expr dx = diff_rec(x, v, memo);
        r = e * (dx * log(b) + x * db / b);
      }
      break;
    }
    case Kind::Func:
      r = fn_derivative(e.fn(), e.args()[0]) * diff_rec(e.args()[0], v, memo);
      break;
    default:
      break;
  }
  memo.emplace(e, r);
  return r;
}

}  // namespace

Expr substitute(const Expr& e, const Substitution& s, bool raw) {
  ExprMap<Expr> memo;
  Expr r = subst_rec(e, s, memo);
  return raw ? r : simplify(r);
}

Expr diff_raw(const Expr& e, const Expr& var) {
  ExprMap<Expr> memo;
  return diff_rec(e, var, memo);
}

namespace detail {
Expr fn_derivative_expr(Fn f, const Expr& a) { return fn_derivative(f, a); }
}  // namespace detail

}  // namespace rgsym
