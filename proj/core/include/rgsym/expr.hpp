#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rgsym/errors.hpp"

namespace rgsym {

using Rational = mpq_class;

enum class Kind : std::uint8_t { Number, Symbol, Jet, Add, Mul, Pow, Func };
enum class Fn : std::uint8_t { Exp, Log, Sin, Cos, Cosh, Sinh, Tanh, Erf };

std::string_view fn_name(Fn f);

struct Node;

/// Immutable expression handle. Copies share structure.
class Expr {
 public:
  Expr();
  Expr(int v);  // NOLINT(google-explicit-constructor)
  Expr(const Rational& q);  // NOLINT(google-explicit-constructor)
  explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  Kind kind() const;
  bool is(Kind k) const { return kind() == k; }
  bool is_number() const { return kind() == Kind::Number; }
  bool is_zero() const;
  bool is_one() const;
  // Symbol or Jet leaf
  bool is_variable() const { return kind() == Kind::Symbol || kind() == Kind::Jet; }

  const Rational& value() const;
  const std::string& name() const;
  const std::vector<std::string>& derivs() const;
  Fn fn() const;
  std::span<const Expr> args() const;
  const Expr& base() const { return args()[0]; }
  const Expr& exponent() const { return args()[1]; }

  std::size_t hash() const;
  const Node* get() const { return n_.get(); }

  friend bool operator==(const Expr& a, const Expr& b);
  friend std::strong_ordering operator<=>(const Expr& a, const Expr& b);

 private:
  std::shared_ptr<const Node> n_;
};

struct Node {
  Kind kind;
  Fn fn = Fn::Exp;
  Rational value;
  std::string name;
  std::vector<std::string> derivs;
  std::vector<Expr> args;
  std::size_t hash = 0;
};

struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

template <class T>
using ExprMap = std::unordered_map<Expr, T, ExprHash>;
using Substitution = std::map<Expr, Expr>;
using Bindings = ExprMap<double>;

// Builders. These do light folding (numbers, flattening, neutral elements)
// but never reorder operands.
Expr num(const Rational& q);
Expr num(long p, long q);
Expr symbol(std::string name);
// Jet variable; derivs are sorted. Empty derivs give the plain symbol.
Expr jet(std::string base, std::vector<std::string> derivs);
Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow(const Expr& base, const Expr& exponent);
Expr call(Fn f, const Expr& arg);
Expr sqrt(const Expr& e);
Expr exp(const Expr& e);
Expr log(const Expr& e);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

struct ParseOptions {
  // Independent variable names, used to split jet suffixes such as u_xeps.
  // When empty every suffix character is one variable.
  std::vector<std::string> independents;
};

Expr parse(std::string_view text, const ParseOptions& opts = {});
std::string to_string(const Expr& e);
std::ostream& operator<<(std::ostream& os, const Expr& e);

/// Canonical rational-function normal form.
Expr simplify(const Expr& e);
/// Simultaneous replacement of variables, followed by simplify unless raw.
Expr substitute(const Expr& e, const Substitution& s, bool raw = false);
/// Partial derivative with respect to a Symbol or Jet variable.
Expr diff(const Expr& e, const Expr& var);
Expr diff_raw(const Expr& e, const Expr& var);

double eval(const Expr& e, const Bindings& b);
// Convenience form keyed by printed variable names.
double eval(const Expr& e, const std::map<std::string, double>& b);

/// All Symbol/Jet leaves, in canonical order.
std::vector<Expr> variables(const Expr& e);
bool depends_on(const Expr& e, const Expr& var);
bool is_zero(const Expr& e);
std::size_t node_count(const Expr& e);

Expr numerator(const Expr& e);
Expr denominator(const Expr& e);

const Expr& pi();

}  // namespace rgsym

template <>
struct std::hash<rgsym::Expr> {
  std::size_t operator()(const rgsym::Expr& e) const { return e.hash(); }
};
