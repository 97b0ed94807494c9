#pragma once

#include <utility>
#include <vector>

#include "rgsym/expr.hpp"

namespace rgsym {

// Product of atoms with positive exponents, atoms in descending order.
struct Monomial {
  std::vector<std::pair<Expr, int>> factors;

  bool empty() const { return factors.empty(); }
  int degree() const;
  int degree_in(const Expr& atom) const;
  std::size_t hash() const;
  friend bool operator==(const Monomial& a, const Monomial& b) = default;
};

// Lexicographic term order with respect to the atom order.
int compare(const Monomial& a, const Monomial& b);
Monomial operator*(const Monomial& a, const Monomial& b);
bool divides(const Monomial& d, const Monomial& m);
Monomial quotient(const Monomial& m, const Monomial& d);
Monomial gcd(const Monomial& a, const Monomial& b);

struct Term {
  Monomial m;
  Rational c;
};

/// Sparse multivariate polynomial with rational coefficients, terms sorted in
/// descending term order.
class Poly {
 public:
  Poly() = default;
  explicit Poly(const Rational& c);
  static Poly atom(const Expr& a, int exp = 1);
  static Poly from_terms(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].m.empty()); }
  Rational constant_value() const;
  const Term& leading() const { return terms_.front(); }

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(const Rational& c) const;
  Poly operator-() const;
  Poly power(int n) const;

  friend bool operator==(const Poly& a, const Poly& b);
  friend int compare(const Poly& a, const Poly& b);

 private:
  std::vector<Term> terms_;
};

/// Exact division; returns false when d does not divide p.
bool divide_exact(const Poly& p, const Poly& d, Poly& q);

/// Numerator over a product of primitive factors with multiplicities.
struct RatFunc {
  Poly num;
  std::vector<std::pair<Poly, int>> den;

  bool is_zero() const { return num.is_zero(); }
  bool is_polynomial() const { return den.empty(); }
};

RatFunc to_ratfunc(const Expr& e);
Expr from_ratfunc(const RatFunc& r);
Expr from_poly(const Poly& p);

RatFunc rf_add(const RatFunc& a, const RatFunc& b);
RatFunc rf_mul(const RatFunc& a, const RatFunc& b);
RatFunc rf_div(const RatFunc& a, const RatFunc& b);
RatFunc rf_pow(const RatFunc& a, int n);
RatFunc rf_diff(const RatFunc& a, const Expr& var);

}  // namespace rgsym
