#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rgsym {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " at " + std::to_string(line) + ":" + std::to_string(column)),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class UnboundSymbol : public Error {
 public:
  explicit UnboundSymbol(const std::string& name)
      : Error("unbound symbol '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class DomainError : public Error {
 public:
  DomainError(const std::string& what, const std::string& subexpr)
      : Error(what + " in '" + subexpr + "'"), subexpr_(subexpr) {}
  const std::string& subexpression() const { return subexpr_; }

 private:
  std::string subexpr_;
};

class ReductionError : public Error {
 public:
  using Error::Error;
};

class SolveError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Thrown by the integrators; carries the last accepted state.
class StepUnderflow : public Error {
 public:
  StepUnderflow(double t, std::vector<double> y)
      : Error("step size underflow at t=" + std::to_string(t)), t_(t), y_(std::move(y)) {}
  double t() const { return t_; }
  const std::vector<double>& y() const { return y_; }

 private:
  double t_;
  std::vector<double> y_;
};

class NotBracketed : public Error {
 public:
  NotBracketed(double a, double b, double fa, double fb)
      : Error("root not bracketed on [" + std::to_string(a) + ", " + std::to_string(b) +
              "] (f=" + std::to_string(fa) + ", " + std::to_string(fb) + ")"),
        a_(a),
        b_(b) {}
  double a() const { return a_; }
  double b() const { return b_; }

 private:
  double a_;
  double b_;
};

}  // namespace rgsym
