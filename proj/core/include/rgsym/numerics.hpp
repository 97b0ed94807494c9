#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "rgsym/errors.hpp"

namespace rgsym::numeric {

using State = std::vector<double>;
using Rhs = std::function<void(double t, const State& y, State& dy)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h0 = 0;  // 0 picks an initial step automatically
  double hmax = std::numeric_limits<double>::infinity();
  double hmin_rel = 1e-13;  // underflow threshold relative to |t|+1
  long max_steps = 5'000'000;
  bool record_steps = false;
  // Integration halts (without error) as soon as this returns true.
  std::function<bool(double t, const State& y)> stop;
};

struct OdeResult {
  std::vector<double> t;
  std::vector<State> y;
  bool stopped = false;
  long steps = 0;
  long rejected = 0;
  double t_end = 0;
  State y_end;
};

/// Dormand-Prince 5(4) with dense output at the requested times. Throws
/// StepUnderflow with the last accepted point when h falls below hmin.
OdeResult ode_solve(const Rhs& f, double t0, const State& y0, double t1, const std::vector<double>& outputs,
                    const OdeOptions& opt = {});

struct RootOptions {
  double xtol = 1e-15;
  double ftol = 0;
  int max_iter = 300;
};

struct RootResult {
  double x;
  double fx;
  int iterations;
};

/// Brent's method on a sign-changing bracket.
RootResult brent(const std::function<double(double)>& f, double a, double b, const RootOptions& opt = {});

/// Expands [a, b] geometrically until f changes sign (at most n_expand times).
bool expand_bracket(const std::function<double(double)>& f, double& a, double& b, int n_expand = 60,
                    double factor = 1.6);

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0;
  int max_subdivisions = 5000;
};

struct QuadResult {
  double value;
  double error;
  int evaluations;
  int subdivisions;
};

/// Adaptive Gauss-Kronrod 7/15 quadrature on a finite interval.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, const QuadOptions& opt = {});

/// Integral over a Gaussian-like integrand centred at c with width w, truncated at c +- k*w.
QuadResult integrate_peak(const std::function<double(double)>& f, double c, double w, double k = 12,
                          const QuadOptions& opt = {});

}  // namespace rgsym::numeric
