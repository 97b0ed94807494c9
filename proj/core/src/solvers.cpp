#include "rgsym/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/float128.hpp>

#include "rgsym/errors.hpp"
#include "rgsym/numerics.hpp"

namespace rgsym {

// ---------------------------------------------------------------------------
// Hopf

std::vector<double> hopf_characteristics(const HopfScenario& s, double z, const std::vector<double>& xs,
                                         double xtol) {
  if (z < 0) throw DomainError("z must be non-negative", "z");
  double zc = hopf_crossing_distance(s);
  if (z >= zc)
    throw SolveError("characteristics cross at z=" + std::to_string(zc) + ", requested z=" + std::to_string(z));
  std::vector<double> out;
  out.reserve(xs.size());
  numeric::RootOptions ro;
  ro.xtol = xtol;
  for (double x : xs) {
    auto g = [&](double x0) { return x0 + s.eps * z * s.U(x0) - x; };
    double a = s.x_min, b = s.x_max;
    if (g(a) * g(b) > 0 && !numeric::expand_bracket(g, a, b))
      throw SolveError("no foot point for x=" + std::to_string(x));
    out.push_back(s.U(numeric::brent(g, a, b, ro).x));
  }
  return out;
}

double hopf_axis_slope(const HopfScenario& s, double z, double h) {
  auto u = hopf_characteristics(s, z, {-h, h});
  return (u[1] - u[0]) / (2 * h);
}

double hopf_crossing_distance(const HopfScenario& s, double tol) {
  // characteristics cross where 1 + eps z U'(x0) first vanishes
  auto slope = [&](double x0) { return -s.dU(x0); };
  const int n = 4000;
  double best = -std::numeric_limits<double>::infinity();
  double xb = s.x_min;
  for (int i = 0; i <= n; ++i) {
    double x0 = s.x_min + (s.x_max - s.x_min) * i / n;
    double v = slope(x0);
    if (v > best) {
      best = v;
      xb = x0;
    }
  }
  double h = (s.x_max - s.x_min) / n;
  double lo = std::max(s.x_min, xb - h), hi = std::min(s.x_max, xb + h);
  const double gr = 0.5 * (std::sqrt(5.0) - 1);
  while (hi - lo > tol * (1 + std::abs(xb))) {
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    if (slope(c) > slope(d))
      hi = d;
    else
      lo = c;
  }
  best = std::max(best, slope(0.5 * (lo + hi)));
  if (best <= 0 || s.eps == 0) return std::numeric_limits<double>::infinity();
  return 1 / (s.eps * best);
}

// ---------------------------------------------------------------------------
// optics grid

namespace {

using Quad = boost::multiprecision::float128;

template <class Real>
struct Field {
  std::vector<Real> v, I;
};

template <class Real>
class OpticsGrid {
 public:
  OpticsGrid(const OpticsScenario& s, int n, double L, double sigma)
      : alpha_(s.alpha), nu_(s.nu), n_(n), dx_(Real(L) / (n - 1)), sigma_(sigma) {}

  double dx() const { return static_cast<double>(dx_); }

  Real speed(const Field<Real>& f) const {
    using std::abs, std::sqrt;
    Real m = 0;
    for (int i = 0; i < n_; ++i) {
      Real r = abs(f.v[i]) + sqrt(alpha_ * abs(f.I[i]));
      if (r > m) m = r;
    }
    return m;
  }

  void rhs(const Field<Real>& f, Field<Real>& d) {
    using std::abs, std::sqrt;
    fill(f.v, gv_, -1);
    fill(f.I, gI_, 1);
    const Real h2 = 2 * dx_;
    for (int i = 0; i < n_; ++i) {
      const Real* v = &gv_[i + 2];
      const Real* I = &gI_[i + 2];
      Real vx = (v[1] - v[-1]) / h2;
      Real Ix = (I[1] - I[-1]) / h2;
      Real rho = abs(v[0]) + sqrt(alpha_ * abs(I[0]));
      Real damp = sigma_ * rho / (16 * dx_);
      Real d4v = v[2] - 4 * v[1] + 6 * v[0] - 4 * v[-1] + v[-2];
      Real d4I = I[2] - 4 * I[1] + 6 * I[0] - 4 * I[-1] + I[-2];
      Real src = i == 0 ? vx : v[0] / (dx_ * i);
      d.v[i] = -v[0] * vx + alpha_ * Ix - damp * d4v;
      d.I[i] = -v[0] * Ix - I[0] * vx - nu_ * I[0] * src - damp * d4I;
    }
  }

  Real axis_slope(const Field<Real>& f) const {
    const auto& v = f.v;
    return (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * dx_);
  }

 private:
  // two ghost nodes each side: mirror at the axis, quadratic extrapolation outside
  void fill(const std::vector<Real>& u, std::vector<Real>& g, int parity) {
    g.resize(n_ + 4);
    for (int i = 0; i < n_; ++i) g[i + 2] = u[i];
    g[1] = parity * u[1];
    g[0] = parity * u[2];
    int e = n_ + 2;
    g[e] = 3 * g[e - 1] - 3 * g[e - 2] + g[e - 3];
    g[e + 1] = 3 * g[e] - 3 * g[e - 1] + g[e - 2];
  }

  Real alpha_;
  Real nu_;
  int n_;
  Real dx_;
  Real sigma_;
  std::vector<Real> gv_, gI_;
};

double default_half_width(const OpticsScenario& s) {
  if (s.half_width > 0) return s.half_width;
  return s.profile == OpticsScenario::Profile::Parabolic ? 240 : 40;
}

template <class Real>
AxisHistory run_grid(const OpticsScenario& s, double z_max, int n, double L, double cfl, const GridOptions& opt) {
  OpticsGrid<Real> grid(s, n, L, opt.dissipation);
  AxisHistory h;
  h.dx = grid.dx();
  Field<Real> f{std::vector<Real>(n), std::vector<Real>(n)};
  Expr I_init = s.boundary_intensity();
  for (int i = 0; i < n; ++i) {
    double x = h.dx * i;
    std::map<std::string, double> b{{"x", x}};
    f.I[i] = Real(eval(I_init, b));
    f.v[i] = Real(eval(opt.initial_velocity, b));
  }
  auto record = [&](double z) {
    h.z.push_back(z);
    h.I0.push_back(static_cast<double>(f.I[0]));
    h.W0.push_back(static_cast<double>(grid.axis_slope(f)));
  };
  record(0);

  Field<Real> k1 = f, k2 = f, mid = f;
  const Real dxr = Real(h.dx);
  Real z = 0;
  for (int k = 1; k <= opt.outputs; ++k) {
    const Real target = Real(z_max) * k / opt.outputs;
    while (z < target) {
      Real rho = grid.speed(f);
      Real dz = rho > 0 ? Real(cfl) * dxr / rho : target - z;
      bool last = false;
      if (z + dz >= target * (1 - 1e-14)) {
        dz = target - z;
        last = true;
      }
      h.max_cfl = std::max(h.max_cfl, static_cast<double>(dz * rho / dxr));
      grid.rhs(f, k1);
      for (int i = 0; i < n; ++i) {
        mid.v[i] = f.v[i] + dz * k1.v[i];
        mid.I[i] = f.I[i] + dz * k1.I[i];
      }
      grid.rhs(mid, k2);
      for (int i = 0; i < n; ++i) {
        f.v[i] += dz / 2 * (k1.v[i] + k2.v[i]);
        f.I[i] += dz / 2 * (k1.I[i] + k2.I[i]);
      }
      z = last ? target : z + dz;
      ++h.steps;
      double I0 = static_cast<double>(f.I[0]);
      if (!std::isfinite(I0) || I0 <= 0)
        throw SolveError("grid solution broke down at z=" + std::to_string(static_cast<double>(z)));
    }
    record(static_cast<double>(target));
  }
  h.x.resize(n);
  h.v.resize(n);
  h.I.resize(n);
  for (int i = 0; i < n; ++i) {
    h.x[i] = h.dx * i;
    h.v[i] = static_cast<double>(f.v[i]);
    h.I[i] = static_cast<double>(f.I[i]);
  }
  return h;
}

}  // namespace

AxisHistory optics_grid_solve(const OpticsScenario& s, double z_max, const GridOptions& opt) {
  s.validate();
  int n = opt.nodes > 0 ? opt.nodes : s.nodes;
  double L = opt.half_width > 0 ? opt.half_width : default_half_width(s);
  double cfl = opt.cfl > 0 ? opt.cfl : s.cfl;
  if (n < 11) throw ConfigError("grid: too few nodes");
  if (!(cfl > 0 && cfl <= 0.9)) throw ConfigError("grid: cfl must lie in (0, 0.9]");
  if (!(z_max > 0)) throw DomainError("z_max must be positive", "z");
  if (z_max > 0.9 * s.z_sing()) throw DomainError("z_max lies beyond 0.9 z_sing", "z");
  if (opt.outputs < 1) throw ConfigError("grid: outputs must be positive");
  if (opt.precision == Precision::Quad) return run_grid<Quad>(s, z_max, n, L, cfl, opt);
  return run_grid<double>(s, z_max, n, L, cfl, opt);
}

GridStudy optics_grid_study(const OpticsScenario& s, double z_max, const std::vector<int>& nodes,
                            const GridOptions& opt) {
  GridStudy st;
  double ref = optics_axis_closed_form(s, z_max).I0;
  for (int n : nodes) {
    GridOptions o = opt;
    o.nodes = n;
    st.nodes.push_back(n);
    st.runs.push_back(optics_grid_solve(s, z_max, o));
    st.error.push_back(std::abs(st.runs.back().I0.back() - ref) / ref);
  }
  for (std::size_t i = 1; i < st.runs.size(); ++i) {
    double r = st.runs[i - 1].dx / st.runs[i].dx;
    st.order.push_back(std::log(st.error[i - 1] / st.error[i]) / std::log(r));
  }
  if (st.runs.size() >= 2) {
    double a = st.runs[st.runs.size() - 2].I0.back(), b = st.runs.back().I0.back();
    st.richardson_error = std::abs(b - a) / 3 / std::abs(b);
  }
  return st;
}

// ---------------------------------------------------------------------------
// soliton axis

SolitonAxis soliton_axis_ode(const OpticsScenario& s, int outputs) {
  if (!(s.alpha > 0)) throw ConfigError("soliton axis: alpha must be positive");
  const double a = s.alpha;
  const double zs = s.z_sing();
  // w = I - 1 keeps resolution near the start where I is close to one
  auto f = [](double z, const numeric::State& y, numeric::State& d) {
    double I = 1 + y[0], Iz = y[1];
    d[0] = Iz;
    d[1] = Iz * Iz * (5 * I + z * Iz - 4) / (2 * y[0] * I);
  };
  const double z0 = 1e-3 * zs;
  numeric::State y0{a * z0 * z0 + 2 * a * a * std::pow(z0, 4), 2 * a * z0 + 8 * a * a * std::pow(z0, 3)};
  const double wmax = 1e3 * std::sqrt(a);

  numeric::OdeOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  o.record_steps = true;
  o.stop = [&](double, const numeric::State& y) { return std::abs(y[1] / (1 + y[0])) > wmax; };
  numeric::OdeResult r;
  try {
    r = numeric::ode_solve(f, z0, y0, 1.5 * zs, {}, o);
  } catch (const StepUnderflow&) {
    throw SolveError("soliton axis integration stalled before the blow-up test fired");
  }

  SolitonAxis out;
  out.blowup_detected = r.stopped;
  std::vector<double> zq;
  double zl = r.t_end;
  for (int k = 0; k < outputs; ++k) zq.push_back(z0 + (zl - z0) * k / outputs);
  o.record_steps = false;
  o.stop = nullptr;
  auto dense = numeric::ode_solve(f, z0, y0, zl, zq, o);
  auto push = [&](double z, const numeric::State& y) {
    double I = 1 + y[0];
    out.z.push_back(z);
    out.I0.push_back(I);
    out.I0z.push_back(y[1]);
    out.W0.push_back(-y[1] / I);
    double res = z - std::sqrt(y[0]) / (std::sqrt(a) * I);
    out.max_relation_residual = std::max(out.max_relation_residual, std::abs(res));
  };
  for (std::size_t i = 0; i < dense.t.size(); ++i) push(dense.t[i], dense.y[i]);
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    double I = 1 + r.y[i][0];
    double res = r.t[i] - std::sqrt(r.y[i][0]) / (std::sqrt(a) * I);
    out.max_relation_residual = std::max(out.max_relation_residual, std::abs(res));
  }
  push(r.t_end, r.y_end);

  if (r.stopped && r.t.size() >= 2) {
    // near the singularity W0^-2 and I are linear in zs - z and sqrt(zs - z)
    std::size_t m = r.t.size();
    double z1 = r.t[m - 2], z2 = r.t[m - 1];
    auto w2 = [&](std::size_t i) {
      double w = r.y[i][1] / (1 + r.y[i][0]);
      return 1 / (w * w);
    };
    double q1 = w2(m - 2), q2 = w2(m - 1);
    out.z_blowup = z2 - q2 * (z2 - z1) / (q2 - q1);
    double s1 = std::sqrt(std::max(0.0, out.z_blowup - z1)), s2 = std::sqrt(std::max(0.0, out.z_blowup - z2));
    double I1 = 1 + r.y[m - 2][0], I2 = 1 + r.y[m - 1][0];
    out.I_blowup = s1 == s2 ? I2 : I2 + (I2 - I1) * s2 / (s1 - s2);
  }
  return out;
}

}  // namespace rgsym
