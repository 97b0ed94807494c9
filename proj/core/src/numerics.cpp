#include "rgsym/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace rgsym::numeric {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double rms_norm(const State& v, const State& ya, const State& yb, double atol, double rtol) {
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double sc = atol + rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
    s += (v[i] / sc) * (v[i] / sc);
  }
  return std::sqrt(s / static_cast<double>(std::max<std::size_t>(v.size(), 1)));
}

}  // namespace

OdeResult ode_solve(const Rhs& f, double t0, const State& y0, double t1, const std::vector<double>& outputs,
                    const OdeOptions& opt) {
  const std::size_t n = y0.size();
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  OdeResult res;
  State y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), ynew(n), err(n);
  std::size_t next_out = 0;
  auto emit_until = [&](double ta, double tb, const State& ya, const State& yb, double h,
                        const std::vector<State>* rc) {
    while (next_out < outputs.size() && dir * (outputs[next_out] - tb) <= 0) {
      double to = outputs[next_out];
      if (dir * (to - ta) < 0) {
        ++next_out;
        continue;
      }
      State yo(n);
      if (rc == nullptr || h == 0) {
        yo = (to == ta) ? ya : yb;
      } else {
        double th = (to - ta) / h;
        double th1 = 1 - th;
        for (std::size_t i = 0; i < n; ++i)
          yo[i] = (*rc)[0][i] +
                  th * ((*rc)[1][i] + th1 * ((*rc)[2][i] + th * ((*rc)[3][i] + th1 * (*rc)[4][i])));
      }
      res.t.push_back(to);
      res.y.push_back(std::move(yo));
      ++next_out;
    }
  };

  double t = t0;
  f(t, y, k1);
  if (opt.record_steps) {
    res.t.push_back(t);
    res.y.push_back(y);
  }
  emit_until(t, t, y, y, 0, nullptr);
  if (t0 == t1) {
    res.t_end = t;
    res.y_end = y;
    return res;
  }
  double h = opt.h0;
  if (h == 0) {
    double d0 = rms_norm(y, y, y, opt.atol, opt.rtol);
    double d1n = rms_norm(k1, y, y, opt.atol, opt.rtol);
    h = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h = std::min(h, std::abs(t1 - t0));
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + dir * h * k1[i];
    f(t + dir * h, yt, k2);
    State diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = (k2[i] - k1[i]) / h;
    double d2 = rms_norm(diff, y, y, opt.atol, opt.rtol);
    double h1 = (std::max(d1n, d2) <= 1e-15) ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / std::max(d1n, d2), 0.2);
    h = std::min({100 * h, h1, std::abs(t1 - t0)});
  }
  h = std::min(std::abs(h), opt.hmax);
  std::vector<State> rc(5, State(n));
  bool last_rejected = false;
  while (dir * (t1 - t) > 0) {
    if (res.steps + res.rejected > opt.max_steps) throw StepUnderflow(t, y);
    double hmin = opt.hmin_rel * (std::abs(t) + 1.0);
    if (h < hmin) throw StepUnderflow(t, y);
    bool final_step = false;
    if (h >= std::abs(t1 - t)) {
      h = std::abs(t1 - t);
      final_step = true;
    }
    double hs = dir * h;
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * a21 * k1[i];
    f(t + c2 * hs, yt, k2);
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * hs, yt, k3);
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * hs, yt, k4);
    for (std::size_t i = 0; i < n; ++i)
      yt[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * hs, yt, k5);
    for (std::size_t i = 0; i < n; ++i)
      yt[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    double tn = final_step ? t1 : t + hs;
    f(tn, yt, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(tn, ynew, k7);
    for (std::size_t i = 0; i < n; ++i)
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    double en = rms_norm(err, y, ynew, opt.atol, opt.rtol);
    bool finite = std::isfinite(en);
    for (double v : ynew) finite = finite && std::isfinite(v);
    if (finite && en <= 1.0) {
      for (std::size_t i = 0; i < n; ++i) {
        double ydiff = ynew[i] - y[i];
        double bspl = hs * k1[i] - ydiff;
        rc[0][i] = y[i];
        rc[1][i] = ydiff;
        rc[2][i] = bspl;
        rc[3][i] = ydiff - hs * k7[i] - bspl;
        rc[4][i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      emit_until(t, tn, y, ynew, hs, &rc);
      t = tn;
      y = ynew;
      k1 = k7;
      ++res.steps;
      if (opt.record_steps) {
        res.t.push_back(t);
        res.y.push_back(y);
      }
      if (opt.stop && opt.stop(t, y)) {
        res.stopped = true;
        break;
      }
      double fac = en == 0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h = std::min(h * fac, opt.hmax);
      last_rejected = false;
    } else {
      ++res.rejected;
      double fac = finite ? std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9) : 0.25;
      h *= fac;
      last_rejected = true;
    }
  }
  res.t_end = t;
  res.y_end = y;
  return res;
}

// ---------------------------------------------------------------------------

RootResult brent(const std::function<double(double)>& f, double a, double b, const RootOptions& opt) {
  double fa = f(a), fb = f(b);
  if (fa == 0) return {a, fa, 0};
  if (fb == 0) return {b, fb, 0};
  if ((fa > 0) == (fb > 0)) throw NotBracketed(a, b, fa, fb);
  double c = a, fc = fa, d = b - a, e = d;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 1; it <= opt.max_iter; ++it) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    double tol = 2 * eps * std::abs(b) + 0.5 * opt.xtol;
    double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0 || std::abs(fb) <= opt.ftol) return {b, fb, it};
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2 * m * s;
        q = 1 - s;
      } else {
        double qq = fa / fc, r = fb / fc;
        p = s * (2 * m * qq * (qq - r) - (b - a) * (r - 1));
        q = (qq - 1) * (r - 1) * (s - 1);
      }
      if (p > 0)
        q = -q;
      else
        p = -p;
      if (2 * p < std::min(3 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0 ? tol : -tol);
    fb = f(b);
  }
  return {b, fb, opt.max_iter};
}

bool expand_bracket(const std::function<double(double)>& f, double& a, double& b, int n_expand, double factor) {
  double fa = f(a), fb = f(b);
  for (int i = 0; i < n_expand; ++i) {
    if ((fa > 0) != (fb > 0) || fa == 0 || fb == 0) return true;
    double w = b - a;
    if (std::abs(fa) < std::abs(fb)) {
      a -= factor * w;
      fa = f(a);
    } else {
      b += factor * w;
      fb = f(b);
    }
  }
  return (fa > 0) != (fb > 0);
}

// ---------------------------------------------------------------------------

namespace {

constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.0};
constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                          0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double resk = fc * wgk[7];
  double resg = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    double dx = h * xgk[j];
    double s = f(c - dx) + f(c + dx);
    resk += wgk[j] * s;
    if (j % 2 == 1) resg += wg[j / 2] * s;
  }
  return {a, b, resk * h, std::abs((resk - resg) * h)};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b, const QuadOptions& opt) {
  std::priority_queue<Segment> heap;
  Segment s0 = gk15(f, a, b);
  heap.push(s0);
  double total = s0.value, err = s0.error;
  int evals = 15, subdiv = 0;
  auto tol = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
  while (err > tol()) {
    if (subdiv >= opt.max_subdivisions)
      throw SolveError("quadrature subdivision limit reached (error estimate " + std::to_string(err) + ")");
    Segment s = heap.top();
    heap.pop();
    double m = 0.5 * (s.a + s.b);
    Segment l = gk15(f, s.a, m), r = gk15(f, m, s.b);
    evals += 30;
    ++subdiv;
    total += l.value + r.value - s.value;
    err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
    if (heap.size() > 1 && std::abs(s.b - s.a) < 1e-14 * (std::abs(s.a) + std::abs(s.b))) break;
  }
  // recompute the sum to shed accumulated rounding
  double sum = 0, esum = 0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  return {sum, esum, evals, subdiv};
}

QuadResult integrate_peak(const std::function<double(double)>& f, double c, double w, double k,
                          const QuadOptions& opt) {
  constexpr int pieces = 8;
  QuadOptions sub = opt;
  sub.abs_tol = opt.abs_tol / pieces;
  QuadResult out{0, 0, 0, 0};
  double lo = c - k * w, step = 2 * k * w / pieces;
  for (int i = 0; i < pieces; ++i) {
    QuadResult r = integrate(f, lo + i * step, lo + (i + 1) * step, sub);
    out.value += r.value;
    out.error += r.error;
    out.evaluations += r.evaluations;
    out.subdivisions += r.subdivisions;
  }
  return out;
}

}  // namespace rgsym::numeric
