#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "isochron/errors.hpp"

namespace isochron {

/// One accepted step of the Dormand-Prince pair with its continuous
/// extension (order 4) over [t0, t0 + h].
template <typename Scalar, int N> struct DenseStep {
  using Vec = Eigen::Matrix<Scalar, N, 1>;
  Scalar t0{};
  Scalar h{};
  Vec y0, y1;
  Vec r2, r3, r4, r5;

  Scalar t1() const { return t0 + h; }
  Vec operator()(Scalar t) const {
    const Scalar th = (t - t0) / h;
    const Scalar th1 = Scalar(1) - th;
    return y0 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-13;
  double h_init = 0.0; // 0 selects a starting step automatically
  double h_min_rel = 1e-13;
  long max_steps = 2'000'000;
};

/// Adaptive Dormand-Prince 5(4). `f(t, y)` returns the derivative; `on_step`
/// receives each accepted step and returns false to stop. Integrates toward
/// t_end in either direction and returns the final time reached.
template <typename Scalar, int N, class F, class OnStep>
Scalar dopri5(F &&f, Scalar t0, Eigen::Matrix<Scalar, N, 1> y0, Scalar t_end,
              const OdeOptions &opt, OnStep &&on_step) {
  using Vec = Eigen::Matrix<Scalar, N, 1>;
  using std::abs;
  using std::max;
  using std::min;
  using std::pow;
  using std::sqrt;

  static const Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5,
                      c5 = Scalar(8) / 9;
  static const Scalar a21 = Scalar(1) / 5;
  static const Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  static const Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15,
                      a43 = Scalar(32) / 9;
  static const Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187,
                      a53 = Scalar(64448) / 6561, a54 = Scalar(-212) / 729;
  static const Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33,
                      a63 = Scalar(46732) / 5247, a64 = Scalar(49) / 176,
                      a65 = Scalar(-5103) / 18656;
  static const Scalar a71 = Scalar(35) / 384, a73 = Scalar(500) / 1113,
                      a74 = Scalar(125) / 192, a75 = Scalar(-2187) / 6784,
                      a76 = Scalar(11) / 84;
  static const Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695,
                      e4 = Scalar(71) / 1920, e5 = Scalar(-17253) / 339200,
                      e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;
  static const Scalar d1 = Scalar(-12715105075.0L) / Scalar(11282082432.0L),
                      d3 = Scalar(87487479700.0L) / Scalar(32700410799.0L),
                      d4 = Scalar(-10690763975.0L) / Scalar(1880347072.0L),
                      d5 = Scalar(701980252875.0L) / Scalar(199316789632.0L),
                      d6 = Scalar(-1453857185.0L) / Scalar(822651844.0L),
                      d7 = Scalar(69997945.0L) / Scalar(29380423.0L);

  const Scalar dir = t_end >= t0 ? Scalar(1) : Scalar(-1);
  const Scalar rtol(opt.rtol), atol(opt.atol);
  const auto n = y0.size();

  auto deriv = [&](Scalar t, const Vec &y) {
    Vec d = f(t, y);
    if (!d.allFinite())
      throw PoleEncounterError("integrate: non-finite field value (pole of the "
                               "vector field reached)");
    return d;
  };
  auto err_norm = [&](const Vec &err, const Vec &ya, const Vec &yb) {
    Scalar acc(0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar sc = atol + rtol * max(abs(ya(i)), abs(yb(i)));
      acc += (err(i) / sc) * (err(i) / sc);
    }
    return sqrt(acc / Scalar(n));
  };

  Scalar t = t0;
  Vec y = y0;
  Vec k1 = deriv(t, y);
  Scalar h;
  if (opt.h_init > 0) {
    h = Scalar(opt.h_init);
  } else {
    const Scalar yn = y.norm(), dn = k1.norm();
    h = (yn > Scalar(1e-10) && dn > Scalar(1e-10)) ? Scalar(0.01) * yn / dn
                                                   : Scalar(1e-4);
    h = min(h, Scalar(0.1));
  }
  h = min(h, abs(t_end - t0));

  DenseStep<Scalar, N> st;
  Scalar fac_prev = Scalar(1e-4);
  for (long step = 0; step < opt.max_steps; ++step) {
    if (dir * (t_end - t) <= Scalar(0))
      return t;
    const Scalar h_min = Scalar(opt.h_min_rel) * max(Scalar(1), abs(t));
    if (h < h_min)
      throw StepUnderflowError("integrate: step size underflow at t = " +
                               std::to_string(static_cast<double>(t)));
    if (h > abs(t_end - t))
      h = abs(t_end - t);
    const Scalar hs = dir * h;
    const Vec k2 = deriv(t + c2 * hs, y + hs * (a21 * k1));
    const Vec k3 = deriv(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const Vec k4 = deriv(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = deriv(t + c5 * hs,
                         y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 = deriv(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 +
                                           a64 * k4 + a65 * k5));
    const Vec y1 =
        y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vec k7 = deriv(t + hs, y1);
    const Vec err =
        hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const Scalar en = err_norm(err, y, y1);
    if (!(en == en))
      throw PoleEncounterError("integrate: non-finite error estimate");

    if (en <= Scalar(1)) {
      st.t0 = t;
      st.h = hs;
      st.y0 = y;
      st.y1 = y1;
      st.r2 = y1 - y;
      st.r3 = hs * k1 - st.r2;
      st.r4 = st.r2 - hs * k7 - st.r3;
      st.r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      t = (h == abs(t_end - t)) ? t_end : t + hs;
      y = y1;
      k1 = k7;
      // PI step control (Gustafsson) with the usual exponents for order 5.
      const Scalar e = max(en, Scalar(1e-10));
      Scalar fac = Scalar(0.9) * pow(e, Scalar(-0.7) / 5) * pow(fac_prev, Scalar(0.4) / 5);
      fac = min(Scalar(5), max(Scalar(0.2), fac));
      fac_prev = max(en, Scalar(1e-4));
      h *= fac;
      if (!on_step(static_cast<const DenseStep<Scalar, N> &>(st)))
        return t;
    } else {
      h *= max(Scalar(0.2), Scalar(0.9) * pow(en, Scalar(-0.2)));
    }
  }
  throw StepUnderflowError("integrate: step budget exhausted");
}

/// Root of a scalar event g along one dense step, bracketed by a sign change
/// over [st.t0, st.t1()]. Safeguarded Newton using dg/dt, bisection fallback.
template <typename Scalar, int N, class G, class DG>
Scalar refine_event(const DenseStep<Scalar, N> &st, G &&g, DG &&dg,
                    Scalar t_tol) {
  using std::abs;
  Scalar a = st.t0, b = st.t1();
  if (a > b)
    std::swap(a, b);
  Scalar ga = g(st(a)), gb = g(st(b));
  if (ga == Scalar(0))
    return a;
  if (gb == Scalar(0))
    return b;
  Scalar t = a - ga * (b - a) / (gb - ga);
  for (int it = 0; it < 100; ++it) {
    const auto z = st(t);
    const Scalar gt = g(z);
    if (gt == Scalar(0))
      return t;
    if ((gt < 0) == (ga < 0)) {
      a = t;
      ga = gt;
    } else {
      b = t;
      gb = gt;
    }
    const Scalar slope = dg(t, z);
    Scalar tn = t - gt / slope;
    if (!(tn > a && tn < b) || !(slope == slope))
      tn = (a + b) / 2;
    if (abs(tn - t) <= t_tol || (b - a) <= t_tol)
      return tn;
    t = tn;
  }
  return t;
}

} // namespace isochron
