#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "isochron/errors.hpp"

namespace isochron {

/// Complete elliptic integrals K(u), E(u) in the modulus convention
/// K(u) = int_0^{pi/2} dt / sqrt(1 - u^2 sin^2 t).
template <typename Scalar> struct EllipticPair {
  Scalar u;
  Scalar k_val;
  Scalar e_val;
};

/// Arithmetic-geometric mean; valid on |u| < 1.
template <typename Scalar> EllipticPair<Scalar> ellip_agm(Scalar u) {
  using std::abs;
  using std::sqrt;
  if (!(abs(u) < Scalar(1)))
    throw ModulusRangeError("ellip: modulus must satisfy |u| < 1");
  const Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar a(1), b = sqrt((Scalar(1) - u) * (Scalar(1) + u)), c = u;
  Scalar sum = c * c / 2;
  Scalar pow2(1);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  for (int it = 0; it < 64; ++it) {
    const Scalar an = (a + b) / 2;
    const Scalar bn = sqrt(a * b);
    c = (a - b) / 2;
    sum += pow2 * c * c;
    pow2 *= 2;
    a = an;
    b = bn;
    if (abs(c) <= eps * a)
      break;
  }
  const Scalar k = pi / (2 * a);
  return {u, k, k * (Scalar(1) - sum)};
}

/// Maclaurin series in u^2, truncated at relative term size below machine
/// epsilon; only used for |u| <= 0.95.
template <typename Scalar> EllipticPair<Scalar> ellip_series(Scalar u) {
  using std::abs;
  if (!(abs(u) <= Scalar(0.95)))
    throw ModulusRangeError("ellip_series: series path disabled for |u| > 0.95");
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar u2 = u * u;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon() / 8;
  // term_i = ((2i-1)!!/(2i)!!)^2 u^{2i}
  Scalar term(1), k(1), e(1);
  for (int i = 0; i < 4000; ++i) {
    const Scalar r = Scalar(2 * i + 1) / Scalar(2 * i + 2);
    term *= r * r * u2;
    k += term;
    const Scalar et = term / Scalar(2 * i + 1);
    e -= et;
    if (term <= eps * k)
      break;
  }
  return {u, pi / 2 * k, pi / 2 * e};
}

template <typename Scalar> EllipticPair<Scalar> ellip(Scalar u) {
  return ellip_agm(u);
}

/// Value with first and second derivative, for forward-mode differentiation
/// of the elliptic combinations.
struct Jet2 {
  double v = 0, d1 = 0, d2 = 0;

  Jet2() = default;
  Jet2(double value) : v(value) {}
  Jet2(double v_, double d1_, double d2_) : v(v_), d1(d1_), d2(d2_) {}
  static Jet2 variable(double x) { return {x, 1.0, 0.0}; }

  friend Jet2 operator+(const Jet2 &a, const Jet2 &b) {
    return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
  }
  friend Jet2 operator-(const Jet2 &a, const Jet2 &b) {
    return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
  }
  friend Jet2 operator*(const Jet2 &a, const Jet2 &b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + 2 * a.d1 * b.d1 + a.v * b.d2};
  }
  friend Jet2 operator/(const Jet2 &a, const Jet2 &b) {
    const double q = a.v / b.v;
    const double q1 = (a.d1 - q * b.d1) / b.v;
    const double q2 = (a.d2 - 2 * q1 * b.d1 - q * b.d2) / b.v;
    return {q, q1, q2};
  }
  Jet2 operator-() const { return {-v, -d1, -d2}; }
};

Jet2 sqrt(const Jet2 &a);

/// K and E composed with a jet argument, using the linear ODE satisfied by
/// (K, E).
void ellip_jet(const Jet2 &u, Jet2 &k, Jet2 &e);

/// mu(h) = 2h sqrt(1+h^2) / (1+2h^2).
double mu_of_h(double h);
Jet2 mu_of_h(const Jet2 &h);

struct IbarValues {
  double i2;
  double i0;
  /// Closed-form derivative of Ibar_2.
  double di2;
};

IbarValues ibar_pair(double h);
/// Ibar_2 and Ibar_0 with two h-derivatives each.
void ibar_jet(double h, Jet2 &i2, Jet2 &i0);

struct LPair {
  double plus;
  double minus;
};
LPair l_pm(double h);

/// The script-L function; below kScriptLSeriesBelow it is summed from its
/// exact Maclaurin series in u^2 to avoid the cancellation between E and K.
inline constexpr double kScriptLSeriesBelow = 0.3;
double script_l(double u);
/// Direct transcription without the small-u series (for cross-checks).
double script_l_direct(double u);
/// Truncated Maclaurin series of script_l.
double script_l_series(double u);
double g0(double u);
double g1(double u);

struct Wronskians {
  /// W[pi, Ibar_2] = pi Ibar_2'.
  double w2;
  /// W[pi, Ibar_2, Ibar_0] = pi times the factorized 2x2 determinant.
  double w3;
  /// The factorized determinant of (Ibar_2, Ibar_0) derivatives.
  double det2;
  /// E + L_+ K and E + L_- K at mu(h).
  double plus_factor;
  double minus_factor;
};
Wronskians wronskians_closed(double h);

} // namespace isochron
