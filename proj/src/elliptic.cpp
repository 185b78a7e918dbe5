#include "isochron/elliptic.hpp"

#include <array>
#include <string>

#include <gmpxx.h>

namespace isochron {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSeriesTerms = 64;

void require_positive(double h, const char *what) {
  if (!(h > 0))
    throw NonPositiveEnergyError(std::string(what) + ": h must be positive, got " +
                                 std::to_string(h));
}

// Coefficients c_n of script_l(u) / (pi/2) = sum_n c_n u^{2n}, computed once
// in exact arithmetic.
std::array<long double, kSeriesTerms> script_l_coefficients() {
  constexpr int n = kSeriesTerms;
  std::array<mpq_class, n> k, e, w, coef, prod;
  k[0] = 1;
  for (int i = 1; i < n; ++i) {
    const mpq_class r(2 * i - 1, 2 * i);
    k[i] = k[i - 1] * r * r;
  }
  for (int i = 0; i < n; ++i)
    e[i] = -k[i] / mpq_class(2 * i - 1);
  // w(v)^2 = 1 - v + v^2/16, so that sqrt(16 - 16u^2 + u^4) = 4 w(u^2).
  std::array<mpq_class, n> a{};
  a[0] = 1;
  a[1] = -1;
  a[2] = mpq_class(1, 16);
  w[0] = 1;
  for (int i = 1; i < n; ++i) {
    mpq_class acc = a[i];
    for (int j = 1; j < i; ++j)
      acc -= w[j] * w[i - j];
    w[i] = acc / 2;
  }
  for (int i = 0; i < n; ++i)
    coef[i] = -4 * w[i] / 6;
  coef[0] += mpq_class(-2, 6);
  coef[1] += mpq_class(1, 6);
  std::array<long double, n> out{};
  for (int i = 0; i < n; ++i) {
    mpq_class acc = e[i];
    for (int j = 0; j <= i; ++j)
      acc += coef[j] * k[i - j];
    out[i] = static_cast<long double>(acc.get_d());
    // Refine the double rounding with the residual.
    const mpq_class rounded(acc.get_d());
    out[i] += static_cast<long double>(mpq_class(acc - rounded).get_d());
  }
  return out;
}

const std::array<long double, kSeriesTerms> &script_l_series_coefficients() {
  static const auto c = script_l_coefficients();
  return c;
}

} // namespace

Jet2 sqrt(const Jet2 &a) {
  const double s = std::sqrt(a.v);
  const double s1 = a.d1 / (2 * s);
  const double s2 = (a.d2 - 2 * s1 * s1) / (2 * s);
  return {s, s1, s2};
}

void ellip_jet(const Jet2 &u, Jet2 &k, Jet2 &e) {
  const double x = u.v;
  const auto p = ellip(x);
  const double K = p.k_val, E = p.e_val;
  const double om = 1 - x * x;
  const double dk = -K / x + E / (x * om);
  const double de = (E - K) / x;
  const double d2k = K / (x * x) - dk / x +
                     (de * x * om - E * (1 - 3 * x * x)) / ((x * om) * (x * om));
  const double d2e = ((de - dk) * x - (E - K)) / (x * x);
  k = {K, dk * u.d1, d2k * u.d1 * u.d1 + dk * u.d2};
  e = {E, de * u.d1, d2e * u.d1 * u.d1 + de * u.d2};
}

double mu_of_h(double h) {
  require_positive(h, "mu_of_h");
  return 2 * h * std::sqrt(1 + h * h) / (1 + 2 * h * h);
}

Jet2 mu_of_h(const Jet2 &h) {
  require_positive(h.v, "mu_of_h");
  const Jet2 h2 = h * h;
  return Jet2(2.0) * h * sqrt(Jet2(1.0) + h2) / (Jet2(1.0) + Jet2(2.0) * h2);
}

IbarValues ibar_pair(double h) {
  require_positive(h, "ibar_pair");
  const auto p = ellip(mu_of_h(h));
  const double K = p.k_val, E = p.e_val;
  const double h2 = h * h, h4 = h2 * h2, h6 = h4 * h2;
  const double q = 1 + 2 * h2;
  IbarValues out;
  out.i2 = 2 * h2 / q * K - (2 + 4 * h2) / h2 * E;
  out.i0 = q * (1 + 2 * h2 + 2 * h4) / h6 * E -
           (1 + h2 + h4) * (1 + 3 * h2 + 3 * h4) / (h6 * q) * K;
  out.di2 = (2 + 2 * h2) / (h2 * h) * (E + K / q);
  return out;
}

void ibar_jet(double h, Jet2 &i2, Jet2 &i0) {
  require_positive(h, "ibar_jet");
  const Jet2 x = Jet2::variable(h);
  Jet2 K, E;
  ellip_jet(mu_of_h(x), K, E);
  const Jet2 one(1.0), two(2.0), three(3.0);
  const Jet2 h2 = x * x, h4 = h2 * h2, h6 = h4 * h2;
  const Jet2 q = one + two * h2;
  i2 = two * h2 / q * K - (two + Jet2(4.0) * h2) / h2 * E;
  i0 = q * (one + two * h2 + two * h4) / h6 * E -
       (one + h2 + h4) * (one + three * h2 + three * h4) / (h6 * q) * K;
}

LPair l_pm(double h) {
  const double h2 = h * h, h4 = h2 * h2;
  const double a = 1 + 2 * h2 + 2 * h4;
  const double root = std::sqrt(1 + 4 * h2 + 5 * h4 + 2 * h4 * h2 + h4 * h4);
  const double den = 3 * (1 + 2 * h2) * (1 + 2 * h2);
  const double minus = (-a - 2 * root) / den;
  // The product L_+ L_- = -1/(3 (1+2h^2)^2) avoids cancellation in L_+.
  const double plus = -1.0 / (den * minus);
  return {plus, minus};
}

double script_l_direct(double u) {
  const auto p = ellip(u);
  const double u2 = u * u;
  return p.e_val + (u2 - 2 - std::sqrt(16 - 16 * u2 + u2 * u2)) / 6 * p.k_val;
}

double script_l_series(double u) {
  const auto &c = script_l_series_coefficients();
  const long double v = static_cast<long double>(u) * u;
  long double acc = 0;
  for (int i = kSeriesTerms - 1; i >= 4; --i)
    acc = acc * v + c[i];
  for (int i = 0; i < 4; ++i)
    acc *= v;
  return static_cast<double>(acc * std::numbers::pi_v<long double> / 2);
}

double script_l(double u) {
  if (!(std::abs(u) < 1))
    throw ModulusRangeError("script_l: modulus must satisfy |u| < 1");
  return std::abs(u) < kScriptLSeriesBelow ? script_l_series(u)
                                           : script_l_direct(u);
}

double g1(double u) {
  const double u2 = u * u;
  const double d = 16 - 16 * u2 + u2 * u2;
  return (48 - 64 * u2 + 17 * u2 * u2) / (u * (1 - u2) * d) +
         std::sqrt(d) / (u * (1 - u2));
}

double g0(double u) {
  const double u2 = u * u;
  const double d = 16 - 16 * u2 + u2 * u2;
  return (16 - 12 * u2 + (8 - u2) * std::sqrt(d)) / ((1 - u2) * d);
}

Wronskians wronskians_closed(double h) {
  require_positive(h, "wronskians_closed");
  const double u = mu_of_h(h);
  const auto p = ellip(u);
  const LPair l = l_pm(h);
  const IbarValues ib = ibar_pair(h);
  Wronskians w;
  w.plus_factor = p.e_val + l.plus * p.k_val;
  // E + L_- K at mu(h) is script_l(mu(h)).
  w.minus_factor = script_l(u);
  const double h2 = h * h;
  w.det2 = 72 * (1 + h2) * (1 + h2) * (1 + h2) / std::pow(h, 11) *
           w.plus_factor * w.minus_factor;
  w.w2 = kPi * ib.di2;
  w.w3 = kPi * w.det2;
  return w;
}

} // namespace isochron
