#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/ellint_2.hpp>

#include "isochron/elliptic.hpp"

using namespace isochron;

namespace {

constexpr double kPi = std::numbers::pi;

double gauss_legendre_ellip(double u, bool second) {
  // Composite Simpson on the defining integral as an independent oracle.
  const int n = 20000;
  const double a = 0, b = kPi / 2, hstep = (b - a) / n;
  double acc = 0;
  for (int i = 0; i <= n; ++i) {
    const double t = a + i * hstep;
    const double s = std::sin(t);
    const double r = std::sqrt(1 - u * u * s * s);
    const double f = second ? r : 1 / r;
    acc += f * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
  }
  return acc * hstep / 3;
}

template <class F> double central(F &&f, double x, double d) {
  return (f(x + d) - f(x - d)) / (2 * d);
}

template <class F> double second_5pt(F &&f, double x, double d) {
  return (-f(x + 2 * d) + 16 * f(x + d) - 30 * f(x) + 16 * f(x - d) - f(x - 2 * d)) /
         (12 * d * d);
}

template <class F> double first_5pt(F &&f, double x, double d) {
  return (-f(x + 2 * d) + 8 * f(x + d) - 8 * f(x - d) + f(x - 2 * d)) / (12 * d);
}

} // namespace

TEST_CASE("elliptic values at zero") {
  const auto p = ellip(0.0);
  CHECK(p.k_val == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(p.e_val == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK_THROWS_AS(ellip(1.0), ModulusRangeError);
  CHECK_THROWS_AS(ellip(-1.2), ModulusRangeError);
  CHECK_THROWS_AS(ellip_series(0.96), ModulusRangeError);
}

TEST_CASE("AGM and series agree on |u| <= 0.95") {
  double worst = 0;
  for (int i = -95; i <= 95; ++i) {
    const double u = i / 100.0;
    const auto a = ellip_agm(u), s = ellip_series(u);
    worst = std::max({worst, std::abs(a.k_val - s.k_val) / a.k_val,
                      std::abs(a.e_val - s.e_val) / a.e_val});
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("elliptic values against independent oracles") {
  for (double u : {0.1, 0.5, 0.9, 0.99, 0.999999}) {
    const auto p = ellip(u);
    CHECK(p.k_val == doctest::Approx(boost::math::ellint_1(u)).epsilon(1e-13));
    CHECK(p.e_val == doctest::Approx(boost::math::ellint_2(u)).epsilon(1e-13));
  }
  for (double u : {0.3, 0.8}) {
    const auto p = ellip(u);
    CHECK(p.k_val == doctest::Approx(gauss_legendre_ellip(u, false)).epsilon(1e-12));
    CHECK(p.e_val == doctest::Approx(gauss_legendre_ellip(u, true)).epsilon(1e-12));
  }
}

TEST_CASE("long double evaluation") {
  const auto pl = ellip_agm(0.7L);
  const auto pd = ellip(0.7);
  CHECK(std::abs(static_cast<double>(pl.k_val) - pd.k_val) < 1e-15);
  const auto sl = ellip_series(0.7L);
  CHECK(std::abs(sl.e_val - pl.e_val) < 1e-17L);
}

TEST_CASE("Legendre-type derivative identities") {
  for (double u : {0.1, 0.3, 0.45, 0.6, 0.75, 0.9}) {
    const auto p = ellip(u);
    const double de = central([](double x) { return ellip(x).e_val; }, u, 1e-5);
    const double dk = first_5pt([](double x) { return ellip(x).k_val; }, u, 1e-4);
    CHECK(std::abs(de - (p.e_val - p.k_val) / u) < 1e-8);
    CHECK(std::abs(dk - (-p.k_val / u + p.e_val / (u * (1 - u * u)))) < 1e-8);
  }
}

TEST_CASE("mu of h") {
  CHECK(mu_of_h(1.0) == doctest::Approx(2 * std::sqrt(2.0) / 3).epsilon(1e-15));
  CHECK(mu_of_h(1e6) > 1 - 1e-12);
  CHECK(mu_of_h(1e3) < 1);
  double prev = 0;
  for (int i = 1; i <= 1000; ++i) {
    const double m = mu_of_h(i * 0.01);
    CHECK(m > prev);
    CHECK(m < 1);
    prev = m;
  }
  CHECK_THROWS_AS(mu_of_h(0.0), NonPositiveEnergyError);
  CHECK_THROWS_AS(ibar_pair(-1.0), NonPositiveEnergyError);
}

TEST_CASE("Ibar_2 derivative") {
  for (int i = 1; i <= 200; ++i) {
    const double h = 0.05 * i;
    CHECK(ibar_pair(h).di2 > 0);
  }
  for (double h : {0.5, 1.0, 2.0}) {
    const double fd = first_5pt([](double x) { return ibar_pair(x).i2; }, h, 1e-3);
    CHECK(ibar_pair(h).di2 == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("jets reproduce finite differences") {
  for (double h : {0.4, 1.0, 2.5}) {
    Jet2 i2, i0;
    ibar_jet(h, i2, i0);
    const auto ib = ibar_pair(h);
    CHECK(i2.v == doctest::Approx(ib.i2).epsilon(1e-13));
    CHECK(i0.v == doctest::Approx(ib.i0).epsilon(1e-12));
    CHECK(i2.d1 == doctest::Approx(ib.di2).epsilon(1e-12));
    const auto f0 = [](double x) { return ibar_pair(x).i0; };
    CHECK(i0.d1 == doctest::Approx(first_5pt(f0, h, 1e-3)).epsilon(1e-6));
    CHECK(i0.d2 == doctest::Approx(second_5pt(f0, h, 1e-3)).epsilon(1e-5));
  }
}

TEST_CASE("L pair") {
  for (int i = 1; i <= 1000; ++i) {
    const double h = 0.01 * i;
    const LPair l = l_pm(h);
    const double q = 1 + 2 * h * h;
    CHECK(l.plus > 0);
    CHECK(l.minus < 0);
    CHECK(l.plus * l.minus == doctest::Approx(-1 / (3 * q * q)).epsilon(1e-12));
    CHECK(l.plus + l.minus ==
          doctest::Approx(-2 * (1 + 2 * h * h + 2 * std::pow(h, 4)) / (3 * q * q))
              .epsilon(1e-12));
  }
}

TEST_CASE("script L near zero") {
  const double lead = -3 * kPi / 4096;
  CHECK(script_l(0.05) / std::pow(0.05, 8) == doctest::Approx(lead).epsilon(0.01));
  CHECK(script_l_series(1e-3) / std::pow(1e-3, 8) == doctest::Approx(lead).epsilon(1e-5));
  // Series and direct paths agree where both are accurate.
  for (double u : {0.25, 0.3, 0.35, 0.45}) {
    const double s = script_l_series(u), d = script_l_direct(u);
    CHECK(std::abs(s - d) < 1e-13);
  }
}

TEST_CASE("script L has no zero and g0 is positive") {
  for (int i = 1; i < 99; ++i) {
    const double u = i / 100.0;
    CHECK(script_l(u) < 0);
    CHECK(g0(u) > 0);
  }
}

TEST_CASE("script L differential equation") {
  for (double u : {0.2, 0.5, 0.8}) {
    const double d = 1e-3;
    const double l1 = first_5pt(script_l, u, d);
    const double l2 = second_5pt(script_l, u, d);
    const double res = l2 - g1(u) * l1 - g0(u) * script_l(u);
    CHECK(std::abs(res) < 1e-4 * std::max(std::abs(l2), 1.0));
  }
}

TEST_CASE("closed-form Wronskians") {
  for (int i = 1; i <= 100; ++i) {
    const double h = 0.05 * i;
    const Wronskians w = wronskians_closed(h);
    CHECK(w.w2 > 0);
    CHECK(w.w3 != 0);
    CHECK(w.plus_factor > 0);
  }
  for (double h : {0.5, 1.0, 2.0}) {
    const Wronskians w = wronskians_closed(h);
    const auto f2 = [](double x) { return ibar_pair(x).i2; };
    const auto f0 = [](double x) { return ibar_pair(x).i0; };
    const double d = 1e-3;
    const double det = first_5pt(f2, h, d) * second_5pt(f0, h, d) -
                       first_5pt(f0, h, d) * second_5pt(f2, h, d);
    CHECK(w.det2 == doctest::Approx(det).epsilon(1e-5));
    CHECK(w.w3 == doctest::Approx(kPi * det).epsilon(1e-5));
    Jet2 i2, i0;
    ibar_jet(h, i2, i0);
    CHECK(w.det2 == doctest::Approx(i2.d1 * i0.d2 - i0.d1 * i2.d2).epsilon(1e-9));
  }
}
