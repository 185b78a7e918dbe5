#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "isochron/abelian.hpp"
#include "isochron/chebyshev.hpp"

using namespace isochron;
using P = BivariatePoly;
using R = BivariateRational;

namespace {

const P X = P::x();

std::vector<FunctionOnInterval> monomials(int n, double lo, double hi) {
  std::vector<FunctionOnInterval> out;
  for (int i = 0; i < n; ++i)
    out.push_back(FunctionOnInterval::rational(R(X.pow(i)), lo, hi));
  return out;
}

std::vector<double> uniform(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

} // namespace

TEST_CASE("small Wronskians") {
  const auto m = monomials(3, -2.0, 2.0);
  for (double x : {-1.5, 0.0, 0.3, 1.9}) {
    CHECK(wronskian(m, x, 3).value == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(wronskian(m, x, 2).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(wronskian(m, x, 1).value == doctest::Approx(1.0));
  }
  const auto f = FunctionOnInterval::rational(R(P(1), P(1) + X * X), -1, 1);
  CHECK(wronskian({f}, 0.5, 1).value == doctest::Approx(0.8));
  CHECK_THROWS_AS(wronskian(m, 0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(wronskian(m, 3.0, 2), std::domain_error);
  CHECK_THROWS_AS(wronskian(m, 0.5, 3, 0.0), DerivativeAccuracyError);
}

TEST_CASE("derivative schemes agree") {
  const R r(P(1) - 4 * X * X, P(1) - X * X);
  const auto exact = FunctionOnInterval::rational(r, 0.0, 1.0);
  const DenseRational<double> dr(r);
  const auto cauchy = FunctionOnInterval::holomorphic(
      [dr](std::complex<double> z) { return dr(z, std::complex<double>(0.0)); }, 0.0, 1.0);
  const auto rich = FunctionOnInterval::sampled(
      [dr](double x) { return dr(x, 0.0); }, 0.0, 1.0);
  CHECK(cauchy.scheme() == DerivativeScheme::ComplexCauchy);
  CHECK(rich.scheme() == DerivativeScheme::Richardson);
  for (double x : {0.2, 0.5, 0.8}) {
    const auto a = exact.derivatives(x, 3), c = cauchy.derivatives(x, 3),
               d = rich.derivatives(x, 3);
    for (int k = 0; k <= 3; ++k) {
      const double scale = std::max(1.0, std::abs(a.values[k]));
      CHECK(std::abs(c.values[k] - a.values[k]) < 1e-9 * scale);
      CHECK(std::abs(c.values[k] - a.values[k]) <= 10 * c.errors[k] + 1e-12 * scale);
      CHECK(std::abs(d.values[k] - a.values[k]) < 1e-7 * scale);
    }
  }
}

TEST_CASE("Wronskian multilinearity and antisymmetry") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 20; ++t) {
    const Rational c = rational_from_double(u(rng));
    const R f0(P(1) + rational_from_double(u(rng)) * X * X, P(2) + X * X);
    const R f1(X.pow(3) - rational_from_double(u(rng)) * X, P(1) + X.pow(4));
    const auto g0 = FunctionOnInterval::rational(f0, -1, 1);
    const auto g1 = FunctionOnInterval::rational(f1, -1, 1);
    const auto g1c = FunctionOnInterval::rational(R(P(c)) * f1, -1, 1);
    const double x = 0.9 * u(rng) / 2;
    const double w = wronskian({g0, g1}, x, 2).value;
    CHECK(wronskian({g0, g1c}, x, 2).value ==
          doctest::Approx(c.get_d() * w).epsilon(1e-12));
    CHECK(wronskian({g1, g0}, x, 2).value == doctest::Approx(-w).epsilon(1e-13));
  }
}

TEST_CASE("ECT certification") {
  const auto cert = ect_certify(monomials(3, 0, 1), 0.0, 1.0, 64);
  CHECK(cert.ect);
  REQUIRE(cert.reports.size() == 3);
  for (const auto &r : cert.reports)
    CHECK(r.verdict == WronskianVerdict::Nonvanishing);

  const auto single = ect_certify({FunctionOnInterval::rational(R(X - Rational(1, 2)), 0, 1)},
                                  0.0, 1.0, 64);
  CHECK_FALSE(single.ect);
  CHECK(single.first_vanishes);
  CHECK(single.reports[0].verdict == WronskianVerdict::Vanishes);

  // Even parts of the S2star basis on (0, 1).
  std::vector<FunctionOnInterval> ell;
  for (const auto &f : basis_integrands(SystemId::S2star))
    ell.push_back(FunctionOnInterval::rational(even_part(f.f), 0.0, 1.0));
  const auto s2 = ect_certify(ell, 0.0, 1.0);
  CHECK(s2.ect);
  CHECK_THROWS_AS(ect_certify(ell, 0.0, 1.0, 10), std::invalid_argument);
}

TEST_CASE("criterion hypotheses") {
  for (SystemId id : {SystemId::S2star, SystemId::S3star, SystemId::S3barstar}) {
    const IsochroneSpec &s = get_spec(id);
    std::vector<R> fs;
    for (const auto &f : basis_integrands(id))
      fs.push_back(f.f);
    const auto v = criterion_check(s.ab_split->a, s.ab_split->b, fs, 2, s.x_r);
    CAPTURE(name(id));
    CHECK(v.passed);
    CHECK(v.failed.empty());
    if (id == SystemId::S2star) {
      CHECK(criterion_check(s.ab_split->a, s.ab_split->b, fs, 1, s.x_r).failed == "m >= n-1");
      const R odd(X.pow(3), P(1) - X * X);
      CHECK(criterion_check(odd, s.ab_split->b, fs, 2, s.x_r).failed == "A and B even");
    }
  }
}

TEST_CASE("zero counting") {
  const auto xs = uniform(0.0, 2.0, 256);
  std::vector<double> f1, f2;
  for (double x : xs) {
    f1.push_back(x * x - 1);
    f2.push_back(1.0);
  }
  const auto sq = [](double x) { return x * x - 1; };
  const auto z1 = count_zeros(xs, f1, sq);
  CHECK(z1.count == 1);
  CHECK(z1.locations[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(count_zeros(xs, f2).count == 0);

  const auto cub = [](double x) { return (x - 1) * (x - 2) * (x - 3); };
  const auto xc = uniform(0.5, 3.5, 300);
  std::vector<double> fc;
  for (double x : xc)
    fc.push_back(cub(x));
  const auto z3 = count_zeros(xc, fc, cub);
  REQUIRE(z3.count == 3);
  CHECK(z3.locations[2] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK_FALSE(z3.unresolved);

  // A flat stretch of zeros is flagged, not counted.
  std::vector<double> flat;
  for (double x : xs)
    flat.push_back(x < 0.8 ? -1.0 : (x < 1.2 ? 0.0 : 1.0));
  const auto zf = count_zeros(xs, flat);
  CHECK(zf.unresolved);
  CHECK(zf.count == 0);
  CHECK_THROWS_AS(count_zeros(uniform(0, 1, 10), std::vector<double>(10, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("ECT implies the zero bound on random combinations") {
  std::vector<FunctionOnInterval> ell;
  std::vector<DenseRational<double>> dense;
  for (const auto &f : basis_integrands(SystemId::S3star)) {
    ell.push_back(FunctionOnInterval::rational(f.f, 0.0, get_spec(SystemId::S3star).x_r));
    dense.emplace_back(f.f);
  }
  REQUIRE(ect_certify(ell, 0.0, get_spec(SystemId::S3star).x_r).ect);
  const auto xs = uniform(0.01, 0.99 * get_spec(SystemId::S3star).x_r, 400);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  int worst = 0;
  for (int t = 0; t < 1000; ++t) {
    const double c[3] = {g(rng), g(rng), g(rng)};
    std::vector<double> fs;
    for (double x : xs) {
      double v = 0;
      for (int i = 0; i < 3; ++i)
        v += c[i] * dense[i](x, 0.0);
      fs.push_back(v);
    }
    worst = std::max(worst, count_zeros(xs, fs).count);
  }
  CHECK(worst <= 2);
}
