#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "isochron/abelian.hpp"
#include "isochron/errors.hpp"
#include "isochron/periodlab.hpp"

using namespace isochron;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

RationalVector rv(std::initializer_list<int> v) {
  RationalVector out;
  for (int x : v)
    out.emplace_back(x);
  return out;
}

double max_dev(const std::vector<double> &t) {
  double m = 0;
  for (double v : t)
    m = std::max(m, std::abs(v - kTwoPi));
  return m;
}

// A scan built from a formula, for exercising the fit without integration.
PeriodScan synthetic(double eps, const std::vector<double> &s, double (*f)(double, double)) {
  PeriodScan p;
  p.eps = eps;
  p.s_grid = s;
  p.x = s;
  p.tol = 1e-14;
  for (double v : s) {
    p.T.push_back(f(v, eps));
    const double h = 1e-6;
    p.dT.push_back((f(v + h, eps) - f(v - h, eps)) / (2 * h));
  }
  return p;
}

std::vector<double> grid01(int n) {
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i)
    s[i] = 0.1 + 0.8 * i / (n - 1);
  return s;
}

// Sign-change locations of samples, linear interpolation.
std::vector<double> sign_changes(const std::vector<double> &s, const std::vector<double> &f) {
  std::vector<double> out;
  for (size_t i = 1; i < s.size(); ++i)
    if ((f[i - 1] < 0) != (f[i] < 0))
      out.push_back(s[i - 1] + (s[i] - s[i - 1]) * f[i - 1] / (f[i - 1] - f[i]));
  return out;
}

} // namespace

TEST_CASE("unperturbed scans are isochronous") {
  for (SystemId id : kAllSystems) {
    const auto &spec = get_spec(id);
    const SectionGrid g = section_grid(spec, 20);
    const auto series = PerturbationSeries::first_order(spec.tmpl, RationalVector(arity(spec.tmpl)));
    const PeriodScan scan = period_scan(spec, series, 0.0, g);
    CAPTURE(name(id));
    CHECK(scan.dropped.empty());
    CHECK(max_dev(scan.T) < 1e-9);
    CHECK(scan.source == (spec.u0 ? SectionKind::CommutatorFlow : SectionKind::XAxisRay));
  }
}

TEST_CASE("commutator section stays on the axis and is monotone") {
  const SectionGrid g = section_grid(get_spec(SystemId::S3star), 64);
  for (size_t i = 1; i < g.x.size(); ++i)
    CHECK(g.x[i] > g.x[i - 1]);
  CHECK(g.x.front() == doctest::Approx(g.region.x_lo));
  CHECK(g.x.back() == doctest::Approx(g.region.x_hi).epsilon(1e-6));
}

TEST_CASE("kernel direction stays isochronous") {
  const auto &spec = get_spec(SystemId::S2star);
  const auto series = PerturbationSeries::first_order(Template::Cubic, rv({1, 0, 0, 1}));
  const PeriodScan scan = period_scan(spec, series, 1e-2, section_grid(spec, 20));
  CHECK(scan.dropped.empty());
  CHECK(max_dev(scan.T) < 1e-8);
}

TEST_CASE("first-order slope matches the direct Abelian integral") {
  const auto &spec = get_spec(SystemId::S2star);
  const RationalVector c = rv({1, 0, 0, 0});
  const double eps = 1e-3;
  const SectionGrid g = section_grid(spec, 12);
  const PeriodScan scan =
      period_scan(spec, PerturbationSeries::first_order(Template::Cubic, c), eps, g);
  for (size_t i = 1; i + 1 < g.x.size(); ++i) {
    const double r = r_direct(SystemId::S2star, c, g.x[i]).value;
    CAPTURE(g.x[i]);
    CHECK(scan.dT[i] / eps == doctest::Approx(-r).epsilon(0.02));
  }
}

TEST_CASE("eps fit of synthetic data") {
  const auto s = grid01(40);
  const auto f = [](double v, double e) { return kTwoPi + e * e * v; };
  std::vector<PeriodScan> scans;
  for (double e : {0.0, 1e-2, 5e-3, 2.5e-3, 1.25e-3})
    scans.push_back(synthetic(e, s, f));
  const TaylorPeriod tp = eps_taylor(scans);
  CHECK(tp.residual < 1e-8);
  CHECK(tp.ell_star == 2);
  for (size_t i = 0; i < s.size(); ++i) {
    CHECK(std::abs(tp.t[0][i] - kTwoPi) < 1e-10);
    CHECK(std::abs(tp.t[1][i]) < 1e-8);
    CHECK(tp.t[2][i] == doctest::Approx(s[i]).epsilon(1e-6));
  }
}

TEST_CASE("ill-conditioned ladders are rejected") {
  const auto s = grid01(10);
  const auto f = [](double v, double e) { return kTwoPi + e * v; };
  std::vector<PeriodScan> three;
  for (double e : {1e-2, 5e-3, 2.5e-3})
    three.push_back(synthetic(e, s, f));
  CHECK_THROWS_AS(eps_taylor(three), IllConditionedLadderError);
  std::vector<PeriodScan> uneven;
  for (double e : {1e-2, 5e-3, 1e-3, 9e-4})
    uneven.push_back(synthetic(e, s, f));
  CHECK_THROWS_AS(eps_taylor(uneven), IllConditionedLadderError);
  std::vector<PeriodScan> tight;
  for (double e : {1e-2, 0.999e-2, 0.998001e-2, 0.997003e-2})
    tight.push_back(synthetic(e, s, f));
  CHECK_THROWS_AS(eps_taylor(tight), IllConditionedLadderError);
}

TEST_CASE("leading order of the period expansion") {
  const auto &spec = get_spec(SystemId::S2star);
  const SectionGrid g = section_grid(spec, 256);

  const TaylorPeriod generic = eps_taylor(ladder_scans(
      spec, PerturbationSeries::first_order(Template::Cubic, rv({1, 0, 0, 0})), g));
  CHECK(generic.ell_star == 1);

  // Kernel at first order and a one-zero direction at second order: the
  // second-order coefficient must carry the zero of the first-order basis
  // combination for that direction.
  const FirstOrderBasis basis = first_order_basis(spec, g);
  const Realization one = realize_k(spec, 1, basis);
  REQUIRE(one.status == RealizationStatus::Found);
  PerturbationSeries series;
  series.tmpl = Template::Cubic;
  series.orders = {rv({1, 0, 0, 1}), one.coeffs};
  const TaylorPeriod tp = eps_taylor(ladder_scans(spec, series, g));
  CHECK(tp.ell_star == 2);
  std::vector<double> combo(g.s.size(), 0.0);
  for (size_t j = 0; j < basis.funcs.size(); ++j)
    for (size_t i = 0; i < combo.size(); ++i)
      combo[i] += one.weights[j] * basis.funcs[j][i];
  const auto z2 = sign_changes(g.s, tp.dt[2]);
  const auto zb = sign_changes(g.s, combo);
  REQUIRE(z2.size() == 1);
  REQUIRE(zb.size() == 1);
  CHECK(std::abs(z2[0] - zb[0]) < 2 * (g.s[1] - g.s[0]));
}

TEST_CASE("critical periods of synthetic scans") {
  std::vector<double> s(300), mono(300), two(300);
  for (int i = 0; i < 300; ++i) {
    s[i] = i / 299.0;
    mono[i] = 1 + s[i];
    two[i] = (s[i] - 0.3) * (s[i] - 0.7);
  }
  CHECK(critical_periods(s, mono).count == 0);
  CHECK(critical_periods(s, two).count == 2);
  CHECK_THROWS_AS(critical_periods(std::vector<double>(100), std::vector<double>(100)),
                  std::invalid_argument);
}

TEST_CASE("dropout threshold") {
  PeriodScan p;
  p.s_grid.assign(100, 0.0);
  p.dropped.assign(6, 0.0);
  CHECK(p.dropout_fraction() == doctest::Approx(0.06));
  CHECK_THROWS_AS(p.require_dropout_below(0.05), LostOrbitError);
  CHECK_NOTHROW(p.require_dropout_below(0.1));
}

TEST_CASE("realizations for S2star") {
  const auto &spec = get_spec(SystemId::S2star);
  const FirstOrderBasis basis = first_order_basis(spec, section_grid(spec, 256));
  for (int k = 0; k <= 2; ++k) {
    const Realization r = realize_k(spec, k, basis);
    CAPTURE(k);
    REQUIRE(r.status == RealizationStatus::Found);
    CHECK(r.zeros.count == k);
    for (const auto &c : confirm(spec, r.coeffs, {1e-3, 1e-4}, {256, 512})) {
      CHECK(c.count == k);
      CHECK_FALSE(c.unresolved);
    }
  }
  const Realization none = realize_k(spec, 3, basis);
  CHECK(none.status == RealizationStatus::None);
  CHECK_THROWS_AS(realize_k(spec, -1, basis), std::invalid_argument);
}

TEST_CASE("S1star zero-free realization is the pure gamma direction") {
  const auto &spec = get_spec(SystemId::S1star);
  const Realization r = realize_k(spec, 0, 256);
  REQUIRE(r.status == RealizationStatus::Found);
  const auto cc = complex_coeffs(r.coeffs[0], r.coeffs[1], r.coeffs[2], r.coeffs[3]);
  CHECK(cc[1] == 0);
  CHECK(cc[3] == 0);
  CHECK(cc[2] != 0);
  // R = -pi h^4 / (1 + h^2)^2 for gamma = 1.
  const RationalVector unit = {Rational(1, 8), Rational(1, 8), Rational(1, 8), Rational(1, 8)};
  for (double h : {0.5, 1.0, 2.0})
    CHECK(r_elliptic_s1(h, unit).value ==
          doctest::Approx(-std::numbers::pi * std::pow(h, 4) / std::pow(1 + h * h, 2)));
}

TEST_CASE("critical-period counts do not depend on the section") {
  const auto &spec = get_spec(SystemId::S3star);
  const Realization r = realize_k(spec, 2, 256);
  REQUIRE(r.status == RealizationStatus::Found);
  const auto series = PerturbationSeries::first_order(Template::Cubic, r.coeffs);
  const PeriodScan comm = period_scan(spec, series, 1e-3, section_grid(spec, 256));
  const PeriodScan ray = period_scan(spec, series, 1e-3, ray_grid(spec, 256));
  CHECK(comm.source == SectionKind::CommutatorFlow);
  CHECK(ray.source == SectionKind::XAxisRay);
  const ZeroCount zc = critical_periods(comm), zr = critical_periods(ray);
  CHECK(zc.count == 2);
  CHECK(zr.count == zc.count);
  // Matching crossings on the axis.
  for (size_t j = 0; j < zc.locations.size() && j < zr.locations.size(); ++j) {
    size_t i = 1;
    while (i + 1 < comm.s_grid.size() && comm.s_grid[i] < zc.locations[j])
      ++i;
    CHECK(std::abs(comm.x[i] - zr.locations[j]) < 0.02);
  }
}

TEST_CASE("Loud pair") {
  SUBCASE("superposition") {
    const auto &spec = get_spec(SystemId::LoudS3);
    const SectionGrid g = section_grid(spec, 64);
    std::vector<double> half;
    for (double e : fine_ladder())
      half.push_back(e / 2);
    const auto series = PerturbationSeries::first_order(Template::Quadratic, rv({2, 3}));
    const LoudPair lp = loud_pair(spec, g), lp_half = loud_pair(spec, g, half);
    const auto combo = eps_taylor(ladder_scans(spec, series, g, fine_ladder())).dt[1];
    const auto combo_half = eps_taylor(ladder_scans(spec, series, g, half)).dt[1];
    // Combined tolerance: ten times the ladder-halving change of every term.
    for (size_t i = 0; i < g.s.size(); ++i) {
      const double sum = 2 * lp.i0[i] + 3 * lp.i1[i];
      const double err = std::abs(combo[i] - combo_half[i]) +
                         2 * std::abs(lp.i0[i] - lp_half.i0[i]) +
                         3 * std::abs(lp.i1[i] - lp_half.i1[i]);
      CAPTURE(g.x[i]);
      CHECK(std::abs(combo[i] - sum) < 10 * err + 1e-9 * std::abs(sum));
    }
  }
  SUBCASE("equal pair on the (-1/2, 1/2) base") {
    const auto &spec = get_spec(SystemId::LoudS1);
    const LoudPair lp = loud_pair(spec, section_grid(spec, 64));
    for (size_t i = 0; i < lp.i0.size(); ++i) {
      CHECK(std::abs(lp.i1[i]) > 0);
      CHECK(std::abs(lp.i0[i] / lp.i1[i] - 1) < 1e-4);
    }
  }
  SUBCASE("rejects Pleshkan records") {
    const auto &spec = get_spec(SystemId::S2star);
    CHECK_THROWS_AS(loud_pair(spec, section_grid(spec, 16)), TemplateMismatchError);
  }
}

TEST_CASE("Loud realizations") {
  const auto &spec = get_spec(SystemId::LoudS2);
  const FirstOrderBasis basis = first_order_basis(spec, section_grid(spec, 256));
  CHECK(grid_wronskian(basis.grid.s, basis.funcs[0], basis.funcs[1]).nonvanishing);
  for (int k = 0; k <= 1; ++k) {
    const Realization r = realize_k(spec, k, basis);
    REQUIRE(r.status == RealizationStatus::Found);
    for (const auto &c : confirm(spec, r.coeffs, {1e-3}, {256}))
      CHECK(c.count == k);
  }
  CHECK(realize_k(spec, 2, basis).status == RealizationStatus::None);
}

TEST_CASE("grid Wronskian") {
  std::vector<double> s(200), f(200), g(200), h(200);
  for (int i = 0; i < 200; ++i) {
    s[i] = 1 + i / 199.0;
    f[i] = 1.0;
    g[i] = s[i] * s[i];
    h[i] = (s[i] - 1.5) * 2;
  }
  const GridWronskian w = grid_wronskian(s, f, g);
  CHECK(w.nonvanishing);
  for (size_t i = 0; i < s.size(); ++i)
    CHECK(w.values[i] == doctest::Approx(2 * s[i]).epsilon(1e-6));
  // W[1, h^2] = 2 h h' changes sign at 1.5.
  std::vector<double> h2(200);
  for (int i = 0; i < 200; ++i)
    h2[i] = h[i] * h[i];
  CHECK_FALSE(grid_wronskian(s, f, h2).nonvanishing);
  CHECK_THROWS_AS(grid_wronskian({1, 2}, {1, 2}, {1, 2}), std::invalid_argument);
}
