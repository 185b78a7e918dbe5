// One pass/fail line per acceptance criterion; exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "isochron/abelian.hpp"
#include "isochron/catalog.hpp"
#include "isochron/chebyshev.hpp"
#include "isochron/elliptic.hpp"
#include "isochron/exact_linalg.hpp"
#include "isochron/periodlab.hpp"

using namespace isochron;
using P = BivariatePoly;
using R = BivariateRational;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string &what) {
    if (!ok) {
      if (pass)
        detail << "failed: ";
      else
        detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

template <class F> double five_point(F &&f, double x, double d) {
  return (-f(x + 2 * d) + 8 * f(x + d) - 8 * f(x - d) + f(x - 2 * d)) / (12 * d);
}

template <class F> double five_point2(F &&f, double x, double d) {
  return (-f(x + 2 * d) + 16 * f(x + d) - 30 * f(x) + 16 * f(x - d) - f(x - 2 * d)) /
         (12 * d * d);
}

double max_dev(const PeriodScan &s) {
  double m = 0;
  for (double t : s.T)
    m = std::max(m, std::isfinite(t) ? std::abs(t - 2 * kPi) : INFINITY);
  return m;
}

std::string sys(SystemId id) { return std::string(name(id)); }

// Weights on the first-order basis carried by a coefficient vector: the
// basis directions have unit phi-images, so the weights are the image
// entries in the basis order.
std::vector<double> basis_weights(const FirstOrderBasis &b, const RationalVector &c) {
  if (b.directions[0].size() == 2)
    return {c[0].get_d(), c[1].get_d()};
  const auto img = phi_map(b.id, c).image;
  std::vector<double> w;
  for (const auto &d : b.directions) {
    const auto u = phi_map(b.id, d).image;
    int at = 0;
    for (int i = 0; i < 3; ++i)
      if (u[i] != 0)
        at = i;
    w.push_back(img[at].get_d());
  }
  return w;
}

std::vector<double> combine(const FirstOrderBasis &b, const std::vector<double> &w) {
  std::vector<double> out(b.grid.s.size(), 0.0);
  for (size_t j = 0; j < w.size(); ++j)
    for (size_t i = 0; i < out.size(); ++i)
      out[i] += w[j] * b.funcs[j][i];
  return out;
}

// ---- 1
Outcome exact_identities() {
  Outcome o;
  for (SystemId id : kPleshkanSystems) {
    const IsochroneSpec &s = get_spec(id);
    bool br = false, fi = false, ker = !is_cubic(id);
    for (const auto &c : verify_identities(s)) {
      if (c.identity == "commutator")
        br = c.passed;
      if (c.identity == "first_integral")
        fi = c.passed;
      if (c.identity == "phi_kernel")
        ker = c.passed;
    }
    o.require(br, sys(id) + " [X0,U0]");
    o.require(fi, sys(id) + " grad H . X0");
    o.require(ker, sys(id) + " ker(phi)");
    if (s.phi)
      o.require(same_kernel(*s.phi, s.kernel), sys(id) + " kernel constraints");
  }
  o.detail << (o.pass ? "4 commutators, 4 first integrals, 3 phi kernels exact" : "");
  return o;
}

// ---- 2
Outcome isochrony() {
  Outcome o;
  double worst = 0;
  for (SystemId id : kAllSystems) {
    const IsochroneSpec &s = get_spec(id);
    const auto series = PerturbationSeries::first_order(s.tmpl, RationalVector(arity(s.tmpl)));
    const PeriodScan scan = period_scan(s, series, 0.0, section_grid(s, 20));
    worst = std::max(worst, max_dev(scan));
    o.require(scan.dropped.empty() && max_dev(scan) < 1e-9, sys(id));
  }
  if (o.pass)
    o.detail << "max |T - 2 pi| = " << worst << " over 8 x 20 points";
  return o;
}

// ---- 3
Outcome kernel_neutrality() {
  Outcome o;
  double worst = 0;
  for (SystemId id : kPleshkanSystems) {
    const IsochroneSpec &s = get_spec(id);
    const auto dirs = nullspace(s.kernel);
    o.require(dirs.size() == 1, sys(id) + " kernel dimension");
    for (const auto &d : dirs) {
      const auto series = PerturbationSeries::first_order(s.tmpl, d);
      const PeriodScan scan = period_scan(s, series, 1e-2, section_grid(s, 20));
      worst = std::max(worst, max_dev(scan));
      o.require(max_dev(scan) < 1e-8, sys(id));
    }
  }
  if (o.pass)
    o.detail << "eps = 1e-2, max |T - 2 pi| = " << worst;
  return o;
}

// ---- 4
Outcome s1_closed_form() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  double worst = 0;
  for (int t = 0; t < 5; ++t) {
    std::array<double, 4> c{};
    for (double &v : c)
      v = g(rng);
    for (double h : {0.3, 0.5, 1.0, 2.0}) {
      const double e = r_elliptic_s1(h, c).value;
      const double d = r_direct(SystemId::S1star, c, h).value;
      const double rel = std::abs(e - d) / std::abs(d);
      worst = std::max(worst, rel);
      o.require(rel < 1e-6, "draw " + std::to_string(t) + " h " + std::to_string(h));
    }
  }
  // Pure alpha: complex form (1, 0, 0, 0).
  Eigen::Matrix4d m;
  for (int j = 0; j < 4; ++j) {
    std::array<Rational, 4> e{};
    e[j] = 1;
    const auto cc = complex_coeffs(e[0], e[1], e[2], e[3]);
    for (int i = 0; i < 4; ++i)
      m(i, j) = cc[i].get_d();
  }
  const Eigen::Vector4d a = m.fullPivLu().solve(Eigen::Vector4d(1, 0, 0, 0));
  const std::array<double, 4> alpha{a(0), a(1), a(2), a(3)};
  double ra = 0;
  for (double h : {0.3, 0.5, 1.0, 2.0})
    ra = std::max(ra, std::abs(r_direct(SystemId::S1star, alpha, h).value));
  o.require(ra < 1e-8, "pure alpha |R| = " + std::to_string(ra));
  if (o.pass)
    o.detail << "worst relative gap " << worst << ", pure alpha |R| <= " << ra;
  return o;
}

// ---- 5
Outcome rewrite_soundness() {
  Outcome o;
  const P x = P::x(), x2 = x * x, x4 = x2 * x2;
  struct Case {
    SystemId id;
    R f;
    int k_first;
    bool twice;
    std::optional<R> expect;
    std::array<double, 3> hs;
  };
  const std::array<double, 3> h2 = {0.5, 1.0, 3.0}, h3 = {0.3, 1.0, 3.0},
                              h3b = {0.05, 0.1, 0.14};
  const P d2 = P(1) - x2, d3 = (P(1) - 3 * x2).pow(3), d3b = (P(1) + 3 * x2).pow(3);
  const std::vector<Case> cases = {
      {SystemId::S2star, R(x2, d2), 3, false, R(P(1) - 4 * x2, 3 * d2), h2},
      {SystemId::S2star, R(x4, d2), 1, true, R(8 * x4 - 8 * x2 + 1, d2), h2},
      {SystemId::S3star, R(x2 * (P(1) - 2 * x2), d3), 3, false, std::nullopt, h3},
      {SystemId::S3star, R(x4 * (P(1) - 2 * x2), d3), 1, true, std::nullopt, h3},
      {SystemId::S3barstar, R(x2 * (P(1) + 2 * x2), d3b), 3, false, std::nullopt, h3b},
      {SystemId::S3barstar, R(x4 * (P(1) + 2 * x2), d3b), 1, true, std::nullopt, h3b}};
  double worst = 0;
  for (const Case &c : cases) {
    const IsochroneSpec &s = get_spec(c.id);
    const auto &[a, b] = *s.ab_split;
    R g = rewrite_integrand(c.f, a, b, c.k_first);
    int p = c.k_first;
    std::optional<R> mid;
    if (c.twice) {
      mid = g;
      g = rewrite_integrand(g, a, b, 3);
      p = 3;
    }
    if (c.expect)
      o.require(g == *c.expect, sys(c.id) + " rewrite of " + c.f.to_string());
    for (double h : c.hs) {
      const double pre = oval_integral({c.f, c.k_first - 2}, s, h).value;
      const double post = oval_integral({g, p}, s, h).value;
      double rel = std::abs(pre - post) / std::abs(pre);
      if (mid) {
        const double m = oval_integral({*mid, 1}, s, h).value;
        rel = std::max(rel, std::abs(pre - m) / std::abs(pre));
      }
      worst = std::max(worst, rel);
      o.require(rel < 1e-7, sys(c.id) + " h = " + std::to_string(h));
    }
  }
  if (o.pass)
    o.detail << "6 cases x 3 ovals, worst relative gap " << worst;
  return o;
}

// ---- 6
Outcome wronskian_claims() {
  Outcome o;
  bool w2 = true, w3 = true;
  int sign = 0;
  for (int i = 0; i < 200; ++i) {
    const double h = 0.05 + (5.0 - 0.05) * i / 199;
    const Wronskians w = wronskians_closed(h);
    w2 = w2 && w.w2 > 0;
    const int s = w.w3 > 0 ? 1 : (w.w3 < 0 ? -1 : 0);
    w3 = w3 && s != 0 && (i == 0 || s == sign);
    sign = s;
  }
  o.require(w2, "W[pi, Ibar2] > 0");
  o.require(w3, "W[pi, Ibar2, Ibar0] of one sign");
  double gap = 0;
  for (double h : {0.4, 1.2, 3.0}) {
    const auto f2 = [](double v) { return ibar_pair(v).i2; };
    const auto f0 = [](double v) { return ibar_pair(v).i0; };
    const double d = 1e-3;
    const double det = five_point(f2, h, d) * five_point2(f0, h, d) -
                       five_point(f0, h, d) * five_point2(f2, h, d);
    const double rel = std::abs(wronskians_closed(h).w3 - kPi * det) / std::abs(kPi * det);
    gap = std::max(gap, rel);
  }
  o.require(gap < 1e-5, "factorized vs numerical determinant " + std::to_string(gap));
  bool neg = true;
  for (int i = 1; i < 999; ++i) {
    const double u = 0.01 + 0.98 * i / 999;
    neg = neg && script_l(u) < 0;
  }
  o.require(neg, "script L < 0 on (0.01, 0.99)");
  const double lead = script_l(0.05) / std::pow(0.05, 8) / (-3 * kPi / 4096);
  o.require(std::abs(lead - 1) < 0.01, "script L / u^8 leading term");
  double res = 0;
  for (double u : {0.2, 0.4, 0.6, 0.8}) {
    const double d = 1e-3;
    const double l = script_l(u), l1 = five_point(script_l, u, d),
                 l2 = five_point2(script_l, u, d);
    res = std::max(res, std::abs(l2 - g1(u) * l1 - g0(u) * l) / std::max(std::abs(l2), 1.0));
  }
  o.require(res < 1e-4, "script L equation residual " + std::to_string(res));
  if (o.pass)
    o.detail << "200-point grid, determinant gap " << gap << ", leading ratio " << lead
             << ", equation residual " << res;
  return o;
}

// ---- 7
Outcome realization() {
  Outcome o;
  int found = 0;
  for (SystemId id : kPleshkanSystems) {
    const IsochroneSpec &s = get_spec(id);
    const FirstOrderBasis b = first_order_basis(s, section_grid(s, 256));
    for (int k = 0; k <= 2; ++k) {
      try {
        const Realization r = realize_k(s, k, b);
        bool ok = r.status == RealizationStatus::Found;
        if (ok)
          for (const auto &c : confirm(s, r.coeffs, {1e-3, 1e-4}, {256, 512}))
            ok = ok && c.count == k && !c.unresolved;
        found += ok;
        o.require(ok, sys(id) + " k = " + std::to_string(k));
      } catch (const SearchBudgetExhaustedError &e) {
        o.require(false, sys(id) + " k = " + std::to_string(k) + ": " + e.what());
      }
    }
  }
  if (o.pass)
    o.detail << found << "/12 realized and confirmed at eps 1e-3, 1e-4 on grids 256, 512";
  return o;
}

// Random draws: every sampled basis combination, plus direct scans of a few.
Outcome upper_bound(const std::vector<SystemId> &ids, int bound, int draws, int scans) {
  Outcome o;
  int worst = 0, worst_scan = 0, unresolved = 0;
  for (SystemId id : ids) {
    const IsochroneSpec &s = get_spec(id);
    const FirstOrderBasis b = first_order_basis(s, section_grid(s, 256));
    std::mt19937_64 rng(97 + static_cast<int>(id));
    std::normal_distribution<double> g;
    for (int t = 0; t < draws; ++t) {
      RationalVector c;
      for (int j = 0; j < arity(s.tmpl); ++j)
        c.push_back(rational_from_double(std::round(g(rng) * 1e6) / 1e6));
      const ZeroCount z = count_zeros(b.grid.s, combine(b, basis_weights(b, c)));
      worst = std::max(worst, z.count);
      unresolved += z.unresolved;
      if (t < scans) {
        const auto series = PerturbationSeries::first_order(s.tmpl, c);
        const PeriodScan scan = period_scan(s, series, 1e-3, b.grid);
        if (scan.dropped.empty()) {
          const ZeroCount zs = critical_periods(scan);
          worst_scan = std::max(worst_scan, zs.count);
        } else {
          o.require(false, sys(id) + " scan lost orbits");
        }
      }
    }
  }
  o.require(worst <= bound, "basis combination with " + std::to_string(worst) + " zeros");
  o.require(worst_scan <= bound, "direct scan with " + std::to_string(worst_scan) + " zeros");
  if (o.pass)
    o.detail << draws << " draws per system: max " << worst << " sign changes ("
             << unresolved << " unresolved); " << scans
             << " direct scans per system at eps 1e-3: max " << worst_scan;
  return o;
}

// ---- 9
Outcome quadratic_bound() {
  Outcome o;
  for (SystemId id : kLoudCovered) {
    const IsochroneSpec &s = get_spec(id);
    const FirstOrderBasis b = first_order_basis(s, section_grid(s, 256));
    o.require(grid_wronskian(b.grid.s, b.funcs[0], b.funcs[1]).nonvanishing,
              sys(id) + " pair Wronskian");
    for (int k = 0; k <= 2; ++k) {
      try {
        const Realization r = realize_k(s, k, b);
        bool ok = (k < 2) == (r.status == RealizationStatus::Found);
        if (k < 2 && ok)
          for (const auto &c : confirm(s, r.coeffs, {1e-3, 1e-4}, {256}))
            ok = ok && c.count == k && !c.unresolved;
        o.require(ok, sys(id) + " k = " + std::to_string(k));
      } catch (const SearchBudgetExhaustedError &e) {
        o.require(false, sys(id) + " k = " + std::to_string(k) + ": " + e.what());
      }
    }
  }
  const Outcome ub = upper_bound({kLoudCovered.begin(), kLoudCovered.end()}, 1, 1000, 1000);
  o.require(ub.pass, ub.detail.str());
  if (o.pass)
    o.detail << "k = 0, 1 found and confirmed, k = 2 none; " << ub.detail.str();
  return o;
}

// ---- 10
Outcome loud_s1_pair() {
  Outcome o;
  const IsochroneSpec &s = get_spec(SystemId::LoudS1);
  const LoudPair lp = loud_pair(s, section_grid(s, 256));
  double dev = 0, lo = INFINITY;
  for (size_t i = 0; i < lp.i0.size(); ++i) {
    dev = std::max(dev, std::abs(lp.i0[i] / lp.i1[i] - 1));
    lo = std::min({lo, std::abs(lp.i0[i]), std::abs(lp.i1[i])});
  }
  const ZeroCount z0 = count_zeros(lp.grid.s, lp.i0), z1 = count_zeros(lp.grid.s, lp.i1);
  o.require(dev < 1e-4, "ratio deviation " + std::to_string(dev));
  o.require(z0.count == 0 && z1.count == 0 && lo > 0, "pair vanishes");
  if (o.pass)
    o.detail << "max |I0/I1 - 1| = " << dev << ", min |I| = " << lo;
  return o;
}

// ---- 11
Outcome elliptic_foundation() {
  Outcome o;
  double worst = 0;
  for (int i = -950; i <= 950; ++i) {
    const double u = i / 1000.0;
    const auto a = ellip_agm(u), s = ellip_series(u);
    worst = std::max({worst, std::abs(a.k_val - s.k_val) / a.k_val,
                      std::abs(a.e_val - s.e_val) / a.e_val});
  }
  o.require(worst < 1e-12, "AGM vs series " + std::to_string(worst));
  const auto z = ellip(0.0);
  o.require(std::abs(z.k_val - kPi / 2) < 1e-14 && std::abs(z.e_val - kPi / 2) < 1e-14,
            "K(0), E(0)");
  double res = 0;
  for (double u : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto p = ellip(u);
    const double dk = five_point([](double v) { return ellip(v).k_val; }, u, 1e-4);
    const double de = five_point([](double v) { return ellip(v).e_val; }, u, 1e-4);
    res = std::max({res, std::abs(de - (p.e_val - p.k_val) / u),
                    std::abs(dk - (p.e_val / (u * (1 - u * u)) - p.k_val / u))});
  }
  o.require(res < 1e-8, "derivative identities residual " + std::to_string(res));
  if (o.pass)
    o.detail << "AGM vs series " << worst << ", derivative residual " << res;
  return o;
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char *title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "exact identities", exact_identities},
      {2, "isochrony at eps = 0", isochrony},
      {3, "kernel neutrality", kernel_neutrality},
      {4, "S1star closed form", s1_closed_form},
      {5, "integrand rewrite", rewrite_soundness},
      {6, "Wronskian and script L claims", wronskian_claims},
      {7, "realization of 0, 1, 2 critical periods", realization},
      {8, "upper bound of 2 (sampled)",
       [] {
         return upper_bound({kPleshkanSystems.begin(), kPleshkanSystems.end()}, 2, 1000, 1000);
       }},
      {9, "quadratic bound of 1", quadratic_bound},
      {10, "equal Loud pair on (-1/2, 1/2)", loud_s1_pair},
      {11, "elliptic foundation", elliptic_foundation},
  };
  int failed = 0;
  for (const auto &c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2d %-42s %s (%.1f s) %s\n", c.id, c.title, o.pass ? "PASS" : "FAIL",
                secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
