#include "isochron/periodlab.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "isochron/abelian.hpp"
#include "isochron/elliptic.hpp"
#include "isochron/exact_linalg.hpp"

namespace isochron {

namespace {

constexpr double kPi = std::numbers::pi;

// Runs body(i) for i in [0, n) over a few workers; results must be written by
// index so the outcome does not depend on scheduling.
template <class F> void parallel_for(int n, int threads, F &&body) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(1, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers)
          body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto &t : pool)
    t.join();
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

double finite_max(const std::vector<double> &v) {
  double m = 0;
  for (double x : v)
    if (std::isfinite(x))
      m = std::max(m, std::abs(x));
  return m;
}

// Weights rounded to 12 significant digits relative to the largest, as
// short exact decimals.
std::vector<Rational> tidy(const std::vector<double> &w) {
  double m = 0;
  for (double x : w)
    m = std::max(m, std::abs(x));
  std::vector<Rational> out;
  const int e = m == 0 ? 0 : static_cast<int>(std::floor(std::log10(m))) - 11;
  mpz_class p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::abs(e)));
  for (double x : w) {
    const double steps = std::round(x * std::pow(10.0, -e));
    Rational r(rational_from_double(steps));
    r = e >= 0 ? Rational(r * p10) : Rational(r / p10);
    out.push_back(r);
  }
  return out;
}

std::vector<double> combine(const FirstOrderBasis &b, const std::vector<double> &w) {
  std::vector<double> out(b.grid.s.size(), 0.0);
  for (size_t j = 0; j < w.size(); ++j)
    for (size_t i = 0; i < out.size(); ++i)
      out[i] += w[j] * b.funcs[j][i];
  return out;
}

} // namespace

SectionGrid section_grid(const IsochroneSpec &spec, int n, const RegionOptions &ropt) {
  if (n < 2)
    throw std::invalid_argument("section_grid: need at least two points");
  if (!spec.u0)
    return ray_grid(spec, n, ropt);
  SectionGrid g;
  g.id = spec.id;
  g.source = SectionKind::CommutatorFlow;
  g.region = validated_region(spec, ropt);
  const DenseRational<double> ux(spec.u0->p);
  // s(x) = int dx / U0_x(x, 0) from x_lo.
  const auto inv = [&](double x) { return 1.0 / ux(x, 0.0); };
  const double s_hi = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      inv, g.region.x_lo, g.region.x_hi, 15, 1e-14);
  g.s = linspace(0.0, s_hi * (1 - 1e-10), n);
  const SectionParam sp = section_points(*spec.u0, spec.x0, Point(g.region.x_lo, 0.0),
                                         g.s, spec, g.region);
  for (const Point &p : sp.points) {
    if (std::abs(p.y()) > 1e-12)
      throw NonTransversalCrossingError("section_grid: commutator section left the x-axis");
    g.x.push_back(p.x());
    g.dx_ds.push_back(ux(p.x(), 0.0));
  }
  return g;
}

SectionGrid ray_grid(const IsochroneSpec &spec, int n, const RegionOptions &ropt) {
  SectionGrid g;
  g.id = spec.id;
  g.source = SectionKind::XAxisRay;
  g.region = validated_region(spec, ropt);
  g.s = linspace(g.region.x_lo, g.region.x_hi, n);
  g.x = g.s;
  g.dx_ds.assign(n, 1.0);
  return g;
}

double PeriodScan::dropout_fraction() const {
  return s_grid.empty() ? 0.0 : static_cast<double>(dropped.size()) / s_grid.size();
}

void PeriodScan::require_dropout_below(double threshold) const {
  if (dropout_fraction() > threshold)
    throw LostOrbitError("period_scan: " + std::to_string(dropped.size()) + " of " +
                         std::to_string(s_grid.size()) + " orbits lost (threshold " +
                         std::to_string(threshold) + ")");
}

PeriodScan period_scan(const IsochroneSpec &spec, const PerturbationSeries &series,
                       double eps, const SectionGrid &grid, const ScanOptions &opt) {
  if (series.tmpl != spec.tmpl)
    throw TemplateMismatchError("period_scan: series template does not match " +
                                std::string(name(spec.id)));
  const PlanarField field = perturbed_field(spec, series, rational_from_double(eps));
  const int n = static_cast<int>(grid.s.size());
  PeriodScan scan;
  scan.id = spec.id;
  scan.eps = eps;
  scan.source = grid.source;
  scan.s_grid = grid.s;
  scan.x = grid.x;
  scan.tol = opt.tol;
  scan.T.assign(n, NAN);
  scan.dT.assign(n, NAN);
  PeriodOptions po;
  po.tol = opt.tol;
  po.time_cap = opt.time_cap;
  std::vector<char> lost(n, 0);
  parallel_for(n, opt.threads, [&](int i) {
    try {
      const PeriodResult r = period_with_derivative(field, grid.x[i], po);
      scan.T[i] = r.period;
      scan.dT[i] = r.dperiod_dx * grid.dx_ds[i];
    } catch (const NoReturnError &) {
      lost[i] = 1;
    } catch (const PoleEncounterError &) {
      lost[i] = 1;
    } catch (const StepUnderflowError &) {
      lost[i] = 1;
    } catch (const NonTransversalCrossingError &) {
      lost[i] = 1;
    }
  });
  for (int i = 0; i < n; ++i)
    if (lost[i])
      scan.dropped.push_back(grid.s[i]);
  return scan;
}

std::vector<double> default_ladder() { return {1e-2, 5e-3, 2.5e-3, 1.25e-3}; }
std::vector<double> fine_ladder() { return {1e-3, 5e-4, 2.5e-4, 1.25e-4}; }

std::vector<PeriodScan> ladder_scans(const IsochroneSpec &spec,
                                     const PerturbationSeries &series,
                                     const SectionGrid &grid,
                                     const std::vector<double> &ladder,
                                     const ScanOptions &opt) {
  std::vector<PeriodScan> out;
  out.push_back(period_scan(spec, series, 0.0, grid, opt));
  for (double e : ladder)
    out.push_back(period_scan(spec, series, e, grid, opt));
  return out;
}

TaylorPeriod eps_taylor(const std::vector<PeriodScan> &scans, int order) {
  if (order < 1)
    throw std::invalid_argument("eps_taylor: order must be positive");
  std::vector<const PeriodScan *> nonzero;
  const PeriodScan *zero = nullptr;
  for (const auto &s : scans) {
    if (s.eps == 0)
      zero = &s;
    else
      nonzero.push_back(&s);
  }
  if (nonzero.size() < 4)
    throw IllConditionedLadderError("eps_taylor: need at least four nonzero eps values");
  std::sort(nonzero.begin(), nonzero.end(),
            [](const PeriodScan *a, const PeriodScan *b) { return a->eps > b->eps; });
  const double ratio = nonzero[1]->eps / nonzero[0]->eps;
  for (size_t j = 1; j < nonzero.size(); ++j) {
    const double r = nonzero[j]->eps / nonzero[j - 1]->eps;
    if (!(r > 0 && r < 1) || std::abs(r - ratio) > 1e-9 * ratio)
      throw IllConditionedLadderError("eps_taylor: eps values are not a geometric ladder");
  }
  std::vector<const PeriodScan *> all = nonzero;
  if (zero)
    all.push_back(zero);
  const size_t n = all.front()->s_grid.size();
  for (const auto *s : all)
    if (s->s_grid != all.front()->s_grid)
      throw std::invalid_argument("eps_taylor: scans use different s-grids");
  const int rows = static_cast<int>(all.size());
  if (rows < order + 1)
    throw IllConditionedLadderError("eps_taylor: too few scans for the model order");

  const double emax = nonzero.front()->eps;
  Eigen::MatrixXd v(rows, order + 1);
  for (int j = 0; j < rows; ++j)
    for (int l = 0; l <= order; ++l)
      v(j, l) = std::pow(all[j]->eps / emax, l);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v);
  const auto sv = svd.singularValues();
  TaylorPeriod tp;
  tp.condition = sv(0) / sv(sv.size() - 1);
  if (!(tp.condition < 1e10))
    throw IllConditionedLadderError("eps_taylor: Vandermonde condition " +
                                    std::to_string(tp.condition));
  const Eigen::MatrixXd pinv = v.completeOrthogonalDecomposition().pseudoInverse();
  const auto qr = v.householderQr();

  tp.order = order;
  tp.s_grid = all.front()->s_grid;
  for (const auto *s : nonzero)
    tp.eps_ladder.push_back(s->eps);
  tp.t.assign(order + 1, std::vector<double>(n, NAN));
  tp.dt.assign(order + 1, std::vector<double>(n, NAN));
  Eigen::VectorXd yt(rows), yd(rows);
  for (size_t i = 0; i < n; ++i) {
    bool ok = true;
    for (int j = 0; j < rows; ++j) {
      yt(j) = all[j]->T[i];
      yd(j) = all[j]->dT[i];
      ok = ok && std::isfinite(yt(j)) && std::isfinite(yd(j));
    }
    if (!ok)
      continue;
    const Eigen::VectorXd ct = qr.solve(yt), cd = qr.solve(yd);
    tp.residual = std::max(tp.residual, (v * ct - yt).cwiseAbs().maxCoeff());
    tp.residual_dt = std::max(tp.residual_dt, (v * cd - yd).cwiseAbs().maxCoeff());
    for (int l = 0; l <= order; ++l) {
      const double scale = std::pow(emax, l);
      tp.t[l][i] = ct(l) / scale;
      tp.dt[l][i] = cd(l) / scale;
    }
  }
  // Data noise: integration tolerance, plus the departure from isochrony of
  // the unperturbed scan when present.
  double base_t = 0, base_d = all.front()->tol * 10;
  for (const auto *s : all) {
    base_t = std::max(base_t, 100 * s->tol * finite_max(s->T));
    base_d = std::max(base_d, 100 * s->tol * finite_max(s->dT));
  }
  if (zero) {
    double dev = 0;
    for (double t : zero->T)
      if (std::isfinite(t))
        dev = std::max(dev, std::abs(t - 2 * kPi));
    base_t = std::max(base_t, dev);
    base_d = std::max(base_d, finite_max(zero->dT));
  }
  for (int l = 0; l <= order; ++l) {
    const double gain = pinv.row(l).cwiseAbs().sum() / std::pow(emax, l);
    tp.noise_t.push_back(gain * (base_t + tp.residual));
    tp.noise.push_back(gain * (base_d + tp.residual_dt));
  }
  for (int l = 1; l <= order; ++l) {
    double mt = 0, md = 0;
    for (size_t i = 0; i < n; ++i) {
      if (std::isfinite(tp.t[l][i]))
        mt = std::max(mt, std::abs(tp.t[l][i]));
      if (std::isfinite(tp.dt[l][i]))
        md = std::max(md, std::abs(tp.dt[l][i]));
    }
    if (md > 10 * tp.noise[l] || mt > 10 * tp.noise_t[l]) {
      tp.ell_star = l;
      break;
    }
  }
  return tp;
}

ZeroCount critical_periods(const std::vector<double> &s, const std::vector<double> &dT) {
  if (s.size() < 256)
    throw std::invalid_argument("critical_periods: scan needs at least 256 points");
  std::vector<double> xs, fs;
  for (size_t i = 0; i < s.size(); ++i)
    if (std::isfinite(dT[i])) {
      xs.push_back(s[i]);
      fs.push_back(dT[i]);
    }
  if (xs.size() < 256)
    throw std::invalid_argument("critical_periods: fewer than 256 resolved points");
  ZeroOptions zo;
  zo.interior_only = true;
  return count_zeros(xs, fs, {}, zo);
}

ZeroCount critical_periods(const PeriodScan &scan) {
  return critical_periods(scan.s_grid, scan.dT);
}

FirstOrderBasis first_order_basis(const IsochroneSpec &spec, const SectionGrid &grid) {
  FirstOrderBasis b;
  b.id = spec.id;
  b.grid = grid;
  const size_t n = grid.s.size();
  for (double x : grid.x)
    b.energy.push_back(energy_at(spec, Point(x, 0.0)).value_or(NAN));
  if (spec.tmpl == Template::Quadratic) {
    const LoudPair lp = loud_pair(spec, grid);
    b.directions = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    b.labels = {"I0~", "I1~"};
    b.funcs = {lp.i0, lp.i1};
    b.source = "eps-ladder scans";
    return b;
  }
  const auto witness = surjectivity_witness(spec.id);
  // dT_1/ds = -R at the section point, times ds-independent factors only.
  const auto sample = [&](const RationalVector &c) {
    std::vector<double> out(n);
    parallel_for(static_cast<int>(n), 0, [&](int i) {
      if (spec.id == SystemId::S1star)
        out[i] = -r_elliptic_s1(grid.x[i], c).value;
      else
        out[i] = -i_total(spec.id, c, b.energy[i]).value;
    });
    return out;
  };
  if (spec.id == SystemId::S1star) {
    // (gamma, beta, delta) multiply (pi, Ibar_2 / 2, Ibar_0).
    b.directions = {witness[1], witness[0], witness[2]};
    b.labels = {"pi", "Ibar2", "Ibar0"};
    b.source = "elliptic closed form";
  } else {
    b.directions = {witness[0], witness[1], witness[2]};
    b.labels = {"I0", "I1", "I2"};
    b.source = "Abelian integrals";
  }
  for (const auto &d : b.directions)
    b.funcs.push_back(sample(d));
  return b;
}

LoudPair loud_pair(const IsochroneSpec &spec, const SectionGrid &grid,
                   const std::vector<double> &ladder, const ScanOptions &opt) {
  if (!spec.loud_base)
    throw TemplateMismatchError("loud_pair: " + std::string(name(spec.id)) +
                                " is not a Loud record");
  LoudPair lp;
  lp.grid = grid;
  for (int j = 0; j < 2; ++j) {
    RationalVector c{Rational(j == 0), Rational(j == 1)};
    const auto series = PerturbationSeries::first_order(Template::Quadratic, c);
    const TaylorPeriod tp = eps_taylor(ladder_scans(spec, series, grid, ladder, opt));
    (j == 0 ? lp.i0 : lp.i1) = tp.dt[1];
    lp.residual = std::max(lp.residual, tp.residual_dt);
  }
  return lp;
}

GridWronskian grid_wronskian(const std::vector<double> &s, const std::vector<double> &f,
                             const std::vector<double> &g, double sample_rel) {
  const size_t n = s.size();
  if (n < 8 || f.size() != n || g.size() != n)
    throw std::invalid_argument("grid_wronskian: mismatched or short samples");
  const double h = (s.back() - s.front()) / (n - 1);
  // Second- and fourth-order differences on the uniform grid; their gap is
  // the truncation estimate.
  const auto d2 = [&](const std::vector<double> &v, size_t i) {
    if (i == 0)
      return (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h);
    if (i == n - 1)
      return (3 * v[n - 1] - 4 * v[n - 2] + v[n - 3]) / (2 * h);
    return (v[i + 1] - v[i - 1]) / (2 * h);
  };
  const auto d4 = [&](const std::vector<double> &v, size_t i) {
    if (i == 0)
      return (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h);
    if (i == 1)
      return (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h);
    if (i == n - 1)
      return (25 * v[n - 1] - 48 * v[n - 2] + 36 * v[n - 3] - 16 * v[n - 4] + 3 * v[n - 5]) /
             (12 * h);
    if (i == n - 2)
      return (3 * v[n - 1] + 10 * v[n - 2] - 18 * v[n - 3] + 6 * v[n - 4] - v[n - 5]) /
             (12 * h);
    return (-v[i + 2] + 8 * v[i + 1] - 8 * v[i - 1] + v[i - 2]) / (12 * h);
  };
  GridWronskian w;
  w.min_abs = INFINITY;
  int pos = 0, neg = 0;
  for (size_t i = 0; i < n; ++i) {
    const double fp = d4(f, i), gp = d4(g, i);
    const double v = f[i] * gp - g[i] * fp;
    const double v2 = f[i] * d2(g, i) - g[i] * d2(f, i);
    // Sample errors: relative on values, amplified by 1/h in the slopes.
    const double noise_f = sample_rel * std::abs(f[i]), noise_g = sample_rel * std::abs(g[i]);
    const double sample = noise_f * std::abs(gp) + noise_g * std::abs(fp) +
                          (std::abs(f[i]) * noise_g + std::abs(g[i]) * noise_f) * 2 / h;
    const double noise = std::abs(v - v2) + sample;
    w.values.push_back(v);
    w.min_abs = std::min(w.min_abs, std::abs(v));
    w.noise = std::max(w.noise, noise);
    w.worst_ratio = std::max(w.worst_ratio, v == 0 ? INFINITY : noise / std::abs(v));
    if (std::abs(v) > 10 * noise)
      (v > 0 ? pos : neg)++;
  }
  w.nonvanishing = (pos == static_cast<int>(n)) || (neg == static_cast<int>(n));
  return w;
}

BasisCertificate certify_basis(const IsochroneSpec &spec, const FirstOrderBasis &basis) {
  BasisCertificate c;
  if (spec.tmpl == Template::Quadratic) {
    const GridWronskian w = grid_wronskian(basis.grid.s, basis.funcs[0], basis.funcs[1]);
    std::vector<double> xs = basis.grid.s;
    const ZeroCount z0 = count_zeros(xs, basis.funcs[0]);
    c.certified = w.nonvanishing && z0.count == 0 && !z0.unresolved;
    c.method = "grid Wronskian of the pair (min |W| = " + std::to_string(w.min_abs) +
               ", worst noise ratio " + std::to_string(w.worst_ratio) +
               ") and a zero-free first element";
    return c;
  }
  if (spec.id == SystemId::S1star) {
    bool ok = true;
    double lo = INFINITY;
    for (double x : basis.grid.x) {
      const Wronskians w = wronskians_closed(x);
      ok = ok && w.w2 > 0 && w.plus_factor > 0 && w.minus_factor < 0;
      lo = std::min(lo, std::abs(w.w3));
    }
    c.certified = ok;
    c.method = "closed-form Wronskians W[pi, Ibar2] > 0 and factorized W[pi, Ibar2, "
               "Ibar0] of one sign on the grid (min |W3| = " + std::to_string(lo) + ")";
    return c;
  }
  std::vector<BivariateRational> fs;
  for (const auto &f : basis_integrands(spec.id))
    fs.push_back(f.f);
  const CriterionVerdict v =
      criterion_check(spec.ab_split->a, spec.ab_split->b, fs, 2, spec.x_r);
  c.certified = v.passed;
  c.method = v.passed ? "criterion: A, B even, m = 2 >= n - 1, even parts ECT on (0, x_r)"
                      : "criterion failed: " + v.failed;
  return c;
}

Realization realize_k(const IsochroneSpec &spec, int k, const FirstOrderBasis &basis,
                      int budget) {
  if (k < 0)
    throw std::invalid_argument("realize_k: k must be nonnegative");
  const int nb = static_cast<int>(basis.funcs.size());
  Realization out;
  out.id = spec.id;
  out.k = k;
  const auto &s = basis.grid.s;
  const int n = static_cast<int>(s.size());
  if (k >= nb) {
    const BasisCertificate cert = certify_basis(spec, basis);
    if (!cert.certified)
      throw SearchBudgetExhaustedError("realize_k: k = " + std::to_string(k) +
                                       " exceeds the basis size but the Chebyshev "
                                       "property could not be certified (" +
                                       cert.method + ")");
    out.status = RealizationStatus::None;
    out.note = "ECT basis of size " + std::to_string(nb) + " allows at most " +
               std::to_string(nb - 1) + " zeros; " + cert.method;
    return out;
  }
  // Candidate target placements, as fractions of the interior of the grid.
  std::vector<std::vector<double>> candidates;
  if (k == 0) {
    candidates.push_back({});
  } else {
    for (int a = 0; a < budget; ++a) {
      // Deterministic jitter of the evenly spaced placement.
      const double shift = 0.15 * std::sin(1.7 * a + 0.3);
      std::vector<double> t;
      for (int j = 0; j < k; ++j)
        t.push_back(std::clamp((j + 1.0 + shift * (a > 0)) / (k + 1), 0.1, 0.9));
      std::sort(t.begin(), t.end());
      candidates.push_back(t);
    }
  }
  for (const auto &cand : candidates) {
    ++out.attempts;
    std::vector<double> w(nb, 0.0);
    std::vector<int> idx;
    for (double t : cand)
      idx.push_back(static_cast<int>(std::lround(t * (n - 1))));
    if (k == 0) {
      w[0] = 1.0;
    } else {
      // sum_{j<k} w_j f_j(t_i) = -f_k(t_i), w_k = 1.
      Eigen::MatrixXd m(k, k);
      Eigen::VectorXd rhs(k);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j)
          m(i, j) = basis.funcs[j][idx[i]];
        rhs(i) = -basis.funcs[k][idx[i]];
      }
      const Eigen::VectorXd sol = m.fullPivLu().solve(rhs);
      if (!sol.allFinite())
        continue;
      for (int j = 0; j < k; ++j)
        w[j] = sol(j);
      w[k] = 1.0;
    }
    const std::vector<Rational> wq = tidy(w);
    for (int j = 0; j < nb; ++j)
      w[j] = wq[j].get_d();
    const std::vector<double> combo = combine(basis, w);
    const ZeroCount z = count_zeros(s, combo);
    if (z.count != k || z.unresolved)
      continue;
    // The zeros must sit away from the ends for the perturbed scans.
    bool inner = true;
    for (double loc : z.locations)
      inner = inner && loc > s[n / 20] && loc < s[n - 1 - n / 20];
    if (!inner)
      continue;
    out.status = RealizationStatus::Found;
    out.weights = w;
    out.zeros = z;
    for (int i : idx)
      out.targets.push_back(s[i]);
    RationalVector c(basis.directions[0].size(), Rational(0));
    for (int j = 0; j < nb; ++j)
      for (size_t q = 0; q < c.size(); ++q)
        c[q] += wq[j] * basis.directions[j][q];
    out.coeffs = c;
    out.note = "first-order combination of " + basis.source + " with exactly " +
               std::to_string(k) + " simple interior zeros";
    return out;
  }
  throw SearchBudgetExhaustedError("realize_k: no combination with exactly " +
                                   std::to_string(k) + " zeros after " +
                                   std::to_string(out.attempts) + " attempts");
}

Realization realize_k(const IsochroneSpec &spec, int k, int grid_size) {
  const SectionGrid g = section_grid(spec, grid_size);
  return realize_k(spec, k, first_order_basis(spec, g));
}

std::vector<Confirmation> confirm(const IsochroneSpec &spec, const RationalVector &coeffs,
                                  const std::vector<double> &eps_values,
                                  const std::vector<int> &grid_sizes,
                                  const ScanOptions &opt) {
  const auto series = PerturbationSeries::first_order(spec.tmpl, coeffs);
  std::vector<Confirmation> out;
  for (int n : grid_sizes) {
    const SectionGrid g = section_grid(spec, n);
    for (double e : eps_values) {
      const PeriodScan scan = period_scan(spec, series, e, g, opt);
      const ZeroCount z = critical_periods(scan);
      out.push_back({e, n, z.count, z.unresolved || !scan.dropped.empty(), z.locations});
    }
  }
  return out;
}

} // namespace isochron
