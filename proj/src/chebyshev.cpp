#include "isochron/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "isochron/errors.hpp"

namespace isochron {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1;
  for (int i = 2; i <= n; ++i)
    r *= i;
  return r;
}

void require_inside(const FunctionOnInterval &f, double x) {
  if (!f.contains(x))
    throw std::domain_error("point " + std::to_string(x) + " outside (" +
                            std::to_string(f.lo()) + ", " + std::to_string(f.hi()) +
                            ") of " + (f.label().empty() ? "function" : f.label()));
}

// Distance from x to the nearer end, capped so that stencils stay local.
double room(double x, double lo, double hi) {
  return std::min({x - lo, hi - x, 1.0});
}

// Central n-th difference with step h.
double central_difference(const FunctionOnInterval::RealFn &f, double x, int n,
                          double h) {
  if (n == 0)
    return f(x);
  double acc = 0;
  for (int j = 0; j <= n; ++j)
    acc += (j % 2 ? -1.0 : 1.0) * binom(n, j) * f(x + (0.5 * n - j) * h);
  return acc / std::pow(h, n);
}

// Ridders' extrapolation of the central difference in h^2.
std::pair<double, double> ridders(const FunctionOnInterval::RealFn &f, double x, int n,
                                  double h0) {
  constexpr int kTab = 10;
  constexpr double kCon = 1.4, kCon2 = kCon * kCon;
  double a[kTab][kTab];
  double h = h0;
  a[0][0] = central_difference(f, x, n, h);
  double best = a[0][0], err = INFINITY;
  for (int i = 1; i < kTab; ++i) {
    h /= kCon;
    a[0][i] = central_difference(f, x, n, h);
    double fac = kCon2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1);
      fac *= kCon2;
      const double e = std::max(std::abs(a[j][i] - a[j - 1][i]),
                                std::abs(a[j][i] - a[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        best = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= 2 * err)
      break;
  }
  return {best, err};
}

} // namespace

std::string to_string(DerivativeScheme s) {
  switch (s) {
  case DerivativeScheme::Analytic: return "analytic";
  case DerivativeScheme::ComplexCauchy: return "complex-cauchy";
  default: return "richardson";
  }
}

std::string to_string(WronskianVerdict v) {
  switch (v) {
  case WronskianVerdict::Nonvanishing: return "nonvanishing";
  case WronskianVerdict::Vanishes: return "vanishes";
  default: return "inconclusive";
  }
}

FunctionOnInterval FunctionOnInterval::rational(const BivariateRational &f, double lo,
                                                double hi, std::string label) {
  if (f.num().degree_y() != 0 || f.den().degree_y() != 0)
    throw std::invalid_argument("FunctionOnInterval::rational: f must depend on x only");
  auto exact = std::make_shared<std::vector<BivariateRational>>();
  exact->push_back(f.reduced());
  FunctionOnInterval out;
  out.lo_ = lo;
  out.hi_ = hi;
  out.label_ = std::move(label);
  out.scheme_ = DerivativeScheme::Analytic;
  const DenseRational<double> f0(exact->front());
  out.value_ = [f0](double x) { return f0(x, 0.0); };
  // Symbolic derivatives, formed on demand and shared between copies, are
  // evaluated exactly at the (exactly representable) double x, so the only
  // error is the final rounding.
  auto mu = std::make_shared<std::mutex>();
  out.jet_ = [exact, mu](double x, int n) {
    std::vector<BivariateRational> ds;
    {
      std::lock_guard<std::mutex> lock(*mu);
      while (static_cast<int>(exact->size()) <= n)
        exact->push_back(exact->back().dx().reduced());
      ds.assign(exact->begin(), exact->begin() + n + 1);
    }
    const Rational xq(x), zero(0);
    DerivativeJet j;
    for (const auto &d : ds) {
      const auto v = d.eval(xq, zero);
      if (!v)
        throw ZeroDenominatorError("FunctionOnInterval: pole at " + std::to_string(x));
      const double dv = v->get_d();
      j.values.push_back(dv);
      j.errors.push_back(kEps * std::abs(dv));
    }
    return j;
  };
  return out;
}

FunctionOnInterval FunctionOnInterval::analytic(JetFn jet, double lo, double hi,
                                                std::string label) {
  FunctionOnInterval out;
  out.lo_ = lo;
  out.hi_ = hi;
  out.label_ = std::move(label);
  out.scheme_ = DerivativeScheme::Analytic;
  out.value_ = [jet](double x) { return jet(x, 0).values.at(0); };
  out.jet_ = std::move(jet);
  return out;
}

FunctionOnInterval FunctionOnInterval::holomorphic(ComplexFn f, double lo, double hi,
                                                   std::string label) {
  FunctionOnInterval out;
  out.lo_ = lo;
  out.hi_ = hi;
  out.label_ = std::move(label);
  out.scheme_ = DerivativeScheme::ComplexCauchy;
  out.value_ = [f](double x) { return f({x, 0.0}).real(); };
  out.jet_ = [f, lo, hi](double x, int n) {
    // Trapezoid on the circle |z - x| = r: spectrally accurate Taylor
    // coefficients; the error estimate compares M and M/2 nodes.
    const double r = 0.5 * room(x, lo, hi);
    constexpr int kM = 64;
    std::vector<std::complex<double>> vals(kM);
    double fmax = 0;
    for (int j = 0; j < kM; ++j) {
      vals[j] = f(x + std::polar(r, 2 * std::numbers::pi * j / kM));
      fmax = std::max(fmax, std::abs(vals[j]));
    }
    DerivativeJet jet;
    for (int k = 0; k <= n; ++k) {
      std::complex<double> full = 0, half = 0;
      for (int j = 0; j < kM; ++j) {
        const auto w = std::polar(1.0, -2 * std::numbers::pi * j * k / kM) * vals[j];
        full += w;
        if (j % 2 == 0)
          half += w;
      }
      const double scale = factorial(k) / std::pow(r, k);
      const double d = (full / double(kM)).real() * scale;
      const double dh = (half / double(kM / 2)).real() * scale;
      jet.values.push_back(d);
      jet.errors.push_back(std::abs(d - dh) + 16 * kEps * fmax * scale);
    }
    return jet;
  };
  return out;
}

FunctionOnInterval FunctionOnInterval::sampled(RealFn f, double lo, double hi,
                                               std::string label) {
  FunctionOnInterval out;
  out.lo_ = lo;
  out.hi_ = hi;
  out.label_ = std::move(label);
  out.scheme_ = DerivativeScheme::Richardson;
  out.value_ = f;
  out.jet_ = [f, lo, hi](double x, int n) {
    DerivativeJet jet;
    const double v = f(x);
    jet.values.push_back(v);
    jet.errors.push_back(4 * kEps * std::abs(v));
    for (int k = 1; k <= n; ++k) {
      const double h0 = 0.3 * room(x, lo, hi) / std::max(1.0, 0.5 * k);
      const auto [d, e] = ridders(f, x, k, std::min(h0, 0.2));
      jet.values.push_back(d);
      jet.errors.push_back(e);
    }
    return jet;
  };
  return out;
}

double FunctionOnInterval::operator()(double x) const { return value_(x); }

DerivativeJet FunctionOnInterval::derivatives(double x, int n) const {
  require_inside(*this, x);
  return jet_(x, n);
}

WronskianValue wronskian(const std::vector<FunctionOnInterval> &funcs, double x, int k,
                         double max_error) {
  if (k < 1 || k > static_cast<int>(funcs.size()))
    throw std::invalid_argument("wronskian: need 1 <= k <= number of functions");
  Eigen::MatrixXd m(k, k), e(k, k);
  for (int j = 0; j < k; ++j) {
    const DerivativeJet jet = funcs[j].derivatives(x, k - 1);
    for (int i = 0; i < k; ++i) {
      m(i, j) = jet.values[i];
      e(i, j) = jet.errors[i];
    }
  }
  const double det = m.determinant();
  // d det / d m_ij is the (i, j) cofactor.
  double err = 0;
  if (k == 1) {
    err = e(0, 0);
  } else {
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        Eigen::MatrixXd minor(k - 1, k - 1);
        for (int r = 0, rr = 0; r < k; ++r) {
          if (r == i)
            continue;
          for (int c = 0, cc = 0; c < k; ++c) {
            if (c == j)
              continue;
            minor(rr, cc++) = m(r, c);
          }
          ++rr;
        }
        err += std::abs(minor.determinant()) * e(i, j);
      }
  }
  // Elimination rounding, against the unsigned expansion of the determinant.
  double expansion = 0;
  for (int j = 0; j < k; ++j) {
    if (k == 1) {
      expansion = std::abs(m(0, 0));
      break;
    }
    Eigen::MatrixXd minor(k - 1, k - 1);
    for (int r = 1; r < k; ++r)
      for (int c = 0, cc = 0; c < k; ++c)
        if (c != j)
          minor(r - 1, cc++) = m(r, c);
    expansion += std::abs(m(0, j) * minor.determinant());
  }
  err += 4 * kEps * k * std::max(expansion, std::abs(det));
  if (err > max_error)
    throw DerivativeAccuracyError("wronskian: derivative error estimate " +
                                  std::to_string(err) + " exceeds bound " +
                                  std::to_string(max_error));
  return {det, err};
}

std::vector<double> interior_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / n;
    g[i] = std::isfinite(hi) ? lo + (hi - lo) * t : lo + t / (1 - t);
  }
  return g;
}

ChebyshevCertificate ect_certify(const std::vector<FunctionOnInterval> &funcs, double lo,
                                 double hi, int grid_size) {
  if (grid_size < 64)
    throw std::invalid_argument("ect_certify: grid_size must be at least 64");
  if (funcs.empty())
    throw std::invalid_argument("ect_certify: empty function list");
  ChebyshevCertificate cert;
  cert.lo = lo;
  cert.hi = hi;
  cert.grid_size = grid_size;
  const auto grid = interior_grid(lo, hi, grid_size);
  cert.ect = true;
  for (int k = 1; k <= static_cast<int>(funcs.size()); ++k) {
    WronskianReport r;
    r.k = k;
    r.grid = grid;
    r.min_abs = INFINITY;
    bool pos = false, neg = false, weak = false;
    for (double x : grid) {
      const WronskianValue w = wronskian(funcs, x, k);
      r.values.push_back(w.value);
      r.min_abs = std::min(r.min_abs, std::abs(w.value));
      const double ratio = w.value == 0 ? INFINITY : w.error / std::abs(w.value);
      r.worst_error_ratio = std::max(r.worst_error_ratio, ratio);
      if (std::abs(w.value) > 10 * w.error)
        (w.value > 0 ? pos : neg) = true;
      else
        weak = true;
    }
    if (pos && neg)
      r.verdict = WronskianVerdict::Vanishes;
    else if (!weak)
      r.verdict = WronskianVerdict::Nonvanishing;
    else
      r.verdict = WronskianVerdict::Inconclusive;
    r.sign = (pos && !neg && !weak) ? 1 : (neg && !pos && !weak) ? -1 : 0;
    if (k == 1 && r.verdict == WronskianVerdict::Vanishes)
      cert.first_vanishes = true;
    cert.ect = cert.ect && r.verdict == WronskianVerdict::Nonvanishing;
    cert.reports.push_back(std::move(r));
  }
  return cert;
}

BivariateRational even_part(const BivariateRational &f) {
  return ((f + f.reflect_x()) * BivariateRational(Rational(1, 2))).reduced();
}

CriterionVerdict criterion_check(const BivariateRational &a, const BivariateRational &b,
                                 const std::vector<BivariateRational> &f_list, int m,
                                 double x_r, int grid_size) {
  CriterionVerdict v;
  v.n = static_cast<int>(f_list.size());
  v.m = m;
  v.a_even = a.is_even_in_x();
  v.b_even = b.is_even_in_x();
  v.exponent_ok = m >= v.n - 1;
  std::vector<FunctionOnInterval> ell;
  for (size_t i = 0; i < f_list.size(); ++i)
    ell.push_back(FunctionOnInterval::rational(even_part(f_list[i]), 0.0, x_r,
                                               "l" + std::to_string(i)));
  v.even_parts = ect_certify(ell, 0.0, x_r, grid_size);
  if (!(v.a_even && v.b_even))
    v.failed = "A and B even";
  else if (!v.exponent_ok)
    v.failed = "m >= n-1";
  else if (!v.even_parts->ect)
    v.failed = "even parts CT on (0, x_r)";
  v.passed = v.failed.empty();
  return v;
}

ZeroCount count_zeros(const std::vector<double> &xs, const std::vector<double> &fs,
                      const std::function<double(double)> &refine,
                      const ZeroOptions &opt) {
  if (xs.size() != fs.size())
    throw std::invalid_argument("count_zeros: xs and fs differ in length");
  if (xs.size() < 256)
    throw std::invalid_argument("count_zeros: need at least 256 samples");
  double scale = 0;
  for (double f : fs)
    scale = std::max(scale, std::abs(f));
  const double noise = opt.noise.value_or(1e-12 * scale);
  const size_t n = xs.size();
  const auto small = [&](size_t i) { return !(std::abs(fs[i]) > noise); };

  const auto locate = [&](size_t i, size_t j) {
    double a = xs[i], b = xs[j];
    if (!refine) {
      const double fa = fs[i], fb = fs[j];
      return a - fa * (b - a) / (fb - fa);
    }
    double fa = refine(a);
    while (b - a > opt.x_tol) {
      const double mid = 0.5 * (a + b);
      const double fm = refine(mid);
      if (fm == 0)
        return mid;
      if ((fm < 0) == (fa < 0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  };

  ZeroCount out;
  // Skip leading and trailing near-zero samples (endpoint zeros).
  size_t first = 0, last = n - 1;
  if (opt.interior_only) {
    while (first < n && small(first))
      ++first;
    while (last > first && small(last))
      --last;
  }
  if (first >= last)
    return out;
  size_t prev = first;
  size_t i = first + 1;
  while (i <= last) {
    if (!small(i)) {
      if ((fs[i] < 0) != (fs[prev] < 0)) {
        out.locations.push_back(locate(prev, i));
        ++out.count;
      }
      prev = i;
      ++i;
      continue;
    }
    size_t j = i;
    while (j <= last && small(j))
      ++j;
    const size_t run = j - i;
    if (run >= 3) {
      out.unresolved = true;
      out.plateaus.emplace_back(xs[i], xs[j - 1]);
    } else if ((fs[j] < 0) != (fs[prev] < 0)) {
      out.locations.push_back(locate(prev, j));
      ++out.count;
    } else {
      // Touching zero: even multiplicity or a pair closer than the grid.
      out.unresolved = true;
      out.plateaus.emplace_back(xs[i], xs[j - 1]);
    }
    prev = j;
    i = j + 1;
  }
  return out;
}

} // namespace isochron
