#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isochron/poly.hpp"

namespace isochron {

enum class DerivativeScheme { Analytic, ComplexCauchy, Richardson };

std::string to_string(DerivativeScheme s);

/// f, f', ..., f^(n) at one point with per-entry absolute error estimates.
struct DerivativeJet {
  std::vector<double> values;
  std::vector<double> errors;
};

/// A real function on an open interval together with a way to obtain its
/// derivatives. Cheap to copy; the evaluators are shared.
class FunctionOnInterval {
public:
  using RealFn = std::function<double(double)>;
  using ComplexFn = std::function<std::complex<double>(std::complex<double>)>;
  using JetFn = std::function<DerivativeJet(double, int)>;

  /// Exact derivatives of a rational function of x (y-free).
  static FunctionOnInterval rational(const BivariateRational &f, double lo,
                                     double hi, std::string label = {});
  /// Caller-supplied derivative jets.
  static FunctionOnInterval analytic(JetFn jet, double lo, double hi,
                                     std::string label = {});
  /// Derivatives from the Cauchy integral on a small circle; f must extend
  /// holomorphically to a neighborhood of the interval.
  static FunctionOnInterval holomorphic(ComplexFn f, double lo, double hi,
                                        std::string label = {});
  /// Central differences with Richardson (Ridders) extrapolation.
  static FunctionOnInterval sampled(RealFn f, double lo, double hi,
                                    std::string label = {});

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool contains(double x) const { return x > lo_ && x < hi_; }
  DerivativeScheme scheme() const { return scheme_; }
  const std::string &label() const { return label_; }

  double operator()(double x) const;
  /// Derivatives of order 0..n at x.
  DerivativeJet derivatives(double x, int n) const;

private:
  FunctionOnInterval() = default;
  double lo_ = 0, hi_ = 0;
  DerivativeScheme scheme_ = DerivativeScheme::Analytic;
  std::string label_;
  RealFn value_;
  JetFn jet_;
};

struct WronskianValue {
  double value;
  /// First-order propagation of the derivative error estimates.
  double error;
};

/// W[f_0, ..., f_{k-1}](x). Throws DerivativeAccuracyError when the
/// propagated error exceeds `max_error`.
WronskianValue wronskian(const std::vector<FunctionOnInterval> &funcs, double x, int k,
                         double max_error = INFINITY);

enum class WronskianVerdict { Nonvanishing, Vanishes, Inconclusive };
std::string to_string(WronskianVerdict v);

struct WronskianReport {
  int k = 0;
  std::vector<double> grid;
  std::vector<double> values;
  double min_abs = 0;
  /// +1 or -1 when every sample has that sign, else 0.
  int sign = 0;
  WronskianVerdict verdict = WronskianVerdict::Inconclusive;
  /// Worst ratio error / |W| over the grid.
  double worst_error_ratio = 0;
};

struct ChebyshevCertificate {
  std::vector<WronskianReport> reports;
  /// Conjunction of the per-k verdicts. Sample-based, not a proof.
  bool ect = false;
  /// W_1 vanishes somewhere: the first function alone is not a T-system.
  bool first_vanishes = false;
  double lo = 0, hi = 0;
  int grid_size = 0;
  static constexpr const char *basis_note =
      "sampled Wronskians on an interior grid; a certificate, not a proof";
};

/// Interior grid of `n` points; an infinite upper end is sampled through
/// x = t / (1 - t).
std::vector<double> interior_grid(double lo, double hi, int n);

/// One report per prefix length k = 1..n. Verdict "nonvanishing" requires
/// |W_k| > 10 times its error estimate at every grid point and a constant sign.
ChebyshevCertificate ect_certify(const std::vector<FunctionOnInterval> &funcs,
                                 double lo, double hi, int grid_size = 200);

struct CriterionVerdict {
  bool passed = false;
  /// Empty when passed, else the first failing hypothesis.
  std::string failed;
  bool a_even = false, b_even = false;
  bool exponent_ok = false;
  std::optional<ChebyshevCertificate> even_parts;
  int n = 0, m = 0;
};

/// Hypotheses of the CT criterion for Abelian integrals of f_i(x) y^(2m-1) dx
/// over the ovals of A(x) + B(x) y^2: A, B even; m >= n - 1; the even parts of
/// f_i form a CT-system on (0, x_r), certified through ECT.
CriterionVerdict criterion_check(const BivariateRational &a, const BivariateRational &b,
                                 const std::vector<BivariateRational> &f_list, int m,
                                 double x_r, int grid_size = 200);

/// Even part (f(x) + f(-x)) / 2, exact.
BivariateRational even_part(const BivariateRational &f);

struct ZeroCount {
  int count = 0;
  std::vector<double> locations;
  /// True when a near-zero plateau was met; such stretches are not counted.
  bool unresolved = false;
  std::vector<std::pair<double, double>> plateaus;
};

struct ZeroOptions {
  /// Absolute noise floor; when unset, 1e-12 times the sample magnitude.
  std::optional<double> noise;
  double x_tol = 1e-8;
  /// Endpoints of the sample range are discarded as zeros.
  bool interior_only = true;
};

/// Sign changes of samples on a uniform grid of at least 256 points, refined
/// by bisection through `refine` when given (else linear interpolation).
ZeroCount count_zeros(const std::vector<double> &xs, const std::vector<double> &fs,
                      const std::function<double(double)> &refine = {},
                      const ZeroOptions &opt = {});

} // namespace isochron
