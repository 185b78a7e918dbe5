#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "isochron/catalog.hpp"
#include "isochron/flow.hpp"

namespace isochron {

/// f(x) y^p, f univariate in x.
struct IntegrandFn {
  BivariateRational f;
  int y_power = 1;
};

enum class AbelianMethod { ClosedForm, Quadrature };

struct AbelianValue {
  double h = 0;
  double value = 0;
  AbelianMethod method = AbelianMethod::Quadrature;
  /// Every oval integral is taken counterclockwise.
  static constexpr const char *orientation = "counterclockwise";
};

struct QuadratureOptions {
  double rel_tol = 1e-9;
  int max_samples = 1 << 15;
  /// Integrate over the upper half and double, using the y-symmetry of the
  /// oval. Required for negative odd powers of y without an A/B split.
  bool symmetric = false;
  /// Reverse the orientation (for coherence checks).
  bool clockwise = false;
};

/// Contour integral of f(x) y^p dx over the oval of `spec` at energy
/// oval.h(). Uses the record's gradient to express dx along arclength.
AbelianValue oval_integral(const IntegrandFn &integrand, const IsochroneSpec &spec,
                           double h, const QuadratureOptions &opt = {});

/// Shared, immutable oval traces keyed by (system, h, samples).
std::shared_ptr<const Oval> cached_oval(const IsochroneSpec &spec, double h,
                                        int samples);

/// G = (2/k) (B F / A')' - B' F / A'. Throws AnalyticityError when F / A'
/// keeps a pole at x = 0.
BivariateRational rewrite_integrand(const BivariateRational &f,
                                    const BivariateRational &a,
                                    const BivariateRational &b, int k);

/// The three y^3 integrands of the Chebyshev basis for S2star, S3star and
/// S3barstar.
std::array<IntegrandFn, 3> basis_integrands(SystemId id);

std::array<AbelianValue, 3> basis(SystemId id, double h,
                                  const QuadratureOptions &opt = {});

/// The per-case combination of the basis integrals weighted by phi(coeffs),
/// signed so that it equals r_direct at matched energy.
AbelianValue i_total(SystemId id, std::span<const Rational> coeffs, double h,
                     const QuadratureOptions &opt = {});
/// Weights w with i_total = (c / h) sum_i w_i phi_i I_i.
struct CombinationWeights {
  double scale;
  std::array<double, 3> w;
};
CombinationWeights combination_weights(SystemId id);

/// U0(lambda) for the unit coefficient vectors, exact.
const std::array<BivariateRational, 4> &u0_lambda_units(SystemId id);

/// R at the orbit through (x0, 0): integral over one period of U0(lambda)
/// along the unperturbed orbit.
AbelianValue r_direct(SystemId id, std::span<const double> coeffs, double x0,
                      double tol = 1e-12);
AbelianValue r_direct(SystemId id, std::span<const Rational> coeffs, double x0,
                      double tol = 1e-12);

/// The closed-form S1star orbit through (h, 0).
Point s1_orbit(double t, double h);

/// S1star R in elliptic closed form.
AbelianValue r_elliptic_s1(double h, std::span<const Rational> coeffs);
AbelianValue r_elliptic_s1(double h, std::span<const double> coeffs);

struct AbelianRow {
  double h;
  double x;
  std::array<double, 3> basis;
  double i_total;
  double r_direct;
  double r_closed; // nan when no closed form
};

std::vector<AbelianRow> abelian_table(SystemId id, std::span<const Rational> coeffs,
                                      const std::vector<double> &h_grid);
void write_abelian_csv(const std::vector<AbelianRow> &rows, const std::string &path);

} // namespace isochron
