#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isochron/exact_linalg.hpp"
#include "isochron/field.hpp"

namespace isochron {

enum class SystemId {
  S1star,
  S2star,
  S3star,
  S3barstar,
  LoudS1,
  LoudS2,
  LoudS3,
  LoudS4
};

inline constexpr std::array<SystemId, 8> kAllSystems = {
    SystemId::S1star, SystemId::S2star, SystemId::S3star, SystemId::S3barstar,
    SystemId::LoudS1, SystemId::LoudS2, SystemId::LoudS3, SystemId::LoudS4};
inline constexpr std::array<SystemId, 4> kPleshkanSystems = {
    SystemId::S1star, SystemId::S2star, SystemId::S3star, SystemId::S3barstar};
inline constexpr std::array<SystemId, 4> kLoudSystems = {
    SystemId::LoudS1, SystemId::LoudS2, SystemId::LoudS3, SystemId::LoudS4};
/// Loud bases for which the first-order pair is an ECT system.
inline constexpr std::array<SystemId, 3> kLoudCovered = {
    SystemId::LoudS2, SystemId::LoudS3, SystemId::LoudS4};

std::string_view name(SystemId id);
/// Accepts the lower-case names ("s2star", "louds3", ...).
SystemId parse_system(std::string_view text);
bool is_cubic(SystemId id);

enum class Template { Cubic, Quadratic };

/// Arity of the perturbation template: (a, b, c, d) or (d, f).
inline int arity(Template t) { return t == Template::Cubic ? 4 : 2; }

/// H = A(x) + B(x) y^2 with A, B functions of x alone.
struct AbSplit {
  BivariateRational a;
  BivariateRational b;
};

struct IsochroneSpec {
  SystemId id;
  PlanarField x0;
  std::optional<PlanarField> u0;
  std::optional<BivariateRational> first_integral;
  /// True when first_integral holds H^2 rather than H (H itself is not
  /// rational). Energies h and h0 always refer to H.
  bool integral_squared = false;
  std::optional<AbSplit> ab_split;
  /// Extent of the annulus on the positive x-axis (+inf when unbounded).
  double x_r;
  /// Outer energy of the first integral (+inf when unbounded); absent for
  /// entries without first integral.
  std::optional<double> h0;
  Template tmpl;
  /// Rows c of the constraints c . coeffs = 0 defining the isochronous
  /// direction.
  RationalMatrix kernel;
  /// 3x4 coefficient map, cubic entries only.
  std::optional<RationalMatrix> phi;
  /// (d0, f0), quadratic entries only.
  std::optional<std::array<Rational, 2>> loud_base;
};

/// Exact catalog record; certified (brackets, first integrals, kernels) the
/// first time the built-in catalog is materialized.
const IsochroneSpec &get_spec(SystemId id);

/// Perturbation Y built from one coefficient vector of the template.
PlanarField perturbation_field(Template t, std::span<const Rational> coeffs);

/// Truncated eps-series of perturbation coefficients; orders[i] holds the
/// coefficients of eps^(i+1), so order-0 terms vanish by construction.
struct PerturbationSeries {
  Template tmpl = Template::Cubic;
  std::vector<RationalVector> orders;

  static PerturbationSeries first_order(Template t, RationalVector coeffs);
  static PerturbationSeries first_order(Template t,
                                        std::span<const double> coeffs);
  int order() const { return static_cast<int>(orders.size()); }
  /// Coefficients of eps^k (k >= 1), zero beyond the truncation.
  RationalVector at(int k) const;
  /// sum_k eps^k orders[k-1], exact in eps.
  RationalVector evaluate(const Rational &eps) const;
};

/// X_eps = X0 + Y(eps) for the given series; eps enters exactly.
PlanarField perturbed_field(const IsochroneSpec &spec,
                            const PerturbationSeries &series,
                            const Rational &eps);

struct CoefficientImage {
  std::array<Rational, 3> image;
  /// (alpha, beta, gamma, delta) of the complex form, S1star only.
  std::optional<std::array<Rational, 4>> complex_form;
};

CoefficientImage phi_map(SystemId id, std::span<const Rational> coeffs);
/// Three coefficient vectors whose phi-images are the unit vectors.
std::array<RationalVector, 3> surjectivity_witness(SystemId id);
bool kernel_check(SystemId id, std::span<const Rational> coeffs);
/// Complex-form coefficients of the S1star perturbation: the perturbed
/// system reads z' = i z (1 + z^2) + i (alpha z^3 + beta z^2 zbar +
/// gamma z zbar^2 + delta zbar^3) / 8.
std::array<Rational, 4> complex_coeffs(const Rational &a, const Rational &b,
                                       const Rational &c, const Rational &d);

struct IdentityCheck {
  std::string system;
  std::string identity;
  bool passed;
  std::string detail;
};

/// Exact checks on one record: [X0, U0] = 0, grad H . X0 = 0, the A/B split,
/// ker(phi) against the kernel constraints, rank(phi) = 3.
std::vector<IdentityCheck> verify_identities(const IsochroneSpec &spec);

/// JSON rendering with exact rationals as "p/q" strings.
std::string spec_to_json(const IsochroneSpec &spec, int indent = 2);
IsochroneSpec spec_from_json(std::string_view text);
/// FNV-1a of the compact JSON of all eight records.
std::string catalog_checksum();

} // namespace isochron
