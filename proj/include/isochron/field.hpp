#pragma once

#include <array>

#include <Eigen/Dense>

#include "isochron/poly.hpp"

namespace isochron {

/// Planar vector field p d/dx + q d/dy with exact rational components.
struct PlanarField {
  BivariateRational p;
  BivariateRational q;

  friend PlanarField operator+(const PlanarField &a, const PlanarField &b) {
    return {a.p + b.p, a.q + b.q};
  }
  friend PlanarField operator-(const PlanarField &a, const PlanarField &b) {
    return {a.p - b.p, a.q - b.q};
  }
  friend PlanarField operator*(const BivariateRational &f,
                               const PlanarField &v) {
    return {f * v.p, f * v.q};
  }
  friend bool operator==(const PlanarField &a, const PlanarField &b) {
    return a.p == b.p && a.q == b.q;
  }
  bool is_zero() const { return p.is_zero() && q.is_zero(); }
  bool is_polynomial() const { return p.is_polynomial() && q.is_polynomial(); }
  PlanarField reduced() const { return {p.reduced(), q.reduced()}; }
};

/// v(f) = f_x v.p + f_y v.q.
BivariateRational directional_derivative(const PlanarField &v,
                                         const BivariateRational &f);

/// [X, U] = DU X - DX U.
PlanarField lie_bracket(const PlanarField &x_field, const PlanarField &u_field);

/// x_field.p y_field.q - x_field.q y_field.p.
BivariateRational wedge(const PlanarField &x_field, const PlanarField &y_field);

struct BracketDecomposition {
  BivariateRational alpha;
  BivariateRational beta;
};

/// Coefficients of [X, U] = alpha X + beta U. Throws DegeneratePairError when
/// X and U are everywhere parallel.
BracketDecomposition bracket_decompose(const PlanarField &x_field,
                                       const PlanarField &u_field);

struct LambdaMu {
  BivariateRational lambda;
  BivariateRational mu;
};

/// Y = lambda X0 + mu U0, with both coefficients GCD-reduced.
LambdaMu lambda_mu(const PlanarField &y_field, const PlanarField &x0,
                   const PlanarField &u0);

/// Dense floating-point image of a PlanarField with its Jacobian, for
/// integration. Components are exact rationals rounded to Scalar.
template <typename Scalar> class NumericField {
public:
  using Vec = Eigen::Matrix<Scalar, 2, 1>;
  using Mat = Eigen::Matrix<Scalar, 2, 2>;

  NumericField() = default;
  explicit NumericField(const PlanarField &f)
      : p_(f.p), q_(f.q), px_(f.p.dx()), py_(f.p.dy()), qx_(f.q.dx()),
        qy_(f.q.dy()) {}

  Vec operator()(const Vec &z) const { return {p_(z.x(), z.y()), q_(z.x(), z.y())}; }

  Mat jacobian(const Vec &z) const {
    Mat j;
    j << px_(z.x(), z.y()), py_(z.x(), z.y()), qx_(z.x(), z.y()),
        qy_(z.x(), z.y());
    return j;
  }

  /// True when either component's denominator vanishes at z.
  bool at_pole(const Vec &z) const {
    return p_.checked(z.x(), z.y()).pole || q_.checked(z.x(), z.y()).pole;
  }
  /// Looser test: a denominator below `rel_tol` of its term magnitude.
  bool near_pole(const Vec &z, Scalar rel_tol) const {
    return p_.checked(z.x(), z.y(), rel_tol).pole ||
           q_.checked(z.x(), z.y(), rel_tol).pole;
  }

private:
  DenseRational<Scalar> p_, q_, px_, py_, qx_, qy_;
};

} // namespace isochron
