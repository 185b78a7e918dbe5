#pragma once

#include <complex>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>

#include <Eigen/Dense>
#include <gmpxx.h>

#include "isochron/errors.hpp"

namespace isochron {

using Rational = mpq_class;

/// Renders "p/q", or "p" when the denominator is one.
std::string to_string(const Rational &r);
/// Accepts "p/q", "p" and finite decimals ("0.25", "-1e-3"); decimals are
/// converted exactly.
Rational parse_rational(std::string_view text);
/// Exact conversion of a finite double.
Rational rational_from_double(double v);

/// Exponent pair of x^i y^j. Ordered lexicographically by (y, x), so the
/// last term of a polynomial is its leading term in y-major order.
struct Monomial {
  int x = 0;
  int y = 0;

  friend bool operator==(const Monomial &, const Monomial &) = default;
  friend std::strong_ordering operator<=>(const Monomial &a,
                                          const Monomial &b) {
    if (auto c = a.y <=> b.y; c != 0)
      return c;
    return a.x <=> b.x;
  }
};

/// Value of a rational function at a floating point; `pole` marks points
/// where the denominator vanishes to working precision.
struct PointValue {
  double value = 0.0;
  bool pole = false;
};

class BivariatePoly {
public:
  using Terms = std::map<Monomial, Rational>;

  BivariatePoly() = default;
  BivariatePoly(const Rational &c);
  BivariatePoly(long c) : BivariatePoly(Rational(c)) {}
  BivariatePoly(int c) : BivariatePoly(Rational(c)) {}

  static BivariatePoly monomial(int i, int j, const Rational &c = 1);
  static BivariatePoly x() { return monomial(1, 0); }
  static BivariatePoly y() { return monomial(0, 1); }

  const Terms &terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  int total_degree() const;
  int degree_x() const;
  int degree_y() const;
  Rational coeff(int i, int j) const;
  /// Leading term in y-major lexicographic order. Precondition: nonzero.
  std::pair<Monomial, Rational> leading() const;

  BivariatePoly &operator+=(const BivariatePoly &o);
  BivariatePoly &operator-=(const BivariatePoly &o);
  BivariatePoly &operator*=(const BivariatePoly &o);
  BivariatePoly &operator*=(const Rational &c);

  friend BivariatePoly operator+(BivariatePoly a, const BivariatePoly &b) {
    return a += b;
  }
  friend BivariatePoly operator-(BivariatePoly a, const BivariatePoly &b) {
    return a -= b;
  }
  friend BivariatePoly operator*(const BivariatePoly &a,
                                 const BivariatePoly &b);
  friend BivariatePoly operator*(BivariatePoly a, const Rational &c) {
    return a *= c;
  }
  friend BivariatePoly operator*(const Rational &c, BivariatePoly a) {
    return a *= c;
  }
  friend BivariatePoly operator*(int c, BivariatePoly a) {
    return a *= Rational(c);
  }
  friend BivariatePoly operator*(BivariatePoly a, int c) {
    return a *= Rational(c);
  }
  BivariatePoly operator-() const;
  friend bool operator==(const BivariatePoly &, const BivariatePoly &) =
      default;

  BivariatePoly pow(int n) const;
  BivariatePoly dx() const;
  BivariatePoly dy() const;
  /// p(-x, y).
  BivariatePoly reflect_x() const;
  /// p(x, -y).
  BivariatePoly reflect_y() const;

  Rational eval(const Rational &x, const Rational &y) const;
  /// Monomials summed with Neumaier compensation.
  double eval(double x, double y) const;
  /// Sum of |c| |x|^i |y|^j, the magnitude scale of eval at (x, y).
  double eval_abs(double x, double y) const;

  std::string to_string() const;

private:
  void add_term(const Monomial &m, const Rational &c);
  Terms terms_;
};

/// Exact quotient for polynomials known to divide; throws when b does not
/// divide a.
BivariatePoly divide_exact(const BivariatePoly &a, const BivariatePoly &b);
/// Greatest common divisor over Q[x, y], normalized to a monic leading term.
BivariatePoly gcd(const BivariatePoly &a, const BivariatePoly &b);

class BivariateRational {
public:
  /// Total degree above which arithmetic results are GCD-reduced.
  static constexpr int kAutoReduceDegree = 40;

  BivariateRational() : num_(0), den_(1) {}
  BivariateRational(const BivariatePoly &num) : num_(num), den_(1) {}
  BivariateRational(const Rational &c) : num_(c), den_(1) {}
  BivariateRational(int c) : num_(c), den_(1) {}
  BivariateRational(BivariatePoly num, BivariatePoly den);

  const BivariatePoly &num() const { return num_; }
  const BivariatePoly &den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_constant(); }
  int total_degree() const;

  /// Cancels the numerator/denominator gcd and makes the denominator's
  /// leading coefficient one.
  BivariateRational reduced() const;

  friend BivariateRational operator+(const BivariateRational &a,
                                     const BivariateRational &b);
  friend BivariateRational operator-(const BivariateRational &a,
                                     const BivariateRational &b);
  friend BivariateRational operator*(const BivariateRational &a,
                                     const BivariateRational &b);
  friend BivariateRational operator/(const BivariateRational &a,
                                     const BivariateRational &b);
  BivariateRational operator-() const;
  /// Cross-multiplicative equality.
  friend bool operator==(const BivariateRational &a,
                         const BivariateRational &b);

  BivariateRational dx() const;
  BivariateRational dy() const;
  BivariateRational reflect_x() const;
  BivariateRational reflect_y() const;
  bool is_even_in_x() const { return reflect_x() == *this; }

  /// nullopt when the denominator vanishes at the point.
  std::optional<Rational> eval(const Rational &x, const Rational &y) const;
  PointValue eval(double x, double y) const;

  std::string to_string() const;

private:
  BivariateRational maybe_reduced() const;
  BivariatePoly num_;
  BivariatePoly den_;
};

/// Dense coefficient matrix C(i, j) of x^i y^j, evaluated by nested Horner.
/// Evaluation is generic in the argument type so complex extensions work.
template <typename Scalar> class DensePoly {
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  DensePoly() : coeffs_(Matrix::Zero(1, 1)) {}
  explicit DensePoly(const BivariatePoly &p) {
    coeffs_ = Matrix::Zero(p.degree_x() + 1, p.degree_y() + 1);
    for (const auto &[m, c] : p.terms())
      coeffs_(m.x, m.y) = static_cast<Scalar>(c.get_d());
  }

  const Matrix &coeffs() const { return coeffs_; }

  template <typename T> T operator()(const T &x, const T &y) const {
    T acc(0);
    for (Eigen::Index j = coeffs_.cols() - 1; j >= 0; --j) {
      T col(0);
      for (Eigen::Index i = coeffs_.rows() - 1; i >= 0; --i)
        col = col * x + T(coeffs_(i, j));
      acc = acc * y + col;
    }
    return acc;
  }

private:
  Matrix coeffs_;
};

template <typename Scalar> class DenseRational {
public:
  DenseRational() = default;
  explicit DenseRational(const BivariateRational &r)
      : num_(r.num()), den_(r.den()), den_abs_(magnitude(r.den())) {}

  template <typename T> T operator()(const T &x, const T &y) const {
    return num_(x, y) / den_(x, y);
  }

  /// Flags a pole when the denominator is below `rel_tol` times its term
  /// magnitude at the point.
  PointValue checked(Scalar x, Scalar y, Scalar rel_tol = Scalar(1e-13)) const {
    using std::abs;
    const Scalar d = den_(x, y);
    const Scalar scale = den_abs_(abs(x), abs(y));
    if (!(abs(d) > rel_tol * scale))
      return {0.0, true};
    return {static_cast<double>(num_(x, y) / d), false};
  }

  const DensePoly<Scalar> &num() const { return num_; }
  const DensePoly<Scalar> &den() const { return den_; }

private:
  static BivariatePoly magnitude(const BivariatePoly &p) {
    BivariatePoly out;
    for (const auto &[m, c] : p.terms())
      out += BivariatePoly::monomial(m.x, m.y, abs(c));
    return out;
  }

  DensePoly<Scalar> num_;
  DensePoly<Scalar> den_;
  DensePoly<Scalar> den_abs_;
};

} // namespace isochron
