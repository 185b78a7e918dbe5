#include "isochron/abelian.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "isochron/elliptic.hpp"

namespace isochron {

namespace {

using P = BivariatePoly;
using R = BivariateRational;
constexpr double kPi = std::numbers::pi;

const IsochroneSpec &require_integral(const IsochroneSpec &spec, const char *op) {
  if (!spec.first_integral)
    throw OpenCurveError(std::string(op) + ": " + std::string(name(spec.id)) +
                         " carries no first integral");
  return spec;
}

void require_basis_id(SystemId id) {
  if (id != SystemId::S2star && id != SystemId::S3star && id != SystemId::S3barstar)
    throw TemplateMismatchError("basis: " + std::string(name(id)) +
                                " has no Abelian basis (expected s2star, s3star "
                                "or s3barstar)");
}

void require_pleshkan(SystemId id, const char *op) {
  if (!is_cubic(id))
    throw TemplateMismatchError(std::string(op) + ": " + std::string(name(id)) +
                                " has no commutator");
}

std::vector<double> to_doubles(std::span<const Rational> c) {
  std::vector<double> out;
  for (const auto &r : c)
    out.push_back(r.get_d());
  return out;
}

// Trapezoid (periodic) of f(x) y^p dx/dl over the uniform samples, using
// every `stride`-th sample. Returns (value, sum of magnitudes).
std::pair<double, double> trapezoid(const Oval &ov, const IntegrandFn &in,
                                    const IsochroneSpec &spec,
                                    const DenseRational<double> &hx,
                                    const DenseRational<double> &hy, int stride) {
  const auto &pts = ov.samples();
  const int n = ov.size();
  const bool split = spec.ab_split.has_value();
  const DenseRational<double> f(in.f);
  std::optional<DenseRational<double>> b;
  if (split)
    b.emplace(spec.ab_split->b);
  double acc = 0, mag = 0, comp = 0;
  for (int j = 0; j < n; j += stride) {
    const double x = pts[j].x(), y = pts[j].y();
    const PointValue fv = f.checked(x, y);
    if (fv.pole)
      throw SingularIntegrandError("oval_integral: integrand denominator vanishes "
                                   "on the oval");
    const double gx = hx(x, y), gy = hy(x, y);
    const double g = std::hypot(gx, gy);
    double term;
    if (in.y_power >= 0) {
      term = fv.value * std::pow(y, in.y_power) * (-gy / g);
    } else if (split && in.y_power == -1) {
      // dH/dy = 2 B y cancels the 1/y.
      term = fv.value * (-2.0 * (*b)(x, y) / g);
    } else {
      throw SingularIntegrandError(
          "oval_integral: negative power of y needs the symmetric treatment");
    }
    // Neumaier summation.
    const double t = acc + term;
    comp += std::abs(acc) >= std::abs(term) ? (acc - t) + term : (term - t) + acc;
    acc = t;
    mag += std::abs(term);
  }
  const double dl = ov.length() * stride / n;
  return {(acc + comp) * dl, mag * dl};
}

// Upper-half integral via x = c + r cos(theta), doubled by the y-symmetry.
double symmetric_integral(const IntegrandFn &in, const IsochroneSpec &spec,
                          double h, double rel_tol) {
  if (!spec.ab_split)
    throw AsymmetricOvalError("oval_integral: symmetric treatment needs H = A(x) "
                              "+ B(x) y^2");
  const R &hf = *spec.first_integral;
  if (!(hf.reflect_y() == hf))
    throw AsymmetricOvalError("oval_integral: oval is not symmetric in y");
  const double level = spec.integral_squared ? h * h : h;
  const double xp = oval_axis_crossing(spec, h);
  // Left crossing on the negative axis.
  const DenseRational<double> a(spec.ab_split->a), b(spec.ab_split->b),
      f(in.f);
  double lo = -xp, hi = 0.0;
  while (!(a(lo, 0.0) > level)) {
    lo *= 2;
    if (lo < -1e8)
      throw OpenCurveError("oval_integral: level does not cross the negative axis");
    if (std::isfinite(spec.x_r) && lo < -spec.x_r) {
      lo = -spec.x_r * (1 - 1e-15);
      break;
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (a(mid, 0.0) > level ? lo : hi) = mid;
  }
  const double xm = 0.5 * (lo + hi);
  const double c = 0.5 * (xp + xm), r = 0.5 * (xp - xm);
  const auto integrand = [&](double th) {
    const double x = c + r * std::cos(th);
    const double y = std::sqrt(std::max(0.0, (level - a(x, 0.0)) / b(x, 0.0)));
    const PointValue fv = f.checked(x, 0.0);
    if (fv.pole)
      throw SingularIntegrandError("oval_integral: integrand denominator vanishes "
                                   "on the oval");
    return fv.value * std::pow(y, in.y_power) * (-r * std::sin(th));
  };
  double err = 0;
  const double upper = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, kPi, 20, rel_tol * 1e-2, &err);
  return 2.0 * upper;
}

// Real zero of the univariate denominator on [lo, hi]: a sign change, or a
// local minimum of |d| that refines to (numerical) zero.
bool pole_in_range(const BivariatePoly &den, double lo, double hi) {
  if (den.is_constant())
    return false;
  const DensePoly<double> d(den);
  const auto scale = [&](double x) { return std::max(den.eval_abs(x, 0.0), 1e-300); };
  const int n = 2048;
  std::vector<double> v(n + 1);
  for (int i = 0; i <= n; ++i)
    v[i] = d(lo + (hi - lo) * i / n, 0.0);
  for (int i = 0; i < n; ++i)
    if (v[i] == 0 || (v[i] < 0) != (v[i + 1] < 0))
      return true;
  for (int i = 1; i < n; ++i) {
    if (!(std::abs(v[i]) <= std::abs(v[i - 1]) && std::abs(v[i]) <= std::abs(v[i + 1])))
      continue;
    double a = lo + (hi - lo) * (i - 1) / n, b = lo + (hi - lo) * (i + 1) / n;
    for (int it = 0; it < 100; ++it) {
      const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
      if (std::abs(d(m1, 0.0)) < std::abs(d(m2, 0.0)))
        b = m2;
      else
        a = m1;
    }
    const double m = 0.5 * (a + b);
    if (std::abs(d(m, 0.0)) < 1e-12 * scale(m))
      return true;
  }
  return false;
}

struct OvalKey {
  SystemId id;
  double h;
  int samples;
  bool operator<(const OvalKey &o) const {
    return std::tie(id, h, samples) < std::tie(o.id, o.h, o.samples);
  }
};

} // namespace

std::shared_ptr<const Oval> cached_oval(const IsochroneSpec &spec, double h,
                                        int samples) {
  OvalOptions o;
  o.samples = samples;
  // Only catalog records are cached; ad hoc specs may reuse an id.
  if (&spec != &get_spec(spec.id))
    return std::make_shared<const Oval>(trace_oval(h, spec, o));
  static std::mutex mu;
  static std::map<OvalKey, std::shared_ptr<const Oval>> cache;
  const OvalKey key{spec.id, h, samples};
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end())
      return it->second;
  }
  auto ov = std::make_shared<const Oval>(trace_oval(h, spec, o));
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 4096)
    cache.clear();
  cache.emplace(key, ov);
  return ov;
}

AbelianValue oval_integral(const IntegrandFn &integrand, const IsochroneSpec &spec,
                           double h, const QuadratureOptions &opt) {
  require_integral(spec, "oval_integral");
  if (integrand.f.num().degree_y() != 0 || integrand.f.den().degree_y() != 0)
    throw SingularIntegrandError("oval_integral: f must depend on x only");
  AbelianValue out;
  out.h = h;
  if (integrand.f.is_zero())
    return out;
  const double sign = opt.clockwise ? -1.0 : 1.0;
  if (opt.symmetric) {
    if (integrand.y_power % 2 == 0)
      throw AsymmetricOvalError("oval_integral: symmetric treatment applies to "
                                "odd powers of y");
    out.value = sign * symmetric_integral(integrand, spec, h, opt.rel_tol);
    return out;
  }
  const R &hf = *spec.first_integral;
  const DenseRational<double> hx(hf.dx()), hy(hf.dy());
  {
    const auto ov = cached_oval(spec, h, 512);
    double lo = INFINITY, hi = -INFINITY;
    for (const Point &p : ov->samples()) {
      lo = std::min(lo, p.x());
      hi = std::max(hi, p.x());
    }
    if (pole_in_range(integrand.f.den(), lo, hi))
      throw SingularIntegrandError("oval_integral: integrand denominator vanishes "
                                   "on the oval");
  }
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int n = 512; n <= opt.max_samples; n *= 2) {
    const auto ov = cached_oval(spec, h, n);
    const auto [full, mag] = trapezoid(*ov, integrand, spec, hx, hy, 1);
    const auto half = trapezoid(*ov, integrand, spec, hx, hy, 2).first;
    const double change = std::min(std::abs(full - half),
                                   std::isnan(prev) ? INFINITY : std::abs(full - prev));
    prev = full;
    if (change <= opt.rel_tol * std::max(std::abs(full), 1e-3 * mag)) {
      out.value = sign * full;
      return out;
    }
  }
  out.value = sign * prev;
  return out;
}

BivariateRational rewrite_integrand(const BivariateRational &f,
                                    const BivariateRational &a,
                                    const BivariateRational &b, int k) {
  if (k == 0)
    throw std::invalid_argument("rewrite_integrand: k must be nonzero");
  const R da = a.dx();
  if (da.is_zero())
    throw AnalyticityError("rewrite_integrand: A' vanishes identically");
  const R ratio = (f / da).reduced();
  const auto at0 = ratio.den().eval(Rational(0), Rational(0));
  if (at0 == 0)
    throw AnalyticityError("rewrite_integrand: F/A' is not analytic at x = 0 (" +
                           ratio.to_string() + ")");
  const R g = R(Rational(2, k)) * (b * ratio).dx() - b.dx() * ratio;
  return g.reduced();
}

std::array<IntegrandFn, 3> basis_integrands(SystemId id) {
  require_basis_id(id);
  const P x = P::x();
  const P x2 = x * x;
  if (id == SystemId::S2star) {
    const P d = P(1) - x2;
    return {IntegrandFn{R(P(1), d), 3},
            IntegrandFn{R(P(1) - 4 * x2, 3 * d), 3},
            IntegrandFn{R(8 * x2 * x2 - 8 * x2 + 1, d), 3}};
  }
  const int sign = id == SystemId::S3star ? -1 : 1;
  const P d = (P(1) + sign * 3 * x2).pow(3);
  return {IntegrandFn{R(P(1), d), 3}, IntegrandFn{R(x2, d), 3},
          IntegrandFn{R(x2 * x2, d), 3}};
}

std::array<AbelianValue, 3> basis(SystemId id, double h,
                                  const QuadratureOptions &opt) {
  const auto in = basis_integrands(id);
  const IsochroneSpec &spec = get_spec(id);
  const double h0 = spec.h0.value_or(INFINITY);
  if (!(h > 0 && h < h0))
    throw EnergyRangeError("basis: energy " + std::to_string(h) +
                           " outside (0, h0)");
  return {oval_integral(in[0], spec, h, opt), oval_integral(in[1], spec, h, opt),
          oval_integral(in[2], spec, h, opt)};
}

CombinationWeights combination_weights(SystemId id) {
  require_basis_id(id);
  // S3star/S3barstar carry an extra overall sign so that the combination
  // equals R for counterclockwise ovals.
  switch (id) {
  case SystemId::S2star: return {2.0, {1, 1, 1}};
  case SystemId::S3star: return {-2.0 / 3.0, {1, 6, -48}};
  default: return {-2.0 / 3.0, {1, -6, -48}};
  }
}

AbelianValue i_total(SystemId id, std::span<const Rational> coeffs, double h,
                     const QuadratureOptions &opt) {
  const auto img = phi_map(id, coeffs).image;
  const auto b = basis(id, h, opt);
  const CombinationWeights cw = combination_weights(id);
  double acc = 0;
  for (int i = 0; i < 3; ++i)
    acc += cw.w[i] * img[i].get_d() * b[i].value;
  return {h, cw.scale / h * acc, AbelianMethod::Quadrature};
}

const std::array<BivariateRational, 4> &u0_lambda_units(SystemId id) {
  require_pleshkan(id, "u0_lambda_units");
  static std::mutex mu;
  static std::map<SystemId, std::array<BivariateRational, 4>> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(id); it != cache.end())
    return it->second;
  const IsochroneSpec &s = get_spec(id);
  std::array<BivariateRational, 4> out;
  for (int i = 0; i < 4; ++i) {
    std::array<Rational, 4> e{0, 0, 0, 0};
    e[i] = 1;
    const auto lm = lambda_mu(perturbation_field(Template::Cubic, e), s.x0, *s.u0);
    out[i] = directional_derivative(*s.u0, lm.lambda).reduced();
  }
  return cache.emplace(id, out).first->second;
}

Point s1_orbit(double t, double h) {
  using C = std::complex<double>;
  const C e = std::polar(1.0, t);
  const C z = h * e / std::sqrt(C(1 + h * h) - e * e * (h * h));
  return {z.real(), z.imag()};
}

AbelianValue r_direct(SystemId id, std::span<const double> coeffs, double x0,
                      double tol) {
  require_pleshkan(id, "r_direct");
  if (coeffs.size() != 4)
    throw TemplateMismatchError("r_direct expects 4 coefficients");
  const auto &units = u0_lambda_units(id);
  std::array<DenseRational<double>, 4> g;
  for (int i = 0; i < 4; ++i)
    g[i] = DenseRational<double>(units[i]);
  const auto combo = [&](double x, double y) {
    double acc = 0;
    for (int i = 0; i < 4; ++i)
      if (coeffs[i] != 0) {
        const PointValue v = g[i].checked(x, y);
        if (v.pole)
          throw PoleEncounterError("r_direct: U0(lambda) has a pole on the orbit");
        acc += coeffs[i] * v.value;
      }
    return acc;
  };
  AbelianValue out;
  out.h = x0;
  if (id == SystemId::S1star) {
    // Periodic trapezoid on the closed-form orbit, doubled to convergence.
    double prev = NAN;
    for (int n = 64; n <= (1 << 16); n *= 2) {
      double acc = 0, mag = 0;
      for (int j = 0; j < n; ++j) {
        const Point p = s1_orbit(2 * kPi * j / n, x0);
        const double v = combo(p.x(), p.y());
        acc += v;
        mag += std::abs(v);
      }
      const double val = acc * 2 * kPi / n;
      if (!std::isnan(prev) &&
          std::abs(val - prev) <= 1e-13 * std::max(std::abs(val), mag * 2 * kPi / n)) {
        out.value = val;
        out.method = AbelianMethod::Quadrature;
        return out;
      }
      prev = val;
    }
    out.value = prev;
    return out;
  }
  const IsochroneSpec &s = get_spec(id);
  const NumericField<double> f(s.x0);
  using V = Eigen::Matrix<double, 3, 1>;
  const auto rhs = [&](double, const V &z) {
    const Eigen::Vector2d p = z.head<2>();
    V d;
    d.head<2>() = f(p);
    d(2) = combo(p.x(), p.y());
    return d;
  };
  OdeOptions o;
  o.rtol = tol;
  o.atol = tol * 1e-3;
  V z(x0, 0.0, 0.0);
  dopri5<double, 3>(rhs, 0.0, z, 2 * kPi, o, [&](const DenseStep<double, 3> &st) {
    z = st.y1;
    return true;
  });
  out.value = z(2);
  return out;
}

AbelianValue r_direct(SystemId id, std::span<const Rational> coeffs, double x0,
                      double tol) {
  const auto c = to_doubles(coeffs);
  return r_direct(id, c, x0, tol);
}

AbelianValue r_elliptic_s1(double h, std::span<const double> coeffs) {
  if (coeffs.size() != 4)
    throw TemplateMismatchError("r_elliptic_s1 expects 4 coefficients");
  const double a = coeffs[0], b = coeffs[1], c = coeffs[2], d = coeffs[3];
  const double beta = 3 * c + d - a - 3 * b;
  const double gamma = a + 3 * b + 3 * c + d;
  const double delta = a - b + c - d;
  const IbarValues ib = ibar_pair(h);
  const double h2 = h * h;
  const double pre = -h2 * h2 / ((1 + h2) * (1 + h2));
  return {h, pre * (beta * ib.i2 / 2 + gamma * kPi + delta * ib.i0),
          AbelianMethod::ClosedForm};
}

AbelianValue r_elliptic_s1(double h, std::span<const Rational> coeffs) {
  const auto c = to_doubles(coeffs);
  return r_elliptic_s1(h, c);
}

std::vector<AbelianRow> abelian_table(SystemId id, std::span<const Rational> coeffs,
                                      const std::vector<double> &h_grid) {
  require_pleshkan(id, "abelian_table");
  std::vector<AbelianRow> rows;
  for (double h : h_grid) {
    AbelianRow r{};
    if (id == SystemId::S1star) {
      // Orbits are labelled by their x-axis crossing.
      const IbarValues ib = ibar_pair(h);
      r.h = h;
      r.x = h;
      r.basis = {kPi, ib.i2, ib.i0};
      r.r_closed = r_elliptic_s1(h, coeffs).value;
      r.i_total = r.r_closed;
      r.r_direct = r_direct(id, coeffs, h).value;
    } else {
      const auto b = basis(id, h);
      r.h = h;
      r.x = oval_axis_crossing(get_spec(id), h);
      r.basis = {b[0].value, b[1].value, b[2].value};
      r.i_total = i_total(id, coeffs, h).value;
      r.r_direct = r_direct(id, coeffs, r.x).value;
      r.r_closed = NAN;
    }
    rows.push_back(r);
  }
  return rows;
}

void write_abelian_csv(const std::vector<AbelianRow> &rows, const std::string &path) {
  std::ofstream os(path);
  if (!os)
    throw Error("write_abelian_csv: cannot open " + path);
  os.precision(17);
  os << "h,x,I0,I1,I2,I_total,R_direct,R_closed\n";
  for (const auto &r : rows)
    os << r.h << ',' << r.x << ',' << r.basis[0] << ',' << r.basis[1] << ','
       << r.basis[2] << ',' << r.i_total << ',' << r.r_direct << ',' << r.r_closed
       << '\n';
}

} // namespace isochron
