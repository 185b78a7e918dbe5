#include "isochron/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace isochron {

namespace {

using Vec2 = Eigen::Matrix<double, 2, 1>;
using Vec4 = Eigen::Matrix<double, 4, 1>;

OdeOptions ode_options(double tol) {
  OdeOptions o;
  o.rtol = tol;
  o.atol = tol * 1e-3;
  return o;
}

void check_start(const NumericField<double> &f, const Point &p0) {
  if (f.at_pole(p0))
    throw PoleEncounterError("integrate: initial point lies on a pole of the "
                             "vector field");
}

template <typename Scalar, int N> struct Crossing {
  Scalar t;
  Eigen::Matrix<Scalar, N, 1> z;
};

// Integrates until the state's (x, y) components cross the ray {y = 0, x > 0}
// counterclockwise (y from negative to nonnegative).
template <typename Scalar, int N, class F>
Crossing<Scalar, N> next_ray_crossing(F &&f, Scalar t0,
                                      const Eigen::Matrix<Scalar, N, 1> &z0,
                                      double tol, double time_cap) {
  using std::abs;
  std::optional<Crossing<Scalar, N>> hit;
  OdeOptions o;
  o.rtol = tol;
  o.atol = tol * 1e-3;
  dopri5<Scalar, N>(
      f, t0, z0, t0 + Scalar(time_cap), o,
      [&](const DenseStep<Scalar, N> &st) {
        if (!(st.y0(1) < 0 && st.y1(1) >= 0))
          return true;
        auto g = [](const Eigen::Matrix<Scalar, N, 1> &z) { return z(1); };
        auto dg = [&](Scalar t, const Eigen::Matrix<Scalar, N, 1> &z) {
          return f(t, z)(1);
        };
        const Scalar tc = refine_event(st, g, dg,
                                       Scalar(1e-15) * (Scalar(1) + abs(st.t1())));
        const auto zc = st(tc);
        if (!(zc(0) > 0))
          return true;
        const auto v = f(tc, zc);
        const Scalar speed = std::sqrt(v(0) * v(0) + v(1) * v(1));
        if (!(abs(v(1)) > Scalar(1e-9) * speed))
          throw NonTransversalCrossingError(
              "period: orbit crosses the ray {y=0, x>0} tangentially");
        hit = Crossing<Scalar, N>{tc, zc};
        return false;
      });
  if (!hit)
    throw NoReturnError("period: no return to the ray {y=0, x>0} within time " +
                        std::to_string(time_cap));
  return *hit;
}

double bisect_increasing(const std::function<double(double)> &g, double lo,
                         double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// H restricted to the positive x-axis, nan at poles.
double axis_energy(const IsochroneSpec &spec, double x) {
  const auto e = energy_at(spec, Point(x, 0.0));
  return e ? *e : std::numeric_limits<double>::quiet_NaN();
}

void fft(std::vector<std::complex<double>> &a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1)
      j ^= bit;
    j ^= bit;
    if (i < j)
      std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (size_t i = 0; i < n; i += len)
      for (size_t k = 0; k < len / 2; ++k) {
        const auto w = std::polar(1.0, ang * static_cast<double>(k));
        const auto u = a[i + k], v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
  }
}

} // namespace

Point Trajectory::at(double t) const {
  if (steps.empty())
    return states.front();
  for (const auto &st : steps) {
    const double a = std::min(st.t0, st.t1()), b = std::max(st.t0, st.t1());
    if (t >= a && t <= b)
      return st(t);
  }
  throw std::out_of_range("Trajectory::at: time outside the integrated span");
}

Trajectory integrate(const PlanarField &field, const Point &p0, double t0,
                     double t1, double tol) {
  const NumericField<double> f(field);
  check_start(f, p0);
  Trajectory tr;
  tr.times.push_back(t0);
  tr.states.push_back(p0);
  try {
    dopri5<double, 2>([&](double, const Vec2 &z) { return f(z); }, t0, Vec2(p0),
                      t1, ode_options(tol), [&](const DenseStep<double, 2> &st) {
                        if (f.at_pole(st.y1))
                          throw PoleEncounterError(
                              "integrate: trajectory reached a pole of the field");
                        tr.steps.push_back(st);
                        tr.times.push_back(st.t1());
                        tr.states.push_back(st.y1);
                        return true;
                      });
  } catch (const StepUnderflowError &) {
    // Steps collapse when the orbit runs into a denominator zero.
    if (f.near_pole(tr.states.back(), 1e-4))
      throw PoleEncounterError("integrate: trajectory ran into a pole of the "
                               "field near (" +
                               std::to_string(tr.states.back().x()) + ", " +
                               std::to_string(tr.states.back().y()) + ")");
    throw;
  }
  return tr;
}

template <typename Scalar>
Scalar period_on_ray(const NumericField<Scalar> &f, Scalar x0, double tol,
                     double time_cap) {
  using V = Eigen::Matrix<Scalar, 2, 1>;
  const auto rhs = [&](Scalar, const V &z) { return f(z); };
  return next_ray_crossing<Scalar, 2>(rhs, Scalar(0), V(x0, Scalar(0)), tol,
                                      time_cap)
      .t;
}

template double period_on_ray<double>(const NumericField<double> &, double,
                                      double, double);
template long double period_on_ray<long double>(const NumericField<long double> &,
                                                long double, double, double);

double period(const PlanarField &field, const Point &p0,
              const PeriodOptions &opt) {
  const NumericField<double> f(field);
  check_start(f, p0);
  const auto rhs = [&](double, const Vec2 &z) { return f(z); };
  Vec2 start = p0;
  if (!(std::abs(p0.y()) <= 1e-15 * std::abs(p0.x()) && p0.x() > 0)) {
    const auto first = next_ray_crossing<double, 2>(rhs, 0.0, Vec2(p0), opt.tol,
                                                    opt.time_cap);
    start = first.z;
  }
  start.y() = 0.0;
  return next_ray_crossing<double, 2>(rhs, 0.0, start, opt.tol, opt.time_cap).t;
}

PeriodResult period_with_derivative(const PlanarField &field, double x0,
                                    const PeriodOptions &opt) {
  const NumericField<double> f(field);
  check_start(f, Point(x0, 0.0));
  const auto rhs = [&](double, const Vec4 &z) {
    const Vec2 p = z.head<2>();
    Vec4 out;
    out.head<2>() = f(p);
    out.tail<2>() = f.jacobian(p) * z.tail<2>();
    return out;
  };
  const Vec4 z0(x0, 0.0, 1.0, 0.0);
  const auto c = next_ray_crossing<double, 4>(rhs, 0.0, z0, opt.tol, opt.time_cap);
  const Vec2 p = c.z.head<2>();
  const double qdot = f(p)(1);
  // y(T(x0); x0) = 0 differentiated in x0.
  return {c.t, -c.z(3) / qdot, p};
}

std::optional<double> energy_at(const IsochroneSpec &spec, const Point &p) {
  if (!spec.first_integral)
    return std::nullopt;
  const PointValue v = spec.first_integral->eval(p.x(), p.y());
  if (v.pole)
    return std::nullopt;
  if (spec.integral_squared)
    return std::sqrt(std::max(0.0, v.value));
  return v.value;
}

bool ValidatedRegion::contains(const IsochroneSpec &spec, const Point &p) const {
  if (x_cap && std::abs(p.x()) > *x_cap)
    return false;
  if (energy_cap) {
    const auto e = energy_at(spec, p);
    if (!e || *e > *energy_cap)
      return false;
  }
  return true;
}

ValidatedRegion validated_region(const IsochroneSpec &spec,
                                 const RegionOptions &opt) {
  ValidatedRegion r;
  const bool has_h = spec.first_integral.has_value();
  const std::string sys(name(spec.id));
  if (has_h && spec.h0 && std::isfinite(*spec.h0)) {
    r.energy_cap = opt.margin * *spec.h0;
    r.description = "H <= " + std::to_string(opt.margin) + " h0";
  } else if (std::isfinite(spec.x_r)) {
    r.x_cap = opt.margin * spec.x_r;
    r.description = "|x| <= " + std::to_string(opt.margin) + " x_r";
  } else if (has_h) {
    r.energy_cap = opt.h_cap;
    r.description = "H <= " + std::to_string(opt.h_cap);
  } else {
    throw Error("validated_region: " + sys + " has neither x_r nor H");
  }
  if (r.x_cap) {
    r.x_hi = *r.x_cap;
  } else {
    const double cap = *r.energy_cap;
    double hi = std::isfinite(spec.x_r) ? spec.x_r : 1.0;
    if (!std::isfinite(spec.x_r))
      while (!(axis_energy(spec, hi) > cap) && hi < 1e8)
        hi *= 2;
    r.x_hi = bisect_increasing(
        [&](double x) {
          const double e = axis_energy(spec, x);
          return std::isnan(e) ? 1.0 : e - cap;
        },
        0.0, hi);
  }
  r.x_lo = opt.lower_fraction * r.x_hi;
  r.description += " (x in [" + std::to_string(r.x_lo) + ", " +
                   std::to_string(r.x_hi) + "] on the positive x-axis)";
  return r;
}

namespace {

SectionParam flow_section(const PlanarField &u0, const Point &q,
                          const std::vector<double> &s_grid, double tol,
                          const std::function<void(const Point &)> &check) {
  const NumericField<double> u(u0);
  check_start(u, q);
  SectionParam out;
  out.s_grid = s_grid;
  out.points.resize(s_grid.size());
  std::vector<size_t> order(s_grid.size());
  for (size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return s_grid[a] < s_grid[b]; });
  const auto rhs = [&](double, const Vec2 &z) { return u(z); };

  // Forward sweep for s >= 0, backward for s < 0, each visiting the targets
  // in order of distance from zero.
  for (int dir : {+1, -1}) {
    std::vector<size_t> targets;
    for (size_t i : order)
      if ((dir > 0) == (s_grid[i] >= 0))
        targets.push_back(i);
    if (dir < 0)
      std::reverse(targets.begin(), targets.end());
    double s = 0.0;
    Vec2 z = q;
    for (size_t i : targets) {
      const double target = s_grid[i];
      if (target != s) {
        dopri5<double, 2>(rhs, s, z, target, ode_options(tol),
                          [&](const DenseStep<double, 2> &st) {
                            check(st.y1);
                            z = st.y1;
                            return true;
                          });
        s = target;
      }
      check(z);
      out.points[i] = z;
    }
  }
  return out;
}

} // namespace

SectionParam section_points(const PlanarField &u0, const PlanarField &x0,
                            const Point &q, const std::vector<double> &s_grid,
                            const IsochroneSpec &spec,
                            const ValidatedRegion &region, double tol) {
  const BivariateRational w = wedge(x0, u0);
  const NumericField<double> xf(x0), uf(u0);
  auto check = [&](const Point &p) {
    if (!region.contains(spec, p))
      throw BoundaryExitError("section_points: U0 orbit left the validated "
                              "region (" + region.description + ") at (" +
                              std::to_string(p.x()) + ", " +
                              std::to_string(p.y()) + ")");
    const PointValue wv = w.eval(p.x(), p.y());
    const double scale = xf(p).norm() * uf(p).norm();
    if (wv.pole || !(std::abs(wv.value) > 1e-12 * scale))
      throw NonTransversalCrossingError(
          "section_points: X0 and U0 are not transversal at a section point");
  };
  SectionParam out = flow_section(u0, q, s_grid, tol, check);
  out.source = SectionKind::CommutatorFlow;
  return out;
}

SectionParam section_points(const PlanarField &u0, const Point &q,
                            const std::vector<double> &s_grid, double tol) {
  return flow_section(u0, q, s_grid, tol, [](const Point &) {});
}

double oval_axis_crossing(const IsochroneSpec &spec, double h) {
  if (!spec.first_integral)
    throw OpenCurveError("trace_oval: " + std::string(name(spec.id)) +
                         " carries no first integral");
  const double h0 = spec.h0.value_or(std::numeric_limits<double>::infinity());
  if (!(h > 0) || !(h < h0))
    throw OpenCurveError("trace_oval: energy " + std::to_string(h) +
                         " outside (0, h0)");
  double hi = std::isfinite(spec.x_r) ? spec.x_r : 1.0;
  if (!std::isfinite(spec.x_r))
    while (!(axis_energy(spec, hi) > h)) {
      hi *= 2;
      if (hi > 1e12)
        throw OpenCurveError("trace_oval: level does not cross the x-axis");
    }
  return bisect_increasing(
      [&](double x) {
        const double e = axis_energy(spec, x);
        return std::isnan(e) ? 1.0 : e - h;
      },
      0.0, hi);
}

Oval::Oval(double h, double length, std::vector<Point> samples)
    : h_(h), length_(length), samples_(std::move(samples)) {
  const size_t n = samples_.size();
  if (n < 4 || (n & (n - 1)) != 0)
    throw std::invalid_argument("Oval: sample count must be a power of two");
  std::vector<std::complex<double>> ax(n), ay(n);
  for (size_t j = 0; j < n; ++j) {
    ax[j] = samples_[j].x();
    ay[j] = samples_[j].y();
  }
  fft(ax);
  fft(ay);
  cx_.assign(ax.begin(), ax.begin() + n / 2 + 1);
  cy_.assign(ay.begin(), ay.begin() + n / 2 + 1);
  for (auto &c : cx_)
    c /= static_cast<double>(n);
  for (auto &c : cy_)
    c /= static_cast<double>(n);
}

Point Oval::at(double ell) const {
  const size_t half = cx_.size() - 1;
  const double w = 2.0 * std::numbers::pi / length_;
  double x = cx_[0].real(), y = cy_[0].real();
  for (size_t k = 1; k < half; ++k) {
    const auto e = std::polar(1.0, w * static_cast<double>(k) * ell);
    x += 2.0 * (cx_[k] * e).real();
    y += 2.0 * (cy_[k] * e).real();
  }
  const double c = std::cos(w * static_cast<double>(half) * ell);
  x += cx_[half].real() * c;
  y += cy_[half].real() * c;
  return {x, y};
}

Point Oval::tangent(double ell) const {
  const size_t half = cx_.size() - 1;
  const double w = 2.0 * std::numbers::pi / length_;
  double x = 0, y = 0;
  for (size_t k = 1; k < half; ++k) {
    const double wk = w * static_cast<double>(k);
    const auto e = std::polar(1.0, wk * ell) * std::complex<double>(0, wk);
    x += 2.0 * (cx_[k] * e).real();
    y += 2.0 * (cy_[k] * e).real();
  }
  const double wn = w * static_cast<double>(half);
  x -= cx_[half].real() * wn * std::sin(wn * ell);
  y -= cy_[half].real() * wn * std::sin(wn * ell);
  return {x, y};
}

Oval trace_oval(double h, const IsochroneSpec &spec, const OvalOptions &opt) {
  const double x_star = oval_axis_crossing(spec, h);
  const BivariateRational &hf = *spec.first_integral;
  const DenseRational<double> hx(hf.dx()), hy(hf.dy()), hv(hf);
  // Tracing runs on the stored integral; its level is h or h^2.
  const double level = spec.integral_squared ? h * h : h;
  const auto grad = [&](const Vec2 &z) {
    return Vec2(hx(z.x(), z.y()), hy(z.x(), z.y()));
  };
  const auto rhs = [&](double, const Vec2 &z) {
    const Vec2 g = grad(z);
    const double n = g.norm();
    if (!(n > 1e-14))
      throw GradientDegeneracyError("trace_oval: gradient of H vanishes on the level");
    return Vec2(-g.y() / n, g.x() / n);
  };

  std::vector<DenseStep<double, 2>> steps;
  double length = 0.0;
  {
    OdeOptions o = ode_options(opt.tol);
    bool closed = false;
    const double cap = 1e3 * (1.0 + x_star);
    dopri5<double, 2>(rhs, 0.0, Vec2(x_star, 0.0), cap, o,
                      [&](const DenseStep<double, 2> &st) {
                        if (st.y0(1) < 0 && st.y1(1) >= 0 && st.y1(0) > 0) {
                          const auto g = [](const Vec2 &z) { return z(1); };
                          const auto dg = [&](double t, const Vec2 &z) {
                            return rhs(t, z)(1);
                          };
                          length = refine_event(st, g, dg, 1e-15 * st.t1());
                          steps.push_back(st);
                          closed = true;
                          return false;
                        }
                        steps.push_back(st);
                        return true;
                      });
    if (!closed)
      throw OpenCurveError("trace_oval: level curve did not close");
  }

  const int n = opt.samples;
  std::vector<Point> pts(n);
  size_t k = 0;
  for (int j = 0; j < n; ++j) {
    const double ell = length * j / n;
    while (k + 1 < steps.size() && steps[k].t1() < ell)
      ++k;
    Vec2 z = steps[k](ell);
    // Newton projection back onto the level set.
    for (int it = 0; it < 3; ++it) {
      const Vec2 g = grad(z);
      z -= (hv(z.x(), z.y()) - level) / g.squaredNorm() * g;
    }
    pts[j] = z;
  }
  pts[0] = Point(x_star, 0.0);
  return Oval(h, length, std::move(pts));
}

void write_csv(const Trajectory &tr, const std::string &path) {
  std::ofstream os(path);
  if (!os)
    throw Error("write_csv: cannot open " + path);
  os.precision(17);
  os << "t,x,y\n";
  for (size_t i = 0; i < tr.times.size(); ++i)
    os << tr.times[i] << ',' << tr.states[i].x() << ',' << tr.states[i].y() << '\n';
}

void write_csv(const Oval &oval, const std::string &path) {
  std::ofstream os(path);
  if (!os)
    throw Error("write_csv: cannot open " + path);
  os.precision(17);
  os << "ell,x,y\n";
  const int n = oval.size();
  for (int j = 0; j <= n; ++j) {
    const auto &p = oval.samples()[j % n];
    os << oval.length() * j / n << ',' << p.x() << ',' << p.y() << '\n';
  }
}

} // namespace isochron
