#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "isochron/catalog.hpp"
#include "isochron/field.hpp"
#include "isochron/ode.hpp"

namespace isochron {

using Point = Eigen::Vector2d;

struct Trajectory {
  std::vector<double> times;
  std::vector<Point> states;
  std::vector<DenseStep<double, 2>> steps;

  /// Dense-output state at any t inside the integrated span.
  Point at(double t) const;
};

/// Integrates `field` from p0 over [t0, t1] (t1 < t0 integrates backward).
/// `tol` is the relative local error bound.
Trajectory integrate(const PlanarField &field, const Point &p0, double t0,
                     double t1, double tol = 1e-10);

struct PeriodOptions {
  double tol = 1e-12;
  double time_cap = 100.0;
};

struct PeriodResult {
  double period;
  /// dT/dx0 along the ray, from the variational equation; only filled by
  /// period_with_derivative.
  double dperiod_dx = 0.0;
  Point return_point;
};

/// First-return time to the ray {y = 0, x > 0}. When p0 is on the ray it is
/// the return time to p0's orbit crossing; otherwise the time between the
/// first two counterclockwise crossings.
double period(const PlanarField &field, const Point &p0,
              const PeriodOptions &opt = {});

/// Same as period for p0 = (x0, 0), plus dT/dx0 obtained by integrating the
/// first variational equation alongside the orbit.
PeriodResult period_with_derivative(const PlanarField &field, double x0,
                                    const PeriodOptions &opt = {});

/// Templated period on the ray, for extended-precision cross-checks.
template <typename Scalar>
Scalar period_on_ray(const NumericField<Scalar> &f, Scalar x0, double tol,
                     double time_cap = 100.0);

/// Region of the annulus kept for desk-scale verification.
struct ValidatedRegion {
  /// Interval on the positive x-axis used for section grids.
  double x_lo = 0.0;
  double x_hi = 0.0;
  /// Cap on H, when the record has a first integral.
  std::optional<double> energy_cap;
  /// |x| cap, when the annulus is bounded in x.
  std::optional<double> x_cap;
  std::string description;

  bool contains(const IsochroneSpec &spec, const Point &p) const;
};

struct RegionOptions {
  double margin = 0.9;
  double h_cap = 25.0;
  /// x_lo as a fraction of x_hi.
  double lower_fraction = 0.1;
};

ValidatedRegion validated_region(const IsochroneSpec &spec,
                                 const RegionOptions &opt = {});

enum class SectionKind { CommutatorFlow, XAxisRay };

struct SectionParam {
  std::vector<double> s_grid;
  std::vector<Point> points;
  SectionKind source = SectionKind::CommutatorFlow;
};

/// xi(s) = psi(s; q), the flow of u0 from q, at each s of the grid. Each
/// point is checked for transversality against x0 and membership in the
/// region.
SectionParam section_points(const PlanarField &u0, const PlanarField &x0,
                            const Point &q, const std::vector<double> &s_grid,
                            const IsochroneSpec &spec,
                            const ValidatedRegion &region, double tol = 1e-12);
/// Without a region check or transversality companion; for plain flows.
SectionParam section_points(const PlanarField &u0, const Point &q,
                            const std::vector<double> &s_grid,
                            double tol = 1e-12);

/// Closed counterclockwise level curve of the first integral, sampled at
/// uniform arclength.
class Oval {
public:
  Oval() = default;
  Oval(double h, double length, std::vector<Point> samples);

  double h() const { return h_; }
  double length() const { return length_; }
  /// Uniform-arclength samples; point k sits at arclength k L / N, and the
  /// first point is the right x-axis crossing.
  const std::vector<Point> &samples() const { return samples_; }
  int size() const { return static_cast<int>(samples_.size()); }
  /// Trigonometric interpolation at arclength ell.
  Point at(double ell) const;
  /// Derivative of the interpolant with respect to arclength.
  Point tangent(double ell) const;

private:
  double h_ = 0;
  double length_ = 0;
  std::vector<Point> samples_;
  std::vector<std::complex<double>> cx_, cy_;
};

struct OvalOptions {
  int samples = 1024;
  double tol = 1e-11;
};

/// H at p (square root taken for records storing H^2); nullopt at poles or
/// when the record has no first integral.
std::optional<double> energy_at(const IsochroneSpec &spec, const Point &p);

/// Right x-axis crossing of the level {H = h}.
double oval_axis_crossing(const IsochroneSpec &spec, double h);
Oval trace_oval(double h, const IsochroneSpec &spec,
                const OvalOptions &opt = {});

void write_csv(const Trajectory &tr, const std::string &path);
void write_csv(const Oval &oval, const std::string &path);

} // namespace isochron
