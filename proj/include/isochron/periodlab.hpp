#pragma once

#include <optional>
#include <string>
#include <vector>

#include "isochron/catalog.hpp"
#include "isochron/chebyshev.hpp"
#include "isochron/flow.hpp"

namespace isochron {

/// Section through the validated region, parameterized by s, with the
/// crossing x(s) on the positive x-axis and dx/ds.
struct SectionGrid {
  SystemId id{};
  SectionKind source = SectionKind::XAxisRay;
  std::vector<double> s;
  std::vector<double> x;
  std::vector<double> dx_ds;
  ValidatedRegion region;
};

/// Commutator-flow section for Pleshkan systems (started at x_lo on the
/// axis, which the commutator preserves), x-axis ray for Loud systems.
SectionGrid section_grid(const IsochroneSpec &spec, int n,
                         const RegionOptions &region = {});
/// The x-axis ray parameterized by x, for any system.
SectionGrid ray_grid(const IsochroneSpec &spec, int n, const RegionOptions &region = {});

struct ScanOptions {
  double tol = 1e-12;
  double time_cap = 100.0;
  /// Worker threads; 0 picks the hardware concurrency.
  int threads = 0;
};

/// T(s; eps) and dT/ds on a section. Dropped points carry NaN.
struct PeriodScan {
  SystemId id{};
  double eps = 0;
  SectionKind source = SectionKind::XAxisRay;
  std::vector<double> s_grid;
  std::vector<double> x;
  std::vector<double> T;
  std::vector<double> dT;
  std::vector<double> dropped;
  double tol = 0;

  double dropout_fraction() const;
  /// Throws LostOrbitError when more than `threshold` of the grid was lost.
  void require_dropout_below(double threshold) const;
};

PeriodScan period_scan(const IsochroneSpec &spec, const PerturbationSeries &series,
                       double eps, const SectionGrid &grid, const ScanOptions &opt = {});

std::vector<double> default_ladder();
/// Ten times smaller; the Loud pair needs it near the outer edge of the
/// region, where the eps-series of T converges slowly.
std::vector<double> fine_ladder();

/// Scans at eps = 0 and at every ladder value.
std::vector<PeriodScan> ladder_scans(const IsochroneSpec &spec,
                                     const PerturbationSeries &series,
                                     const SectionGrid &grid,
                                     const std::vector<double> &ladder = default_ladder(),
                                     const ScanOptions &opt = {});

struct TaylorPeriod {
  std::vector<double> eps_ladder;
  std::vector<double> s_grid;
  int order = 0;
  /// t[l][i] = T_l(s_i), dt[l][i] = dT_l/ds(s_i), l = 0..order.
  std::vector<std::vector<double>> t, dt;
  /// Fit residual max over s, for T and dT.
  double residual = 0, residual_dt = 0;
  /// Propagated noise level per order for dt (and t).
  std::vector<double> noise, noise_t;
  /// First order whose coefficient rises above its noise, 0 when none.
  int ell_star = 0;
  double condition = 0;
};

/// Least-squares eps-polynomial fit per grid point. Needs at least four
/// nonzero eps in geometric progression.
TaylorPeriod eps_taylor(const std::vector<PeriodScan> &scans, int order = 3);

/// Interior zeros of dT/ds.
ZeroCount critical_periods(const PeriodScan &scan);
ZeroCount critical_periods(const std::vector<double> &s, const std::vector<double> &dT);

/// First-order basis on a section: funcs[j] samples dT_1/ds for the
/// coefficient vector directions[j], ordered so that the prefixes are the
/// Chebyshev prefixes.
struct FirstOrderBasis {
  SystemId id{};
  SectionGrid grid;
  std::vector<double> energy;
  std::vector<RationalVector> directions;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> funcs;
  std::string source;
};

FirstOrderBasis first_order_basis(const IsochroneSpec &spec, const SectionGrid &grid);

/// dT_1/ds of the pair (d, f) = (1, 0) and (0, 1) for a Loud record, from
/// eps-ladder scans.
struct LoudPair {
  SectionGrid grid;
  std::vector<double> i0, i1;
  double residual = 0;
};
LoudPair loud_pair(const IsochroneSpec &spec, const SectionGrid &grid,
                   const std::vector<double> &ladder = fine_ladder(),
                   const ScanOptions &opt = {});

/// Grid Wronskian f g' - g f' by differences of uniform samples. The
/// per-point noise combines the gap between second- and fourth-order slopes
/// with `sample_rel` relative sample error; the verdict needs |W| above 10x
/// noise everywhere with one sign.
struct GridWronskian {
  std::vector<double> values;
  double min_abs = 0;
  double noise = 0;
  double worst_ratio = 0;
  bool nonvanishing = false;
};
GridWronskian grid_wronskian(const std::vector<double> &s, const std::vector<double> &f,
                             const std::vector<double> &g, double sample_rel = 1e-8);

enum class RealizationStatus { Found, None };

struct Realization {
  SystemId id{};
  int k = 0;
  RealizationStatus status = RealizationStatus::None;
  /// First-order coefficients (a, b, c, d) or (d, f).
  RationalVector coeffs;
  /// Weights on the basis functions.
  std::vector<double> weights;
  std::vector<double> targets;
  ZeroCount zeros;
  int attempts = 0;
  /// Why a none verdict is justified, or how the result was verified.
  std::string note;
};

/// Coefficients whose first-order period derivative has exactly k simple
/// interior zeros on the section, or a verified none when the Chebyshev
/// bound of the basis forbids k. Throws SearchBudgetExhaustedError.
Realization realize_k(const IsochroneSpec &spec, int k, const FirstOrderBasis &basis,
                      int budget = 64);
Realization realize_k(const IsochroneSpec &spec, int k, int grid_size = 256);

/// Whether (the sampled) basis satisfies its Chebyshev bound, with a note.
struct BasisCertificate {
  bool certified = false;
  std::string method;
};
BasisCertificate certify_basis(const IsochroneSpec &spec, const FirstOrderBasis &basis);

/// Critical-period counts of direct scans for a first-order perturbation.
struct Confirmation {
  double eps;
  int grid_size;
  int count;
  bool unresolved;
  std::vector<double> locations;
};
std::vector<Confirmation> confirm(const IsochroneSpec &spec, const RationalVector &coeffs,
                                  const std::vector<double> &eps_values,
                                  const std::vector<int> &grid_sizes,
                                  const ScanOptions &opt = {});

} // namespace isochron
