// Command-line front end: verification suites, scans, bifurcation
// experiments, Chebyshev certificates and special-function tables.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "isochron/abelian.hpp"
#include "isochron/chebyshev.hpp"
#include "isochron/elliptic.hpp"
#include "isochron/errors.hpp"
#include "isochron/periodlab.hpp"
#include "isochron/report.hpp"

using namespace isochron;
using json = nlohmann::json;

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kIdentity = 2,
  kDropout = 3,
  kExhausted = 4,
  kUsage = 64
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<std::string> to_strings(const RationalVector &v) {
  std::vector<std::string> out;
  for (const auto &r : v)
    out.push_back(to_string(r));
  return out;
}

json zero_json(const ZeroCount &z) {
  return {{"count", z.count}, {"locations", z.locations}, {"unresolved", z.unresolved}};
}

// Prints to stdout and, when an output directory is configured, stores the
// same bytes there.
void emit(const RunConfig &c, const std::string &file, const std::string &content) {
  std::cout << content;
  if (auto dir = output_dir(c))
    write_atomic(*dir / file, content);
}

void store(const RunConfig &c, const std::string &file, const std::string &content) {
  if (auto dir = output_dir(c))
    write_atomic(*dir / file, content);
}

std::vector<SystemId> systems_of(const RunConfig &c) {
  if (c.system == "all")
    return {kAllSystems.begin(), kAllSystems.end()};
  return {parse_system(c.system)};
}

SectionGrid grid_for(const RunConfig &c, const IsochroneSpec &spec, int n) {
  if (c.section == "ray")
    return ray_grid(spec, n);
  if (c.section == "auto" || c.section == "commutator")
    return section_grid(spec, n);
  throw UsageError("section must be auto, commutator or ray");
}

// ---- verify

int cmd_verify(const RunConfig &c, bool as_json) {
  std::vector<IsochroneSpec> loaded;
  std::vector<const IsochroneSpec *> specs;
  if (!c.catalog_file.empty()) {
    loaded = load_catalog_file(c.catalog_file);
    for (const auto &s : loaded)
      if (c.system == "all" || s.id == parse_system(c.system))
        specs.push_back(&s);
  } else {
    for (SystemId id : systems_of(c))
      specs.push_back(&get_spec(id));
  }
  if (specs.empty())
    throw UsageError("no matching system in the catalog");
  json rep = report_envelope("verify", c, specs.size() == 1 ? specs[0] : nullptr);
  json checks = json::array();
  std::ostringstream text;
  int failures = 0;
  for (const IsochroneSpec *s : specs) {
    int passed = 0, total = 0;
    for (const auto &chk : verify_identities(*s)) {
      ++total;
      passed += chk.passed;
      failures += !chk.passed;
      checks.push_back({{"system", chk.system},
                        {"identity", chk.identity},
                        {"passed", chk.passed},
                        {"detail", chk.detail}});
      text << chk.system << ' ' << chk.identity << ' ' << (chk.passed ? "PASS" : "FAIL");
      if (!chk.detail.empty())
        text << "  " << chk.detail;
      text << '\n';
    }
    if (specs.size() > 1)
      text << "== " << name(s->id) << ": " << passed << '/' << total << " identities\n";
  }
  rep["checks"] = checks;
  rep["passed"] = failures == 0;
  const std::string body = rep.dump(2) + "\n";
  if (as_json)
    std::cout << body;
  else
    std::cout << text.str() << (failures ? "FAILED" : "all identities pass") << '\n';
  store(c, "verify-" + c.system + ".json", body);
  return failures ? kIdentity : kOk;
}

// ---- scan

int cmd_scan(const RunConfig &c) {
  const IsochroneSpec &spec = get_spec(parse_system(c.system));
  const auto series = PerturbationSeries::first_order(spec.tmpl, config_coeffs(c, spec.tmpl));
  const SectionGrid g = grid_for(c, spec, c.grid);
  ScanOptions so;
  so.tol = c.tol;
  const auto scans = ladder_scans(spec, series, g, c.ladder, so);
  json rep = report_envelope("scan", c, &spec);
  json per = json::array();
  int exit = kOk;
  for (const auto &s : scans) {
    json e = {{"eps", s.eps}, {"dropped", s.dropped}, {"dropout", s.dropout_fraction()}};
    if (s.s_grid.size() >= 256 && s.dropped.empty())
      e["critical_periods"] = zero_json(critical_periods(s));
    per.push_back(e);
    if (s.dropout_fraction() > c.dropout)
      exit = kDropout;
  }
  rep["scans"] = per;
  if (exit == kDropout) {
    rep["error"] = "dropout above threshold";
    store(c, "scan-" + c.system + ".json", rep.dump(2) + "\n");
    std::cerr << "scan: orbit dropout above " << c.dropout << '\n';
    return exit;
  }
  const TaylorPeriod tp = eps_taylor(scans, c.order);
  rep["taylor"] = {{"order", tp.order},     {"ell_star", tp.ell_star},
                   {"residual", tp.residual}, {"residual_dT", tp.residual_dt},
                   {"noise_dT", tp.noise},  {"condition", tp.condition}};

  std::ostringstream csv;
  csv << "s,x";
  for (const auto &s : scans)
    csv << ",T(eps=" << short_num(s.eps) << ")";
  for (int l = 0; l <= tp.order; ++l)
    csv << ",T_" << l;
  for (int l = 1; l <= tp.order; ++l)
    csv << ",dT_" << l;
  csv << '\n';
  for (size_t i = 0; i < g.s.size(); ++i) {
    csv << num(g.s[i]) << ',' << num(g.x[i]);
    for (const auto &s : scans)
      csv << ',' << num(s.T[i]);
    for (int l = 0; l <= tp.order; ++l)
      csv << ',' << num(tp.t[l][i]);
    for (int l = 1; l <= tp.order; ++l)
      csv << ',' << num(tp.dt[l][i]);
    csv << '\n';
  }
  emit(c, "scan-" + c.system + ".csv", csv.str());
  store(c, "scan-" + c.system + ".json", rep.dump(2) + "\n");
  return kOk;
}

// ---- bifurcate

json bifurcation(const RunConfig &c, const IsochroneSpec &spec, int k) {
  const FirstOrderBasis basis = first_order_basis(spec, grid_for(c, spec, c.grid));
  const Realization r = realize_k(spec, k, basis);
  json j = {{"k", k}, {"basis", basis.labels}, {"basis_source", basis.source}};
  j["note"] = r.note;
  if (r.status == RealizationStatus::None) {
    j["status"] = "none";
    return j;
  }
  j["status"] = "found";
  j["coeffs"] = to_strings(r.coeffs);
  j["weights"] = r.weights;
  j["targets"] = r.targets;
  j["first_order_zeros"] = zero_json(r.zeros);
  if (spec.id == SystemId::S1star) {
    const auto cc = complex_coeffs(r.coeffs[0], r.coeffs[1], r.coeffs[2], r.coeffs[3]);
    j["complex_form"] = {{"alpha", to_string(cc[0])},
                         {"beta", to_string(cc[1])},
                         {"gamma", to_string(cc[2])},
                         {"delta", to_string(cc[3])}};
  }
  std::vector<int> sizes = {c.grid};
  if (c.full)
    sizes.push_back(2 * c.grid);
  ScanOptions so;
  so.tol = c.tol;
  json conf = json::array();
  bool ok = true;
  for (const auto &x : confirm(spec, r.coeffs, c.confirm_eps, sizes, so)) {
    conf.push_back({{"eps", x.eps},
                    {"grid", x.grid_size},
                    {"count", x.count},
                    {"unresolved", x.unresolved},
                    {"locations", x.locations}});
    ok = ok && x.count == k && !x.unresolved;
  }
  j["confirmations"] = conf;
  j["confirmed"] = ok;
  return j;
}

int cmd_bifurcate(const RunConfig &c) {
  if (c.k < 0)
    throw UsageError("k must be nonnegative");
  const IsochroneSpec &spec = get_spec(parse_system(c.system));
  json rep = report_envelope("bifurcate", c, &spec);
  rep["result"] = bifurcation(c, spec, c.k);
  emit(c, "bifurcate-" + c.system + "-k" + std::to_string(c.k) + ".json", rep.dump(2) + "\n");
  return kOk;
}

// ---- chebyshev

json chebyshev(const RunConfig &c, const IsochroneSpec &spec) {
  json j;
  if (spec.ab_split) {
    std::vector<BivariateRational> fs;
    for (const auto &f : basis_integrands(spec.id))
      fs.push_back(f.f);
    const auto v = criterion_check(spec.ab_split->a, spec.ab_split->b, fs, 2, spec.x_r);
    j["method"] = "criterion on the even parts";
    j["passed"] = v.passed;
    j["failed"] = v.failed;
    j["n"] = v.n;
    j["m"] = v.m;
    if (v.even_parts) {
      json reports = json::array();
      for (const auto &r : v.even_parts->reports)
        reports.push_back({{"k", r.k},
                           {"min_abs", r.min_abs},
                           {"sign", r.sign},
                           {"verdict", to_string(r.verdict)},
                           {"worst_error_ratio", r.worst_error_ratio}});
      j["wronskians"] = reports;
      j["interval"] = {v.even_parts->lo, v.even_parts->hi};
      j["note"] = ChebyshevCertificate::basis_note;
    }
  } else if (spec.id == SystemId::S1star) {
    double w2 = INFINITY, w3 = INFINITY;
    bool ok = true;
    int sign = 0;
    for (int i = 0; i < 200; ++i) {
      const double h = 0.05 + (5.0 - 0.05) * i / 199;
      const Wronskians w = wronskians_closed(h);
      w2 = std::min(w2, w.w2);
      w3 = std::min(w3, std::abs(w.w3));
      const int s = w.w3 > 0 ? 1 : -1;
      ok = ok && w.w2 > 0 && w.plus_factor > 0 && w.minus_factor < 0 && (i == 0 || s == sign);
      sign = s;
    }
    j["method"] = "closed-form Wronskians on h in [0.05, 5]";
    j["wronskians"] = {{{"k", 2}, {"min", w2}}, {{"k", 3}, {"min_abs", w3}, {"sign", sign}}};
    j["passed"] = ok;
  } else {
    const FirstOrderBasis b = first_order_basis(spec, grid_for(c, spec, c.grid));
    const GridWronskian w = grid_wronskian(b.grid.s, b.funcs[0], b.funcs[1]);
    j["method"] = "grid Wronskian of the first-order pair";
    j["wronskians"] = {{{"k", 2},
                        {"min_abs", w.min_abs},
                        {"worst_noise_ratio", w.worst_ratio},
                        {"nonvanishing", w.nonvanishing}}};
    double dev = 0;
    for (size_t i = 0; i < b.funcs[0].size(); ++i)
      dev = std::max(dev, std::abs(b.funcs[0][i] / b.funcs[1][i] - 1));
    j["max_ratio_deviation"] = dev;
    j["passed"] = w.nonvanishing;
  }
  return j;
}

int cmd_chebyshev(const RunConfig &c) {
  const IsochroneSpec &spec = get_spec(parse_system(c.system));
  json rep = report_envelope("chebyshev", c, &spec);
  rep["result"] = chebyshev(c, spec);
  emit(c, "chebyshev-" + c.system + ".json", rep.dump(2) + "\n");
  return kOk;
}

// ---- elliptic

double elliptic_fn(const std::string &fn, double u) {
  if (fn == "K")
    return ellip(u).k_val;
  if (fn == "E")
    return ellip(u).e_val;
  if (fn == "scriptL")
    return script_l(u);
  if (fn == "g0")
    return g0(u);
  if (fn == "g1")
    return g1(u);
  if (fn == "mu")
    return mu_of_h(u);
  if (fn == "I2bar")
    return ibar_pair(u).i2;
  if (fn == "I0bar")
    return ibar_pair(u).i0;
  if (fn == "Lplus")
    return l_pm(u).plus;
  if (fn == "Lminus")
    return l_pm(u).minus;
  if (fn == "W2")
    return wronskians_closed(u).w2;
  if (fn == "W3")
    return wronskians_closed(u).w3;
  throw UsageError("unknown function '" + fn + "'");
}

int cmd_elliptic(const RunConfig &c, const std::string &fn, const std::string &grid,
                 std::optional<double> at) {
  if (at) {
    const std::string line = num(elliptic_fn(fn, *at)) + "\n";
    emit(c, "elliptic-" + fn + ".txt", line);
    return kOk;
  }
  double a = 0, b = 0;
  int n = 0;
  char tail = 0;
  if (std::sscanf(grid.c_str(), "%lf:%lf:%d%c", &a, &b, &n, &tail) != 3 || n < 2)
    throw UsageError("grid must read lo:hi:n with n >= 2");
  std::ostringstream csv;
  csv << "x," << fn << '\n';
  for (int i = 0; i < n; ++i) {
    const double x = a + (b - a) * i / (n - 1);
    csv << num(x) << ',' << num(elliptic_fn(fn, x)) << '\n';
  }
  emit(c, "elliptic-" + fn + ".csv", csv.str());
  return kOk;
}

// ---- report

int cmd_report(const RunConfig &c) {
  const IsochroneSpec &spec = get_spec(parse_system(c.system));
  json rep = report_envelope("report", c, &spec);
  json ids = json::array();
  bool ok = true;
  for (const auto &chk : verify_identities(spec)) {
    ids.push_back({{"identity", chk.identity}, {"passed", chk.passed}});
    ok = ok && chk.passed;
  }
  rep["identities"] = ids;
  rep["chebyshev"] = chebyshev(c, spec);
  if (spec.id != SystemId::LoudS1) {
    json bif = json::array();
    const int kmax = spec.tmpl == Template::Cubic ? 3 : 2;
    for (int k = 0; k <= kmax; ++k)
      bif.push_back(bifurcation(c, spec, k));
    rep["bifurcations"] = bif;
  }
  if (c.full && spec.tmpl == Template::Cubic) {
    const ValidatedRegion r = validated_region(spec);
    std::vector<double> hs;
    for (int i = 1; i <= 20; ++i) {
      const double x = r.x_lo + (r.x_hi - r.x_lo) * i / 21;
      hs.push_back(spec.id == SystemId::S1star ? x : *energy_at(spec, Point(x, 0.0)));
    }
    const auto coeffs = config_coeffs(c, spec.tmpl);
    std::ostringstream csv;
    csv << "h,x,I0,I1,I2,I_total,R_direct,R_closed\n";
    for (const auto &row : abelian_table(spec.id, coeffs, hs)) {
      csv << num(row.h) << ',' << num(row.x);
      for (double v : row.basis)
        csv << ',' << num(v);
      csv << ',' << num(row.i_total) << ',' << num(row.r_direct) << ',' << num(row.r_closed)
          << '\n';
    }
    store(c, "abelian-" + c.system + ".csv", csv.str());
    rep["abelian_table"] = "abelian-" + c.system + ".csv";
  }
  emit(c, "report-" + c.system + ".json", rep.dump(2) + "\n");
  return ok ? kOk : kIdentity;
}

// ---- catalog

int cmd_catalog_dump(const RunConfig &c) {
  json arr = json::array();
  if (!c.catalog_file.empty()) {
    for (const auto &s : load_catalog_file(c.catalog_file))
      arr.push_back(json::parse(spec_to_json(s)));
  } else {
    for (SystemId id : systems_of(c))
      arr.push_back(json::parse(spec_to_json(get_spec(id))));
  }
  emit(c, "catalog.json", arr.dump(2) + "\n");
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Critical periods of perturbed isochronous centers"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value file; command-line flags take precedence");

  RunConfig c;
  c.system = "all";
  bool system_given = false;
  app.add_option("--system", c.system, "s1star ... louds4, or all")
      ->each([&](const std::string &) { system_given = true; });
  app.add_option("--coeffs", c.coeffs, "first-order coefficients, exact rationals")
      ->delimiter(',');
  app.add_option("--ladder", c.ladder, "nonzero eps values of the scan ladder")->delimiter(',');
  app.add_option("--confirm-eps", c.confirm_eps, "eps values of confirmation scans")
      ->delimiter(',');
  app.add_option("--grid-size", c.grid, "section grid size")->check(CLI::Range(8, 1 << 16));
  app.add_option("--order", c.order, "eps model order")->check(CLI::Range(1, 8));
  app.add_option("--k", c.k, "target number of critical periods");
  app.add_option("--tol", c.tol, "integration tolerance")->check(CLI::PositiveNumber);
  app.add_option("--dropout", c.dropout, "lost-orbit fraction tolerated by scan");
  app.add_option("--section", c.section, "auto, commutator or ray");
  app.add_option("--catalog-file", c.catalog_file, "catalog JSON replacing the built-in one");
  app.add_option("--out-dir", c.out_dir, "write reports here (else $ISOCHRON_OUT_DIR)");
  app.add_flag("--full", c.full, "grid doubling in confirmations, Abelian tables in reports");

  auto *verify = app.add_subcommand("verify", "exact identities");
  bool as_json = false;
  verify->add_flag("--json", as_json, "print the JSON report instead of text");
  auto *scan = app.add_subcommand("scan", "period scans and eps-Taylor coefficients (CSV)");
  auto *bifurcate = app.add_subcommand("bifurcate", "realize k critical periods (JSON)");
  auto *cheb = app.add_subcommand("chebyshev", "Wronskian certificates (JSON)");
  auto *ell = app.add_subcommand("elliptic", "special-function tables (CSV)");
  std::string fn = "K", grid = "0:0.9:10";
  std::optional<double> at;
  ell->add_option("--fn", fn, "K, E, scriptL, g0, g1, mu, I2bar, I0bar, Lplus, Lminus, W2, W3");
  ell->add_option("--grid", grid, "lo:hi:n");
  ell->add_option("--at", at, "single argument");
  auto *report = app.add_subcommand("report", "full per-system report (JSON)");
  auto *catalog = app.add_subcommand("catalog", "catalog records");
  catalog->require_subcommand(1);
  auto *dump = catalog->add_subcommand("dump", "print the records as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsage;
  }
  if (!system_given && !verify->parsed() && !dump->parsed() && !ell->parsed()) {
    std::cerr << "--system is required\n";
    return kUsage;
  }

  try {
    if (verify->parsed())
      return cmd_verify(c, as_json);
    if (c.system == "all" && !dump->parsed() && !ell->parsed()) {
      std::cerr << "this command needs a single --system\n";
      return kUsage;
    }
    if (scan->parsed())
      return cmd_scan(c);
    if (bifurcate->parsed())
      return cmd_bifurcate(c);
    if (cheb->parsed())
      return cmd_chebyshev(c);
    if (ell->parsed())
      return cmd_elliptic(c, fn, grid, at);
    if (report->parsed())
      return cmd_report(c);
    if (dump->parsed())
      return cmd_catalog_dump(c);
  } catch (const SearchBudgetExhaustedError &e) {
    std::cerr << e.what() << '\n';
    return kExhausted;
  } catch (const LostOrbitError &e) {
    std::cerr << e.what() << '\n';
    return kDropout;
  } catch (const UnknownSystemError &e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const UsageError &e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const IllConditionedLadderError &e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument &e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const ParseError &e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
