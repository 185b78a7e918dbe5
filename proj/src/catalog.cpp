#include "isochron/catalog.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include <json.hpp>

namespace isochron {

namespace {

using P = BivariatePoly;
using R = BivariateRational;
using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

const P X = P::x();
const P Y = P::y();

P mono(int i, int j, const Rational &c = 1) { return P::monomial(i, j, c); }

RationalMatrix mat(std::initializer_list<std::initializer_list<int>> rows) {
  RationalMatrix m;
  for (const auto &r : rows) {
    RationalVector v;
    for (int c : r)
      v.emplace_back(c);
    m.push_back(std::move(v));
  }
  return m;
}

IsochroneSpec make_s1() {
  IsochroneSpec s;
  s.id = SystemId::S1star;
  const P r2 = X * X + Y * Y;
  s.x0 = {R(-Y - 3 * X * X * Y + Y.pow(3)), R(X + X.pow(3) - 3 * X * Y * Y)};
  s.u0 = PlanarField{R(X + X.pow(3) - 3 * X * Y * Y),
                     R(Y + 3 * X * X * Y - Y.pow(3))};
  // The first integral carries a square root; the catalog stores its square.
  const P lower = X * X + (Y - 1).pow(2);
  const P upper = X * X + (Y + 1).pow(2);
  s.first_integral = R(r2 * r2, lower * upper);
  s.integral_squared = true;
  s.x_r = kInf;
  s.h0 = 1.0;
  s.tmpl = Template::Cubic;
  s.kernel = mat({{0, 0, 3, 1}, {1, 0, 3, 0}, {0, 1, -1, 0}});
  s.phi = mat({{-1, -3, 3, 1}, {1, 3, 3, 1}, {1, -1, 1, -1}});
  return s;
}

IsochroneSpec make_s2() {
  IsochroneSpec s;
  s.id = SystemId::S2star;
  const P one_m = P(1) - X * X;
  s.x0 = {R(-Y + X * X * Y), R(X + X * Y * Y)};
  s.u0 = PlanarField{R(X * one_m), R(Y * one_m)};
  s.first_integral = R(X * X + Y * Y, one_m);
  s.ab_split = AbSplit{R(X * X, one_m), R(P(1), one_m)};
  s.x_r = 1.0;
  s.h0 = kInf;
  s.tmpl = Template::Cubic;
  s.kernel = mat({{0, 1, 0, 0}, {0, 0, 1, 0}, {1, 0, 0, -1}});
  s.phi = mat({{0, 1, 0, 0}, {1, 0, 0, -1}, {0, 0, -1, 0}});
  return s;
}

// sign = -1 gives S3star, +1 gives S3barstar.
IsochroneSpec make_s3(int sign) {
  IsochroneSpec s;
  s.id = sign < 0 ? SystemId::S3star : SystemId::S3barstar;
  const P x2 = X * X;
  const P w = P(1) + sign * 3 * x2;
  s.x0 = {R(-Y + sign * (-3) * x2 * Y),
          R(X + sign * 2 * X.pow(3) + sign * (-9) * X * Y * Y)};
  s.u0 = PlanarField{R(X * w * (P(1) + sign * 2 * x2)),
                     R(Y * w * (P(1) + sign * 6 * x2))};
  const P a_num = (X + sign * 2 * X.pow(3)).pow(2);
  const P den = w.pow(3);
  s.first_integral = R(a_num + Y * Y, den);
  s.ab_split = AbSplit{R(a_num, den), R(P(1), den)};
  if (sign < 0) {
    s.x_r = 1.0 / std::sqrt(3.0);
    s.h0 = kInf;
  } else {
    s.x_r = kInf;
    s.h0 = 4.0 / 27.0;
  }
  s.tmpl = Template::Cubic;
  s.kernel = mat({{0, 1, 0, 0}, {2, 0, 3, 0}, {0, 0, 9, 2}});
  s.phi = mat({{-1, -3, 3, 1}, {9, 9, -9, -5}, {6, 3, 0, -2}});
  return s;
}

IsochroneSpec make_loud(SystemId id, Rational d0, Rational f0, double x_r) {
  IsochroneSpec s;
  s.id = id;
  s.x0 = {R(-Y + X * Y), R(X + d0 * (X * X) + f0 * (Y * Y))};
  s.x_r = x_r;
  s.tmpl = Template::Quadratic;
  s.kernel = mat({{1, 0}, {0, 1}});
  s.loud_base = std::array<Rational, 2>{d0, f0};
  return s;
}

std::vector<IsochroneSpec> build_catalog() {
  std::vector<IsochroneSpec> out;
  out.push_back(make_s1());
  out.push_back(make_s2());
  out.push_back(make_s3(-1));
  out.push_back(make_s3(+1));
  // Extent of the annulus along the positive x-axis, located numerically.
  out.push_back(make_loud(SystemId::LoudS1, Rational(-1, 2), Rational(1, 2), 1.0));
  out.push_back(make_loud(SystemId::LoudS2, 0, 1, 0.5));
  out.push_back(make_loud(SystemId::LoudS3, 0, Rational(1, 4), 1.0));
  out.push_back(make_loud(SystemId::LoudS4, Rational(-1, 2), 2,
                          1.0 - 1.0 / std::sqrt(2.0)));
  for (const auto &s : out)
    for (const auto &c : verify_identities(s))
      if (!c.passed)
        throw std::logic_error("catalog certification failed: " + c.system +
                               " " + c.identity + " (" + c.detail + ")");
  return out;
}

const std::vector<IsochroneSpec> &catalog() {
  static const std::vector<IsochroneSpec> entries = build_catalog();
  return entries;
}

void require_cubic(SystemId id, const char *op) {
  if (!is_cubic(id))
    throw TemplateMismatchError(std::string(op) + ": " + std::string(name(id)) +
                                " has a quadratic template");
}

bool is_univariate_in_x(const R &r) {
  return r.num().degree_y() == 0 && r.den().degree_y() == 0;
}

// JSON helpers.

json poly_json(const P &p) {
  json terms = json::array();
  for (const auto &[m, c] : p.terms())
    terms.push_back({m.x, m.y, to_string(c)});
  return terms;
}

P poly_from(const json &j) {
  P out;
  for (const auto &t : j) {
    if (!t.is_array() || t.size() != 3)
      throw ParseError("polynomial term must be [i, j, \"p/q\"]");
    out += P::monomial(t[0].get<int>(), t[1].get<int>(),
                       parse_rational(t[2].get<std::string>()));
  }
  return out;
}

json rat_json(const R &r) { return {{"num", poly_json(r.num())}, {"den", poly_json(r.den())}}; }

R rat_from(const json &j) { return R(poly_from(j.at("num")), poly_from(j.at("den"))); }

json field_json(const PlanarField &f) { return {{"p", rat_json(f.p)}, {"q", rat_json(f.q)}}; }

PlanarField field_from(const json &j) { return {rat_from(j.at("p")), rat_from(j.at("q"))}; }

json matrix_json(const RationalMatrix &m) {
  json out = json::array();
  for (const auto &row : m) {
    json r = json::array();
    for (const auto &v : row)
      r.push_back(to_string(v));
    out.push_back(r);
  }
  return out;
}

RationalMatrix matrix_from(const json &j) {
  RationalMatrix m;
  for (const auto &row : j) {
    RationalVector r;
    for (const auto &v : row)
      r.push_back(parse_rational(v.get<std::string>()));
    m.push_back(std::move(r));
  }
  return m;
}

json real_json(double v) {
  if (std::isinf(v))
    return "inf";
  return v;
}

double real_from(const json &j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf")
      return kInf;
    throw ParseError("expected a number or \"inf\"");
  }
  return j.get<double>();
}

json spec_json(const IsochroneSpec &s) {
  json j;
  j["schema"] = 1;
  j["id"] = std::string(name(s.id));
  j["template"] = s.tmpl == Template::Cubic ? "cubic" : "quadratic";
  j["x0"] = field_json(s.x0);
  if (s.u0)
    j["u0"] = field_json(*s.u0);
  if (s.first_integral) {
    j["first_integral"] = rat_json(*s.first_integral);
    if (s.integral_squared)
      j["first_integral_squared"] = true;
  }
  if (s.ab_split)
    j["ab_split"] = {{"A", rat_json(s.ab_split->a)}, {"B", rat_json(s.ab_split->b)}};
  j["x_r"] = real_json(s.x_r);
  if (s.h0)
    j["h0"] = real_json(*s.h0);
  j["kernel"] = matrix_json(s.kernel);
  if (s.phi)
    j["phi"] = matrix_json(*s.phi);
  if (s.loud_base)
    j["base"] = {to_string((*s.loud_base)[0]), to_string((*s.loud_base)[1])};
  return j;
}

} // namespace

std::string_view name(SystemId id) {
  switch (id) {
  case SystemId::S1star: return "s1star";
  case SystemId::S2star: return "s2star";
  case SystemId::S3star: return "s3star";
  case SystemId::S3barstar: return "s3barstar";
  case SystemId::LoudS1: return "louds1";
  case SystemId::LoudS2: return "louds2";
  case SystemId::LoudS3: return "louds3";
  case SystemId::LoudS4: return "louds4";
  }
  throw UnknownSystemError("unknown system id");
}

SystemId parse_system(std::string_view text) {
  std::string lower(text);
  for (auto &ch : lower)
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  for (SystemId id : kAllSystems)
    if (name(id) == lower)
      return id;
  throw UnknownSystemError("unknown system '" + std::string(text) +
                           "' (expected one of s1star, s2star, s3star, "
                           "s3barstar, louds1..louds4)");
}

bool is_cubic(SystemId id) {
  return id == SystemId::S1star || id == SystemId::S2star ||
         id == SystemId::S3star || id == SystemId::S3barstar;
}

const IsochroneSpec &get_spec(SystemId id) {
  for (const auto &s : catalog())
    if (s.id == id)
      return s;
  throw UnknownSystemError("unknown system id");
}

PlanarField perturbation_field(Template t, std::span<const Rational> c) {
  if (static_cast<int>(c.size()) != arity(t))
    throw TemplateMismatchError("perturbation expects " +
                                std::to_string(arity(t)) + " coefficients, got " +
                                std::to_string(c.size()));
  if (t == Template::Cubic)
    return {R(mono(2, 1, c[0]) + mono(0, 3, c[1])),
            R(mono(3, 0, c[2]) + mono(1, 2, c[3]))};
  return {R(P()), R(mono(2, 0, c[0]) + mono(0, 2, c[1]))};
}

PerturbationSeries PerturbationSeries::first_order(Template t,
                                                   RationalVector coeffs) {
  if (static_cast<int>(coeffs.size()) != arity(t))
    throw TemplateMismatchError("series order has wrong arity");
  return {t, {std::move(coeffs)}};
}

PerturbationSeries PerturbationSeries::first_order(Template t,
                                                   std::span<const double> c) {
  RationalVector v;
  for (double x : c)
    v.push_back(rational_from_double(x));
  return first_order(t, std::move(v));
}

RationalVector PerturbationSeries::at(int k) const {
  if (k >= 1 && k <= order())
    return orders[k - 1];
  return RationalVector(arity(tmpl), Rational(0));
}

RationalVector PerturbationSeries::evaluate(const Rational &eps) const {
  RationalVector out(arity(tmpl), Rational(0));
  Rational power = eps;
  for (const auto &ord : orders) {
    if (static_cast<int>(ord.size()) != arity(tmpl))
      throw TemplateMismatchError("series order has wrong arity");
    for (size_t i = 0; i < ord.size(); ++i)
      out[i] += power * ord[i];
    power *= eps;
  }
  return out;
}

PlanarField perturbed_field(const IsochroneSpec &spec,
                            const PerturbationSeries &series,
                            const Rational &eps) {
  if (series.tmpl != spec.tmpl)
    throw TemplateMismatchError("series template does not match " +
                                std::string(name(spec.id)));
  const RationalVector c = series.evaluate(eps);
  return spec.x0 + perturbation_field(spec.tmpl, c);
}

CoefficientImage phi_map(SystemId id, std::span<const Rational> coeffs) {
  require_cubic(id, "phi_map");
  if (coeffs.size() != 4)
    throw TemplateMismatchError("phi_map expects 4 coefficients");
  const RationalVector v(coeffs.begin(), coeffs.end());
  const RationalVector img = multiply(*get_spec(id).phi, v);
  CoefficientImage out{{img[0], img[1], img[2]}, std::nullopt};
  if (id == SystemId::S1star)
    out.complex_form = complex_coeffs(v[0], v[1], v[2], v[3]);
  return out;
}

std::array<RationalVector, 3> surjectivity_witness(SystemId id) {
  require_cubic(id, "surjectivity_witness");
  const RationalMatrix &phi = *get_spec(id).phi;
  std::array<RationalVector, 3> out;
  for (int k = 0; k < 3; ++k) {
    // Solve phi v = e_k with free variables set to zero.
    RationalMatrix aug = phi;
    for (int r = 0; r < 3; ++r)
      aug[r].push_back(Rational(r == k ? 1 : 0));
    const std::vector<int> piv = rref(aug);
    RationalVector v(4, Rational(0));
    for (size_t r = 0; r < piv.size(); ++r) {
      if (piv[r] == 4)
        throw std::logic_error("phi is not surjective");
      v[piv[r]] = aug[r][4];
    }
    out[k] = std::move(v);
  }
  return out;
}

bool kernel_check(SystemId id, std::span<const Rational> coeffs) {
  const IsochroneSpec &s = get_spec(id);
  if (static_cast<int>(coeffs.size()) != arity(s.tmpl))
    throw TemplateMismatchError("kernel_check: arity mismatch for " +
                                std::string(name(id)));
  const RationalVector v(coeffs.begin(), coeffs.end());
  for (const auto &x : multiply(s.kernel, v))
    if (x != 0)
      return false;
  return true;
}

std::array<Rational, 4> complex_coeffs(const Rational &a, const Rational &b,
                                       const Rational &c, const Rational &d) {
  return {b + c - d - a, 3 * c + d - a - 3 * b, a + 3 * b + 3 * c + d,
          a - b + c - d};
}

std::vector<IdentityCheck> verify_identities(const IsochroneSpec &s) {
  std::vector<IdentityCheck> out;
  const std::string sys(name(s.id));
  auto add = [&](std::string what, bool ok, std::string detail = {}) {
    out.push_back({sys, std::move(what), ok, std::move(detail)});
  };
  add("polynomial_field", s.x0.is_polynomial());
  if (s.u0) {
    const PlanarField br = lie_bracket(s.x0, *s.u0);
    add("commutator", br.is_zero(),
        br.is_zero() ? "" : "[X0,U0] = (" + br.p.reduced().to_string() + ", " +
                                br.q.reduced().to_string() + ")");
    add("transversal", !wedge(s.x0, *s.u0).is_zero());
  }
  if (s.first_integral) {
    const R dh = directional_derivative(s.x0, *s.first_integral);
    add("first_integral", dh.is_zero(),
        dh.is_zero() ? "" : "X0(H) = " + dh.reduced().to_string());
  }
  if (s.ab_split) {
    const auto &[a, b] = *s.ab_split;
    const bool shape = is_univariate_in_x(a) && is_univariate_in_x(b);
    const bool even = a.is_even_in_x() && b.is_even_in_x();
    const bool sum = s.first_integral &&
                     a + b * R(P::y() * P::y()) == *s.first_integral;
    add("ab_split", shape && even && sum,
        !shape ? "A or B depends on y" : !even ? "A or B not even" : !sum ? "A + B y^2 != H" : "");
  }
  if (s.first_integral && s.h0 && std::isfinite(*s.h0)) {
    // sup of H along the x-axis is the ratio of leading coefficients of H(x,0).
    const auto restrict = [](const P &p) {
      P out;
      for (const auto &[m, c] : p.terms())
        if (m.y == 0)
          out += P::monomial(m.x, 0, c);
      return out;
    };
    const P n = restrict(s.first_integral->num());
    const P d = restrict(s.first_integral->den());
    bool ok = !n.is_zero() && !d.is_zero() && n.degree_x() == d.degree_x();
    if (ok) {
      const Rational lim = n.coeff(n.degree_x(), 0) / d.coeff(d.degree_x(), 0);
      const double sup = s.integral_squared ? std::sqrt(lim.get_d()) : lim.get_d();
      ok = std::abs(sup - *s.h0) <= 1e-15 * std::max(1.0, *s.h0);
    }
    add("outer_energy", ok);
  }
  if (s.phi) {
    add("phi_rank", rank(*s.phi) == 3);
    add("phi_kernel", same_kernel(*s.phi, s.kernel));
  }
  if (s.tmpl == Template::Quadratic)
    add("loud_base", s.loud_base.has_value());
  return out;
}

std::string spec_to_json(const IsochroneSpec &spec, int indent) {
  return spec_json(spec).dump(indent);
}

IsochroneSpec spec_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw ParseError(std::string("catalog JSON: ") + e.what());
  }
  try {
    if (j.value("schema", 0) != 1)
      throw ParseError("catalog JSON: unsupported schema");
    IsochroneSpec s;
    s.id = parse_system(j.at("id").get<std::string>());
    const std::string t = j.at("template").get<std::string>();
    if (t == "cubic")
      s.tmpl = Template::Cubic;
    else if (t == "quadratic")
      s.tmpl = Template::Quadratic;
    else
      throw ParseError("catalog JSON: unknown template '" + t + "'");
    s.x0 = field_from(j.at("x0"));
    if (j.contains("u0"))
      s.u0 = field_from(j["u0"]);
    if (j.contains("first_integral"))
      s.first_integral = rat_from(j["first_integral"]);
    s.integral_squared = j.value("first_integral_squared", false);
    if (j.contains("ab_split"))
      s.ab_split = AbSplit{rat_from(j["ab_split"].at("A")),
                           rat_from(j["ab_split"].at("B"))};
    s.x_r = real_from(j.at("x_r"));
    if (j.contains("h0"))
      s.h0 = real_from(j["h0"]);
    s.kernel = matrix_from(j.at("kernel"));
    if (j.contains("phi"))
      s.phi = matrix_from(j["phi"]);
    if (j.contains("base"))
      s.loud_base = std::array<Rational, 2>{
          parse_rational(j["base"].at(0).get<std::string>()),
          parse_rational(j["base"].at(1).get<std::string>())};
    return s;
  } catch (const json::exception &e) {
    throw ParseError(std::string("catalog JSON: ") + e.what());
  }
}

std::string catalog_checksum() {
  std::uint64_t h = 1469598103934665603ULL;
  for (SystemId id : kAllSystems) {
    for (unsigned char ch : spec_json(get_spec(id)).dump()) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

} // namespace isochron
