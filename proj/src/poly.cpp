#include "isochron/poly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

namespace isochron {

std::string to_string(const Rational &r) {
  Rational c = r;
  c.canonicalize();
  if (c.get_den() == 1)
    return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

Rational rational_from_double(double v) {
  if (!std::isfinite(v))
    throw ParseError("non-finite value cannot be represented exactly");
  return Rational(v);
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(),
                         [](unsigned char ch) { return std::isspace(ch); }),
          s.end());
  if (s.empty())
    throw ParseError("empty rational");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    mpz_class p, q;
    if (p.set_str(s.substr(0, slash), 10) != 0 ||
        q.set_str(s.substr(slash + 1), 10) != 0 || q == 0)
      throw ParseError("malformed rational '" + s + "'");
    Rational r(p, q);
    r.canonicalize();
    return r;
  }
  // Decimal with optional exponent, converted exactly.
  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-')
    negative = s[pos++] == '-';
  std::string digits;
  long scale = 0;
  bool seen_point = false, seen_digit = false;
  for (; pos < s.size(); ++pos) {
    char ch = s[pos];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits.push_back(ch);
      seen_digit = true;
      if (seen_point)
        --scale;
    } else if (ch == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit)
    throw ParseError("malformed number '" + s + "'");
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E')
      throw ParseError("malformed number '" + s + "'");
    std::string expo = s.substr(pos + 1);
    if (expo.empty())
      throw ParseError("malformed exponent in '" + s + "'");
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(expo, &used);
    } catch (const std::exception &) {
      throw ParseError("malformed exponent in '" + s + "'");
    }
    if (used != expo.size())
      throw ParseError("malformed exponent in '" + s + "'");
    scale += e;
  }
  mpz_class mant(digits, 10);
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(scale)));
  Rational r = scale >= 0 ? Rational(mant * ten_pow) : Rational(mant, ten_pow);
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

// ---------------------------------------------------------------------------
// BivariatePoly

BivariatePoly::BivariatePoly(const Rational &c) {
  if (c != 0)
    terms_.emplace(Monomial{0, 0}, c);
}

BivariatePoly BivariatePoly::monomial(int i, int j, const Rational &c) {
  BivariatePoly p;
  if (c != 0)
    p.terms_.emplace(Monomial{i, j}, c);
  return p;
}

bool BivariatePoly::is_constant() const {
  return terms_.empty() ||
         (terms_.size() == 1 && terms_.begin()->first == Monomial{0, 0});
}

int BivariatePoly::total_degree() const {
  int d = -1;
  for (const auto &[m, c] : terms_)
    d = std::max(d, m.x + m.y);
  return d;
}

int BivariatePoly::degree_x() const {
  int d = 0;
  for (const auto &[m, c] : terms_)
    d = std::max(d, m.x);
  return d;
}

int BivariatePoly::degree_y() const {
  return terms_.empty() ? 0 : terms_.rbegin()->first.y;
}

Rational BivariatePoly::coeff(int i, int j) const {
  auto it = terms_.find(Monomial{i, j});
  return it == terms_.end() ? Rational(0) : it->second;
}

std::pair<Monomial, Rational> BivariatePoly::leading() const {
  return *terms_.rbegin();
}

void BivariatePoly::add_term(const Monomial &m, const Rational &c) {
  if (c == 0)
    return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0)
      terms_.erase(it);
  }
}

BivariatePoly &BivariatePoly::operator+=(const BivariatePoly &o) {
  for (const auto &[m, c] : o.terms_)
    add_term(m, c);
  return *this;
}

BivariatePoly &BivariatePoly::operator-=(const BivariatePoly &o) {
  for (const auto &[m, c] : o.terms_)
    add_term(m, Rational(-c));
  return *this;
}

BivariatePoly operator*(const BivariatePoly &a, const BivariatePoly &b) {
  BivariatePoly out;
  for (const auto &[ma, ca] : a.terms_)
    for (const auto &[mb, cb] : b.terms_)
      out.add_term(Monomial{ma.x + mb.x, ma.y + mb.y}, Rational(ca * cb));
  return out;
}

BivariatePoly &BivariatePoly::operator*=(const BivariatePoly &o) {
  *this = *this * o;
  return *this;
}

BivariatePoly &BivariatePoly::operator*=(const Rational &c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto &[m, v] : terms_)
    v *= c;
  return *this;
}

BivariatePoly BivariatePoly::operator-() const {
  BivariatePoly out = *this;
  for (auto &[m, v] : out.terms_)
    v = -v;
  return out;
}

BivariatePoly BivariatePoly::pow(int n) const {
  BivariatePoly out(1), base = *this;
  while (n > 0) {
    if (n & 1)
      out *= base;
    n >>= 1;
    if (n)
      base *= base;
  }
  return out;
}

BivariatePoly BivariatePoly::dx() const {
  BivariatePoly out;
  for (const auto &[m, c] : terms_)
    if (m.x > 0)
      out.add_term(Monomial{m.x - 1, m.y}, Rational(c * m.x));
  return out;
}

BivariatePoly BivariatePoly::dy() const {
  BivariatePoly out;
  for (const auto &[m, c] : terms_)
    if (m.y > 0)
      out.add_term(Monomial{m.x, m.y - 1}, Rational(c * m.y));
  return out;
}

BivariatePoly BivariatePoly::reflect_x() const {
  BivariatePoly out = *this;
  for (auto &[m, c] : out.terms_)
    if (m.x % 2)
      c = -c;
  return out;
}

BivariatePoly BivariatePoly::reflect_y() const {
  BivariatePoly out = *this;
  for (auto &[m, c] : out.terms_)
    if (m.y % 2)
      c = -c;
  return out;
}

Rational BivariatePoly::eval(const Rational &x, const Rational &y) const {
  Rational acc = 0;
  for (const auto &[m, c] : terms_) {
    Rational t = c;
    for (int k = 0; k < m.x; ++k)
      t *= x;
    for (int k = 0; k < m.y; ++k)
      t *= y;
    acc += t;
  }
  return acc;
}

namespace {

double ipow(double v, int n) {
  double r = 1.0;
  while (n > 0) {
    if (n & 1)
      r *= v;
    v *= v;
    n >>= 1;
  }
  return r;
}

} // namespace

double BivariatePoly::eval(double x, double y) const {
  double sum = 0.0, comp = 0.0;
  for (const auto &[m, c] : terms_) {
    const double t = c.get_d() * ipow(x, m.x) * ipow(y, m.y);
    const double s = sum + t;
    if (std::abs(sum) >= std::abs(t))
      comp += (sum - s) + t;
    else
      comp += (t - s) + sum;
    sum = s;
  }
  return sum + comp;
}

double BivariatePoly::eval_abs(double x, double y) const {
  double sum = 0.0;
  for (const auto &[m, c] : terms_)
    sum += std::abs(c.get_d()) * ipow(std::abs(x), m.x) * ipow(std::abs(y), m.y);
  return sum;
}

std::string BivariatePoly::to_string() const {
  if (terms_.empty())
    return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto &[m, c] = *it;
    Rational mag = abs(c);
    os << (c < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
    const bool unit = mag == 1 && (m.x || m.y);
    if (!unit)
      os << isochron::to_string(mag);
    auto var = [&](const char *name, int e, bool lead) {
      if (e == 0)
        return;
      if (!lead)
        os << "*";
      os << name;
      if (e > 1)
        os << "^" << e;
    };
    var("x", m.x, unit);
    var("y", m.y, unit && m.x == 0);
    first = false;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// gcd over Q[x][y]: univariate Euclid for contents, primitive PRS in y.

namespace {

using Uni = std::vector<Rational>; // coefficients in x, low to high

void trim(Uni &p) {
  while (!p.empty() && p.back() == 0)
    p.pop_back();
}

int deg(const Uni &p) { return static_cast<int>(p.size()) - 1; }

Uni uni_mul(const Uni &a, const Uni &b) {
  if (a.empty() || b.empty())
    return {};
  Uni out(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      out[i + j] += a[i] * b[j];
  trim(out);
  return out;
}

Uni uni_sub(const Uni &a, const Uni &b) {
  Uni out(std::max(a.size(), b.size()), Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i)
    out[i] -= b[i];
  trim(out);
  return out;
}

// a = q b + r
void uni_divmod(const Uni &a, const Uni &b, Uni &q, Uni &r) {
  r = a;
  q.assign(std::max(0, deg(a) - deg(b) + 1), Rational(0));
  while (!r.empty() && deg(r) >= deg(b)) {
    const int shift = deg(r) - deg(b);
    const Rational f = r.back() / b.back();
    q[shift] = f;
    for (std::size_t i = 0; i < b.size(); ++i)
      r[i + shift] -= f * b[i];
    trim(r);
  }
  trim(q);
}

Uni uni_monic(Uni p) {
  if (p.empty())
    return p;
  const Rational lc = p.back();
  for (auto &c : p)
    c /= lc;
  return p;
}

Uni uni_gcd(Uni a, Uni b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Uni q, r;
    uni_divmod(a, b, q, r);
    a = std::move(b);
    b = std::move(r);
  }
  return uni_monic(a);
}

Uni uni_divexact(const Uni &a, const Uni &b) {
  Uni q, r;
  uni_divmod(a, b, q, r);
  return q;
}

using Biv = std::vector<Uni>; // coefficients in y, each a polynomial in x

Biv to_biv(const BivariatePoly &p) {
  Biv out(p.degree_y() + 1);
  for (const auto &[m, c] : p.terms()) {
    Uni &u = out[m.y];
    if (static_cast<int>(u.size()) <= m.x)
      u.resize(m.x + 1, Rational(0));
    u[m.x] = c;
  }
  for (auto &u : out)
    trim(u);
  while (!out.empty() && out.back().empty())
    out.pop_back();
  return out;
}

BivariatePoly from_biv(const Biv &b) {
  BivariatePoly out;
  for (std::size_t j = 0; j < b.size(); ++j)
    for (std::size_t i = 0; i < b[j].size(); ++i)
      out += BivariatePoly::monomial(static_cast<int>(i), static_cast<int>(j),
                                     b[j][i]);
  return out;
}

Uni content(const Biv &b) {
  Uni g;
  for (const auto &u : b) {
    g = uni_gcd(g, u);
    if (g.size() == 1)
      break;
  }
  return g;
}

Biv primitive(const Biv &b, const Uni &cont) {
  Biv out;
  out.reserve(b.size());
  for (const auto &u : b)
    out.push_back(u.empty() ? Uni{} : uni_divexact(u, cont));
  return out;
}

Biv biv_prem(const Biv &a, const Biv &b) {
  const int n = static_cast<int>(b.size()) - 1;
  const Uni &lc = b.back();
  Biv r = a;
  int e = static_cast<int>(a.size()) - n;
  while (!r.empty() && static_cast<int>(r.size()) - 1 >= n) {
    const int d = static_cast<int>(r.size()) - 1;
    const Uni top = r.back();
    Biv next(r.size());
    for (int j = 0; j <= d; ++j)
      next[j] = uni_mul(lc, r[j]);
    for (int j = 0; j <= n; ++j)
      next[j + d - n] = uni_sub(next[j + d - n], uni_mul(top, b[j]));
    while (!next.empty() && next.back().empty())
      next.pop_back();
    r = std::move(next);
    --e;
  }
  for (; e > 0; --e)
    for (auto &u : r)
      u = uni_mul(lc, u);
  return r;
}

BivariatePoly make_monic(const BivariatePoly &p) {
  if (p.is_zero())
    return p;
  return p * Rational(1 / p.leading().second);
}

} // namespace

BivariatePoly divide_exact(const BivariatePoly &a, const BivariatePoly &b) {
  if (b.is_zero())
    throw ZeroDenominatorError("division by the zero polynomial");
  BivariatePoly q, r = a;
  const auto [mb, cb] = b.leading();
  while (!r.is_zero()) {
    const auto [m, c] = r.leading();
    if (m.x < mb.x || m.y < mb.y)
      throw Error("divide_exact: divisor does not divide dividend");
    const BivariatePoly t =
        BivariatePoly::monomial(m.x - mb.x, m.y - mb.y, Rational(c / cb));
    q += t;
    r -= t * b;
  }
  return q;
}

BivariatePoly gcd(const BivariatePoly &a, const BivariatePoly &b) {
  if (a.is_zero())
    return make_monic(b);
  if (b.is_zero())
    return make_monic(a);
  Biv A = to_biv(a), B = to_biv(b);
  const Uni ca = content(A), cb = content(B);
  const Uni cg = uni_gcd(ca, cb);
  A = primitive(A, ca);
  B = primitive(B, cb);
  if (A.size() < B.size())
    std::swap(A, B);
  Biv g;
  while (true) {
    if (B.size() == 1) { // degree zero in y: primitive part is 1
      g = Biv{Uni{Rational(1)}};
      break;
    }
    Biv r = biv_prem(A, B);
    if (r.empty()) {
      g = B;
      break;
    }
    A = std::move(B);
    B = primitive(r, content(r));
  }
  g = primitive(g, content(g));
  Biv scaled;
  for (const auto &u : g)
    scaled.push_back(uni_mul(u, cg));
  return make_monic(from_biv(scaled));
}

// ---------------------------------------------------------------------------
// BivariateRational

BivariateRational::BivariateRational(BivariatePoly num, BivariatePoly den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero())
    throw ZeroDenominatorError("rational function with zero denominator");
  if (num_.is_zero())
    den_ = BivariatePoly(1);
}

int BivariateRational::total_degree() const {
  return std::max(num_.total_degree(), den_.total_degree());
}

BivariateRational BivariateRational::reduced() const {
  if (num_.is_zero())
    return BivariateRational();
  const BivariatePoly g = gcd(num_, den_);
  BivariatePoly n = divide_exact(num_, g), d = divide_exact(den_, g);
  const Rational lc = d.leading().second;
  return BivariateRational(n * Rational(1 / lc), d * Rational(1 / lc));
}

BivariateRational BivariateRational::maybe_reduced() const {
  return total_degree() > kAutoReduceDegree ? reduced() : *this;
}

BivariateRational operator+(const BivariateRational &a,
                            const BivariateRational &b) {
  if (a.den_ == b.den_)
    return BivariateRational(a.num_ + b.num_, a.den_).maybe_reduced();
  return BivariateRational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_)
      .maybe_reduced();
}

BivariateRational operator-(const BivariateRational &a,
                            const BivariateRational &b) {
  return a + (-b);
}

BivariateRational operator*(const BivariateRational &a,
                            const BivariateRational &b) {
  return BivariateRational(a.num_ * b.num_, a.den_ * b.den_).maybe_reduced();
}

BivariateRational operator/(const BivariateRational &a,
                            const BivariateRational &b) {
  if (b.num_.is_zero())
    throw ZeroDenominatorError("division by the zero rational function");
  return BivariateRational(a.num_ * b.den_, a.den_ * b.num_).maybe_reduced();
}

BivariateRational BivariateRational::operator-() const {
  return BivariateRational(-num_, den_);
}

bool operator==(const BivariateRational &a, const BivariateRational &b) {
  return a.num_ * b.den_ == b.num_ * a.den_;
}

BivariateRational BivariateRational::dx() const {
  return BivariateRational(num_.dx() * den_ - num_ * den_.dx(), den_ * den_)
      .maybe_reduced();
}

BivariateRational BivariateRational::dy() const {
  return BivariateRational(num_.dy() * den_ - num_ * den_.dy(), den_ * den_)
      .maybe_reduced();
}

BivariateRational BivariateRational::reflect_x() const {
  return BivariateRational(num_.reflect_x(), den_.reflect_x());
}

BivariateRational BivariateRational::reflect_y() const {
  return BivariateRational(num_.reflect_y(), den_.reflect_y());
}

std::optional<Rational> BivariateRational::eval(const Rational &x,
                                                const Rational &y) const {
  const Rational d = den_.eval(x, y);
  if (d == 0)
    return std::nullopt;
  return Rational(num_.eval(x, y) / d);
}

PointValue BivariateRational::eval(double x, double y) const {
  const double d = den_.eval(x, y);
  const double scale = den_.eval_abs(x, y);
  if (!(std::abs(d) > 1e-13 * scale))
    return {0.0, true};
  return {num_.eval(x, y) / d, false};
}

std::string BivariateRational::to_string() const {
  if (is_polynomial())
    return (num_ * Rational(1 / den_.coeff(0, 0))).to_string();
  return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
}

} // namespace isochron
