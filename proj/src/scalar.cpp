#include "majlab/scalar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "majlab/error.hpp"

namespace majlab {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotASimplex: return "NotASimplex";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::InvalidWitness: return "InvalidWitness";
    case ErrorCode::InternalInconsistency: return "InternalInconsistency";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NotAContraction: return "NotAContraction";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::BadBlockStructure: return "BadBlockStructure";
    case ErrorCode::NotCommuting: return "NotCommuting";
    case ErrorCode::NotDoublyStochastic: return "NotDoublyStochastic";
    case ErrorCode::NoPerfectMatching: return "NoPerfectMatching";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::NormTooLarge: return "NormTooLarge";
    case ErrorCode::NotRational: return "NotRational";
    case ErrorCode::ResolutionInsufficient: return "ResolutionInsufficient";
    case ErrorCode::PairingInvalid: return "PairingInvalid";
    case ErrorCode::NotMajorized: return "NotMajorized";
    case ErrorCode::NotApproxMajorized: return "NotApproxMajorized";
    case ErrorCode::NotInterior: return "NotInterior";
    case ErrorCode::DegenerateHull: return "DegenerateHull";
    case ErrorCode::NotInHull: return "NotInHull";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::NoRationalCombination: return "NoRationalCombination";
    case ErrorCode::UnsupportedIrrationalVertices: return "UnsupportedIrrationalVertices";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

const char* backend_name(Backend b) { return b == Backend::Exact ? "exact" : "float"; }

Scalar::Scalar(long long v) {
  mpz_class z;
  z = std::to_string(v);
  v_ = mpq_class(z);
}

Scalar Scalar::ratio(long num, long den) {
  if (den == 0) fail(ErrorCode::InvalidInput, "zero denominator");
  return Scalar(mpq_class(num, den));
}

namespace {

mpz_class pow10(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

mpq_class parse_decimal(std::string_view t) {
  bool neg = false;
  if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
    neg = t[0] == '-';
    t.remove_prefix(1);
  }
  long exp10 = 0;
  auto epos = t.find_first_of("eE");
  if (epos != std::string_view::npos) {
    auto es = t.substr(epos + 1);
    bool eneg = false;
    if (!es.empty() && (es[0] == '+' || es[0] == '-')) {
      eneg = es[0] == '-';
      es.remove_prefix(1);
    }
    if (!all_digits(es) || es.size() > 6) fail(ErrorCode::InvalidInput, "bad exponent in number");
    long e = 0;
    std::from_chars(es.data(), es.data() + es.size(), e);
    exp10 = eneg ? -e : e;
    t = t.substr(0, epos);
  }
  std::string digits;
  auto dot = t.find('.');
  if (dot == std::string_view::npos) {
    digits = std::string(t);
  } else {
    auto ip = t.substr(0, dot), fp = t.substr(dot + 1);
    digits = std::string(ip) + std::string(fp);
    exp10 -= static_cast<long>(fp.size());
  }
  if (!all_digits(digits)) fail(ErrorCode::InvalidInput, "not a number: '" + std::string(t) + "'");
  mpq_class q{mpz_class(digits)};
  if (exp10 > 0) q *= pow10(exp10);
  if (exp10 < 0) q /= pow10(-exp10);
  q.canonicalize();
  return neg ? mpq_class(-q) : q;
}

}  // namespace

Scalar Scalar::parse(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) fail(ErrorCode::InvalidInput, "empty number");
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Scalar(parse_decimal(text));
  mpq_class num = parse_decimal(text.substr(0, slash));
  mpq_class den = parse_decimal(text.substr(slash + 1));
  if (den == 0) fail(ErrorCode::InvalidInput, "zero denominator in '" + std::string(text) + "'");
  return Scalar(mpq_class(num / den));
}

const mpq_class& Scalar::rational() const {
  if (!is_exact()) fail(ErrorCode::NotRational, "float value has no exact rational form");
  return std::get<mpq_class>(v_);
}

double Scalar::to_double() const {
  if (is_exact()) return std::get<mpq_class>(v_).get_d();
  return std::get<double>(v_);
}

std::string Scalar::str() const {
  if (is_exact()) return std::get<mpq_class>(v_).get_str();
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, std::get<double>(v_));
  return std::string(buf, res.ptr);
}

#define MAJLAB_BINOP(OP)                                              \
  Scalar& Scalar::operator OP##=(const Scalar& o) {                   \
    if (is_exact() && o.is_exact()) {                                 \
      std::get<mpq_class>(v_) OP## = std::get<mpq_class>(o.v_);       \
    } else {                                                          \
      v_ = to_double() OP o.to_double();                              \
    }                                                                 \
    return *this;                                                     \
  }
MAJLAB_BINOP(+)
MAJLAB_BINOP(-)
MAJLAB_BINOP(*)
#undef MAJLAB_BINOP

Scalar& Scalar::operator/=(const Scalar& o) {
  if (is_exact() && o.is_exact()) {
    if (sgn(std::get<mpq_class>(o.v_)) == 0) fail(ErrorCode::InvalidInput, "division by zero");
    std::get<mpq_class>(v_) /= std::get<mpq_class>(o.v_);
  } else {
    v_ = to_double() / o.to_double();
  }
  return *this;
}

Scalar Scalar::operator-() const {
  if (is_exact()) return Scalar(mpq_class(-std::get<mpq_class>(v_)));
  return from_double(-std::get<double>(v_));
}

bool operator==(const Scalar& a, const Scalar& b) {
  if (a.is_exact() && b.is_exact()) return a.rational() == b.rational();
  return a.to_double() == b.to_double();
}

bool operator<(const Scalar& a, const Scalar& b) {
  if (a.is_exact() && b.is_exact()) return a.rational() < b.rational();
  return a.to_double() < b.to_double();
}

std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.str(); }

int sign(const Scalar& s, double tol) {
  if (s.is_exact()) return sgn(s.rational());
  double d = s.to_double();
  if (std::abs(d) <= tol) return 0;
  return d > 0 ? 1 : -1;
}

Scalar abs(const Scalar& s) { return sign(s, 0.0) < 0 ? -s : s; }
Scalar min(const Scalar& a, const Scalar& b) { return b < a ? b : a; }
Scalar max(const Scalar& a, const Scalar& b) { return a < b ? b : a; }

namespace {

mpz_class floor_q(const mpq_class& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

// Simplest rational in the open interval (lo, hi); hi may be +inf.
mpq_class simplest_open(const mpq_class& lo, const mpq_class* hi) {
  mpz_class fl = floor_q(lo);
  mpq_class cand(fl + 1);
  if (!hi || cand < *hi) return cand;
  // lo and hi share the integer part fl (hi <= fl + 1).
  mpq_class a = lo - fl, b = *hi - fl;
  if (a == 0) {
    // (0, b): 1/x ranges over (1/b, inf)
    mpq_class inv_b = 1 / b;
    mpq_class r = simplest_open(inv_b, nullptr);
    return mpq_class(fl) + 1 / r;
  }
  mpq_class inv_lo = 1 / b, inv_hi = 1 / a;
  mpq_class r = simplest_open(inv_lo, &inv_hi);
  return mpq_class(fl) + 1 / r;
}

}  // namespace

mpq_class simplest_between(const mpq_class& lo, const mpq_class& hi) {
  if (!(lo < hi)) fail(ErrorCode::InvalidInput, "simplest_between needs lo < hi");
  if (lo < 0 && hi > 0) return mpq_class(0);
  if (hi <= 0) return mpq_class(-simplest_between(mpq_class(-hi), mpq_class(-lo)));
  mpq_class r = simplest_open(lo, &hi);
  r.canonicalize();
  return r;
}

mpq_class rationalize(double x, double tol) {
  if (!std::isfinite(x)) fail(ErrorCode::InvalidInput, "cannot rationalize non-finite value");
  // Continued fraction convergents h/k.
  mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(r);
    mpz_class az(a);
    mpz_class h2 = az * h1 + h0, k2 = az * k1 + k0;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    mpq_class q(h1, k1);
    q.canonicalize();
    if (std::abs(q.get_d() - x) <= tol) return q;
    double frac = r - a;
    if (frac == 0.0) return q;
    r = 1.0 / frac;
  }
  mpq_class q(h1, k1);
  q.canonicalize();
  return q;
}

Backend combine(Backend a, Backend b) {
  return (a == Backend::Exact && b == Backend::Exact) ? Backend::Exact : Backend::Float;
}

Backend backend_of(const Point& p) {
  for (const auto& s : p)
    if (!s.is_exact()) return Backend::Float;
  return Backend::Exact;
}

Backend backend_of(const std::vector<Point>& pts) {
  for (const auto& p : pts)
    if (backend_of(p) == Backend::Float) return Backend::Float;
  return Backend::Exact;
}

Point to_float(const Point& p) {
  Point r;
  r.reserve(p.size());
  for (const auto& s : p) r.push_back(s.to_float());
  return r;
}

Point operator+(const Point& a, const Point& b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "point sizes differ");
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Point operator-(const Point& a, const Point& b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "point sizes differ");
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Point operator*(const Scalar& s, const Point& p) {
  Point r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[i] = s * p[i];
  return r;
}

Point zero_point(std::size_t n) { return Point(n, Scalar(0)); }

bool approx_equal(const Point& a, const Point& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!approx_equal(a[i], b[i], tol)) return false;
  return true;
}

Scalar sup_norm(const Point& p) {
  Scalar m(0);
  for (const auto& s : p) m = max(m, abs(s));
  return m;
}

std::vector<double> to_doubles(const Point& p) {
  std::vector<double> r;
  r.reserve(p.size());
  for (const auto& s : p) r.push_back(s.to_double());
  return r;
}

bool lex_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

mpz_class lcm_of_denominators(const std::vector<Scalar>& values) {
  mpz_class l = 1;
  for (const auto& v : values) {
    const auto& d = v.rational().get_den();
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
  }
  return l;
}

}  // namespace majlab
