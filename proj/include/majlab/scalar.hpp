#pragma once

// Dual-backend scalar: exact rationals (GMP) or IEEE doubles.
//
// Arithmetic between two exact values stays exact; as soon as a float takes
// part the result is a float. Zero and sign tests on floats use a tolerance,
// exact values are compared exactly.

#include <gmpxx.h>

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace majlab {

inline constexpr double kDefaultTol = 1e-9;

enum class Backend { Exact, Float };

const char* backend_name(Backend b);

class Scalar {
 public:
  Scalar() : v_(mpq_class(0)) {}
  Scalar(int v) : v_(mpq_class(v)) {}
  Scalar(long v) : v_(mpq_class(v)) {}
  Scalar(long long v);
  Scalar(const mpq_class& q) : v_(q) { std::get<mpq_class>(v_).canonicalize(); }
  Scalar(mpq_class&& q) : v_(std::move(q)) { std::get<mpq_class>(v_).canonicalize(); }

  static Scalar from_double(double d) { Scalar s; s.v_ = d; return s; }
  static Scalar ratio(long num, long den);
  // "p/q", integers and decimals with optional exponent all parse exactly.
  static Scalar parse(std::string_view text);

  bool is_exact() const { return std::holds_alternative<mpq_class>(v_); }
  Backend backend() const { return is_exact() ? Backend::Exact : Backend::Float; }
  const mpq_class& rational() const;
  double to_double() const;
  Scalar to_float() const { return from_double(to_double()); }
  // Exact rendering for rationals ("p/q" or "p"), shortest round-trip for floats.
  std::string str() const;

  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar& operator*=(const Scalar& o);
  Scalar& operator/=(const Scalar& o);
  Scalar operator-() const;

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }

  // Strict value equality (no tolerance); use is_zero/approx_equal for floats.
  friend bool operator==(const Scalar& a, const Scalar& b);
  friend bool operator<(const Scalar& a, const Scalar& b);
  friend bool operator>(const Scalar& a, const Scalar& b) { return b < a; }
  friend bool operator<=(const Scalar& a, const Scalar& b) { return !(b < a); }
  friend bool operator>=(const Scalar& a, const Scalar& b) { return !(a < b); }

 private:
  std::variant<mpq_class, double> v_;
};

std::ostream& operator<<(std::ostream& os, const Scalar& s);

// -1, 0, +1; floats within tol of zero count as zero.
int sign(const Scalar& s, double tol = kDefaultTol);
inline bool is_zero(const Scalar& s, double tol = kDefaultTol) { return sign(s, tol) == 0; }
inline bool approx_equal(const Scalar& a, const Scalar& b, double tol = kDefaultTol) {
  return is_zero(a - b, tol);
}
Scalar abs(const Scalar& s);
Scalar min(const Scalar& a, const Scalar& b);
Scalar max(const Scalar& a, const Scalar& b);

// Smallest-denominator rational strictly inside (lo, hi); lo < hi required.
mpq_class simplest_between(const mpq_class& lo, const mpq_class& hi);
// Continued-fraction rational within tol of x.
mpq_class rationalize(double x, double tol);

using Point = std::vector<Scalar>;

Backend combine(Backend a, Backend b);
Backend backend_of(const Point& p);
Backend backend_of(const std::vector<Point>& pts);
Point to_float(const Point& p);
Point operator+(const Point& a, const Point& b);
Point operator-(const Point& a, const Point& b);
Point operator*(const Scalar& s, const Point& p);
Point zero_point(std::size_t n);
bool approx_equal(const Point& a, const Point& b, double tol = kDefaultTol);
// Sup norm over coordinates.
Scalar sup_norm(const Point& p);
std::vector<double> to_doubles(const Point& p);
// Lexicographic order with exact comparison; used to canonicalize atom order.
bool lex_less(const Point& a, const Point& b);

mpz_class lcm_of_denominators(const std::vector<Scalar>& values);

}  // namespace majlab
