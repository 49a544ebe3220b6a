// Exact and fixed-point arithmetic primitives shared by every module.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ratner {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using u128 = unsigned __int128;
using i128 = __int128;

/// Raised when a certified comparison cannot be decided at the working precision.
struct PrecisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a proved inequality fails; indicates a bug, never expected.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised on malformed input (bad spec, out-of-range parameters).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

Rational parse_rational(const std::string& s);
std::string to_string(const Rational& r);
std::string to_string(const BigInt& v);

BigInt floor_div(const BigInt& a, const BigInt& b);
BigInt floor_of(const Rational& r);
double to_double(const Rational& r);

/// a + b*sqrt(d), d square-free and > 1.
struct QuadNum {
  Rational a;
  Rational b;
  BigInt d;

  QuadNum operator+(const QuadNum& o) const;
  QuadNum operator-(const QuadNum& o) const;
  QuadNum operator+(const Rational& r) const { return {a + r, b, d}; }
  QuadNum operator-(const Rational& r) const { return {a - r, b, d}; }
  QuadNum operator*(const Rational& r) const { return {a * r, b * r, d}; }
  QuadNum operator*(const QuadNum& o) const;
  QuadNum inverse() const;
  bool is_rational() const { return b == 0; }
};

/// Sign of r + s*sqrt(d) for square-free d > 1, decided exactly.
int sign_quad(const Rational& r, const Rational& s, const BigInt& d);
inline int sign(const QuadNum& q) { return sign_quad(q.a, q.b, q.d); }
BigInt floor_of(const QuadNum& q);
/// Compare q with a rational: -1, 0, +1.
int compare(const QuadNum& q, const Rational& r);
long double to_long_double(const QuadNum& q);

BigInt isqrt(const BigInt& n);
/// Largest f with f^2 | n; returns (f, n / f^2).
std::pair<BigInt, BigInt> square_part(const BigInt& n);

// ---- 128-bit fixed point: a circle point x in [0,1) is stored as x * 2^128.

constexpr double kTwo128 = 340282366920938463463374607431768211456.0;
constexpr double kTwo64 = 18446744073709551616.0;

inline double fixed_to_double(u128 v) {
  return static_cast<double>(static_cast<std::uint64_t>(v >> 64)) / kTwo64 +
         static_cast<double>(static_cast<std::uint64_t>(v)) / kTwo128;
}
/// Nearest-below fixed point of t mod 1.
u128 fixed_from_double(double t);
/// floor(2^128 * frac(r)) exactly.
u128 fixed_from_rational(const Rational& r);
/// floor(2^128 * frac(q)) exactly.
u128 fixed_from_quad(const QuadNum& q);
Rational fixed_to_rational(u128 v);
u128 to_u128(const BigInt& v);
BigInt from_u128(u128 v);

/// High 64 bits of the 192-bit product v * k, and the low 128 bits.
/// Used to peel a base-k digit off a fixed-point fraction.
inline std::uint64_t peel_digit(u128& v, std::uint64_t k) {
  const std::uint64_t hi = static_cast<std::uint64_t>(v >> 64);
  const std::uint64_t lo = static_cast<std::uint64_t>(v);
  const u128 plo = static_cast<u128>(lo) * k;
  const u128 phi = static_cast<u128>(hi) * k + (plo >> 64);
  v = (phi << 64) | static_cast<std::uint64_t>(plo);
  return static_cast<std::uint64_t>(phi >> 64);
}

/// floor(j * a / 2^128) for j >= 0; the integer part of j*alpha in fixed point.
inline std::uint64_t mul_high(std::uint64_t j, u128 a) {
  const u128 lo = static_cast<u128>(static_cast<std::uint64_t>(a)) * j;
  const u128 hi = static_cast<u128>(static_cast<std::uint64_t>(a >> 64)) * j + (lo >> 64);
  return static_cast<std::uint64_t>(hi >> 64);
}

}  // namespace ratner
