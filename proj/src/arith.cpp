#include "ratner/arith.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

namespace ratner {

namespace mp = boost::multiprecision;

Rational parse_rational(const std::string& raw) {
  std::string s;
  for (char c : raw) {
    if (c != ' ') s.push_back(c);
  }
  if (s.empty()) throw InputError("empty rational");
  try {
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      BigInt num(s.substr(0, slash));
      BigInt den(s.substr(slash + 1));
      if (den == 0) throw InputError("zero denominator in '" + raw + "'");
      return Rational(num, den);
    }
    const auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      BigInt den = mp::pow(BigInt(10), static_cast<unsigned>(s.size() - dot - 1));
      if (digits == "-" || digits.empty()) digits += "0";
      return Rational(BigInt(digits), den);
    }
    return Rational(BigInt(s));
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("malformed rational '" + raw + "'");
  }
}

std::string to_string(const BigInt& v) { return v.str(); }

std::string to_string(const Rational& r) {
  const BigInt den = mp::denominator(r);
  if (den == 1) return mp::numerator(r).str();
  return mp::numerator(r).str() + "/" + den.str();
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
  return q;
}

BigInt floor_of(const Rational& r) { return floor_div(mp::numerator(r), mp::denominator(r)); }

double to_double(const Rational& r) { return r.convert_to<double>(); }

QuadNum QuadNum::operator+(const QuadNum& o) const {
  if (b != 0 && o.b != 0 && d != o.d) throw InputError("mixed quadratic fields");
  return {a + o.a, b + o.b, b != 0 ? d : o.d};
}

QuadNum QuadNum::operator-(const QuadNum& o) const {
  if (b != 0 && o.b != 0 && d != o.d) throw InputError("mixed quadratic fields");
  return {a - o.a, b - o.b, b != 0 ? d : o.d};
}

QuadNum QuadNum::operator*(const QuadNum& o) const {
  if (b != 0 && o.b != 0 && d != o.d) throw InputError("mixed quadratic fields");
  const BigInt dd = b != 0 ? d : o.d;
  return {a * o.a + b * o.b * Rational(dd), a * o.b + b * o.a, dd};
}

QuadNum QuadNum::inverse() const {
  const Rational norm = a * a - b * b * Rational(d);
  if (norm == 0) throw InputError("division by zero in quadratic field");
  return {a / norm, -b / norm, d};
}

int sign_quad(const Rational& r, const Rational& s, const BigInt& d) {
  const int sr = r.sign();
  const int ss = s.sign();
  if (ss == 0) return sr;
  if (sr == 0) return ss;
  if (sr == ss) return sr;
  // Opposite signs: compare r^2 with s^2 d.
  const Rational lhs = r * r;
  const Rational rhs = s * s * Rational(d);
  const int cmp = lhs.compare(rhs);
  return cmp > 0 ? sr : ss;
}

BigInt isqrt(const BigInt& n) {
  if (n < 0) throw InputError("isqrt of negative");
  return mp::sqrt(n);
}

std::pair<BigInt, BigInt> square_part(const BigInt& n) {
  if (n <= 0) throw InputError("square_part of non-positive");
  BigInt rest = n;
  BigInt f = 1;
  for (BigInt p = 2; p * p <= rest; ++p) {
    while (rest % (p * p) == 0) {
      rest /= p * p;
      f *= p;
    }
  }
  return {f, rest};
}

BigInt floor_of(const QuadNum& q) {
  if (q.b == 0) return floor_of(q.a);
  // q = (P + R sqrt d) / Q with integer P, R and Q > 0.
  const BigInt Q = mp::denominator(q.a) * mp::denominator(q.b);
  const BigInt P = mp::numerator(q.a) * mp::denominator(q.b);
  const BigInt R = mp::numerator(q.b) * mp::denominator(q.a);
  const BigInt t = isqrt(R * R * q.d);  // sqrt(R^2 d) lies strictly in (t, t+1)
  if (R > 0) return floor_div(P + t, Q);
  return floor_div(P - t - 1, Q);
}

int compare(const QuadNum& q, const Rational& r) { return sign_quad(q.a - r, q.b, q.d); }

long double to_long_double(const QuadNum& q) {
  if (q.b == 0) return q.a.convert_to<long double>();
  using Wide = mp::cpp_bin_float_100;
  const Wide root = mp::sqrt(Wide(q.d));
  const Wide v = Wide(mp::numerator(q.a)) / Wide(mp::denominator(q.a)) +
                 Wide(mp::numerator(q.b)) / Wide(mp::denominator(q.b)) * root;
  return v.convert_to<long double>();
}

u128 to_u128(const BigInt& v) {
  if (v < 0) throw InputError("negative value for u128");
  const BigInt hi = v >> 64;
  const BigInt lo = v & BigInt(~std::uint64_t{0});
  if (hi >= (BigInt(1) << 64)) throw InputError("value exceeds 128 bits");
  return (static_cast<u128>(hi.convert_to<std::uint64_t>()) << 64) | lo.convert_to<std::uint64_t>();
}

BigInt from_u128(u128 v) {
  BigInt r = static_cast<std::uint64_t>(v >> 64);
  r <<= 64;
  r += static_cast<std::uint64_t>(v);
  return r;
}

u128 fixed_from_rational(const Rational& r) {
  const Rational frac = r - Rational(floor_of(r));
  return to_u128(floor_of(Rational(frac * Rational(BigInt(1) << 128))));
}

u128 fixed_from_quad(const QuadNum& q) {
  const BigInt fl = floor_of(q);
  const Rational scale(BigInt(1) << 128);
  QuadNum frac{(q.a - Rational(fl)) * scale, q.b * scale, q.d};
  return to_u128(floor_of(frac));
}

Rational fixed_to_rational(u128 v) { return Rational(from_u128(v), BigInt(1) << 128); }

u128 fixed_from_double(double t) {
  double f = t - std::floor(t);
  if (f >= 1.0) f = 0.0;
  // Exact: a double in [0,1) has at most 53 significant bits.
  const double hi = std::floor(std::ldexp(f, 64));
  const double lo = std::ldexp(f, 64) - hi;
  return (static_cast<u128>(static_cast<std::uint64_t>(hi)) << 64) |
         static_cast<std::uint64_t>(std::ldexp(lo, 64));
}

}  // namespace ratner
