// Irrational rotations: continued fractions, fixed-point orbits, three-distance partitions.
#pragma once

#include "ratner/arith.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ratner {

/// An irrational alpha in (0,1), always held exactly as a + b*sqrt(d).
struct Irrational {
  QuadNum value;
  std::vector<std::int64_t> digits;  ///< cfrac input digits a_1, a_2, ... (empty for quadratic input)
  std::size_t period_start = 0;
  bool from_cfrac = false;

  static Irrational quadratic(const Rational& a, const Rational& b, const BigInt& d);
  /// alpha = [0; digits[0], digits[1], ...] with digits[period_start..] repeating.
  static Irrational cfrac(std::vector<std::int64_t> digits, std::size_t period_start);
  static Irrational golden();  ///< (sqrt5 - 1)/2
  static Irrational silver();  ///< sqrt2 - 1
};

struct ThreeDistanceConstants {
  double C1 = 0;  ///< strict upper constant, rounded up
  double C2 = 0;  ///< lower constant, rounded down
  int k_max = 0;
  double analytic_floor = 0;  ///< 1/(2C)
};

struct RotationContext {
  Irrational alpha;
  int depth = 0;
  std::vector<std::int64_t> a;  ///< a[n], n = 1..depth; a[0] = 0
  std::vector<BigInt> p;        ///< p[n], n = 0..depth
  std::vector<BigInt> q;        ///< q[n], n = 0..depth
  std::int64_t C = 0;           ///< sup a_n + 1 over the computed depth
  std::int64_t true_sup = 0;    ///< sup a_n over the full (eventually periodic) expansion
  bool bounded_type = false;    ///< sup over depth equals the true sup
  u128 alpha_fp = 0;            ///< floor(2^128 alpha)
  double alpha_double = 0;
  std::optional<ThreeDistanceConstants> constants;

  /// q_n as a machine integer; throws past depth or past 2^63.
  std::uint64_t q_at(int n) const;
  double C1() const;
  double C2() const;

  /// Fixed-point T^j x. The true point lies within j ulps: above for j > 0, below for j < 0.
  u128 rotate(u128 x, std::int64_t j) const {
    return x + static_cast<u128>(static_cast<i128>(j)) * alpha_fp;
  }
  /// Unique s with 1/q_{s+1} <= d < 1/q_s for a fixed-point distance d in (0, 1/2].
  int convergent_index(u128 d) const;
  /// Exact value of T^j x for a dyadic x.
  QuadNum orbit_exact(u128 x, std::int64_t j) const;
};

RotationContext expand_cfrac(const Irrational& alpha, int depth);

/// ||t||, distance to the nearest integer.
double circle_norm(double t);
/// ||v|| for a fixed-point value, in ulps.
inline u128 circle_norm_fixed(u128 v) {
  const u128 neg = static_cast<u128>(0) - v;
  return v < neg ? v : neg;
}

/// Length c0 + c1*alpha with integer coefficients.
struct ExactLength {
  std::int64_t c0 = 0;
  std::int64_t c1 = 0;
  bool operator==(const ExactLength&) const = default;
  auto operator<=>(const ExactLength&) const = default;
};

struct PartitionInterval {
  std::int64_t left_index = 0;   ///< left endpoint is {-left_index * alpha}
  std::int64_t right_index = 0;  ///< right endpoint is {-right_index * alpha} (0 means 1 for the last one)
  ExactLength length;
  double length_value = 0;
};

/// Partition of the circle by {0, -alpha, ..., -(k-1)alpha}, in circle order starting at 0.
std::vector<PartitionInterval> three_distance_partition(const RotationContext& ctx, std::int64_t k);

/// Exact comparison of two lengths.
int compare_lengths(const RotationContext& ctx, const ExactLength& u, const ExactLength& v);
QuadNum to_quad(const RotationContext& ctx, const ExactLength& l);

/// Incremental three-distance scan: adds -k*alpha one point at a time.
class ThreeDistanceScanner {
 public:
  explicit ThreeDistanceScanner(const RotationContext& ctx);
  void add_next();  ///< goes from k to k+1 points
  std::int64_t k() const { return k_; }
  std::size_t distinct_lengths() const { return counts_.size(); }
  ExactLength min_gap() const;
  ExactLength max_gap() const;
  const std::vector<std::pair<ExactLength, std::int64_t>>& length_counts() const { return counts_; }

 private:
  const RotationContext& ctx_;
  std::int64_t k_ = 0;
  std::vector<std::pair<u128, std::int64_t>> points_;  // sorted by fixed value
  std::vector<std::pair<ExactLength, std::int64_t>> counts_;
  void bump(const ExactLength& l, std::int64_t delta);
};

RotationContext estimate_c1_c2(const RotationContext& ctx, int k_max);
Rational min_gap_lower_bound(const RotationContext& ctx, std::uint64_t q, std::uint64_t m);
double return_time_bound(const RotationContext& ctx, std::uint64_t q, double interval_length);

/// Round a quadratic value to a double that is <= (or >=) it.
double round_down(const QuadNum& v);
double round_up(const QuadNum& v);

}  // namespace ratner
