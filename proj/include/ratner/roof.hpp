// Lebesgue-decomposed BV roof functions and their Birkhoff sums.
#pragma once

#include "ratner/cantor.hpp"
#include "ratner/rotation.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

namespace ratner {

/// value +- radius
struct Enclosure {
  double value = 0;
  double radius = 0;
  double lo() const { return value - radius; }
  double hi() const { return value + radius; }
};

/// Zero-mean sum of a_m cos(2 pi m x) + b_m sin(2 pi m x), m = 1, 2, ...
struct TrigPolynomial {
  std::vector<std::pair<double, double>> coeffs;

  bool empty() const;
  double eval(double x) const;
  double amplitude(std::size_t m) const;  ///< |c_m| for m >= 1
  double variation() const;               ///< sum 4 m |c_m|
  double lipschitz() const;               ///< sum 2 pi m |c_m|
  double sup_abs() const;                 ///< sum |c_m|
  TrigPolynomial scaled(double s) const;
  TrigPolynomial plus(const TrigPolynomial& o) const;
};

/// Closed-form Birkhoff sum of a trig polynomial along the orbit of a fixed-point x.
Enclosure trig_birkhoff(const TrigPolynomial& p, const RotationContext& ctx, u128 x, std::int64_t n);

struct Jump {
  Rational beta;
  double d = 0;
  u128 beta_fp = 0;         ///< floor(2^128 beta)
  bool beta_dyadic = false;  ///< beta == beta_fp / 2^128
};

struct QuietMap;

/// Per-roof cache of quiet-cell maps, shared by copies of a prepared roof.
struct QuietCache {
  std::mutex mu;
  std::map<int, std::shared_ptr<const QuietMap>> maps;
};

struct SingularPart {
  CantorSpec spec;
  double weight = 1.0;
};

/// f = f_ac + f_j + weight * f_s + S_tilde * {x} + c, right-continuous, on [0,1).
/// f_j(x) = sum d_i [x >= beta_i] over beta_i in (0,1).
struct RoofFunction {
  TrigPolynomial ac;
  double c = 0;
  std::vector<Jump> jumps;
  std::optional<SingularPart> singular;
  double S_tilde = 0;
  double floor = 0;

  /// Sorts and merges jumps, builds evaluation caches, checks the floor on a grid.
  void prepare();
  bool prepared() const { return prepared_; }
  const FsFixed* fs_fast() const { return fs_fast_.get(); }
  /// Number of distinct jump locations in (0,1).
  int jump_count() const;
  /// f(0) - f(1-): the combined jump at 0.
  double wrap_jump() const;
  /// Jumps placed at 0 in the input: a constant d * [x >= 0] = d, excluded from the jump count.
  double merged_zero_jumps = 0;
  /// c plus the merged jumps at 0.
  double offset() const { return c + merged_zero_jumps; }
  /// Certified lower bound of f over the circle.
  double certified_min() const;
  const Enclosure& cached_integral() const { return integral_; }
  QuietCache& quiet_cache() const { return *quiet_cache_; }

  static RoofFunction constant(double c);
  static Jump make_jump(const Rational& beta, double d);

 private:
  std::shared_ptr<const FsFixed> fs_fast_;
  Enclosure integral_;
  std::shared_ptr<QuietCache> quiet_cache_;
  bool prepared_ = false;
};

struct VariationReport {
  double ac = 0;
  double jumps = 0;
  double singular = 0;
  double sawtooth_rise = 0;
  double wrap_jump = 0;
  double total = 0;
};

VariationReport variation(const RoofFunction& roof);

/// Value at a fixed-point point, singular part at the evaluator depth.
Enclosure eval(const RoofFunction& roof, u128 x);
inline Enclosure eval(const RoofFunction& roof, double x) { return eval(roof, fixed_from_double(x)); }

/// f_ac, f_s (weighted) and f_pl = f_j + S_tilde {x} + c separately.
struct ComponentValues {
  Enclosure ac;
  Enclosure singular;
  Enclosure pl;
};

/// Component ranges over the fixed-point window [x, x + width].
ComponentValues eval_components(const RoofFunction& roof, u128 x, u128 width);

/// Range of f over the fixed-point window [x, x + width] (no wrap past 1 when width > 0).
Enclosure eval_window(const RoofFunction& roof, u128 x, u128 width);

/// Integral of f with its certificate.
Enclosure integral(const RoofFunction& roof);

struct BirkhoffSum {
  u128 x = 0;
  std::int64_t n = 0;
  double value = 0;
  double radius = 0;
};

constexpr std::int64_t kDefaultBirkhoffBudget = 100000000;

/// f^(n)(x) for signed n; negative n through f^(-j)(x) = -f^(j)(T^-j x).
BirkhoffSum birkhoff(const RoofFunction& roof, const RotationContext& ctx, u128 x, std::int64_t n,
                     std::int64_t budget = kDefaultBirkhoffBudget);

/// Exact f^(n)(x) in Q(sqrt d) when f has no ac part and every singular value resolves in a gap.
std::optional<QuadNum> birkhoff_exact(const RoofFunction& roof, const RotationContext& ctx, u128 x,
                                      std::int64_t n);

struct DkResidual {
  double residual = 0;
  double radius = 0;
  double bound = 0;  ///< Var f
  bool pass = false;  ///< residual + radius <= bound
};

DkResidual dk_residual(const RoofFunction& roof, const RotationContext& ctx, u128 x, int n);

struct ClosePairReport {
  std::int64_t pairs = 0;
  std::int64_t checks = 0;
  double bound = 0;          ///< 2 D Var f
  double max_abs = 0;        ///< observed max |f^(k)(x) - f^(k)(y)|
  double max_internal = 0;   ///< observed max over k <= q_s
  std::int64_t violations = 0;
  std::int64_t internal_violations = 0;  ///< k <= q_s exceeding 2 Var f
  std::int64_t undecided = 0;
  std::vector<std::string> certificates;  ///< violating (x, y, k) descriptions
};

/// Exhaustive k < D q_s scan for random pairs with ||x - y|| < 1/q_s.
/// shift_max > 0 also tests the shifted form at T^N x, T^N y with N < shift_max.
ClosePairReport close_pair_bound_check(const RoofFunction& roof, const RotationContext& ctx, int s, int D,
                                       int trials, std::uint64_t seed, std::int64_t shift_max = 0);

}  // namespace ratner
