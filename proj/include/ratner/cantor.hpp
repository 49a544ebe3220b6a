// Quasi-similar Cantor sets and their singular functions.
#pragma once

#include "ratner/arith.hpp"

#include <cstdint>
#include <vector>

namespace ratner {

enum class Orientation { increasing, decreasing };

/// Level i (1-based) keeps m_i of k_i equal subintervals, at the same indices in every kept interval.
/// Sequences shorter than the depth repeat their last entry.
struct CantorSpec {
  std::vector<int> m;
  std::vector<int> k;
  std::vector<std::vector<int>> pattern;  ///< per level; an empty list means evenly spread
  Orientation orientation = Orientation::increasing;
  int depth = 40;

  static CantorSpec middle_thirds(int depth = 40);

  int m_at(int i) const;
  int k_at(int i) const;
  std::vector<int> pattern_at(int i) const;
  /// Upper bound for all m_i.
  int K() const;
  /// Throws InputError when a level breaks 2 <= m <= (k+1)/2, endpoint inclusion or non-adjacency.
  void validate() const;
  /// m_1 ... m_n and k_1 ... k_n.
  BigInt m_product(int n) const;
  BigInt k_product(int n) const;
};

/// m evenly spread indices in {0..k-1} including both ends.
std::vector<int> default_pattern(int m, int k);

struct LevelSet {
  int n = 0;
  BigInt denom;               ///< k_1 ... k_n
  std::vector<BigInt> left;   ///< interval i is [left[i], left[i]+1] / denom
  std::size_t count() const { return left.size(); }
  Rational lo(std::size_t i) const { return Rational(left[i], denom); }
  Rational hi(std::size_t i) const { return Rational(left[i] + 1, denom); }
};

LevelSet build_level(const CantorSpec& spec, int n);
/// Endpoints of the level-n intervals, ascending (2 m_1...m_n values).
std::vector<Rational> boundary(const CantorSpec& spec, int n);

struct FsValue {
  Rational value;  ///< f_n(x), exact
  Rational bound;  ///< |f_s(x) - f_n(x)| <= bound
};

/// Level-n approximant at an exact point of [0,1].
FsValue eval_fs(const CantorSpec& spec, const Rational& x, int n);

/// Classes of boundary(n) under x ~ y iff x - y is a multiple of 1/(k_1...k_i0).
/// The class containing 0 comes first; classes are sorted internally.
std::vector<std::vector<Rational>> cosets(const CantorSpec& spec, int i0, int n);

struct DifferenceClass {
  bool differs = false;
  int level = 0;       ///< n with 1/(k_1..k_{n+1}) < ||x-y|| <= 1/(k_1..k_n)
  Rational bound;      ///< 1/(m_1..m_n), valid only when !wraps
  bool wraps = false;  ///< short arc passes through 0
};

DifferenceClass fs_difference_class(const CantorSpec& spec, const Rational& x, const Rational& y);

/// Integral of f_s over [0,1] through the self-similar recursion, with error bound.
FsValue fs_integral(const CantorSpec& spec, int n);

/// Fast evaluation of the increasing singular function at fixed-point points, in integer units
/// of 1/U with U = m_1 ... m_D and D the deepest level with U <= 2^62.
class FsFixed {
 public:
  struct Enc {
    std::uint64_t lo;
    std::uint64_t hi;  ///< hi == lo when the point lies in a gap, else lo + 1
  };

  explicit FsFixed(const CantorSpec& spec);
  Enc eval(u128 x) const;
  std::uint64_t units() const { return units_; }
  int depth() const { return static_cast<int>(levels_.size()); }
  bool decreasing() const { return decreasing_; }

 private:
  struct Level {
    std::uint64_t k;
    std::uint64_t weight;          // units per selected cell of this level
    std::vector<std::int32_t> rank;   // -1 for gaps
    std::vector<std::uint32_t> below;  // selected indices below t
  };
  std::vector<Level> levels_;
  std::uint64_t units_ = 1;
  bool decreasing_ = false;
};

}  // namespace ratner
