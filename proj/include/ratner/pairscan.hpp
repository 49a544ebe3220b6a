// Fast incremental Birkhoff-sum differences D(n) = f^(n)(x) - f^(n)(y) for close pairs.
//
// Terms whose orbit window sits inside a quiet cell (f_s constant, no jump, no wrap)
// contribute only through closed forms, so the main loop is one bitmap lookup per step.
#pragma once

#include "ratner/roof.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace ratner {

/// Cells of width 2^-bits where a window of two cells meets no discontinuity and no
/// point of the Cantor set.
struct QuietMap {
  int bits = 0;
  std::vector<std::uint64_t> words;
  bool quiet(std::uint64_t cell) const { return (words[cell >> 6] >> (cell & 63)) & 1; }
  double quiet_fraction() const;
};

std::shared_ptr<const QuietMap> build_quiet_map(const RoofFunction& roof, int bits);

struct PairEvent {
  std::int64_t j = 0;  ///< term index
  int kind = -1;       ///< -1: 0 lies in the arc (a return); i >= 0: jump i lies in the arc
  /// w (F(T^j x) - F(T^j y)) for this term, x-y orientation.
  double fs_term_lo = 0;
  double fs_term_hi = 0;
};

class PairScanner {
 public:
  using Sink = std::function<void(const PairEvent&)>;

  PairScanner(const RoofFunction& roof, const RotationContext& ctx, u128 x, u128 y);

  /// Number of accumulated terms n; value() is D(n).
  std::int64_t position() const { return n_; }
  /// Accumulates terms up to n (n >= position()).
  void advance(std::int64_t n, const Sink& sink = {});
  /// D(position()).
  Enclosure value() const;
  /// Visits (n, D(n)) for n = position() .. n_end, leaving position() = n_end.
  void scan(std::int64_t n_end, const std::function<void(std::int64_t, const Enclosure&)>& visit,
            const Sink& sink = {});
  /// Like scan, but stops at the first n where stop returns true (position() = n) and reports whether it did.
  bool scan_until(std::int64_t n_end, const std::function<bool(std::int64_t, const Enclosure&)>& stop,
                  const Sink& sink = {});

  double distance() const { return d_real_; }
  u128 distance_fixed() const { return d_; }
  bool x_is_hi() const { return x_hi_; }
  std::int64_t slow_terms() const { return slow_; }
  int cell_bits() const { return map_ ? map_->bits : 0; }

 private:
  const RoofFunction& roof_;
  const RotationContext& ctx_;
  u128 lo0_ = 0;  // exact start of the lower end
  u128 d_ = 0;
  double d_real_ = 0;
  Rational d_rat_;
  std::vector<int> jump_hit_;
  bool x_hi_ = false;
  std::shared_ptr<const QuietMap> map_;
  std::vector<u128> thresholds_;

  std::int64_t n_ = 0;
  u128 lo_ = 0;  // computed lower end of term n_
  i128 fs_lo_ = 0, fs_hi_ = 0;
  std::int64_t wraps_ = 0;
  std::vector<std::int64_t> jump_counts_;
  std::int64_t slow_ = 0;
  bool widened_ = false;  // a term needed a full-range enclosure

  // Trig part: D_ac(n) = Re sum_m A_m (z_m^n - 1).
  std::vector<std::complex<double>> A_;
  std::vector<double> A_err_;

  void slow_term(const Sink& sink);
  double ac_value(std::int64_t n, double& radius) const;
  Enclosure assemble(double ac, double ac_radius) const;
};

}  // namespace ratner
