#include "ratner/pairscan.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace ratner {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = 0x1p-52;
constexpr int kMaxBits = 26;
constexpr std::int64_t kMaxPosition = std::int64_t{1} << 60;
constexpr std::int64_t kAnchorEvery = 256;

std::complex<double> unit(double t) { return std::polar(1.0, 2 * kPi * t); }

}  // namespace

double QuietMap::quiet_fraction() const {
  std::uint64_t c = 0;
  for (auto w : words) c += static_cast<std::uint64_t>(std::popcount(w));
  return static_cast<double>(c) / std::ldexp(1.0, bits);
}

std::shared_ptr<const QuietMap> build_quiet_map(const RoofFunction& roof, int bits) {
  if (bits < 1 || bits > kMaxBits) throw InputError("quiet map resolution out of range");
  QuietCache& cache = roof.quiet_cache();
  std::lock_guard<std::mutex> lock(cache.mu);
  if (auto it = cache.maps.find(bits); it != cache.maps.end()) return it->second;

  const std::uint64_t cells = std::uint64_t{1} << bits;
  const std::size_t nwords = std::max<std::size_t>(1, cells / 64);
  std::vector<std::uint64_t> dirty(nwords, 0);
  auto mark = [&](std::int64_t lo, std::int64_t hi) {
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min<std::int64_t>(hi, static_cast<std::int64_t>(cells) - 1);
    for (std::int64_t c = lo; c <= hi; ++c) dirty[c >> 6] |= std::uint64_t{1} << (c & 63);
  };
  const int shift = 128 - bits;
  for (const auto& j : roof.jumps) {
    const auto c = static_cast<std::int64_t>(j.beta_fp >> shift);
    mark(c - 1, c + 1);
  }
  if (roof.singular && roof.singular->weight != 0) {
    // Cover the Cantor set by level intervals no longer than a cell (or as fine as affordable).
    const CantorSpec& spec = roof.singular->spec;
    std::vector<std::uint64_t> ks;
    std::vector<std::vector<int>> pats;
    u128 den = 1, count = 1;
    while (true) {
      const int i = static_cast<int>(ks.size()) + 1;
      const std::uint64_t k = spec.k_at(i);
      if (den * k > (static_cast<u128>(1) << 50)) break;
      ks.push_back(k);
      pats.push_back(spec.pattern_at(i));
      den *= k;
      count *= spec.m_at(i);
      if (den >= (static_cast<u128>(1) << bits) || count >= (static_cast<u128>(1) << 22)) break;
    }
    const auto level = static_cast<int>(ks.size());
    // Depth-first walk: numerator of the left end at the current denominator.
    std::vector<std::pair<u128, int>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [a, lv] = stack.back();
      stack.pop_back();
      if (lv == level) {
        const u128 l = a << bits, r = (a + 1) << bits;
        auto c0 = static_cast<std::int64_t>(l / den);
        const auto c1 = static_cast<std::int64_t>(r / den);
        if (l % den == 0) --c0;
        mark(c0, c1);
        continue;
      }
      for (int t : pats[lv]) stack.push_back({a * ks[lv] + static_cast<u128>(t), lv + 1});
    }
  }
  auto map = std::make_shared<QuietMap>();
  map->bits = bits;
  map->words.assign(nwords, 0);
  for (std::size_t w = 0; w < nwords; ++w) {
    const std::uint64_t next = w + 1 < nwords ? (dirty[w + 1] & 1) : 1;
    const std::uint64_t shifted = (dirty[w] >> 1) | (next << 63);
    map->words[w] = ~(dirty[w] | shifted);
  }
  if (cells < 64) map->words[0] &= (std::uint64_t{1} << cells) - 1;
  // The last cell's window would cross 0.
  map->words[(cells - 1) >> 6] &= ~(std::uint64_t{1} << ((cells - 1) & 63));
  cache.maps[bits] = map;
  return map;
}

PairScanner::PairScanner(const RoofFunction& roof, const RotationContext& ctx, u128 x, u128 y)
    : roof_(roof), ctx_(ctx) {
  if (!roof.prepared()) throw InputError("roof function used before prepare()");
  if (x == y) throw InputError("pair points must differ");
  const u128 dy = y - x;
  if (dy <= (static_cast<u128>(1) << 127)) {
    lo0_ = x;
    d_ = dy;
    x_hi_ = false;
  } else {
    lo0_ = y;
    d_ = x - y;
    x_hi_ = true;
  }
  d_real_ = fixed_to_double(d_);
  d_rat_ = fixed_to_rational(d_);
  lo_ = lo0_;
  for (const auto& j : roof.jumps) thresholds_.push_back(j.beta_fp + (j.beta_dyadic ? 0 : 1));
  jump_counts_.assign(thresholds_.size(), 0);

  // Largest cell resolution with d + (max orbit error) <= cell width.
  const u128 need = d_ + (static_cast<u128>(1) << 62);
  int bits = 0;
  while (bits < kMaxBits && need <= (static_cast<u128>(1) << (127 - bits))) ++bits;
  if (bits >= 1) map_ = build_quiet_map(roof, bits);

  const auto& co = roof.ac.coeffs;
  for (std::size_t m = 1; m <= co.size(); ++m) {
    const std::complex<double> c(co[m - 1].first, -co[m - 1].second);
    const double ta = fixed_to_double(static_cast<u128>(m) * ctx.alpha_fp);
    const double tl = fixed_to_double(static_cast<u128>(m) * lo0_);
    const double md = static_cast<double>(m) * d_real_;
    // c e(m lo) (e(md) - 1)/(e(m alpha) - 1)
    const double ratio = std::sin(kPi * md) / std::sin(kPi * ta);
    const std::complex<double> a = c * unit(tl) * std::polar(ratio, kPi * (md - ta));
    A_.push_back(a);
    A_err_.push_back(std::abs(a) * 32 * kEps + std::abs(c) * kPi * static_cast<double>(m) * kEps / std::abs(std::sin(kPi * ta)));
  }
}

double PairScanner::ac_value(std::int64_t n, double& radius) const {
  double v = 0;
  radius = 0;
  for (std::size_t m = 1; m <= A_.size(); ++m) {
    const u128 ph = static_cast<u128>(m) * static_cast<u128>(n) * ctx_.alpha_fp;
    const std::complex<double> z = unit(fixed_to_double(ph)) - 1.0;
    v += std::real(A_[m - 1] * z);
    const double phase_err = 2 * kPi * (kEps + static_cast<double>(m) * static_cast<double>(n) * 0x1p-128) + 8 * kEps;
    radius += std::abs(A_[m - 1]) * phase_err + 2 * A_err_[m - 1];
  }
  return v;
}

Enclosure PairScanner::assemble(double ac, double ac_radius) const {
  const double n = static_cast<double>(n_);
  double value = ac, radius = ac_radius, mag = std::abs(ac);
  if (const FsFixed* fs = roof_.fs_fast()) {
    const double scale = roof_.singular->weight / static_cast<double>(fs->units());
    const double mid = static_cast<double>(fs_lo_ + fs_hi_) / 2;
    value += scale * mid;
    radius += std::abs(scale) * static_cast<double>(fs_hi_ - fs_lo_) / 2;
    mag += std::abs(scale * mid);
  }
  if (roof_.S_tilde != 0) {
    const double saw = roof_.S_tilde * (n * d_real_ - static_cast<double>(wraps_));
    value += saw;
    radius += std::abs(roof_.S_tilde) * n * d_real_ * 4 * kEps;
    mag += std::abs(saw) + std::abs(roof_.S_tilde * n * d_real_);
  }
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    const double t = roof_.jumps[i].d * static_cast<double>(jump_counts_[i]);
    value += t;
    mag += std::abs(t);
  }
  radius += 8 * kEps * mag;
  // Accumulated as f(hi) - f(lo); flip to x - y.
  return {x_hi_ ? value : -value, radius};
}

Enclosure PairScanner::value() const {
  double r = 0;
  const double ac = A_.empty() ? 0.0 : ac_value(n_, r);
  return assemble(ac, r);
}

void PairScanner::slow_term(const Sink& sink) {
  ++slow_;
  const std::int64_t j = n_;
  const u128 e = static_cast<u128>(j);
  const u128 lo = lo_;
  std::optional<QuadNum> lo_exact;
  auto exact_lo = [&]() -> const QuadNum& {
    if (!lo_exact) lo_exact = ctx_.orbit_exact(lo0_, j);
    return *lo_exact;
  };
  const Rational& d_rat = d_rat_;
  auto exact_hi = [&]() {
    QuadNum h = exact_lo() + d_rat;
    if (compare(h, Rational(1)) >= 0) h = h - Rational(1);
    return h;
  };
  const bool overflow = lo + e < lo;

  int wrap = 0;
  const u128 wrap_at = static_cast<u128>(0) - d_;
  if (overflow) {
    wrap = compare(exact_lo() + d_rat, Rational(1)) >= 0;
  } else if (lo >= wrap_at) {
    wrap = 1;
  } else if (lo + e < wrap_at) {
    wrap = 0;
  } else {
    wrap = compare(exact_lo() + d_rat, Rational(1)) >= 0;
  }
  const u128 hi = lo + d_;
  // Without overflow the hi window [hi, hi + e] cannot wrap once the wrap bit is decided.
  const bool hi_overflow = overflow || hi + e < hi;

  bool any_jump = false;
  jump_hit_.clear();
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    const u128 t = thresholds_[i];
    const Rational& beta = roof_.jumps[i].beta;
    int il, ih;
    if (overflow || !(lo >= t || lo + e < t)) {
      il = compare(exact_lo(), beta) >= 0;
    } else {
      il = lo >= t;
    }
    if (hi_overflow || !(hi >= t || hi + e < t)) {
      ih = compare(exact_hi(), beta) >= 0;
    } else {
      ih = hi >= t;
    }
    jump_counts_[i] += ih - il;
    if (ih - il + wrap == 1) {
      any_jump = true;
      jump_hit_.push_back(static_cast<int>(i));
    }
  }
  wraps_ += wrap;

  double term_lo = 0, term_hi = 0;
  if (const FsFixed* fs = roof_.fs_fast()) {
    const auto U = static_cast<i128>(fs->units());
    i128 tlo, thi;
    if (overflow || hi_overflow) {
      tlo = -U;
      thi = U;
      widened_ = true;
    } else {
      auto range = [&](u128 p) {
        const auto a = fs->eval(p);
        if (e == 0) return std::pair<i128, i128>{a.lo, a.hi};
        const auto b = fs->eval(p + e);
        return std::pair<i128, i128>{std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
      };
      const auto rl = range(lo), rh = range(hi);
      tlo = rh.first - rl.second;
      thi = rh.second - rl.first;
    }
    fs_lo_ += tlo;
    fs_hi_ += thi;
    const double scale = roof_.singular->weight / static_cast<double>(fs->units());
    const double a = scale * static_cast<double>(tlo), b = scale * static_cast<double>(thi);
    term_lo = std::min(a, b);
    term_hi = std::max(a, b);
    if (!x_hi_) std::tie(term_lo, term_hi) = std::pair{-term_hi, -term_lo};
  }

  ++n_;
  lo_ += ctx_.alpha_fp;
  if (sink && (wrap || any_jump)) {
    if (wrap) sink(PairEvent{j, -1, term_lo, term_hi});
    for (int i : jump_hit_) sink(PairEvent{j, i, term_lo, term_hi});
  }
}

void PairScanner::advance(std::int64_t n, const Sink& sink) {
  if (n < n_) throw InputError("pair scanner cannot move backwards");
  if (n > kMaxPosition) throw InputError("pair scanner position beyond 2^60");
  if (!map_) {
    while (n_ < n) slow_term(sink);
    return;
  }
  const std::uint64_t* words = map_->words.data();
  const int shift = 128 - map_->bits;
  const u128 step = ctx_.alpha_fp;
  while (n_ < n) {
    // Fast path: skip quiet terms; they change nothing but the closed forms.
    std::int64_t j = n_;
    u128 lo = lo_;
    while (j < n) {
      const auto c = static_cast<std::uint64_t>(lo >> shift);
      if (!((words[c >> 6] >> (c & 63)) & 1)) break;
      lo += step;
      ++j;
    }
    n_ = j;
    lo_ = lo;
    if (n_ < n) slow_term(sink);
  }
}

void PairScanner::scan(std::int64_t n_end, const std::function<void(std::int64_t, const Enclosure&)>& visit,
                       const Sink& sink) {
  scan_until(
      n_end,
      [&](std::int64_t n, const Enclosure& D) {
        visit(n, D);
        return false;
      },
      sink);
}

bool PairScanner::scan_until(std::int64_t n_end, const std::function<bool(std::int64_t, const Enclosure&)>& stop,
                             const Sink& sink) {
  if (n_end < n_) throw InputError("pair scanner cannot move backwards");
  const std::size_t H = A_.size();
  std::vector<std::complex<double>> z(H), step(H);
  for (std::size_t m = 1; m <= H; ++m) step[m - 1] = unit(fixed_to_double(static_cast<u128>(m) * ctx_.alpha_fp));
  std::int64_t since_anchor = kAnchorEvery;
  double anchor_radius = 0;
  while (true) {
    double ac = 0, ac_r = 0;
    if (H > 0) {
      if (since_anchor >= kAnchorEvery) {
        for (std::size_t m = 1; m <= H; ++m) {
          z[m - 1] = unit(fixed_to_double(static_cast<u128>(m) * static_cast<u128>(n_) * ctx_.alpha_fp));
        }
        ac_value(n_, anchor_radius);
        since_anchor = 0;
      }
      for (std::size_t m = 0; m < H; ++m) {
        ac += std::real(A_[m] * (z[m] - 1.0));
        ac_r += std::abs(A_[m]) * (static_cast<double>(since_anchor) + 2) * 8 * kEps;
      }
      ac_r += anchor_radius;
    }
    if (stop(n_, assemble(ac, ac_r))) return true;
    if (n_ >= n_end) return false;
    advance(n_ + 1, sink);
    if (H > 0) {
      for (std::size_t m = 0; m < H; ++m) z[m] *= step[m];
      ++since_anchor;
    }
  }
}

}  // namespace ratner
