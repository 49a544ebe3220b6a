#include "ratner/cantor.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace ratner {

namespace mp = boost::multiprecision;

CantorSpec CantorSpec::middle_thirds(int depth) {
  CantorSpec s;
  s.m = {2};
  s.k = {3};
  s.pattern = {{0, 2}};
  s.depth = depth;
  return s;
}

int CantorSpec::m_at(int i) const {
  if (m.empty()) throw InputError("empty m sequence");
  return m[std::min<std::size_t>(i - 1, m.size() - 1)];
}

int CantorSpec::k_at(int i) const {
  if (k.empty()) throw InputError("empty k sequence");
  return k[std::min<std::size_t>(i - 1, k.size() - 1)];
}

std::vector<int> CantorSpec::pattern_at(int i) const {
  if (!pattern.empty()) {
    const auto& p = pattern[std::min<std::size_t>(i - 1, pattern.size() - 1)];
    if (!p.empty()) return p;
  }
  return default_pattern(m_at(i), k_at(i));
}

int CantorSpec::K() const { return *std::max_element(m.begin(), m.end()); }

BigInt CantorSpec::m_product(int n) const {
  BigInt r = 1;
  for (int i = 1; i <= n; ++i) r *= m_at(i);
  return r;
}

BigInt CantorSpec::k_product(int n) const {
  BigInt r = 1;
  for (int i = 1; i <= n; ++i) r *= k_at(i);
  return r;
}

std::vector<int> default_pattern(int m, int k) {
  std::vector<int> out;
  if (m < 2) return {0};
  for (int i = 0; i < m; ++i) {
    // round(i (k-1) / (m-1))
    out.push_back(static_cast<int>((2LL * i * (k - 1) + (m - 1)) / (2LL * (m - 1))));
  }
  return out;
}

void CantorSpec::validate() const {
  if (m.empty() || k.empty()) throw InputError("cantor spec needs m and k");
  if (depth < 1) throw InputError("cantor depth must be >= 1");
  const std::size_t levels = std::max({m.size(), k.size(), pattern.size(), std::size_t{1}});
  for (std::size_t i = 1; i <= levels; ++i) {
    const int mi = m_at(static_cast<int>(i)), ki = k_at(static_cast<int>(i));
    const std::string where = "level " + std::to_string(i) + ": ";
    if (mi < 2 || mi > (ki + 1) / 2) throw InputError(where + "need 2 <= m <= floor((k+1)/2)");
    auto p = pattern_at(static_cast<int>(i));
    if (static_cast<int>(p.size()) != mi) throw InputError(where + "pattern size differs from m");
    if (!std::is_sorted(p.begin(), p.end())) throw InputError(where + "pattern must be ascending");
    if (p.front() != 0 || p.back() != ki - 1) throw InputError(where + "pattern must include the first and last index");
    for (std::size_t j = 1; j < p.size(); ++j) {
      if (p[j] - p[j - 1] < 2) throw InputError(where + "selected indices must not be adjacent");
    }
  }
}

LevelSet build_level(const CantorSpec& spec, int n) {
  if (n < 0 || n > spec.depth) throw InputError("level " + std::to_string(n) + " beyond depth");
  spec.validate();
  LevelSet ls;
  ls.n = 0;
  ls.denom = 1;
  ls.left = {0};
  for (int i = 1; i <= n; ++i) {
    const int ki = spec.k_at(i);
    const auto p = spec.pattern_at(i);
    std::vector<BigInt> next;
    next.reserve(ls.left.size() * p.size());
    for (const auto& l : ls.left) {
      for (int t : p) next.push_back(l * ki + t);
    }
    ls.left = std::move(next);
    ls.denom *= ki;
    ls.n = i;
  }
  return ls;
}

std::vector<Rational> boundary(const CantorSpec& spec, int n) {
  const auto ls = build_level(spec, n);
  std::vector<Rational> out;
  out.reserve(2 * ls.count());
  for (std::size_t i = 0; i < ls.count(); ++i) {
    out.push_back(ls.lo(i));
    out.push_back(ls.hi(i));
  }
  return out;
}

FsValue eval_fs(const CantorSpec& spec, const Rational& x, int n) {
  if (x < 0 || x > 1) throw InputError("eval_fs: x outside [0,1]");
  if (n < 0 || n > spec.depth) throw InputError("eval_fs: level beyond depth");
  spec.validate();
  const Rational bound = Rational(1) / Rational(spec.m_product(n));
  Rational val = 0;
  if (x == 1) {
    val = 1;
  } else {
    Rational scale = 1;
    Rational u = x;
    bool in_gap = false;
    for (int i = 1; i <= n && !in_gap; ++i) {
      const int ki = spec.k_at(i), mi = spec.m_at(i);
      const auto p = spec.pattern_at(i);
      const Rational y = u * ki;
      const BigInt t = floor_of(y);
      const int ti = t.convert_to<int>();
      const auto it = std::lower_bound(p.begin(), p.end(), ti);
      const int below = static_cast<int>(it - p.begin());
      if (it != p.end() && *it == ti) {
        val += scale * Rational(below, mi);
        scale /= mi;
        u = y - Rational(t);
      } else {
        val += scale * Rational(below, mi);
        in_gap = true;
      }
    }
    if (!in_gap) val += u * scale;
  }
  if (spec.orientation == Orientation::decreasing) val = 1 - val;
  return {val, bound};
}

std::vector<std::vector<Rational>> cosets(const CantorSpec& spec, int i0, int n) {
  if (i0 < 1 || n <= i0) throw InputError("cosets need n > i0 >= 1");
  const auto ls = build_level(spec, n);
  // Endpoints are e / denom; x ~ y iff e_x = e_y mod (denom / k_1..k_i0).
  const BigInt step = ls.denom / spec.k_product(i0);
  std::map<BigInt, std::vector<BigInt>> classes;
  for (const auto& l : ls.left) {
    classes[l % step].push_back(l);
    classes[(l + 1) % step].push_back(l + 1);
  }
  std::vector<std::vector<Rational>> out;
  out.reserve(classes.size());
  for (auto& [r, nums] : classes) {
    std::sort(nums.begin(), nums.end());
    std::vector<Rational> pts;
    pts.reserve(nums.size());
    for (const auto& e : nums) pts.emplace_back(e, ls.denom);
    out.push_back(std::move(pts));
  }
  return out;  // residue 0 sorts first
}

namespace {

// Level-n intervals meeting the closed segment [lo, hi], found by descent.
std::vector<std::pair<Rational, Rational>> intervals_meeting(const CantorSpec& spec, int n,
                                                             const Rational& lo, const Rational& hi) {
  std::vector<std::pair<Rational, Rational>> cur{{Rational(0), Rational(1)}};
  for (int i = 1; i <= n; ++i) {
    std::vector<std::pair<Rational, Rational>> next;
    const int ki = spec.k_at(i);
    const auto p = spec.pattern_at(i);
    for (const auto& [a, b] : cur) {
      const Rational w = (b - a) / ki;
      for (int t : p) {
        const Rational c = a + w * t, d = c + w;
        if (c <= hi && lo <= d) next.push_back({c, d});
      }
    }
    cur = std::move(next);
  }
  return cur;
}

bool meets_open(const CantorSpec& spec, int n, const Rational& lo, const Rational& hi) {
  for (const auto& [c, d] : intervals_meeting(spec, n, lo, hi)) {
    if (c < hi && lo < d) return true;
  }
  return false;
}

}  // namespace

DifferenceClass fs_difference_class(const CantorSpec& spec, const Rational& x, const Rational& y) {
  if (x == y) throw InputError("fs_difference_class needs x != y");
  if (x < 0 || x >= 1 || y < 0 || y >= 1) throw InputError("points must lie in [0,1)");
  spec.validate();
  const Rational lo = std::min(x, y), hi = std::max(x, y);
  const Rational gap = hi - lo;
  DifferenceClass out;
  out.wraps = gap > Rational(1, 2);
  const Rational dist = out.wraps ? 1 - gap : gap;
  int n = 0;
  BigInt prod = 1;
  while (n < spec.depth && dist <= Rational(1) / Rational(prod * spec.k_at(n + 1))) {
    prod *= spec.k_at(n + 1);
    ++n;
  }
  out.level = n;
  out.bound = Rational(1) / Rational(spec.m_product(n));
  const int probe = std::min(n + 1, spec.depth);
  if (!out.wraps) {
    out.differs = meets_open(spec, probe, lo, hi);
  } else {
    out.differs = meets_open(spec, probe, hi, Rational(1)) || meets_open(spec, probe, Rational(0), lo);
  }
  return out;
}

FsValue fs_integral(const CantorSpec& spec, int n) {
  spec.validate();
  // I_i = A_i + I_{i+1} / k_i, seeded with I_{n+1} = 1/2 +- 1/2.
  Rational I(1, 2);
  Rational bound(1, 2);
  for (int i = n; i >= 1; --i) {
    const int ki = spec.k_at(i), mi = spec.m_at(i);
    const auto p = spec.pattern_at(i);
    BigInt acc = 0;
    for (int t = 0; t < ki; ++t) {
      const auto it = std::lower_bound(p.begin(), p.end(), t);
      acc += static_cast<int>(it - p.begin());  // rank if selected, count below if a gap
    }
    I = Rational(acc, BigInt(mi) * ki) + I / ki;
    bound /= ki;
  }
  if (spec.orientation == Orientation::decreasing) I = 1 - I;
  return {I, bound};
}

FsFixed::FsFixed(const CantorSpec& spec) : decreasing_(spec.orientation == Orientation::decreasing) {
  spec.validate();
  constexpr std::uint64_t cap = std::uint64_t{1} << 62;
  std::vector<std::uint64_t> ms;
  for (int i = 1; i <= 64; ++i) {
    const std::uint64_t mi = spec.m_at(i);
    if (units_ > cap / mi) break;
    units_ *= mi;
    const std::uint64_t ki = spec.k_at(i);
    const auto p = spec.pattern_at(i);
    Level L;
    L.k = ki;
    L.rank.assign(ki, -1);
    L.below.assign(ki, 0);
    for (std::uint64_t t = 0; t < ki; ++t) {
      const auto it = std::lower_bound(p.begin(), p.end(), static_cast<int>(t));
      L.below[t] = static_cast<std::uint32_t>(it - p.begin());
      if (it != p.end() && *it == static_cast<int>(t)) L.rank[t] = static_cast<std::int32_t>(it - p.begin());
    }
    levels_.push_back(std::move(L));
    ms.push_back(mi);
  }
  std::uint64_t w = 1;
  for (std::size_t i = levels_.size(); i-- > 0;) {
    levels_[i].weight = w;
    w *= ms[i];
  }
}

FsFixed::Enc FsFixed::eval(u128 x) const {
  std::uint64_t val = 0;
  u128 v = x;
  Enc e{0, 0};
  bool done = false;
  for (const auto& L : levels_) {
    const std::uint64_t t = peel_digit(v, L.k);
    const std::int32_t r = L.rank[t];
    if (r < 0) {
      val += L.below[t] * L.weight;
      e = {val, val};
      done = true;
      break;
    }
    val += static_cast<std::uint64_t>(r) * L.weight;
  }
  if (!done) e = {val, val + 1};
  if (decreasing_) return {units_ - e.hi, units_ - e.lo};
  return e;
}

}  // namespace ratner
