#include "ratner/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ratner {

namespace mp = boost::multiprecision;

Irrational Irrational::quadratic(const Rational& a, const Rational& b, const BigInt& d) {
  if (d <= 1) throw InputError("quadratic irrational needs d > 1");
  const auto [f, core] = square_part(d);
  if (core == 1) throw InputError("d = " + d.str() + " is a perfect square; alpha would be rational");
  if (b == 0) throw InputError("b = 0 gives a rational alpha");
  Irrational out;
  out.value = QuadNum{a, b * Rational(f), core};
  if (sign(out.value) <= 0 || compare(out.value, Rational(1)) >= 0) {
    throw InputError("alpha must lie in (0,1)");
  }
  return out;
}

Irrational Irrational::cfrac(std::vector<std::int64_t> digits, std::size_t period_start) {
  if (digits.empty() || period_start >= digits.size()) {
    throw InputError("cfrac needs a non-empty period");
  }
  for (auto v : digits) {
    if (v < 1) throw InputError("cfrac digits must be positive");
  }
  // Purely periodic tail gamma = [P0; P1, ..., gamma] is a fixed point of the period matrix.
  BigInt A = 1, B = 0, Cm = 0, D = 1;
  for (std::size_t i = period_start; i < digits.size(); ++i) {
    const BigInt a(digits[i]);
    const BigInt nA = A * a + B, nC = Cm * a + D;
    B = A;
    D = Cm;
    A = nA;
    Cm = nC;
  }
  // Cm g^2 + (D - A) g - B = 0, positive root.
  const BigInt disc = (A - D) * (A - D) + 4 * B * Cm;
  const auto [f, core] = square_part(disc);
  if (core == 1) throw InputError("cfrac period gives a rational value");
  QuadNum gamma{Rational(A - D, 2 * Cm), Rational(f, 2 * Cm), core};
  // alpha = [0; pre..., gamma] via the pre-period matrix.
  BigInt pA = 0, pB = 1, pC = 1, pD = 0;
  for (std::size_t i = 0; i < period_start; ++i) {
    const BigInt a(digits[i]);
    const BigInt nA = pA * a + pB, nC = pC * a + pD;
    pB = pA;
    pD = pC;
    pA = nA;
    pC = nC;
  }
  const QuadNum num = gamma * Rational(pA) + Rational(pB);
  const QuadNum den = gamma * Rational(pC) + Rational(pD);
  Irrational out;
  out.value = num * den.inverse();
  out.digits = std::move(digits);
  out.period_start = period_start;
  out.from_cfrac = true;
  return out;
}

Irrational Irrational::golden() { return quadratic(Rational(-1, 2), Rational(1, 2), 5); }
Irrational Irrational::silver() { return quadratic(Rational(-1), Rational(1), 2); }

std::uint64_t RotationContext::q_at(int n) const {
  if (n < 0 || n > depth) throw InputError("convergent index " + std::to_string(n) + " beyond depth");
  if (q[n] >= (BigInt(1) << 63)) throw InputError("q_n exceeds 63 bits");
  return q[n].convert_to<std::uint64_t>();
}

double RotationContext::C1() const {
  if (!constants) throw InputError("C1/C2 not estimated; run estimate_c1_c2 first");
  return constants->C1;
}

double RotationContext::C2() const {
  if (!constants) throw InputError("C1/C2 not estimated; run estimate_c1_c2 first");
  return constants->C2;
}

int RotationContext::convergent_index(u128 d) const {
  if (d == 0) throw InputError("zero distance");
  const BigInt dd = from_u128(d);
  const BigInt one = BigInt(1) << 128;
  for (int s = 0; s < depth; ++s) {
    if (q[s] * dd < one && q[s + 1] * dd >= one) return s;
  }
  throw InputError("distance below 1/q_depth; increase the rotation depth");
}

QuadNum RotationContext::orbit_exact(u128 x, std::int64_t j) const {
  QuadNum v = alpha.value * Rational(j) + fixed_to_rational(x);
  return v - Rational(floor_of(v));
}

RotationContext expand_cfrac(const Irrational& alpha, int depth) {
  if (depth < 1) throw InputError("depth must be >= 1");
  RotationContext ctx;
  ctx.alpha = alpha;
  ctx.depth = depth;
  ctx.a.assign(depth + 1, 0);
  ctx.p.assign(depth + 1, 0);
  ctx.q.assign(depth + 1, 0);

  std::map<std::pair<Rational, Rational>, int> seen;
  std::vector<std::int64_t> all_digits;
  QuadNum x = alpha.value;
  const int cap = 4 * depth + 4096;
  int period_found_at = -1;
  for (int n = 1; n <= cap; ++n) {
    QuadNum xi = x.inverse();  // complete quotient
    auto key = std::make_pair(xi.a, xi.b);
    if (period_found_at < 0) {
      if (seen.count(key)) period_found_at = n;
      else seen.emplace(key, n);
    }
    const BigInt an = floor_of(xi);
    if (an >= (BigInt(1) << 62)) throw InputError("partial quotient too large");
    all_digits.push_back(an.convert_to<std::int64_t>());
    x = xi - Rational(an);
    if (n >= depth && period_found_at >= 0) break;
  }
  if (period_found_at < 0) throw InputError("no period found; not a quadratic irrational");

  if (alpha.from_cfrac) {
    for (int n = 0; n < depth; ++n) {
      const std::size_t pl = alpha.digits.size() - alpha.period_start;
      const std::size_t idx = static_cast<std::size_t>(n) < alpha.digits.size()
                                  ? n
                                  : alpha.period_start + (n - alpha.period_start) % pl;
      if (alpha.digits[idx] != all_digits[n]) {
        throw InvariantError("cfrac digits disagree with the exact expansion");
      }
    }
  }

  BigInt pm1 = 1, qm1 = 0;  // p_{-1}, q_{-1}
  ctx.p[0] = 0;
  ctx.q[0] = 1;
  std::int64_t sup_depth = 0;
  for (int n = 1; n <= depth; ++n) {
    ctx.a[n] = all_digits[n - 1];
    sup_depth = std::max(sup_depth, ctx.a[n]);
    const BigInt pn = ctx.a[n] * ctx.p[n - 1] + (n == 1 ? pm1 : ctx.p[n - 2]);
    const BigInt qn = ctx.a[n] * ctx.q[n - 1] + (n == 1 ? qm1 : ctx.q[n - 2]);
    ctx.p[n] = pn;
    ctx.q[n] = qn;
  }
  ctx.true_sup = *std::max_element(all_digits.begin(), all_digits.end());
  ctx.C = sup_depth + 1;
  ctx.bounded_type = sup_depth == ctx.true_sup;
  ctx.alpha_fp = fixed_from_quad(alpha.value);
  ctx.alpha_double = static_cast<double>(to_long_double(alpha.value));
  return ctx;
}

double circle_norm(double t) {
  const double f = t - std::floor(t);
  return std::min(f, 1.0 - f);
}

QuadNum to_quad(const RotationContext& ctx, const ExactLength& l) {
  return ctx.alpha.value * Rational(l.c1) + Rational(l.c0);
}

int compare_lengths(const RotationContext& ctx, const ExactLength& u, const ExactLength& v) {
  return sign(to_quad(ctx, ExactLength{u.c0 - v.c0, u.c1 - v.c1}));
}

double round_down(const QuadNum& v) {
  double x = static_cast<double>(to_long_double(v));
  constexpr double inf = std::numeric_limits<double>::infinity();
  while (compare(v, Rational(x)) < 0) x = std::nextafter(x, -inf);
  while (compare(v, Rational(std::nextafter(x, inf))) >= 0) x = std::nextafter(x, inf);
  return x;
}

double round_up(const QuadNum& v) {
  double x = static_cast<double>(to_long_double(v));
  constexpr double inf = std::numeric_limits<double>::infinity();
  while (compare(v, Rational(x)) > 0) x = std::nextafter(x, inf);
  while (compare(v, Rational(std::nextafter(x, -inf))) <= 0) x = std::nextafter(x, -inf);
  return x;
}

namespace {

// ceil(j alpha) for j >= 1, and the fixed-point value of {-j alpha}.
std::pair<std::int64_t, u128> point_data(const RotationContext& ctx, std::int64_t j) {
  if (j == 0) return {0, 0};
  const u128 prod = static_cast<u128>(j) * ctx.alpha_fp;  // low 128 bits
  const std::uint64_t hi = mul_high(static_cast<std::uint64_t>(j), ctx.alpha_fp);
  std::int64_t fl;
  if (prod + static_cast<u128>(j) > prod) {
    fl = static_cast<std::int64_t>(hi);
  } else {
    fl = floor_of(ctx.alpha.value * Rational(j)).convert_to<std::int64_t>();
  }
  return {fl + 1, static_cast<u128>(0) - prod};
}

ExactLength gap_between(std::int64_t ia, std::int64_t na, std::int64_t ib, std::int64_t nb) {
  // {-ib a} - {-ia a} = (nb - na) - (ib - ia) alpha
  return ExactLength{nb - na, -(ib - ia)};
}

}  // namespace

std::vector<PartitionInterval> three_distance_partition(const RotationContext& ctx, std::int64_t k) {
  if (k < 1) throw InputError("k must be >= 1");
  struct Pt {
    u128 v;
    std::int64_t j;
    std::int64_t n;
  };
  std::vector<Pt> pts;
  pts.reserve(k);
  for (std::int64_t j = 0; j < k; ++j) {
    auto [n, v] = point_data(ctx, j);
    if (j > 0 && v <= static_cast<u128>(k)) throw PrecisionError("orbit point too close to 0");
    pts.push_back({v, j, n});
  }
  std::sort(pts.begin(), pts.end(), [](const Pt& l, const Pt& r) { return l.v < r.v; });
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].v - pts[i - 1].v <= static_cast<u128>(k)) {
      throw PrecisionError("three-distance ordering not certified at this k");
    }
  }
  std::vector<PartitionInterval> out;
  out.reserve(k);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    PartitionInterval iv;
    iv.left_index = pts[i].j;
    if (i + 1 < pts.size()) {
      iv.right_index = pts[i + 1].j;
      iv.length = gap_between(pts[i].j, pts[i].n, pts[i + 1].j, pts[i + 1].n);
    } else {
      iv.right_index = 0;
      iv.length = ExactLength{1 - pts[i].n, pts[i].j};
    }
    iv.length_value = static_cast<double>(to_long_double(to_quad(ctx, iv.length)));
    out.push_back(iv);
  }
  return out;
}

ThreeDistanceScanner::ThreeDistanceScanner(const RotationContext& ctx) : ctx_(ctx) {
  points_.push_back({0, 0});
  counts_.push_back({ExactLength{1, 0}, 1});
  k_ = 1;
}

void ThreeDistanceScanner::bump(const ExactLength& l, std::int64_t delta) {
  for (auto it = counts_.begin(); it != counts_.end(); ++it) {
    if (it->first == l) {
      it->second += delta;
      if (it->second == 0) counts_.erase(it);
      return;
    }
  }
  if (delta <= 0) throw InvariantError("removing a gap length that is not present");
  counts_.push_back({l, delta});
}

void ThreeDistanceScanner::add_next() {
  const std::int64_t j = k_;
  auto [n, v] = point_data(ctx_, j);
  const u128 slack = static_cast<u128>(j) + 1;
  if (v <= slack) throw PrecisionError("orbit point too close to 0");
  auto it = std::lower_bound(points_.begin(), points_.end(), std::make_pair(v, std::int64_t{0}),
                             [](const auto& l, const auto& r) { return l.first < r.first; });
  const auto& left = *(it - 1);
  auto [nl, vl] = point_data(ctx_, left.second);
  if (v - vl <= slack) throw PrecisionError("three-distance ordering not certified");
  ExactLength old_gap, g1, g2;
  if (it == points_.end()) {
    old_gap = ExactLength{1 - nl, left.second};
    g2 = ExactLength{1 - n, j};
  } else {
    auto [nr, vr] = point_data(ctx_, it->second);
    if (vr - v <= slack) throw PrecisionError("three-distance ordering not certified");
    old_gap = gap_between(left.second, nl, it->second, nr);
    g2 = gap_between(j, n, it->second, nr);
  }
  g1 = gap_between(left.second, nl, j, n);
  bump(old_gap, -1);
  bump(g1, 1);
  bump(g2, 1);
  points_.insert(it, {v, j});
  ++k_;
}

ExactLength ThreeDistanceScanner::min_gap() const {
  ExactLength best = counts_.front().first;
  for (const auto& [l, c] : counts_) {
    if (compare_lengths(ctx_, l, best) < 0) best = l;
  }
  return best;
}

ExactLength ThreeDistanceScanner::max_gap() const {
  ExactLength best = counts_.front().first;
  for (const auto& [l, c] : counts_) {
    if (compare_lengths(ctx_, l, best) > 0) best = l;
  }
  return best;
}

RotationContext estimate_c1_c2(const RotationContext& ctx, int k_max) {
  if (k_max < 1) throw InputError("k_max must be >= 1");
  ThreeDistanceScanner scan(ctx);
  QuadNum c2 = to_quad(ctx, scan.min_gap());
  QuadNum c1 = to_quad(ctx, scan.max_gap());
  for (int k = 2; k <= k_max; ++k) {
    scan.add_next();
    const QuadNum lo = to_quad(ctx, scan.min_gap()) * Rational(k);
    const QuadNum hi = to_quad(ctx, scan.max_gap()) * Rational(k);
    if (sign(lo - c2) < 0) c2 = lo;
    if (sign(hi - c1) > 0) c1 = hi;
  }
  RotationContext out = ctx;
  ThreeDistanceConstants tc;
  tc.k_max = k_max;
  tc.C2 = round_down(c2);
  tc.C1 = std::nextafter(round_up(c1), std::numeric_limits<double>::infinity());
  tc.analytic_floor = 1.0 / (2.0 * static_cast<double>(ctx.C));
  if (compare(c2, Rational(1, 2 * ctx.C)) < 0) {
    throw InvariantError("empirical C2 below the analytic floor 1/(2C)");
  }
  out.constants = tc;
  return out;
}

Rational min_gap_lower_bound(const RotationContext& ctx, std::uint64_t q, std::uint64_t m) {
  if (q < 1 || m < 1) throw InputError("q and m must be >= 1");
  return Rational(ctx.C2()) / (Rational(q) * Rational(q) * Rational(m));
}

double return_time_bound(const RotationContext& ctx, std::uint64_t q, double interval_length) {
  if (q < 1) throw InputError("q must be >= 1");
  if (!(interval_length > 0 && interval_length < 1)) throw InputError("interval length must be in (0,1)");
  return ctx.C2() / (static_cast<double>(q) * static_cast<double>(q) * interval_length);
}

}  // namespace ratner
