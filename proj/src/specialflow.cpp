#include "ratner/specialflow.hpp"

#include <cmath>
#include <random>

namespace ratner {

namespace {

// Exact comparison of tau with f^(n)(x), when the roof admits exact sums.
std::optional<int> exact_compare(const RoofFunction& roof, const RotationContext& ctx, u128 x, std::int64_t n,
                                 double tau, QuadNum* value) {
  const auto ex = birkhoff_exact(roof, ctx, x, n);
  if (!ex) return std::nullopt;
  if (value) *value = *ex;
  return -compare(*ex, Rational(tau));  // sign of tau - f^(n)(x)
}

}  // namespace

FlowResult flow_map(const RoofFunction& roof, const RotationContext& ctx, const FlowPoint& p, double t,
                    std::int64_t budget) {
  if (!roof.prepared()) throw InputError("roof function used before prepare()");
  if (!std::isfinite(t) || !std::isfinite(p.s)) throw InputError("non-finite flow time");
  const double tau = p.s + t;
  // Enclosure [lo, hi] of f^(n)(x) along the walk. The target height is the double s + t.
  const double tau_err = 0;
  double lo = 0, hi = 0, mag = 0;
  auto decide = [&](std::int64_t n, double slo, double shi) -> int {
    // sign of tau - f^(n)(x): +1, -1, or 0 when undecided at double precision
    const double slack = 4 * 0x1p-52 * mag + tau_err;
    if (tau - slack > shi) return 1;
    if (tau + slack < slo) return -1;
    if (auto c = exact_compare(roof, ctx, p.x, n, tau, nullptr)) return *c == 0 ? 1 : *c;
    throw PrecisionError("flow time lands on a roof boundary at step " + std::to_string(n));
  };
  FlowResult r;
  std::int64_t n = 0;
  if (tau >= 0) {
    u128 u = p.x;
    while (true) {
      if (n >= budget) throw InputError("flow map exceeds the step budget");
      const Enclosure e = eval_window(roof, u, static_cast<u128>(n));
      const double nlo = lo + e.lo(), nhi = hi + e.hi();
      mag += std::abs(e.value);
      if (decide(n + 1, nlo, nhi) < 0) break;  // tau < f^(n+1)(x)
      lo = nlo;
      hi = nhi;
      u += ctx.alpha_fp;
      ++n;
    }
  } else {
    u128 u = p.x;
    while (true) {
      if (-n >= budget) throw InputError("flow map exceeds the step budget");
      u -= ctx.alpha_fp;
      --n;
      // T^n x for n < 0 lies in (u - |n|, u].
      const u128 w = static_cast<u128>(-n);
      const Enclosure e = eval_window(roof, u - w, w);
      lo -= e.hi();
      hi -= e.lo();
      mag += std::abs(e.value);
      if (decide(n, lo, hi) >= 0) break;  // f^(n)(x) <= tau
    }
  }
  r.n = n;
  r.point.x = ctx.rotate(p.x, n);
  // Height: tau - f^(n)(x), exact when the sum resolves exactly.
  if (roof.ac.empty()) {
    if (const auto ex = birkhoff_exact(roof, ctx, p.x, n)) {
      const QuadNum h = QuadNum{Rational(tau), Rational(0), ex->d} - *ex;
      r.point.s = static_cast<double>(to_long_double(h));
      r.radius = std::abs(r.point.s) * 0x1p-52 + tau_err;
      r.exact = true;
      if (r.point.s < 0) r.point.s = 0;
      return r;
    }
  }
  r.point.s = tau - (lo + hi) / 2;
  r.radius = (hi - lo) / 2 + 4 * 0x1p-52 * mag + tau_err;
  if (r.point.s < 0) r.point.s = 0;
  return r;
}

double d1(const FlowPoint& p, const FlowPoint& q) {
  return fixed_to_double(circle_norm_fixed(p.x - q.x)) + std::abs(p.s - q.s);
}

ProbeReport almost_continuity_probe(const RoofFunction& roof, const RotationContext& ctx, double epsilon1,
                                    int samples, std::uint64_t seed) {
  if (!(epsilon1 > 0)) throw InputError("epsilon1 must be positive");
  ProbeReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Sup of f bounds the rejection sampler for the invariant measure.
  double sup = 0;
  for (int i = 0; i < 4096; ++i) {
    const u128 a = static_cast<u128>(i) << (128 - 12);
    sup = std::max(sup, eval_window(roof, a, (static_cast<u128>(1) << (128 - 12)) - 1).hi());
  }
  while (rep.samples < samples) {
    const u128 x = (static_cast<u128>(rng()) << 64) | rng();
    const double s = unit(rng) * sup;
    const Enclosure fx = eval(roof, x);
    if (s >= fx.lo()) continue;  // outside X^f (or too close to decide): resample
    ++rep.samples;
    if (s < epsilon1 || s > fx.lo() - epsilon1) {
      ++rep.excluded;
      continue;
    }
    ++rep.tested;
    const double u = (2 * unit(rng) - 1) * epsilon1, v = (2 * unit(rng) - 1) * epsilon1;
    const FlowPoint p{x, s};
    const FlowResult a = flow_map(roof, ctx, p, u), b = flow_map(roof, ctx, p, v);
    if (a.n != 0 || b.n != 0) {
      ++rep.violations;
      continue;
    }
    const double err = std::abs(d1(a.point, b.point) - std::abs(u - v));
    rep.max_error = std::max(rep.max_error, err);
    if (err > a.radius + b.radius + 4 * 0x1p-52 * (std::abs(s) + epsilon1)) ++rep.violations;
  }
  return rep;
}

}  // namespace ratner
