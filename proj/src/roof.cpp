#include "ratner/roof.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace ratner {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = 0x1p-52;
constexpr double kUlp128 = 0x1p-128;

u128 jump_threshold(const Jump& j) { return j.beta_fp + (j.beta_dyadic ? 0 : 1); }

void require_prepared(const RoofFunction& roof) {
  if (!roof.prepared()) throw InputError("roof function used before prepare()");
}

// Integer accumulators for a run of orbit windows. Each window [L, H] holds the true point.
struct OrbitAccumulator {
  const RoofFunction& roof;
  std::vector<u128> thresholds;
  u128 fs_lo = 0, fs_hi = 0;    // units of 1/U
  u128 saw_lo = 0, saw_hi = 0;  // units of 2^-64
  std::vector<std::int64_t> jump_lo, jump_hi;
  std::int64_t terms = 0;

  explicit OrbitAccumulator(const RoofFunction& r) : roof(r) {
    for (const auto& j : r.jumps) thresholds.push_back(jump_threshold(j));
    jump_lo.assign(thresholds.size(), 0);
    jump_hi.assign(thresholds.size(), 0);
  }

  void add(u128 L, u128 H) {
    ++terms;
    if (H < L) {  // the window wraps through 0: everything is ambiguous
      if (const FsFixed* fs = roof.fs_fast()) fs_hi += fs->units();
      saw_hi += static_cast<u128>(1) << 64;
      for (std::size_t i = 0; i < thresholds.size(); ++i) ++jump_hi[i];
      return;
    }
    if (const FsFixed* fs = roof.fs_fast()) {
      const auto a = fs->eval(L);
      if (H == L) {
        fs_lo += a.lo;
        fs_hi += a.hi;
      } else {
        const auto b = fs->eval(H);
        fs_lo += std::min(a.lo, b.lo);
        fs_hi += std::max(a.hi, b.hi);
      }
    }
    saw_lo += L >> 64;
    saw_hi += (H >> 64) + 1;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (L >= thresholds[i]) {
        ++jump_lo[i];
        ++jump_hi[i];
      } else if (H >= thresholds[i]) {
        ++jump_hi[i];
      }
    }
  }

  // Everything except the trig part.
  Enclosure total() const {
    const double n = static_cast<double>(terms);
    double lo = n * roof.offset(), hi = lo;
    double mag = std::abs(lo);
    auto add_range = [&](double coef, double a, double b) {
      const double u = coef * a, v = coef * b;
      lo += std::min(u, v);
      hi += std::max(u, v);
      mag += std::max(std::abs(u), std::abs(v));
    };
    if (const FsFixed* fs = roof.fs_fast()) {
      const double scale = roof.singular->weight / static_cast<double>(fs->units());
      add_range(scale, static_cast<double>(fs_lo), static_cast<double>(fs_hi));
    }
    add_range(roof.S_tilde * 0x1p-64, static_cast<double>(saw_lo), static_cast<double>(saw_hi));
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      add_range(roof.jumps[i].d, static_cast<double>(jump_lo[i]), static_cast<double>(jump_hi[i]));
    }
    const double slack = 8 * kEps * mag + 8 * kEps * n * std::numeric_limits<double>::min();
    return {(lo + hi) / 2, (hi - lo) / 2 + slack};
  }
};

// e(t) - 1 = 2i sin(pi t) e(t/2); returns sin(pi t) and keeps t for the phase.
struct Phase {
  double t;
  double s;
};

Phase phase_of(u128 v) {
  const double t = fixed_to_double(v);
  return {t, std::sin(kPi * t)};
}

}  // namespace

// ---------------------------------------------------------------- TrigPolynomial

bool TrigPolynomial::empty() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](auto c) { return c.first == 0 && c.second == 0; });
}

double TrigPolynomial::eval(double x) const {
  double sum = 0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double th = 2 * kPi * static_cast<double>(i + 1) * x;
    sum += coeffs[i].first * std::cos(th) + coeffs[i].second * std::sin(th);
  }
  return sum;
}

double TrigPolynomial::amplitude(std::size_t m) const {
  if (m == 0 || m > coeffs.size()) return 0;
  return std::hypot(coeffs[m - 1].first, coeffs[m - 1].second);
}

double TrigPolynomial::variation() const {
  double v = 0;
  for (std::size_t m = 1; m <= coeffs.size(); ++m) v += 4.0 * static_cast<double>(m) * amplitude(m);
  return v * (1 + 4 * kEps);
}

double TrigPolynomial::lipschitz() const {
  double v = 0;
  for (std::size_t m = 1; m <= coeffs.size(); ++m) v += 2 * kPi * static_cast<double>(m) * amplitude(m);
  return v * (1 + 4 * kEps);
}

double TrigPolynomial::sup_abs() const {
  double v = 0;
  for (std::size_t m = 1; m <= coeffs.size(); ++m) v += amplitude(m);
  return v * (1 + 4 * kEps);
}

TrigPolynomial TrigPolynomial::scaled(double s) const {
  TrigPolynomial r = *this;
  for (auto& c : r.coeffs) c = {c.first * s, c.second * s};
  return r;
}

TrigPolynomial TrigPolynomial::plus(const TrigPolynomial& o) const {
  TrigPolynomial r = *this;
  if (r.coeffs.size() < o.coeffs.size()) r.coeffs.resize(o.coeffs.size(), {0.0, 0.0});
  for (std::size_t i = 0; i < o.coeffs.size(); ++i) {
    r.coeffs[i].first += o.coeffs[i].first;
    r.coeffs[i].second += o.coeffs[i].second;
  }
  return r;
}

Enclosure trig_birkhoff(const TrigPolynomial& p, const RotationContext& ctx, u128 x, std::int64_t n) {
  if (n == 0 || p.empty()) return {0, 0};
  const std::int64_t cnt = n > 0 ? n : -n;
  const u128 start = n > 0 ? x : ctx.rotate(x, n);
  // True start lies in (start - cnt, start] ulps for negative n.
  const double start_err = n > 0 ? 0.0 : static_cast<double>(cnt) * kUlp128;
  double value = 0, radius = 0;
  for (std::size_t m = 1; m <= p.coeffs.size(); ++m) {
    const double amp = p.amplitude(m);
    if (amp == 0) continue;
    const std::complex<double> c(p.coeffs[m - 1].first, -p.coeffs[m - 1].second);
    const Phase px = phase_of(static_cast<u128>(m) * start);
    const Phase pa = phase_of(static_cast<u128>(m) * ctx.alpha_fp);
    const Phase pn = phase_of(static_cast<u128>(m) * static_cast<u128>(cnt) * ctx.alpha_fp);
    // sum_{j<cnt} e(m(start + j alpha)) = e(m start) sin(pi m cnt a)/sin(pi m a) e((t_n - t_a)/2)
    const double ratio = pn.s / pa.s;
    const double arg = 2 * kPi * px.t + kPi * (pn.t - pa.t);
    const double term = std::real(c * std::polar(ratio, arg));
    value += term;
    const double dm = static_cast<double>(m);
    const double dt_a = kEps + dm * kUlp128;
    const double dt_n = kEps + dm * static_cast<double>(cnt) * kUlp128;
    const double dt_x = kEps + dm * start_err;
    const double abs_sa = std::abs(pa.s);
    const double err = amp * (kPi * dt_n / abs_sa + std::abs(ratio) * kPi * dt_a / abs_sa +
                              std::abs(ratio) * (2 * kPi * dt_x + kPi * (dt_n + dt_a) + 8 * kEps));
    radius += err + 8 * kEps * std::abs(term);
  }
  if (n < 0) value = -value;
  return {value, radius * 2 + 16 * kEps * p.sup_abs()};
}

// ---------------------------------------------------------------- RoofFunction

Jump RoofFunction::make_jump(const Rational& beta, double d) {
  if (beta < 0 || beta >= 1) throw InputError("jump location must lie in [0,1)");
  Jump j;
  j.beta = beta;
  j.d = d;
  j.beta_fp = fixed_from_rational(beta);
  j.beta_dyadic = fixed_to_rational(j.beta_fp) == beta;
  return j;
}

RoofFunction RoofFunction::constant(double c) {
  RoofFunction r;
  r.c = c;
  r.floor = c;
  r.prepare();
  return r;
}

void RoofFunction::prepare() {
  if (!std::isfinite(c) || !std::isfinite(S_tilde) || !std::isfinite(floor)) throw InputError("non-finite roof parameter");
  if (!(floor > 0)) throw InputError("roof floor must be positive");
  std::vector<Jump> merged;
  std::sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.beta < b.beta; });
  for (auto j : jumps) {
    if (!std::isfinite(j.d)) throw InputError("non-finite jump size");
    if (j.beta == 0) {
      merged_zero_jumps += j.d;
      continue;
    }
    j = make_jump(j.beta, j.d);
    if (!merged.empty() && merged.back().beta == j.beta) {
      merged.back().d += j.d;
    } else {
      merged.push_back(j);
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const Jump& j) { return j.d == 0; }), merged.end());
  jumps = std::move(merged);
  if (singular) {
    if (!std::isfinite(singular->weight)) throw InputError("non-finite singular weight");
    fs_fast_ = std::make_shared<FsFixed>(singular->spec);
  } else {
    fs_fast_.reset();
  }
  quiet_cache_ = std::make_shared<QuietCache>();
  prepared_ = true;

  // Integral: exact rationals where possible, the singular integral through the level recursion.
  double radius = 0;
  double value = offset() + S_tilde / 2;
  for (const auto& j : jumps) value += j.d * to_double(Rational(1) - j.beta);
  double mag = std::abs(offset()) + std::abs(S_tilde);
  for (const auto& j : jumps) mag += std::abs(j.d);
  if (singular) {
    const FsValue I = fs_integral(singular->spec, std::min(singular->spec.depth, 40));
    const double w = singular->weight;
    value += w * to_double(I.value);
    radius += std::abs(w) * to_double(I.bound) * (1 + kEps);
    mag += std::abs(w);
  }
  integral_ = {value, radius + 16 * kEps * mag};

  const double lower = certified_min();
  // Rounding slack in the cell bounds is about 1e-15; a floor equal to the true minimum is accepted.
  if (lower < floor * (1 - 1e-12)) {
    std::ostringstream os;
    os << "roof floor " << floor << " not certified: lower bound " << lower;
    throw InputError(os.str());
  }
}

int RoofFunction::jump_count() const { return static_cast<int>(jumps.size()); }

double RoofFunction::wrap_jump() const {
  double sum_d = 0;
  for (const auto& j : jumps) sum_d += j.d;
  double fs = 0;
  if (singular) fs = singular->spec.orientation == Orientation::increasing ? -singular->weight : singular->weight;
  return fs - sum_d - S_tilde;
}

double RoofFunction::certified_min() const {
  require_prepared(*this);
  constexpr int cells = 4096;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cells; ++i) {
    const u128 a = static_cast<u128>(i) << (128 - 12);
    const u128 width = (static_cast<u128>(1) << (128 - 12)) - 1;
    const Enclosure e = eval_window(*this, a, width);
    best = std::min(best, e.lo());
  }
  return best;
}

// ---------------------------------------------------------------- evaluation

ComponentValues eval_components(const RoofFunction& roof, u128 x, u128 width) {
  require_prepared(roof);
  const u128 H = x + width;
  const bool wraps = H < x;
  struct Range {
    double lo = 0, hi = 0, mag = 0;
    void add(double u, double v) {
      lo += std::min(u, v);
      hi += std::max(u, v);
      mag += std::max(std::abs(u), std::abs(v));
    }
    Enclosure done() const { return {(lo + hi) / 2, (hi - lo) / 2 + 8 * kEps * mag}; }
  };
  Range ac, sing, pl;
  if (!roof.ac.empty()) {
    const double mid = fixed_to_double(x + width / 2);
    const double v = roof.ac.eval(mid);
    const double r = roof.ac.lipschitz() * (fixed_to_double(width) / 2 + 4 * kEps) + 16 * kEps * roof.ac.sup_abs();
    ac.add(v - r, v + r);
  }
  if (const FsFixed* fs = roof.fs_fast()) {
    const double scale = roof.singular->weight / static_cast<double>(fs->units());
    if (wraps) {
      sing.add(0, roof.singular->weight);
    } else {
      const auto a = fs->eval(x);
      const auto b = width == 0 ? a : fs->eval(H);
      sing.add(scale * static_cast<double>(std::min(a.lo, b.lo)), scale * static_cast<double>(std::max(a.hi, b.hi)));
    }
  }
  pl.add(roof.offset(), roof.offset());
  for (const auto& j : roof.jumps) {
    const u128 t = jump_threshold(j);
    if (wraps) {
      pl.add(0, j.d);
    } else if (x >= t) {
      pl.add(j.d, j.d);
    } else if (H >= t) {
      pl.add(0, j.d);
    }
  }
  if (roof.S_tilde != 0) {
    if (wraps) {
      pl.add(0, roof.S_tilde);
    } else {
      pl.add(roof.S_tilde * fixed_to_double(x), roof.S_tilde * (fixed_to_double(H) + 2 * kEps));
    }
  }
  return {ac.done(), sing.done(), pl.done()};
}

Enclosure eval_window(const RoofFunction& roof, u128 x, u128 width) {
  const ComponentValues c = eval_components(roof, x, width);
  const double v = c.ac.value + c.singular.value + c.pl.value;
  return {v, c.ac.radius + c.singular.radius + c.pl.radius + 4 * kEps * std::abs(v)};
}

Enclosure eval(const RoofFunction& roof, u128 x) { return eval_window(roof, x, 0); }

Enclosure integral(const RoofFunction& roof) {
  require_prepared(roof);
  return roof.cached_integral();
}

VariationReport variation(const RoofFunction& roof) {
  require_prepared(roof);
  VariationReport v;
  v.ac = roof.ac.variation();
  for (const auto& j : roof.jumps) v.jumps += std::abs(j.d);
  v.singular = roof.singular ? std::abs(roof.singular->weight) : 0.0;
  v.sawtooth_rise = std::abs(roof.S_tilde);
  v.wrap_jump = std::abs(roof.wrap_jump());
  v.total = (v.ac + v.jumps + v.singular + v.sawtooth_rise + v.wrap_jump) * (1 + 8 * kEps);
  return v;
}

// ---------------------------------------------------------------- Birkhoff sums

BirkhoffSum birkhoff(const RoofFunction& roof, const RotationContext& ctx, u128 x, std::int64_t n,
                     std::int64_t budget) {
  require_prepared(roof);
  BirkhoffSum out;
  out.x = x;
  out.n = n;
  if (n == 0) return out;
  const std::int64_t cnt = n > 0 ? n : -n;
  if (cnt > budget) throw InputError("birkhoff length " + std::to_string(cnt) + " exceeds budget");
  // Start of the forward run and the one-sided error of its computed position.
  const u128 start = n > 0 ? x : ctx.rotate(x, n);
  const u128 back = n > 0 ? 0 : static_cast<u128>(cnt);
  OrbitAccumulator acc(roof);
  u128 u = start;
  for (std::int64_t j = 0; j < cnt; ++j) {
    acc.add(u - back, u + static_cast<u128>(j));
    u += ctx.alpha_fp;
  }
  Enclosure e = acc.total();
  const Enclosure t = trig_birkhoff(roof.ac, ctx, start, cnt);
  // The trig sum from a computed start: widen by the start error times its Lipschitz constant.
  const double shift = static_cast<double>(back) * kUlp128 * roof.ac.lipschitz() * static_cast<double>(cnt);
  e.value += t.value;
  e.radius += t.radius + shift + 4 * kEps * std::abs(e.value);
  out.value = n > 0 ? e.value : -e.value;
  out.radius = e.radius;
  return out;
}

std::optional<QuadNum> birkhoff_exact(const RoofFunction& roof, const RotationContext& ctx, u128 x, std::int64_t n) {
  require_prepared(roof);
  if (!roof.ac.empty()) return std::nullopt;
  const BigInt& d = ctx.alpha.value.d;
  QuadNum sum{Rational(0), Rational(0), d};
  if (n == 0) return sum;
  const std::int64_t cnt = n > 0 ? n : -n;
  const std::int64_t first = n > 0 ? 0 : n;
  const Rational offset(roof.offset());
  const Rational st(roof.S_tilde);
  for (std::int64_t j = first; j < first + cnt; ++j) {
    const QuadNum pt = ctx.orbit_exact(x, j);
    const QuadNum frac = pt - Rational(floor_of(pt));
    sum = sum + offset + frac * st;
    for (const auto& jp : roof.jumps) {
      if (compare(frac, jp.beta) >= 0) sum = sum + Rational(jp.d);
    }
    if (const FsFixed* fs = roof.fs_fast()) {
      // Resolve f_s through a window around the computed point that contains the exact one.
      const u128 c = ctx.rotate(x, j);
      const u128 e = static_cast<u128>(j < 0 ? -j : j) + 1;
      const u128 L = c - e, H = c + e;
      if (H < L) return std::nullopt;
      const auto a = fs->eval(L), b = fs->eval(H);
      if (a.lo != a.hi || b.lo != b.hi || a.lo != b.lo) return std::nullopt;
      sum = sum + Rational(roof.singular->weight) * Rational(BigInt(a.lo), BigInt(fs->units()));
    }
  }
  if (n < 0) sum = sum * Rational(-1);
  return sum;
}

DkResidual dk_residual(const RoofFunction& roof, const RotationContext& ctx, u128 x, int n) {
  require_prepared(roof);
  if (n < 0 || n > ctx.depth) throw InputError("missing convergent q_" + std::to_string(n));
  const std::uint64_t q = ctx.q_at(n);
  const BirkhoffSum b = birkhoff(roof, ctx, x, static_cast<std::int64_t>(q));
  const Enclosure I = integral(roof);
  const double qi = static_cast<double>(q) * I.value;
  DkResidual r;
  r.residual = std::abs(b.value - qi);
  r.radius = b.radius + static_cast<double>(q) * I.radius + 4 * kEps * (std::abs(b.value) + std::abs(qi));
  r.bound = variation(roof).total;
  r.pass = r.residual + r.radius <= r.bound;
  return r;
}

ClosePairReport close_pair_bound_check(const RoofFunction& roof, const RotationContext& ctx, int s, int D, int trials,
                                       std::uint64_t seed, std::int64_t shift_max) {
  require_prepared(roof);
  if (D < 1) throw InputError("D must be >= 1");
  if (trials < 0) throw InputError("trials must be >= 0");
  const std::uint64_t qs = ctx.q_at(s);
  const double var = variation(roof).total;
  ClosePairReport rep;
  rep.bound = 2.0 * D * var;
  std::mt19937_64 rng(seed);
  auto draw = [&rng] { return (static_cast<u128>(rng()) << 64) | rng(); };
  const u128 dmax = (~static_cast<u128>(0)) / qs;  // floor((2^128 - 1)/q_s) < 2^128/q_s
  const std::int64_t len = static_cast<std::int64_t>(D) * static_cast<std::int64_t>(qs);
  for (int t = 0; t < trials; ++t) {
    const u128 x0 = draw();
    u128 d = draw() % dmax;
    if (d == 0) d = 1;
    const u128 y0 = (rng() & 1) ? x0 + d : x0 - d;
    std::int64_t shift = 0;
    if (shift_max > 0) shift = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(shift_max));
    ++rep.pairs;
    // D(k) relative to the shift: f^(N+k)(x) - f^(N+k)(y) - (f^(N)(x) - f^(N)(y)).
    double lo = 0, hi = 0, mag = 0;
    u128 ux = ctx.rotate(x0, shift), uy = ctx.rotate(y0, shift);
    for (std::int64_t k = 1; k < len; ++k) {
      const std::int64_t j = shift + k - 1;  // orbit index of the term just added
      const u128 err = static_cast<u128>(j);
      const Enclosure ex = eval_window(roof, ux, err);
      const Enclosure ey = eval_window(roof, uy, err);
      lo += ex.lo() - ey.hi();
      hi += ex.hi() - ey.lo();
      mag += std::abs(ex.value) + std::abs(ey.value);
      ux += ctx.alpha_fp;
      uy += ctx.alpha_fp;
      const double slack = 4 * kEps * mag;
      const double L = lo - slack, H = hi + slack;
      const double worst = std::max(std::abs(L), std::abs(H));
      const double mid = std::abs((lo + hi) / 2);
      ++rep.checks;
      rep.max_abs = std::max(rep.max_abs, mid);
      if (k <= static_cast<std::int64_t>(qs)) {
        rep.max_internal = std::max(rep.max_internal, mid);
        if (L > 2 * var || H < -2 * var) ++rep.internal_violations;
      }
      if (worst <= rep.bound) continue;
      if (L > rep.bound || H < -rep.bound) {
        ++rep.violations;
        std::ostringstream os;
        os << "x=" << fixed_to_double(x0) << " y=" << fixed_to_double(y0) << " N=" << shift << " k=" << k
           << " diff in [" << L << ", " << H << "]";
        rep.certificates.push_back(os.str());
      } else {
        ++rep.undecided;
      }
    }
  }
  return rep;
}

}  // namespace ratner
