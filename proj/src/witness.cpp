#include "ratner/witness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ratner {

namespace {

constexpr u128 kHalfTurn = static_cast<u128>(1) << 127;

struct OrientedPair {
  u128 lo = 0;
  u128 hi = 0;
  u128 d = 0;
};

OrientedPair orient(u128 x, u128 y) {
  const u128 up = y - x;
  if (up <= kHalfTurn) return {x, y, up};
  return {y, x, x - y};
}

/// d < 1/q exactly, d in ulps.
bool below_inverse(u128 d, const BigInt& q) { return from_u128(d) * q < (BigInt(1) << 128); }

double q_double(const RotationContext& ctx, int s) { return static_cast<double>(ctx.q.at(s)); }

int sign_of(double v) { return (v > 0) - (v < 0); }

/// +1 when the weighted singular function is non-decreasing, -1 when non-increasing, 0 when absent.
int singular_direction(const RoofFunction& roof) {
  if (!roof.singular || roof.singular->weight == 0) return 0;
  const int dir = roof.singular->spec.orientation == Orientation::increasing ? 1 : -1;
  return dir * sign_of(roof.singular->weight);
}

/// Smallest s with q_s >= bound.
int first_q_at_least(const RotationContext& ctx, double bound, const char* what) {
  for (int s = 0; s <= ctx.depth; ++s) {
    if (q_double(ctx, s) >= bound) return s;
  }
  throw InputError(std::string("rotation depth too small for ") + what);
}

/// Certified deviations of one window [M, M+L] against a shift p.
struct WindowCheck {
  std::int64_t good = 0;
  std::int64_t total = 0;
  double max_dev = 0;
  double dev_singular = 0;
  double dev_pl = 0;
  double dev_ac = 0;
  std::int64_t first_bad = -1;
  double fraction() const { return total == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(total); }
};

/// ps must sit at M. Totals come from the scanner, component deviations from direct
/// per-term enclosures over the window.
WindowCheck certify_window(PairScanner ps, const RoofFunction& roof, const RotationContext& ctx, u128 xw, u128 yw,
                           std::int64_t M, std::int64_t L, double p, double p_radius, double epsilon) {
  WindowCheck out;
  ps.scan(M + L, [&](std::int64_t n, const Enclosure& D) {
    const double dev = std::abs(D.value - p) + D.radius + p_radius;
    out.max_dev = std::max(out.max_dev, dev);
    ++out.total;
    if (dev < epsilon) {
      ++out.good;
    } else if (out.first_bad < 0) {
      out.first_bad = n;
    }
  });
  Enclosure s{}, pl{}, ac{};
  auto add = [](Enclosure& acc, const Enclosure& a, const Enclosure& b) {
    acc.value += a.value - b.value;
    acc.radius += a.radius + b.radius;
  };
  for (std::int64_t j = M; j < M + L; ++j) {
    const u128 w = static_cast<u128>(j);
    const ComponentValues cx = eval_components(roof, ctx.rotate(xw, j), w);
    const ComponentValues cy = eval_components(roof, ctx.rotate(yw, j), w);
    add(s, cx.singular, cy.singular);
    add(pl, cx.pl, cy.pl);
    add(ac, cx.ac, cy.ac);
    out.dev_singular = std::max(out.dev_singular, std::abs(s.value) + s.radius);
    out.dev_pl = std::max(out.dev_pl, std::abs(pl.value) + pl.radius);
    out.dev_ac = std::max(out.dev_ac, std::abs(ac.value) + ac.radius);
  }
  return out;
}

void require_components(const WindowCheck& w, double epsilon, double total_bound, const char* which) {
  auto fail = [&](const std::string& what, double v, double bound) {
    throw InvariantError(std::string(which) + ": " + what + " deviation " + std::to_string(v) + " exceeds " +
                         std::to_string(bound) +
                         (w.first_bad >= 0 ? " (first failing n = " + std::to_string(w.first_bad) + ")" : ""));
  };
  if (w.dev_singular > epsilon / 4) fail("singular", w.dev_singular, epsilon / 4);
  if (w.dev_pl > epsilon / 4) fail("piecewise-linear", w.dev_pl, epsilon / 4);
  if (w.dev_ac > epsilon / 8) fail("absolutely continuous", w.dev_ac, epsilon / 8);
  if (w.max_dev > total_bound) fail("total", w.max_dev, total_bound);
}

std::int64_t window_length(double kappa, std::int64_t M) {
  return static_cast<std::int64_t>(std::ceil(kappa * static_cast<double>(M)));
}

void check_request(const WitnessRequest& req) {
  if (!(req.epsilon > 0) || !std::isfinite(req.epsilon)) throw InputError("epsilon must be positive");
  if (req.N < 1) throw InputError("N must be at least 1");
  if (req.x == req.y) throw InputError("x and y coincide");
}

void check_p(const Witness& w, const WitnessConstants& k, const char* which) {
  if (std::abs(w.p) > k.p_bound) {
    throw InvariantError(std::string(which) + ": |p| = " + std::to_string(std::abs(w.p)) + " exceeds 2C Var f = " +
                         std::to_string(k.p_bound));
  }
}

}  // namespace

int n0_for(const CantorSpec& spec, double epsilon, bool* clamped) {
  if (!(epsilon > 0)) throw InputError("epsilon must be positive");
  const double twoK = 2.0 * spec.K();
  double prod = 1;
  int n = 0;
  while (twoK / prod > epsilon / 4) {
    ++n;
    prod *= spec.m_at(n);
    if (n > 1000) throw InputError("no level reaches the epsilon threshold");
  }
  if (clamped) *clamped = n == 0;
  return std::max(n, 1);
}

int case2_b(const RotationContext& ctx, int cap) {
  const BigInt need = 6 * ctx.C + 4;
  for (int b = 1; b <= cap; ++b) {
    if (b + 1 > ctx.depth) break;
    bool ok = true;
    for (int s = 1; s + b <= ctx.depth && ok; ++s) ok = ctx.q[s + b] / ctx.q[s + 1] >= need;
    if (ok) return b;
  }
  throw InputError("no b up to the cap gives floor(q_{s+b}/q_{s+1}) >= 6C+4");
}

double ac_oscillation_constant(const TrigPolynomial& p, const RotationContext& ctx) {
  double total = 0;
  for (std::size_t m = 1; m <= p.coeffs.size(); ++m) {
    const double a = p.amplitude(m);
    if (a == 0) continue;
    const double norm = fixed_to_double(circle_norm_fixed(static_cast<u128>(m) * ctx.alpha_fp));
    total += std::numbers::pi * static_cast<double>(m) * a / norm;
  }
  return total * (1 + 1e-12);
}

WitnessConstants witness_constants(const RoofFunction& roof, const RotationContext& ctx, WitnessCase wcase,
                                   double epsilon, std::int64_t N) {
  if (!roof.prepared()) throw InputError("roof is not prepared");
  if (!(epsilon > 0)) throw InputError("epsilon must be positive");
  if (N < 1) throw InputError("N must be at least 1");
  WitnessConstants k;
  k.wcase = wcase;
  k.epsilon = epsilon;
  k.N = N;
  k.C = static_cast<double>(ctx.C);
  k.C2 = ctx.C2();
  k.jumps = roof.jump_count();
  k.S_tilde = roof.S_tilde;
  k.var_f = variation(roof).total;
  k.p_bound = 2 * k.C * k.var_f;
  k.ac_constant = ac_oscillation_constant(roof.ac, ctx);
  const int dir = singular_direction(roof);
  if (roof.singular) {
    k.K = roof.singular->spec.K();
    k.n0 = n0_for(roof.singular->spec, epsilon, &k.n0_clamped);
    k.k_prod_n0 = roof.singular->spec.k_product(k.n0);
  }
  const double kprod = static_cast<double>(k.k_prod_n0);
  const double S = std::abs(k.S_tilde);

  // s0: the trig part moves by at most ac_constant * ||x - y|| < ac_constant / q_s.
  const double ac_target = epsilon / 8;
  k.s0 = 0;
  while (k.ac_constant / q_double(ctx, k.s0) >= ac_target) {
    if (++k.s0 > ctx.depth) throw InputError("rotation depth too small for the oscillation threshold");
  }
  const double qs0 = q_double(ctx, k.s0);

  if (wcase == WitnessCase::one) {
    if (k.S_tilde == 0) throw InputError("case one needs a nonzero sawtooth slope");
    if (dir != 0 && dir != sign_of(k.S_tilde)) {
      throw InputError("case one needs the singular part monotone in the direction of the sawtooth");
    }
    k.kappa_terms = {k.C2 / (k.C * kprod * kprod), epsilon / (4 * S * k.C),
                     1.0 / (2 * (2 * k.C + 1) * (k.jumps + 1))};
    k.kappa = *std::min_element(k.kappa_terms.begin(), k.kappa_terms.end());
    const double bound = std::max({S * qs0, qs0, 16 * S / epsilon, static_cast<double>(N) / k.kappa});
    k.s1 = first_q_at_least(ctx, bound, "s1");
    k.eta_max = std::min(S / (5 * k.C * (2 * k.C + 1) * (k.jumps + 1)), 1.0 / 8);
  } else {
    if (k.jumps != 0 || k.S_tilde != 0) throw InputError("case two needs a roof without jumps or sawtooth");
    if (dir == 0) throw InputError("case two needs a singular part");
    k.b = case2_b(ctx);
    k.b_at_least_C = k.b >= ctx.C;
    const double Cb = std::pow(k.C, k.b);
    k.kappa_terms = {k.C2 / (Cb * kprod * kprod), 1.0 / std::pow(2 * k.C + 1, k.b)};
    k.kappa = *std::min_element(k.kappa_terms.begin(), k.kappa_terms.end());
    const double bound = std::max(qs0, static_cast<double>(N) / k.kappa);
    k.s1 = first_q_at_least(ctx, bound, "s1");
    k.eta_max = 1.0 / 8;
  }
  k.delta = std::min(1.0 / q_double(ctx, k.s1), 1.0 / kprod);
  return k;
}

double kappa_case1(const RoofFunction& roof, const RotationContext& ctx, double epsilon) {
  return witness_constants(roof, ctx, WitnessCase::one, epsilon, 1).kappa;
}

namespace {

void require_close(const WitnessConstants& k, const RotationContext& ctx, u128 d) {
  if (d == 0) throw InputError("x and y coincide");
  if (!below_inverse(d, ctx.q.at(k.s1)) || !below_inverse(d, k.k_prod_n0)) {
    throw InputError("not close enough: ||x - y|| must be below delta = " + std::to_string(k.delta));
  }
}

}  // namespace

std::pair<u128, u128> sample_pair(std::mt19937_64& rng, double delta) {
  if (!(delta > 0) || delta > 0.5) throw InputError("delta must lie in (0, 1/2]");
  const u128 x = (static_cast<u128>(rng()) << 64) | rng();
  const double d = delta * (0.5 + 0.5 * std::uniform_real_distribution<>(0, 1)(rng));
  return {x, x + fixed_from_double(d)};
}

Witness construct_witness_case1(const WitnessRequest& req, const RoofFunction& roof, const RotationContext& ctx) {
  check_request(req);
  const WitnessConstants k = witness_constants(roof, ctx, WitnessCase::one, req.epsilon, req.N);
  const OrientedPair pr = orient(req.x, req.y);
  require_close(k, ctx, pr.d);
  const int s = ctx.convergent_index(pr.d);
  if (s + 1 > ctx.depth) throw InputError("rotation depth too small for the pair distance");
  const auto qs = static_cast<std::int64_t>(ctx.q_at(s));
  const auto qs1 = static_cast<std::int64_t>(ctx.q_at(s + 1));

  // Orientation with D increasing off the bad times.
  Witness w;
  w.x = k.S_tilde > 0 ? pr.hi : pr.lo;
  w.y = k.S_tilde > 0 ? pr.lo : pr.hi;
  w.kappa = k.kappa;
  w.diag.s = s;
  w.diag.n0 = k.n0;

  PairScanner ps(roof, ctx, w.x, w.y);
  ps.advance(qs);
  std::vector<std::pair<std::int64_t, PairScanner>> snaps;  // (position, scanner)
  snaps.emplace_back(qs, ps);
  std::vector<std::int64_t>& bad = w.diag.bad_times;
  ps.advance(qs1 + 1, [&](const PairEvent& e) {
    if (!bad.empty() && bad.back() == e.j) return;
    bad.push_back(e.j);
    snaps.emplace_back(e.j + 1, ps);
  });

  // Longest maximal run of good v in [q_s, q_{s+1}], lowest start on ties.
  std::int64_t best_start = -1, best_len = -1, start = qs;
  auto close_run = [&](std::int64_t end_excl) {
    if (end_excl > start && end_excl - start > best_len) {
      best_len = end_excl - start;
      best_start = start;
    }
  };
  for (std::int64_t b : bad) {
    close_run(b);
    start = b + 1;
  }
  close_run(qs1 + 1);
  if (best_len <= 0) throw InvariantError("no bad-time-free run in [q_s, q_{s+1}]");
  const std::int64_t M0 = best_start, K0 = best_start + best_len - 1;
  w.diag.M0 = M0;
  w.diag.K0 = K0;

  const std::int64_t L0 = window_length(k.kappa, M0);
  if (M0 < req.N || L0 < req.N) {
    throw InputError("not close enough: M or L below N (M0 = " + std::to_string(M0) + ", L0 = " + std::to_string(L0) +
                     ")");
  }
  if (M0 + L0 > K0) {
    throw InvariantError("window [" + std::to_string(M0) + ", " + std::to_string(M0 + L0) +
                         "] leaves the bad-time-free run ending at " + std::to_string(K0));
  }
  // The run starts right after an event (or at q_s); its snapshot sits at M0.
  const PairScanner* at = nullptr;
  for (const auto& [pos, sc] : snaps) {
    if (pos == M0) at = &sc;
  }
  if (!at) throw InvariantError("missing scanner snapshot at M0");
  const Enclosure pD = at->value();
  w.M = M0;
  w.L = L0;
  w.p = pD.value;
  const WindowCheck wc = certify_window(*at, roof, ctx, w.x, w.y, M0, L0, pD.value, pD.radius, req.epsilon);
  w.diag.dev_singular = wc.dev_singular;
  w.diag.dev_pl = wc.dev_pl;
  w.diag.dev_ac = wc.dev_ac;
  w.max_deviation = wc.max_dev;
  w.fraction_good = wc.fraction();
  w.diag.slow_terms = ps.slow_terms();
  require_components(wc, req.epsilon, 5 * req.epsilon / 8, "case one window");
  check_p(w, k, "case one");
  return w;
}

Witness eta_shift_witness_case1(const WitnessRequest& req, const RoofFunction& roof, const RotationContext& ctx,
                                const Witness& base) {
  if (req.eta == 0) return base;
  check_request(req);
  const WitnessConstants k = witness_constants(roof, ctx, WitnessCase::one, req.epsilon, req.N);
  if (!(req.eta > 0) || req.eta > k.eta_max) {
    throw InputError("eta must lie in (0, " + std::to_string(k.eta_max) + "]");
  }
  const double eta = req.eta;
  const std::int64_t M0 = base.diag.M0, K0 = base.diag.K0;
  const std::int64_t l0 = M0 + (K0 - M0) / 2;

  PairScanner ps(roof, ctx, base.x, base.y);
  ps.advance(M0);
  const Enclosure pD = ps.value();
  Witness w = base;
  w.shift = eta;
  w.diag.l0 = l0;
  std::int64_t R0 = -1, L1 = 0;
  double H_R0 = 0;
  // Locate R0 by the intermediate-value step, then read H(l0).
  ps.scan_until(l0, [&](std::int64_t n, const Enclosure& D) {
    const double H = D.value - pD.value;
    const double r = D.radius + pD.radius;
    if (H - r < eta) return false;
    R0 = n;
    H_R0 = H;
    if (H + r > eta + req.epsilon / 4) {
      throw InvariantError("H(R0) = " + std::to_string(H) + " overshoots eta + eps/4");
    }
    return true;
  });
  if (R0 < 0) {
    throw InvariantError("H never reaches eta on [M0, l0]; H(l0) = " + std::to_string(ps.value().value - pD.value));
  }
  const PairScanner at = ps;
  ps.advance(l0);
  w.diag.H_l0 = ps.value().value - pD.value;
  L1 = window_length(k.kappa, R0);
  if (R0 + L1 > K0) {
    throw InvariantError("dual window [" + std::to_string(R0) + ", " + std::to_string(R0 + L1) +
                         "] leaves the bad-time-free run ending at " + std::to_string(K0));
  }
  const double p1 = base.p + eta;
  const WindowCheck wc = certify_window(at, roof, ctx, w.x, w.y, R0, L1, p1, pD.radius, req.epsilon);
  w.M = R0;
  w.L = L1;
  w.p = p1;
  w.diag.R0 = R0;
  w.diag.H_R0 = H_R0;
  w.diag.dev_singular = wc.dev_singular;
  w.diag.dev_pl = wc.dev_pl;
  w.diag.dev_ac = wc.dev_ac;
  w.max_deviation = wc.max_dev;
  w.fraction_good = wc.fraction();
  require_components(wc, req.epsilon, req.epsilon, "dual window");
  return w;
}

std::pair<Witness, Witness> construct_witness_case2(const WitnessRequest& req, const RoofFunction& roof,
                                                    const RotationContext& ctx) {
  check_request(req);
  const WitnessConstants k = witness_constants(roof, ctx, WitnessCase::two, req.epsilon, req.N);
  const double eta = req.eta == 0 ? k.eta_max : req.eta;
  if (!(eta > 0) || eta > k.eta_max) throw InputError("eta must lie in (0, 1/8]");
  const OrientedPair pr = orient(req.x, req.y);
  require_close(k, ctx, pr.d);
  if (pr.lo + pr.d < pr.lo) throw InputError("the short arc between x and y contains 0");
  const int s = ctx.convergent_index(pr.d);
  if (s + k.b > ctx.depth) throw InputError("rotation depth too small for the pair distance");
  const auto qs = static_cast<std::int64_t>(ctx.q_at(s));
  const auto qsb = static_cast<std::int64_t>(ctx.q_at(s + k.b));

  // Orientation with D increasing between returns and dropping by about |w| at each return.
  const bool up = singular_direction(roof) > 0;
  Witness base;
  base.x = up ? pr.hi : pr.lo;
  base.y = up ? pr.lo : pr.hi;
  base.kappa = k.kappa;
  base.diag.s = s;
  base.diag.n0 = k.n0;
  base.diag.b = k.b;

  struct Return {
    std::int64_t R;
    PairScanner at;  // positioned at R + 1
    double jump_lo;  // certified lower bound of |singular jump|
    double D_before;  // estimate of D(R)
  };
  PairScanner ps(roof, ctx, base.x, base.y);
  ps.advance(qs);
  std::vector<Return> returns;
  ps.advance(qsb + 1, [&](const PairEvent& e) {
    if (e.kind != -1) return;
    const double jl = (e.fs_term_lo > 0 || e.fs_term_hi < 0) ? std::min(std::abs(e.fs_term_lo), std::abs(e.fs_term_hi))
                                                             : 0.0;
    const u128 wdt = static_cast<u128>(e.j);
    const double ac_term = eval_components(roof, ctx.rotate(base.x, e.j), wdt).ac.value -
                           eval_components(roof, ctx.rotate(base.y, e.j), wdt).ac.value;
    const double before = ps.value().value - (e.fs_term_lo + e.fs_term_hi) / 2 - ac_term;
    returns.push_back(Return{e.j, ps, jl, before});
  });
  base.diag.slow_terms = ps.slow_terms();
  for (const auto& r : returns) {
    base.diag.returns.push_back(r.R);
    base.diag.return_jumps.push_back(r.jump_lo);
  }
  const std::int64_t t = static_cast<std::int64_t>(returns.size()) - 1;
  if (t < 6 * ctx.C + 4) {
    throw InvariantError("only " + std::to_string(t + 1) + " return times in [q_s, q_{s+b}]");
  }
  base.diag.j_t = qsb - returns.back().R;
  for (const auto& r : returns) {
    if (!(r.jump_lo > 7.0 / 8)) {
      throw InvariantError("singular jump at return " + std::to_string(r.R) + " is not above 7/8");
    }
  }

  // Candidate gaps by estimated drift D(R_{i+1}) - D(R_i + 1), largest first.
  std::vector<std::pair<double, int>> order;
  for (int i = 0; i < t; ++i) order.emplace_back(returns[i + 1].D_before - returns[i].at.value().value, i);
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  std::string last_reason = "no gap with positive drift";
  for (const auto& [drift, i] : order) {
    if (drift <= eta) break;
    ++base.diag.candidates_tried;
    const std::int64_t M0 = returns[i].R + 1;
    const std::int64_t end = returns[i + 1].R - 1;  // last return-free v
    const std::int64_t L0 = window_length(k.kappa, M0);
    if (M0 < req.N || L0 < req.N) throw InputError("not close enough: M or L below N");
    if (M0 + L0 > end) {
      last_reason = "primary window leaves gap " + std::to_string(i);
      continue;
    }
    const PairScanner& at = returns[i].at;
    const Enclosure pD = at.value();
    // Locate R_eta: first n with H(n) >= eta.
    PairScanner walk = at;
    std::int64_t Reta = -1;
    double H_R = 0;
    walk.scan_until(end, [&](std::int64_t n, const Enclosure& D) {
      const double H = D.value - pD.value;
      if (H - D.radius - pD.radius < eta) return false;
      Reta = n;
      H_R = H;
      return true;
    });
    if (Reta < 0) {
      last_reason = "H never reaches eta in gap " + std::to_string(i);
      continue;
    }
    if (H_R + pD.radius > eta + req.epsilon / 4) {
      last_reason = "H overshoots eta + eps/4 in gap " + std::to_string(i);
      continue;
    }
    const std::int64_t L1 = window_length(k.kappa, Reta);
    if (Reta + L1 > end) {
      last_reason = "dual window leaves gap " + std::to_string(i);
      continue;
    }
    Witness w0 = base;
    w0.M = M0;
    w0.L = L0;
    w0.p = pD.value;
    const WindowCheck c0 = certify_window(at, roof, ctx, base.x, base.y, M0, L0, pD.value, pD.radius, req.epsilon);
    w0.fraction_good = c0.fraction();
    w0.max_deviation = c0.max_dev;
    w0.diag.dev_singular = c0.dev_singular;
    w0.diag.dev_pl = c0.dev_pl;
    w0.diag.dev_ac = c0.dev_ac;
    w0.diag.interval_index = i;
    w0.diag.M0 = M0;
    w0.diag.K0 = end;
    require_components(c0, req.epsilon, req.epsilon / 2, "case two window");
    check_p(w0, k, "case two");

    const PairScanner& at1 = walk;
    Witness w1 = w0;
    w1.M = Reta;
    w1.L = L1;
    w1.p = pD.value + eta;
    w1.shift = eta;
    w1.diag.R0 = Reta;
    w1.diag.H_R0 = H_R;
    const WindowCheck c1 = certify_window(at1, roof, ctx, base.x, base.y, Reta, L1, w1.p, pD.radius, req.epsilon);
    w1.fraction_good = c1.fraction();
    w1.max_deviation = c1.max_dev;
    w1.diag.dev_singular = c1.dev_singular;
    w1.diag.dev_pl = c1.dev_pl;
    w1.diag.dev_ac = c1.dev_ac;
    require_components(c1, req.epsilon, req.epsilon, "case two dual window");
    return {w0, w1};
  }
  throw InvariantError("no return gap carries both windows: " + last_reason);
}

double check_witness(const Witness& w, const RoofFunction& roof, const RotationContext& ctx, u128 x, u128 y,
                     double epsilon) {
  if (w.M < 0 || w.L < 0) throw InputError("malformed witness");
  const double p = (x == w.y && y == w.x && w.x != w.y) ? -w.p : w.p;
  PairScanner ps(roof, ctx, x, y);
  ps.advance(w.M);
  std::int64_t good = 0;
  ps.scan(w.M + w.L, [&](std::int64_t, const Enclosure& D) {
    if (std::abs(D.value - p) + D.radius < epsilon) ++good;
  });
  return static_cast<double>(good) / static_cast<double>(w.L + 1);
}

DifferenceTable::DifferenceTable(const RoofFunction& roof, const RotationContext& ctx, u128 x, u128 y,
                                 std::int64_t n_max) {
  if (n_max < 0) throw InputError("negative table length");
  values_.reserve(static_cast<std::size_t>(n_max) + 1);
  PairScanner ps(roof, ctx, x, y);
  ps.scan(n_max, [&](std::int64_t, const Enclosure& D) { values_.push_back(D); });
}

double DifferenceTable::score(std::int64_t M, std::int64_t L, double p, double p_radius, double epsilon) const {
  if (M < 0 || L < 0 || M + L >= size()) throw InputError("window outside the table");
  std::int64_t good = 0;
  for (std::int64_t n = M; n <= M + L; ++n) {
    const Enclosure& D = at(n);
    if (std::abs(D.value - p) + D.radius + p_radius < epsilon) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(L + 1);
}

OracleResult oracle_witness_search(const RoofFunction& roof, const RotationContext& ctx, u128 x, u128 y,
                                   double epsilon, std::int64_t N, std::int64_t M_max,
                                   const std::vector<double>& kappa_grid) {
  if (x == y) throw InputError("x and y coincide");
  if (kappa_grid.empty()) throw InputError("empty kappa grid");
  if (N < 1 || M_max < N) throw InputError("need 1 <= N <= M_max");
  constexpr std::int64_t kBudget = 50000000;
  const double kmax = *std::max_element(kappa_grid.begin(), kappa_grid.end());
  if (!(kmax > 0)) throw InputError("kappa grid must be positive");
  const auto n_max = M_max + static_cast<std::int64_t>(std::ceil(kmax * static_cast<double>(M_max))) + 1;
  if (n_max > kBudget) throw InputError("oracle budget exceeded");
  const double p_bound = 2 * static_cast<double>(ctx.C) * variation(roof).total;
  const DifferenceTable table(roof, ctx, x, y, n_max);

  OracleResult out;
  double best = -1;
  bool zero_works = false;
  for (std::int64_t M = N; M <= M_max; ++M) {
    for (double kappa : kappa_grid) {
      const std::int64_t L = window_length(kappa, M);
      if (L < N || M + L >= table.size()) continue;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::int64_t n = M; n <= M + L; ++n) {
        lo = std::min(lo, table.at(n).value);
        hi = std::max(hi, table.at(n).value);
      }
      const Enclosure& DM = table.at(M);
      const std::pair<double, double> cands[2] = {{DM.value, DM.radius}, {(lo + hi) / 2, 0.0}};
      for (const auto& [p, pr] : cands) {
        if (std::abs(p) > p_bound) continue;
        if (p == 0) {
          zero_works = zero_works || table.score(M, L, 0, 0, epsilon) == 1.0;
          continue;
        }
        ++out.candidates;
        const double f = table.score(M, L, p, pr, epsilon);
        if (f == 1.0) ++out.perfect;
        if (f > best) {
          best = f;
          Witness w;
          w.M = M;
          w.L = L;
          w.p = p;
          w.kappa = kappa;
          w.fraction_good = f;
          w.x = x;
          w.y = y;
          out.best = w;
        }
      }
    }
  }
  out.degenerate = zero_works && (best <= 0);
  if (out.degenerate) out.best.reset();
  return out;
}

}  // namespace ratner
