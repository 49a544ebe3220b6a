#include "doctest.h"
#include "ratner/witness.hpp"

#include <random>

using namespace ratner;

namespace {

const RotationContext& golden() {
  static const RotationContext ctx = estimate_c1_c2(expand_cfrac(Irrational::golden(), 60), 5000);
  return ctx;
}

RoofFunction staircase_roof(bool with_jump) {
  RoofFunction f;
  f.c = 2;
  f.singular = SingularPart{CantorSpec::middle_thirds(), 1.0};
  f.S_tilde = 0.5;
  if (with_jump) f.jumps = {RoofFunction::make_jump(Rational(3, 10), 0.25)};
  f.floor = 1;
  f.prepare();
  return f;
}

RoofFunction case2_roof() {
  RoofFunction f;
  f.c = 2;
  f.singular = SingularPart{CantorSpec::middle_thirds(), 1.0};
  f.ac.coeffs = {{0.05, 0.0}, {0.0, 0.02}};
  f.floor = 1.5;
  f.prepare();
  return f;
}

u128 draw(std::mt19937_64& rng) { return (static_cast<u128>(rng()) << 64) | rng(); }

/// A random pair at distance in [delta/2, delta).
std::pair<u128, u128> close_pair(std::mt19937_64& rng, double delta) {
  const u128 x = draw(rng);
  const double d = delta * (0.5 + 0.5 * std::uniform_real_distribution<>(0, 1)(rng));
  return {x, x + fixed_from_double(d)};
}

/// D(n) for n in [M, M+L] straight from per-term enclosures, independent of the pair scanner.
std::vector<Enclosure> direct_differences(const RoofFunction& f, const RotationContext& ctx, u128 x, u128 y,
                                          std::int64_t M, std::int64_t L) {
  const BirkhoffSum bx = birkhoff(f, ctx, x, M, 2000000000);
  const BirkhoffSum by = birkhoff(f, ctx, y, M, 2000000000);
  Enclosure D{bx.value - by.value, bx.radius + by.radius};
  std::vector<Enclosure> out{D};
  for (std::int64_t j = M; j < M + L; ++j) {
    const u128 w = static_cast<u128>(j);
    const Enclosure ex = eval_window(f, ctx.rotate(x, j), w);
    const Enclosure ey = eval_window(f, ctx.rotate(y, j), w);
    D.value += ex.value - ey.value;
    D.radius += ex.radius + ey.radius;
    out.push_back(D);
  }
  return out;
}

/// Whether the point beta lies in the arc (T^v lo, T^v lo + d], decided exactly when close.
bool hits(const RotationContext& ctx, u128 lo, u128 d, const Rational& beta, u128 beta_fp, std::int64_t v) {
  const u128 off = beta_fp - ctx.rotate(lo, v);  // true offset lies within v + 2 ulps below this
  const u128 slack = static_cast<u128>(v) + 4;
  if (off > d + slack && off < static_cast<u128>(0) - slack) return false;
  QuadNum b = QuadNum{beta, Rational(0), ctx.alpha.value.d} - ctx.orbit_exact(lo, v);
  if (sign(b) <= 0) b = b + Rational(1);
  return compare(b, fixed_to_rational(d)) <= 0;
}

}  // namespace

TEST_CASE("n0 solves the two-sided level inequality") {
  const auto spec = CantorSpec::middle_thirds();
  bool clamped = true;
  CHECK(n0_for(spec, 1.0, &clamped) == 4);
  CHECK_FALSE(clamped);
  CHECK(n0_for(spec, 4.0) == 2);
  CHECK(n0_for(spec, 0.5) == 5);
  CHECK(n0_for(spec, 0.25) == 6);
  CHECK(n0_for(spec, 100.0, &clamped) == 1);
  CHECK(clamped);
  CHECK_THROWS_AS(n0_for(spec, 0.0), InputError);
  // Two-sided: 2K/(m_1..m_n0) <= eps/4 < 2K/(m_1..m_{n0-1}).
  for (double eps : {0.1, 0.3, 0.7, 1.5, 3.0}) {
    const int n = n0_for(spec, eps);
    CHECK(4.0 / std::ldexp(1.0, n) <= eps / 4);
    CHECK(4.0 / std::ldexp(1.0, n - 1) > eps / 4);
  }
}

TEST_CASE("case one kappa matches the plug-in formula") {
  const auto& ctx = golden();
  const auto f = staircase_roof(true);
  CHECK(ctx.C == 2);
  CHECK(f.jump_count() == 1);
  // eps = 0.5: n0 = 5, so kappa = min(C2/(2*3^10), 0.125, 1/20).
  const double expect = std::min({ctx.C2() / (2 * std::pow(3.0, 10)), 0.125, 0.05});
  CHECK(kappa_case1(f, ctx, 0.5) == doctest::Approx(expect).epsilon(1e-12));
  // Monotone in epsilon.
  double prev = 0;
  for (double eps : {0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double k = kappa_case1(f, ctx, eps);
    CHECK(k >= prev);
    prev = k;
  }
  const auto K = witness_constants(f, ctx, WitnessCase::one, 1.0, 10);
  CHECK(K.eta_max == doctest::Approx(std::min(0.5 / (5 * 2 * 5 * 2), 0.125)));
  CHECK(K.p_bound == doctest::Approx(2 * 2 * variation(f).total));
  CHECK(K.delta <= 1.0 / std::pow(3.0, K.n0));
  CHECK(static_cast<double>(ctx.q[K.s1]) >= 10 / K.kappa);
  CHECK(static_cast<double>(ctx.q[K.s1 - 1]) < 10 / K.kappa);
}

TEST_CASE("roofs outside a case are rejected") {
  const auto& ctx = golden();
  CHECK_THROWS_AS(witness_constants(staircase_roof(false), ctx, WitnessCase::two, 1.0, 10), InputError);
  CHECK_THROWS_AS(witness_constants(case2_roof(), ctx, WitnessCase::one, 1.0, 10), InputError);
  RoofFunction mixed = staircase_roof(false);
  mixed.S_tilde = -0.5;
  mixed.floor = 0.5;
  mixed.prepare();
  CHECK_THROWS_AS(witness_constants(mixed, ctx, WitnessCase::one, 1.0, 10), InputError);
  RotationContext bare = expand_cfrac(Irrational::golden(), 40);
  CHECK_THROWS(witness_constants(staircase_roof(false), bare, WitnessCase::one, 1.0, 10));
}

TEST_CASE("case two b for the golden rotation") {
  const auto& ctx = golden();
  CHECK(case2_b(ctx) == 7);
  for (int s = 1; s + 7 <= ctx.depth; ++s) CHECK(ctx.q[s + 7] / ctx.q[s + 1] >= 16);
  CHECK(ctx.q[7] / ctx.q[2] < 16);  // b = 6 fails at s = 1
  const auto K = witness_constants(case2_roof(), ctx, WitnessCase::two, 1.0, 10);
  CHECK(K.b == 7);
  CHECK(K.b_at_least_C);
  CHECK(K.kappa == doctest::Approx(std::min(ctx.C2() / (128 * 6561.0), 1 / std::pow(5.0, 7))));
}

TEST_CASE("case one witnesses hold on every n of the window") {
  const auto& ctx = golden();
  const auto f = staircase_roof(true);
  const double eps = 1.0;
  const auto K = witness_constants(f, ctx, WitnessCase::one, eps, 10);
  std::mt19937_64 rng(21);
  for (int t = 0; t < 6; ++t) {
    const auto [x, y] = close_pair(rng, K.delta);
    const WitnessRequest req{eps, 10, 0, x, y, WitnessCase::one};
    const Witness w = construct_witness_case1(req, f, ctx);
    CHECK(w.fraction_good == 1.0);
    CHECK(w.M >= 10);
    CHECK(w.L >= 10);
    CHECK(static_cast<double>(w.L) / static_cast<double>(w.M) >= K.kappa);
    CHECK(w.kappa == K.kappa);
    CHECK(std::abs(w.p) <= K.p_bound);
    CHECK(w.max_deviation <= 5 * eps / 8);
    CHECK(check_witness(w, f, ctx, w.x, w.y, eps) == 1.0);
    CHECK(check_witness(w, f, ctx, w.y, w.x, eps) == 1.0);
    // Independent scan straight from Birkhoff sums.
    const auto D = direct_differences(f, ctx, w.x, w.y, w.M, w.L);
    for (const auto& e : D) CHECK(std::abs(e.value - w.p) + e.radius + D.front().radius < eps);
    // Convergent index and window placement.
    const u128 d = circle_norm_fixed(x - y);
    CHECK(w.diag.s == ctx.convergent_index(d));
    CHECK(w.M >= static_cast<std::int64_t>(ctx.q_at(w.diag.s)));
    CHECK(w.diag.K0 <= static_cast<std::int64_t>(ctx.q_at(w.diag.s + 1)));
  }
}

TEST_CASE("case one window is free of discontinuities, checked exactly") {
  const auto& ctx = golden();
  const auto f = staircase_roof(true);
  const auto K = witness_constants(f, ctx, WitnessCase::one, 1.0, 10);
  std::mt19937_64 rng(5);
  const auto [x, y] = close_pair(rng, K.delta);
  const Witness w = construct_witness_case1({1.0, 10, 0, x, y, WitnessCase::one}, f, ctx);
  const u128 lo = (y - x) < (x - y) ? x : y;
  const u128 d = circle_norm_fixed(x - y);
  const Jump& j = f.jumps.front();
  std::int64_t hits_run = 0;
  for (std::int64_t v = w.diag.M0; v <= w.diag.K0; ++v) {
    hits_run += hits(ctx, lo, d, Rational(0), 0, v);
    hits_run += hits(ctx, lo, d, j.beta, j.beta_fp, v);
  }
  CHECK(hits_run == 0);
  // Every recorded bad time really is one.
  for (std::int64_t v : w.diag.bad_times) {
    CHECK((hits(ctx, lo, d, Rational(0), 0, v) || hits(ctx, lo, d, j.beta, j.beta_fp, v)));
  }
}

TEST_CASE("shifted starts inside the clean run give witnesses too") {
  const auto& ctx = golden();
  const auto f = staircase_roof(false);
  const double eps = 1.0;
  const auto K = witness_constants(f, ctx, WitnessCase::one, eps, 10);
  std::mt19937_64 rng(8);
  const auto [x, y] = close_pair(rng, K.delta);
  const Witness w = construct_witness_case1({eps, 10, 0, x, y, WitnessCase::one}, f, ctx);
  for (std::int64_t M : {w.M + 1, w.M + 1000, (w.diag.M0 + w.diag.K0) / 2, w.diag.K0 - 100}) {
    Witness v = w;
    v.M = M;
    v.L = static_cast<std::int64_t>(std::ceil(K.kappa * static_cast<double>(M)));
    REQUIRE(M + v.L <= w.diag.K0);
    const BirkhoffSum bx = birkhoff(f, ctx, w.x, M, 2000000000);
    const BirkhoffSum by = birkhoff(f, ctx, w.y, M, 2000000000);
    v.p = bx.value - by.value;
    CHECK(check_witness(v, f, ctx, w.x, w.y, 5 * eps / 8 + 1e-6) == 1.0);
  }
}

TEST_CASE("dual witness shifts by eta") {
  const auto& ctx = golden();
  const auto f = staircase_roof(true);
  const double eps = 0.5;
  const auto K = witness_constants(f, ctx, WitnessCase::one, eps, 10);
  std::mt19937_64 rng(33);
  for (int t = 0; t < 4; ++t) {
    const auto [x, y] = close_pair(rng, K.delta);
    WitnessRequest req{eps, 10, 0, x, y, WitnessCase::one};
    const Witness w = construct_witness_case1(req, f, ctx);
    const Witness same = eta_shift_witness_case1(req, f, ctx, w);
    CHECK(same.M == w.M);
    CHECK(same.p == w.p);
    req.eta = K.eta_max;
    const Witness d = eta_shift_witness_case1(req, f, ctx, w);
    CHECK(d.fraction_good == 1.0);
    CHECK(check_witness(d, f, ctx, d.x, d.y, eps) == 1.0);
    CHECK(d.p - w.p == doctest::Approx(K.eta_max));
    CHECK(d.kappa == w.kappa);
    CHECK(d.M >= w.M);
    CHECK(d.M <= d.diag.l0);
    CHECK(d.L >= 10);
    CHECK(static_cast<double>(d.L) / static_cast<double>(d.M) >= K.kappa);
    CHECK(std::max(std::abs(d.p), std::abs(w.p)) >= K.eta_max / 2);
    // Midpoint growth: |H(l0)| > S/(4C(2C+1)(k+1)) >= eta.
    CHECK(std::abs(d.diag.H_l0) > 0.5 / (4 * 2 * 5 * 2));
    CHECK(d.diag.H_R0 >= K.eta_max);
    CHECK(d.diag.H_R0 <= K.eta_max + eps / 4);
    req.eta = 2 * K.eta_max;
    CHECK_THROWS_AS(eta_shift_witness_case1(req, f, ctx, w), InputError);
  }
}

TEST_CASE("case one rejects far or equal points") {
  const auto& ctx = golden();
  const auto f = staircase_roof(false);
  const u128 x = fixed_from_double(0.3);
  CHECK_THROWS_AS(construct_witness_case1({1.0, 10, 0, x, x, WitnessCase::one}, f, ctx), InputError);
  try {
    construct_witness_case1({1.0, 10, 0, x, x + fixed_from_double(1e-3), WitnessCase::one}, f, ctx);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("not close enough") != std::string::npos);
  }
}

TEST_CASE("case two witnesses and return-time structure") {
  const auto& ctx = golden();
  const auto f = case2_roof();
  const double eps = 1.0;
  const auto K = witness_constants(f, ctx, WitnessCase::two, eps, 10);
  std::mt19937_64 rng(4);
  auto [x, y] = close_pair(rng, K.delta);
  const auto [w0, w1] = construct_witness_case2({eps, 10, 0.125, x, y, WitnessCase::two}, f, ctx);
  CHECK(w0.fraction_good == 1.0);
  CHECK(w1.fraction_good == 1.0);
  CHECK(check_witness(w0, f, ctx, w0.x, w0.y, eps) == 1.0);
  CHECK(check_witness(w1, f, ctx, w1.x, w1.y, eps) == 1.0);
  CHECK(w1.p - w0.p == doctest::Approx(0.125));
  CHECK(w0.max_deviation <= eps / 2);
  CHECK(w0.M >= 10);
  CHECK(w0.L >= 10);
  CHECK(static_cast<double>(w0.L) / static_cast<double>(w0.M) >= K.kappa);
  CHECK(static_cast<double>(w1.L) / static_cast<double>(w1.M) >= K.kappa);
  CHECK(std::abs(w0.p) <= K.p_bound);
  const auto& R = w0.diag.returns;
  REQUIRE(R.size() >= 17);
  const auto qs = static_cast<double>(ctx.q_at(w0.diag.s));
  const auto qs1 = static_cast<std::int64_t>(ctx.q_at(w0.diag.s + 1));
  CHECK(R.front() <= 2 * qs1);
  CHECK(w0.diag.j_t <= qs1);
  for (std::size_t i = 0; i + 1 < R.size(); ++i) {
    CHECK(static_cast<double>(R[i + 1] - R[i]) >= ctx.C2() * qs);
    CHECK(R[i + 1] - R[i] <= qs1);
  }
  for (double j : w0.diag.return_jumps) CHECK(j > 7.0 / 8);
  CHECK(w0.M == R[w0.diag.interval_index] + 1);
  CHECK(w1.M + w1.L < R[w0.diag.interval_index + 1]);
}

TEST_CASE("case two rejects a pair whose short arc contains 0") {
  const auto& ctx = golden();
  const auto f = case2_roof();
  const u128 d = fixed_from_double(1e-9);
  CHECK_THROWS_AS(construct_witness_case2({1.0, 10, 0.125, static_cast<u128>(0) - d / 2, d / 2, WitnessCase::two}, f,
                                          ctx),
                  InputError);
}

TEST_CASE("oracle re-scores constructive witnesses as perfect") {
  const auto& ctx = golden();
  const auto f = staircase_roof(false);
  const double eps = 4.0;
  const auto K = witness_constants(f, ctx, WitnessCase::one, eps, 10);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 3; ++t) {
    const auto [x, y] = close_pair(rng, K.delta);
    const Witness w = construct_witness_case1({eps, 10, 0, x, y, WitnessCase::one}, f, ctx);
    REQUIRE(w.M + w.L <= 10000);
    const DifferenceTable table(f, ctx, w.x, w.y, 10000);
    CHECK(table.score(w.M, w.L, w.p, 0, eps) == 1.0);
    const auto r = oracle_witness_search(f, ctx, w.x, w.y, eps, 10, 10000, {K.kappa});
    REQUIRE(r.best);
    CHECK(r.best->fraction_good == 1.0);
    CHECK(r.perfect > 0);
    CHECK_FALSE(r.degenerate);
  }
}

TEST_CASE("oracle on a constant roof is degenerate") {
  const auto& ctx = golden();
  auto f = RoofFunction::constant(2);
  const u128 x = fixed_from_double(0.2), y = x + fixed_from_double(1e-4);
  const auto r = oracle_witness_search(f, ctx, x, y, 0.5, 10, 2000, {0.01});
  CHECK(r.degenerate);
  CHECK_FALSE(r.best);
  CHECK_THROWS_AS(oracle_witness_search(f, ctx, x, x, 0.5, 10, 2000, {0.01}), InputError);
}

TEST_CASE("check_witness with a vacuous tolerance") {
  const auto& ctx = golden();
  const auto f = staircase_roof(true);
  Witness w;
  w.M = 10;
  w.L = 10;
  w.x = fixed_from_double(0.1);
  w.y = fixed_from_double(0.2);
  w.p = birkhoff(f, ctx, w.x, 10).value - birkhoff(f, ctx, w.y, 10).value;
  CHECK(check_witness(w, f, ctx, w.x, w.y, 1e6) == 1.0);
  CHECK(check_witness(w, f, ctx, w.x, w.y, 1e-9) < 1.0);
}
