#include "doctest.h"
#include "ratner/roof.hpp"

#include <cmath>
#include <random>

using namespace ratner;

namespace {

RotationContext golden_ctx() { return expand_cfrac(Irrational::golden(), 40); }

RoofFunction staircase_roof() {
  RoofFunction f;
  f.c = 2;
  f.singular = SingularPart{CantorSpec::middle_thirds(), 1.0};
  f.S_tilde = 0.5;
  f.floor = 1.5;
  f.prepare();
  return f;
}

RoofFunction sawtooth_roof() {
  RoofFunction f;
  f.c = 1;
  f.S_tilde = 1;
  f.floor = 1;
  f.prepare();
  return f;
}

// Fine-grid circle variation through the exact digit-walk evaluator.
double grid_tv(double c, double st, bool with_fs, int power) {
  const CantorSpec spec = CantorSpec::middle_thirds();
  const BigInt den = boost::multiprecision::pow(BigInt(3), power);
  const long cells = static_cast<long>(den);
  auto value = [&](long i) {
    const Rational x(BigInt(i), den);
    double v = c + st * to_double(x);
    if (with_fs) v += to_double(eval_fs(spec, x, 40).value);
    return v;
  };
  double tv = 0, prev = value(0);
  for (long i = 1; i < cells; ++i) {
    const double v = value(i);
    tv += std::abs(v - prev);
    prev = v;
  }
  return tv + std::abs(value(0) - prev);
}

}  // namespace

TEST_CASE("variation examples and decomposition") {
  SUBCASE("sawtooth") {
    RoofFunction f;
    f.S_tilde = 1;
    f.floor = 0.0;
    f.c = 1;
    f.floor = 1;
    f.prepare();
    const auto v = variation(f);
    CHECK(v.sawtooth_rise == 1);
    CHECK(v.wrap_jump == 1);
    CHECK(v.total == doctest::Approx(2).epsilon(1e-14));
  }
  SUBCASE("unit staircase: component 1, circle total 2") {
    RoofFunction f;
    f.c = 1;
    f.floor = 1;
    f.singular = SingularPart{CantorSpec::middle_thirds(), 1.0};
    f.prepare();
    const auto v = variation(f);
    CHECK(v.singular == 1);
    CHECK(v.total == doctest::Approx(2).epsilon(1e-14));
  }
  SUBCASE("2 + f_s + 0.5{x} against a fine-grid oracle") {
    const auto v = variation(staircase_roof());
    CHECK(v.singular == 1);
    CHECK(v.sawtooth_rise == 0.5);
    CHECK(v.wrap_jump == 1.5);
    CHECK(v.total == doctest::Approx(3).epsilon(1e-14));
    const double tv = grid_tv(2, 0.5, true, 9);
    CHECK(tv <= v.total);
    // The grid misses the last f_s cell (2^-9) on the rise and on the wrap.
    CHECK(tv > 3 - 3 * std::ldexp(1.0, -9));
  }
  SUBCASE("jump at 0 is merged and does not count") {
    RoofFunction f;
    f.c = 2;
    f.floor = 1;
    f.jumps = {RoofFunction::make_jump(Rational(0), 0.5), RoofFunction::make_jump(Rational(3, 10), 1.0)};
    f.prepare();
    CHECK(f.jump_count() == 1);
    CHECK(f.merged_zero_jumps == 0.5);
    CHECK(variation(f).total == doctest::Approx(2).epsilon(1e-14));
  }
}

TEST_CASE("eval examples") {
  const auto f = staircase_roof();
  RoofFunction g;
  g.c = 2;
  g.floor = 2;
  g.singular = SingularPart{CantorSpec::middle_thirds(), 1.0};
  g.prepare();
  CHECK(eval(g, u128{0}).value == 2);
  const Enclosure h = eval(g, 0.5);
  CHECK(std::abs(h.value - 2.5) <= h.radius + 1e-15);
  CHECK(h.radius < 1e-14);
  RoofFunction saw;
  saw.S_tilde = 1;
  saw.c = 0;
  saw.floor = 1e-300;
  // The bare sawtooth is not bounded below by a positive floor.
  CHECK_THROWS_AS(saw.prepare(), InputError);
  const Enclosure q = eval(sawtooth_roof(), 0.25);
  CHECK(std::abs(q.value - 1.25) <= q.radius);
  CHECK(q.radius < 1e-14);
  CHECK(eval(f, 0.5).value == doctest::Approx(2.75));
}

TEST_CASE("right continuity at jumps") {
  RoofFunction f;
  f.c = 2;
  f.floor = 1;
  f.jumps = {RoofFunction::make_jump(Rational(1, 4), 1.0), RoofFunction::make_jump(Rational(3, 10), -0.5)};
  f.prepare();
  const u128 quarter = static_cast<u128>(1) << 126;
  CHECK(eval(f, quarter).value == 3);
  CHECK(eval(f, quarter - 1).value == 2);
  const u128 b = fixed_from_rational(Rational(3, 10));
  CHECK(eval(f, b).value == 3);  // floor(2^128 * 3/10) < 3/10
  CHECK(eval(f, b + 1).value == 2.5);
}

TEST_CASE("integral") {
  const Enclosure I = integral(staircase_roof());
  CHECK(std::abs(I.value - 2.75) <= I.radius + 1e-15);
  CHECK(I.radius < 1e-10);
  RoofFunction f;
  f.c = 2;
  f.floor = 1;
  f.jumps = {RoofFunction::make_jump(Rational(3, 10), 1.0)};
  f.ac.coeffs = {{0.1, 0.2}};
  f.prepare();
  CHECK(integral(f).value == doctest::Approx(2.7).epsilon(1e-15));
}

TEST_CASE("birkhoff against the mpmath oracle") {
  const auto ctx = golden_ctx();
  RoofFunction f;
  f.c = 2;
  f.singular = SingularPart{CantorSpec::middle_thirds(), 1.0};
  f.S_tilde = 0.5;
  f.jumps = {RoofFunction::make_jump(Rational(3, 10), 1.0)};
  f.ac.coeffs = {{0.05, 0.0}, {0.0, 0.03}};
  f.floor = 1.5;
  f.prepare();
  const u128 x = fixed_from_double(0.123456789);
  const std::pair<std::int64_t, double> frozen[] = {
      {1, 2.377419240580274879593006},    {10, 34.59210893844700324801648},
      {1000, 3451.615412373162371980889}, {10000, 34502.26967167135536124341},
      {-500, -1723.961178867510821479405},
  };
  for (auto [n, want] : frozen) {
    const BirkhoffSum b = birkhoff(f, ctx, x, n);
    INFO("n = " << n);
    CHECK(std::abs(b.value - want) <= b.radius);
    CHECK(b.radius < 1e-9);
  }
}

TEST_CASE("birkhoff trivial cases and budget") {
  const auto ctx = golden_ctx();
  const auto c = RoofFunction::constant(1.75);
  CHECK(birkhoff(c, ctx, 12345, 0).value == 0);
  CHECK(birkhoff(c, ctx, 12345, 40).value == 70);
  CHECK(birkhoff(c, ctx, 12345, -40).value == -70);
  CHECK_THROWS_AS(birkhoff(c, ctx, 0, 1001, 1000), InputError);
}

TEST_CASE("cocycle identity") {
  const auto ctx = golden_ctx();
  const auto f = staircase_roof();
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const u128 x = (static_cast<u128>(rng()) << 64) | rng();
    const auto a = birkhoff(f, ctx, x, 400);
    const auto b = birkhoff(f, ctx, x, 137);
    const auto c = birkhoff(f, ctx, ctx.rotate(x, 137), 263);
    CHECK(std::abs(a.value - b.value - c.value) <= 2 * (a.radius + b.radius + c.radius));
    // Negative times: f^(-j)(x) = -f^(j)(T^-j x).
    const auto m = birkhoff(f, ctx, x, -250);
    const auto p = birkhoff(f, ctx, ctx.rotate(x, -250), 250);
    CHECK(std::abs(m.value + p.value) <= 2 * (m.radius + p.radius) + 1e-9);
  }
}

TEST_CASE("trig closed form against direct summation") {
  const auto ctx = golden_ctx();
  TrigPolynomial p;
  p.coeffs = {{0.3, -0.1}, {0.0, 0.2}, {0.05, 0.05}};
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    const double x = std::uniform_real_distribution<double>(0, 1)(rng);
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 5000);
    long double direct = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      const long double t0 = static_cast<long double>(x) + static_cast<long double>(j) * 0.6180339887498948482045868343656L;
      direct += p.eval(static_cast<double>(t0 - std::floor(t0)));
    }
    const Enclosure e = trig_birkhoff(p, ctx, fixed_from_double(x), n);
    CHECK(std::abs(e.value - static_cast<double>(direct)) < 1e-9);
    CHECK(e.radius < 1e-10);
  }
}

TEST_CASE("exact Birkhoff sums agree with the fixed-point path") {
  const auto ctx = golden_ctx();
  const auto f = staircase_roof();
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    const u128 x = (static_cast<u128>(rng()) << 64) | rng();
    for (std::int64_t n : {1, 17, 200, -60}) {
      const auto ex = birkhoff_exact(f, ctx, x, n);
      REQUIRE(ex.has_value());
      const auto b = birkhoff(f, ctx, x, n);
      CHECK(std::abs(static_cast<double>(to_long_double(*ex)) - b.value) <= b.radius + 1e-12);
    }
  }
}

TEST_CASE("error radius grows at most linearly") {
  const auto ctx = golden_ctx();
  const auto f = staircase_roof();
  const auto a = birkhoff(f, ctx, fixed_from_double(0.3), 10000);
  const auto b = birkhoff(f, ctx, fixed_from_double(0.3), 1000000);
  CHECK(b.radius <= 150 * a.radius);
  CHECK(b.radius < 1e-6);
}

TEST_CASE("Denjoy-Koksma") {
  const auto ctx = golden_ctx();
  SUBCASE("constant roof") {
    const auto c = RoofFunction::constant(3);
    for (int n = 0; n < 15; ++n) CHECK(dk_residual(c, ctx, 99, n).residual == doctest::Approx(0).epsilon(1e-12));
  }
  SUBCASE("sawtooth at 0, n = 10") {
    const auto r = dk_residual(sawtooth_roof(), ctx, 0, 10);
    CHECK(r.bound == doctest::Approx(2));
    CHECK(r.pass);
  }
  SUBCASE("staircase roof, 100 random x, n <= 20") {
    const auto f = staircase_roof();
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
      const u128 x = (static_cast<u128>(rng()) << 64) | rng();
      for (int n = 0; n <= 20; ++n) {
        const auto r = dk_residual(f, ctx, x, n);
        CHECK(r.pass);
      }
    }
  }
}

TEST_CASE("close-pair bound") {
  const auto ctx = golden_ctx();
  SUBCASE("constant") {
    const auto rep = close_pair_bound_check(RoofFunction::constant(2), ctx, 8, 3, 10, 1);
    CHECK(rep.max_abs < 1e-12);
    CHECK(rep.violations == 0);
  }
  SUBCASE("sawtooth, s = 8, D = 3") {
    const auto rep = close_pair_bound_check(sawtooth_roof(), ctx, 8, 3, 50, 2);
    CHECK(rep.bound == doctest::Approx(12));
    CHECK(rep.violations == 0);
    CHECK(rep.undecided == 0);
    CHECK(rep.internal_violations == 0);
    CHECK(rep.max_abs > 0);
  }
  SUBCASE("one jump at 0.3, s = 8, D = 2, shifted") {
    RoofFunction f;
    f.c = 2;
    f.floor = 1;
    f.jumps = {RoofFunction::make_jump(Rational(3, 10), 1.0)};
    f.prepare();
    const auto rep = close_pair_bound_check(f, ctx, 8, 2, 50, 3, 1000);
    CHECK(rep.bound == doctest::Approx(8));
    CHECK(rep.violations == 0);
    CHECK(rep.internal_violations == 0);
  }
}

TEST_CASE("floor certification") {
  RoofFunction f;
  f.c = 0.2;
  f.ac.coeffs = {{0.3, 0.0}};
  f.floor = 0.1;
  CHECK_THROWS_AS(f.prepare(), InputError);
  const auto g = staircase_roof();
  CHECK(g.certified_min() >= 1.5);
  CHECK(g.certified_min() <= 2.0);
}
