#include "doctest.h"
#include "ratner/specialflow.hpp"

#include <random>

using namespace ratner;

namespace {

RotationContext golden_ctx() { return expand_cfrac(Irrational::golden(), 50); }

RoofFunction stair(bool with_ac) {
  RoofFunction f;
  f.c = 2;
  f.singular = SingularPart{CantorSpec::middle_thirds(), 1.0};
  f.S_tilde = 0.5;
  f.jumps = {RoofFunction::make_jump(Rational(3, 10), 0.25)};
  if (with_ac) f.ac.coeffs = {{0.05, 0.0}, {0.0, 0.02}};
  f.floor = 1.5;
  f.prepare();
  return f;
}

}  // namespace

TEST_CASE("flow map examples") {
  const auto ctx = golden_ctx();
  const auto f = stair(false);
  const u128 half = static_cast<u128>(1) << 127;
  SUBCASE("below the roof") {
    const auto r = flow_map(f, ctx, {half, 0.5}, 1.0);
    CHECK(r.n == 0);
    CHECK(r.point.x == half);
    CHECK(r.point.s == 1.5);
  }
  SUBCASE("exactly onto the roof") {
    // f(1/2) = 2 + 1/2 + 1/4 + 1/4 = 3.
    const auto r = flow_map(f, ctx, {half, 0.75}, 2.25);
    CHECK(r.n == 1);
    CHECK(r.point.x == ctx.rotate(half, 1));
    CHECK(r.point.s == 0);
    CHECK(r.exact);
  }
  SUBCASE("unit suspension") {
    const auto one = RoofFunction::constant(1);
    const u128 x = fixed_from_double(0.123);
    const auto r = flow_map(one, ctx, {x, 0}, 3.5);
    CHECK(r.n == 3);
    CHECK(r.point.x == ctx.rotate(x, 3));
    CHECK(r.point.s == doctest::Approx(0.5).epsilon(1e-15));
    const auto b = flow_map(one, ctx, {x, 0}, -2.25);
    CHECK(b.n == -3);
    CHECK(b.point.s == doctest::Approx(0.75).epsilon(1e-15));
  }
}

TEST_CASE("first return time equals the roof") {
  const auto ctx = golden_ctx();
  const auto f = stair(false);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const u128 x = (static_cast<u128>(rng()) << 64) | rng();
    const Enclosure fx = eval(f, x);
    const auto below = flow_map(f, ctx, {x, 0}, fx.lo() - 1e-9);
    CHECK(below.n == 0);
    const auto above = flow_map(f, ctx, {x, 0}, fx.hi() + 1e-9);
    CHECK(above.n == 1);
    CHECK(above.point.s < 2e-9);
  }
}

TEST_CASE("group law") {
  const auto ctx = golden_ctx();
  for (bool ac : {false, true}) {
    const auto f = stair(ac);
    std::mt19937_64 rng(ac ? 4 : 3);
    for (int i = 0; i < 1000; ++i) {
      const u128 x = (static_cast<u128>(rng()) << 64) | rng();
      const double s = static_cast<double>(rng() % 1024) / 1024.0;  // below the floor 1.5
      const double t = (static_cast<double>(rng() % 40960) - 20480) / 1024.0;
      const double u = (static_cast<double>(rng() % 40960) - 20480) / 1024.0;
      const FlowPoint p{x, s};
      FlowResult a, b1, b2;
      try {
        a = flow_map(f, ctx, p, t + u);
        b1 = flow_map(f, ctx, p, t);
        b2 = flow_map(f, ctx, b1.point, u);
      } catch (const PrecisionError&) {
        continue;  // boundary-grazing times are refused, not guessed
      }
      INFO("i=" << i << " ac=" << ac);
      CHECK(a.n == b1.n + b2.n);
      const double ulps = static_cast<double>(std::abs(b1.n) + std::abs(b2.n) + std::abs(a.n)) * 0x1p-128;
      CHECK(d1(a.point, b2.point) <= a.radius + b1.radius + b2.radius + ulps + 1e-12);
    }
  }
}

TEST_CASE("d1 metric") {
  const FlowPoint p{fixed_from_double(0.1), 0.2}, q{fixed_from_double(0.15), 0.3};
  CHECK(d1(p, p) == 0);
  CHECK(d1(p, q) == doctest::Approx(0.15));
  CHECK(d1(p, q) == d1(q, p));
  CHECK(d1({fixed_from_double(0.95), 0}, {fixed_from_double(0.05), 0}) == doctest::Approx(0.1));
}

TEST_CASE("almost continuity probe") {
  const auto ctx = golden_ctx();
  RoofFunction f;
  f.c = 2;
  f.singular = SingularPart{CantorSpec::middle_thirds(), 1.0};
  f.floor = 2;
  f.prepare();
  const auto rep = almost_continuity_probe(f, ctx, 0.01, 1000, 7);
  CHECK(rep.samples == 1000);
  CHECK(rep.violations == 0);
  CHECK(rep.excluded_fraction() < 0.02);
  CHECK(rep.tested + rep.excluded == rep.samples);
}
