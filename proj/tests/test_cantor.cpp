#include "doctest.h"
#include "ratner/cantor.hpp"

#include <random>

using namespace ratner;

namespace {

// Classical Devil's staircase through the base-3 -> base-2 digit map, exact.
Rational digit_map(const Rational& x, int digits) {
  if (x == 1) return 1;
  Rational u = x, out = 0, bit(1, 2);
  for (int i = 0; i < digits; ++i) {
    u *= 3;
    const BigInt d = floor_of(u);
    u -= Rational(d);
    if (d == 1) return out + bit;
    if (d == 2) out += bit;
    bit /= 2;
  }
  return out;
}

CantorSpec five_two() {
  CantorSpec s;
  s.m = {2};
  s.k = {5};
  s.pattern = {{0, 4}};
  s.depth = 20;
  return s;
}

CantorSpec mixed() {
  CantorSpec s;
  s.m = {2, 3, 2};
  s.k = {5, 7, 4};
  s.pattern = {{0, 4}, {0, 3, 6}, {0, 3}};
  s.depth = 14;
  return s;
}

Rational random_rational(std::mt19937_64& rng) {
  const std::uint64_t den = 1 + rng() % 1000000007ULL;
  return Rational(BigInt(rng() % (den + 1)), BigInt(den));
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_NOTHROW(CantorSpec::middle_thirds().validate());
  CHECK_NOTHROW(mixed().validate());
  CantorSpec bad = CantorSpec::middle_thirds();
  bad.pattern = {{0, 1}};
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad.pattern = {{1, 2}};
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = CantorSpec::middle_thirds();
  bad.m = {3};  // three non-adjacent indices do not fit in k = 3
  CHECK_THROWS_AS(bad.validate(), InputError);
  CHECK(default_pattern(3, 7) == std::vector<int>{0, 3, 6});
  CHECK(default_pattern(2, 5) == std::vector<int>{0, 4});
}

TEST_CASE("build_level") {
  auto a1 = build_level(CantorSpec::middle_thirds(), 1);
  REQUIRE(a1.count() == 2);
  CHECK(a1.lo(0) == 0);
  CHECK(a1.hi(0) == Rational(1, 3));
  CHECK(a1.lo(1) == Rational(2, 3));
  CHECK(a1.hi(1) == 1);

  auto a2 = build_level(CantorSpec::middle_thirds(), 2);
  REQUIRE(a2.count() == 4);
  CHECK(a2.hi(0) == Rational(1, 9));
  CHECK(a2.lo(3) == Rational(8, 9));

  auto b1 = build_level(five_two(), 1);
  CHECK(b1.hi(0) == Rational(1, 5));
  CHECK(b1.lo(1) == Rational(4, 5));

  CHECK_THROWS_AS(build_level(CantorSpec::middle_thirds(3), 4), InputError);
}

TEST_CASE("level sets: nesting and measure") {
  for (const auto& spec : {CantorSpec::middle_thirds(), five_two(), mixed()}) {
    LevelSet prev = build_level(spec, 0);
    for (int n = 1; n <= 7; ++n) {
      LevelSet cur = build_level(spec, n);
      CHECK(BigInt(cur.count()) == spec.m_product(n));
      Rational total = 0;
      std::size_t j = 0;
      for (std::size_t i = 0; i < cur.count(); ++i) {
        total += cur.hi(i) - cur.lo(i);
        if (i > 0) CHECK(cur.lo(i) > cur.hi(i - 1));  // disjoint closures
        while (!(prev.lo(j) <= cur.lo(i) && cur.hi(i) <= prev.hi(j))) ++j;  // nested
        REQUIRE(j < prev.count());
      }
      CHECK(total == Rational(spec.m_product(n)) / Rational(spec.k_product(n)));
      prev = cur;
    }
  }
}

TEST_CASE("boundary") {
  auto b1 = boundary(CantorSpec::middle_thirds(), 1);
  CHECK(b1 == std::vector<Rational>{0, Rational(1, 3), Rational(2, 3), 1});
  CHECK(boundary(CantorSpec::middle_thirds(), 2).size() == 8);
  auto b = boundary(five_two(), 2);
  CHECK(b.size() == 8);
  for (const auto& z : b) CHECK(boost::multiprecision::denominator(Rational(z * 25)) == 1);
}

TEST_CASE("eval_fs examples") {
  const auto mt = CantorSpec::middle_thirds();
  auto v0 = eval_fs(mt, 0, 10);
  CHECK(v0.value == 0);
  CHECK(v0.bound == Rational(1, 1024));
  CHECK(eval_fs(mt, 1, 10).value == 1);
  for (int n = 1; n <= 12; ++n) CHECK(eval_fs(mt, Rational(1, 3), n).value == Rational(1, 2));
  auto q = eval_fs(mt, Rational(1, 4), 40);
  CHECK(boost::multiprecision::abs(q.value - Rational(1, 3)) <= Rational(1, BigInt(1) << 40));
  CHECK(q.bound == Rational(1, BigInt(1) << 40));

  auto dec = mt;
  dec.orientation = Orientation::decreasing;
  CHECK(eval_fs(dec, 0, 5).value == 1);
  CHECK(eval_fs(dec, 1, 5).value == 0);
}

TEST_CASE("approximant increments over selected intervals") {
  for (const auto& spec : {CantorSpec::middle_thirds(), five_two(), mixed()}) {
    for (int n = 1; n <= 5; ++n) {
      auto ls = build_level(spec, n);
      const Rational inc = Rational(1) / Rational(spec.m_product(n));
      for (std::size_t i = 0; i < ls.count(); ++i) {
        CHECK(eval_fs(spec, ls.hi(i), n).value - eval_fs(spec, ls.lo(i), n).value == inc);
      }
    }
  }
}

TEST_CASE("monotonicity within certified bands") {
  std::mt19937_64 rng(3);
  for (const auto& spec : {CantorSpec::middle_thirds(), mixed()}) {
    for (int i = 0; i < 5000; ++i) {
      Rational x = random_rational(rng), y = random_rational(rng);
      if (x > y) std::swap(x, y);
      auto fx = eval_fs(spec, x, 12), fy = eval_fs(spec, y, 12);
      CHECK(fy.value + fy.bound >= fx.value - fx.bound);
      CHECK(fy.value >= fx.value);  // the approximant itself is monotone
    }
  }
}

TEST_CASE("digit-map oracle agreement on 10^3 rationals") {
  std::mt19937_64 rng(5);
  const auto mt = CantorSpec::middle_thirds();
  const Rational cert(1, BigInt(1) << 40);
  for (int i = 0; i < 1000; ++i) {
    const Rational x = random_rational(rng);
    auto v = eval_fs(mt, x, 40);
    CHECK(boost::multiprecision::abs(v.value - digit_map(x, 80)) <= cert);
  }
}

TEST_CASE("cosets") {
  const auto mt = CantorSpec::middle_thirds();
  auto c12 = cosets(mt, 1, 2);
  CHECK(c12.size() == 3);
  CHECK(c12[0].size() == 4);
  CHECK(c12[0].front() == 0);
  // Frozen from a brute-force grouping of the 16 level-3 endpoints by residue mod 1/3.
  auto c13 = cosets(mt, 1, 3);
  CHECK(c13.size() == 7);
  for (std::size_t i = 1; i < c13.size(); ++i) CHECK(c13[i].size() == 2);
  CHECK_THROWS_AS(cosets(mt, 2, 2), InputError);

  for (const auto& spec : {CantorSpec::middle_thirds(13), five_two(), mixed()}) {
    const int top = spec.m_product(12) <= 4096 ? 12 : 9;
    for (int n = 2; n <= top; ++n) {
      for (int i0 = 1; i0 < n; ++i0) {
        auto cs = cosets(spec, i0, n);
        BigInt tail = 1;
        for (int i = i0 + 1; i <= n; ++i) tail *= spec.m_at(i);
        CHECK(BigInt(cs.size()) == 2 * tail - 1);
        CHECK(BigInt(cs[0].size()) == 2 * spec.m_product(i0));
        for (std::size_t j = 1; j < cs.size(); ++j) CHECK(BigInt(cs[j].size()) == spec.m_product(i0));
      }
    }
  }
}

TEST_CASE("singular difference classes") {
  const auto mt = CantorSpec::middle_thirds();
  auto a = fs_difference_class(mt, Rational(4, 10), Rational(45, 100));
  CHECK_FALSE(a.differs);
  auto b = fs_difference_class(mt, Rational(32, 100), Rational(35, 100));
  CHECK(b.differs);
  auto c = fs_difference_class(mt, Rational(30, 100), Rational(34, 100));
  CHECK(c.differs);
  CHECK(c.level == 2);  // 1/27 < 0.04 <= 1/9
  CHECK(c.bound == Rational(1, 4));
  const Rational diff = eval_fs(mt, Rational(34, 100), 40).value - eval_fs(mt, Rational(30, 100), 40).value;
  CHECK(diff > 0);
  CHECK(diff <= c.bound + Rational(2, BigInt(1) << 40));
  CHECK_THROWS_AS(fs_difference_class(mt, Rational(1, 5), Rational(1, 5)), InputError);
  auto w = fs_difference_class(mt, Rational(98, 100), Rational(1, 100));
  CHECK(w.wraps);
  CHECK(w.differs);

  // The class agrees with high-depth evaluation on random close pairs.
  std::mt19937_64 rng(9);
  for (int i = 0; i < 500; ++i) {
    const Rational x = random_rational(rng) * Rational(9, 10);
    const Rational y = x + Rational(1 + rng() % 1000, 100000);
    auto cls = fs_difference_class(mt, x, y);
    const Rational d = eval_fs(mt, y, 40).value - eval_fs(mt, x, 40).value;
    if (!cls.differs) CHECK(d <= Rational(2, BigInt(1) << 40));
    if (cls.differs) CHECK(d > 0);
    CHECK(d <= cls.bound + Rational(2, BigInt(1) << 40));
  }
}

TEST_CASE("integral of the singular function") {
  auto mt = fs_integral(CantorSpec::middle_thirds(), 30);
  CHECK(boost::multiprecision::abs(mt.value - Rational(1, 2)) <= mt.bound);
  // Riemann-sum oracle for an asymmetric spec.
  const auto spec = mixed();
  auto I = fs_integral(spec, 12);
  Rational riemann = 0;
  const int cells = 4000;
  for (int i = 0; i < cells; ++i) riemann += eval_fs(spec, Rational(2 * i + 1, 2 * cells), 12).value;
  riemann /= cells;
  CHECK(to_double(I.value) == doctest::Approx(to_double(riemann)).epsilon(2e-3));
}

TEST_CASE("fixed-point evaluator matches exact evaluation") {
  std::mt19937_64 rng(13);
  for (auto spec : {CantorSpec::middle_thirds(), mixed()}) {
    spec.depth = 64;
    FsFixed fast(spec);
    CHECK(fast.units() <= (std::uint64_t{1} << 62));
    const Rational unit = Rational(1) / Rational(fast.units());
    for (int i = 0; i < 2000; ++i) {
      const u128 x = (static_cast<u128>(rng()) << 64) | rng();
      auto e = fast.eval(x);
      const Rational exact = eval_fs(spec, fixed_to_rational(x), fast.depth()).value;
      CHECK(Rational(e.lo) * unit <= exact);
      CHECK(exact <= Rational(e.hi) * unit);
    }
  }
}
