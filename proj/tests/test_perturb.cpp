#include "doctest.h"
#include "ratner/perturb.hpp"

#include <random>

using namespace ratner;

namespace {

const RotationContext& golden() {
  static const RotationContext ctx = estimate_c1_c2(expand_cfrac(Irrational::golden(), 60), 5000);
  return ctx;
}

const RoofFunction& staircase() {
  static const RoofFunction f = [] {
    RoofFunction r;
    r.c = 2;
    r.singular = SingularPart{CantorSpec::middle_thirds(), 1.0};
    r.S_tilde = 0.5;
    r.floor = 1;
    r.prepare();
    return r;
  }();
  return f;
}

/// Base witnesses at eps/2 with N_base = ceil(2N/eps).
const std::vector<Witness>& bases() {
  static const std::vector<Witness> b = [] {
    const auto& ctx = golden();
    const auto K = witness_constants(staircase(), ctx, WitnessCase::one, 0.5, 20);
    std::mt19937_64 rng(17);
    std::vector<Witness> out;
    for (int t = 0; t < 8; ++t) {
      const u128 x = (static_cast<u128>(rng()) << 64) | rng();
      const double d = K.delta * (0.5 + 0.5 * std::uniform_real_distribution<>(0, 1)(rng));
      out.push_back(construct_witness_case1({0.5, 20, 0, x, x + fixed_from_double(d), WitnessCase::one}, staircase(),
                                            ctx));
    }
    return out;
  }();
  return b;
}

PerturbationBudget budget() {
  double eta = 0.01;
  for (const auto& w : bases()) eta = std::min(eta, std::abs(w.p));
  return make_budget(eta, measure_R_bounds(bases()), golden());
}

Perturbation trig_with_variation(double v) {
  Perturbation g;
  g.ac.coeffs = {{1.0, 0.5}, {0.0, 0.25}, {0.1, 0.0}};
  g.ac = g.ac.scaled(v / g.ac.variation());
  return g;
}

}  // namespace

TEST_CASE("R bounds of a batch") {
  Witness w;
  w.M = 1000;
  w.x = fixed_from_double(0.25);
  w.y = w.x + fixed_from_double(1e-3);
  const RBounds r = measure_R_bounds({w});
  CHECK(r.R1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.R2 == r.R1);
  CHECK(r.count == 1);
  CHECK_THROWS_AS(measure_R_bounds({}), InputError);
  // Case 1 windows start at M0 >= q_s with ||x - y|| >= 1/q_{s+1}, so R1 >= 1/C.
  const RBounds b = measure_R_bounds(bases());
  CHECK(b.R1 >= 1.0 / golden().C);
  CHECK(b.R2 >= b.R1);
}

TEST_CASE("perturbation variation") {
  Perturbation g;
  g.ac.coeffs = {{0.3, 0.4}};
  CHECK(g.variation() == doctest::Approx(4 * 0.5));
  g.jumps = {RoofFunction::make_jump(Rational(1, 3), 0.1), RoofFunction::make_jump(Rational(2, 3), -0.04)};
  CHECK(g.variation() == doctest::Approx(2 + 0.14 + 0.06));
}

TEST_CASE("zero perturbation reproduces the base shift") {
  const auto& ctx = golden();
  const auto B = budget();
  for (const auto& base : bases()) {
    const PerturbedWitness pw = perturbed_witness(base, Perturbation{}, B, staircase(), ctx, 1.0);
    CHECK(pw.p0 == 0);
    CHECK(pw.witness.p == base.p);
    CHECK(pw.witness.M >= base.M);
    CHECK(pw.witness.M + pw.witness.L <= base.M + base.L);
    CHECK(pw.witness.fraction_good == 1.0);
  }
}

TEST_CASE("small trig perturbations keep the witness") {
  const auto& ctx = golden();
  const auto B = budget();
  const Perturbation g = trig_with_variation(0.4 * B.var_limit);
  const RoofFunction h = perturbed_roof(staircase(), g);
  for (const auto& base : bases()) {
    const PerturbedWitness pw = perturbed_witness(base, g, B, staircase(), ctx, 1.0);
    const Witness& w = pw.witness;
    CHECK(w.fraction_good == 1.0);
    CHECK(std::abs(pw.p0) <= B.eta / 2);
    CHECK(std::abs(w.p) >= B.eta / 2);
    CHECK(w.M >= 10);
    CHECK(base.M <= w.M);
    CHECK(w.M + w.L <= base.M + base.L);
    CHECK(base.M + base.L < 2 * base.M);
    CHECK(static_cast<double>(w.L) / static_cast<double>(w.M) >= pw.kappa_fg);
    CHECK(pw.subwindow_sum < 0.25);
    CHECK(pw.subwindow_sum <= pw.full_window_sum);
    CHECK(pw.full_window_sum < 2 * g.variation() + 1e-9);
    CHECK(check_witness(w, h, ctx, w.x, w.y, 1.0) == 1.0);
  }
}

TEST_CASE("perturbations at or above the limit are rejected") {
  const auto& ctx = golden();
  const auto B = budget();
  CHECK_THROWS_AS(perturbed_witness(bases().front(), trig_with_variation(2 * B.var_limit), B, staircase(), ctx, 1.0),
                  InputError);
  CHECK_THROWS_AS(make_budget(0.0, RBounds{1, 2, 1}, ctx), InputError);
  CHECK_THROWS_AS(make_budget(0.1, RBounds{2, 1, 1}, ctx), InputError);
}

TEST_CASE("stability sweep") {
  const auto& ctx = golden();
  const auto B = budget();
  std::vector<std::pair<std::string, Perturbation>> family;
  for (double r : {0.01, 0.5, 0.99, 50.0}) family.emplace_back(std::to_string(r), trig_with_variation(r * B.var_limit));
  const auto rows = stability_sweep(staircase(), ctx, family, bases(), B, 1.0);
  REQUIRE(rows.size() == 4);
  for (int i = 0; i < 3; ++i) {
    CHECK(rows[i].success_fraction() == 1.0);
    CHECK(rows[i].min_margin > 0);
  }
  CHECK(rows[3].tested == static_cast<std::int64_t>(bases().size()));
  MESSAGE("success at 50x the variation limit: " << rows[3].success_fraction());
}
