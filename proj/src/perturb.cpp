#include "ratner/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ratner {

namespace {

/// g shifted up to a positive roof; differences along pairs are unchanged.
RoofFunction lifted(const Perturbation& g) {
  RoofFunction G;
  G.ac = g.ac;
  G.jumps = g.jumps;
  G.c = g.sup_abs() + 1;
  G.floor = 1;
  G.prepare();
  return G;
}

}  // namespace

double Perturbation::variation() const {
  double v = ac.variation(), sum = 0;
  for (const auto& j : jumps) {
    v += std::abs(j.d);
    sum += j.d;
  }
  return v + std::abs(sum);
}

double Perturbation::sup_abs() const {
  double v = ac.sup_abs();
  for (const auto& j : jumps) v += std::abs(j.d);
  return v;
}

RBounds measure_R_bounds(const std::vector<Witness>& batch) {
  if (batch.empty()) throw InputError("empty witness batch");
  RBounds r;
  r.R1 = std::numeric_limits<double>::infinity();
  for (const auto& w : batch) {
    const double R = static_cast<double>(w.M) * fixed_to_double(circle_norm_fixed(w.x - w.y));
    r.R1 = std::min(r.R1, R);
    r.R2 = std::max(r.R2, R);
  }
  r.count = batch.size();
  return r;
}

PerturbationBudget make_budget(double eta, const RBounds& r, const RotationContext& ctx) {
  if (!(eta > 0) || !(eta < 0.5)) throw InputError("eta must lie in (0, 1/2)");
  if (!(r.R1 > 0) || r.R2 < r.R1) throw InputError("need 0 < R1 <= R2");
  PerturbationBudget b;
  b.eta = eta;
  b.C = static_cast<double>(ctx.C);
  b.R1 = r.R1;
  b.R2 = r.R2;
  b.var_limit = eta / (8 * b.C * r.R2);
  return b;
}

RoofFunction perturbed_roof(const RoofFunction& f, const Perturbation& g) {
  RoofFunction h = f;
  h.ac = f.ac.plus(g.ac);
  h.jumps.insert(h.jumps.end(), g.jumps.begin(), g.jumps.end());
  h.floor = f.floor - g.sup_abs();
  if (!(h.floor > 0)) throw InputError("perturbation can push the roof below zero");
  h.prepare();
  return h;
}

PerturbedWitness perturbed_witness(const Witness& base, const Perturbation& g, const PerturbationBudget& budget,
                                   const RoofFunction& f, const RotationContext& ctx, double epsilon,
                                   bool enforce_limit) {
  if (!(epsilon > 0)) throw InputError("epsilon must be positive");
  const double var_g = g.variation();
  if (enforce_limit && !(var_g < budget.var_limit)) {
    throw InputError("Var g = " + std::to_string(var_g) + " is not below the limit " +
                     std::to_string(budget.var_limit));
  }
  if (base.M <= 0 || base.L <= 0 || base.L >= base.M) throw InputError("base witness needs 0 < L < M");
  const RoofFunction G = lifted(g);
  const u128 d = circle_norm_fixed(base.x - base.y);
  if (d == 0) throw InputError("x and y coincide");
  const int s = ctx.convergent_index(d);
  const auto qs = static_cast<std::int64_t>(ctx.q_at(s));

  PerturbedWitness out;
  out.p_f = base.p;
  out.L_prime = std::min(qs, base.L);
  const auto len = static_cast<std::int64_t>(std::floor(epsilon * static_cast<double>(out.L_prime)));
  if (len == 0) throw InputError("window too short for this epsilon: closer pairs needed");

  // Certified |g(T^j x) - g(T^j y)| for j in [M_f, M_f + L'_f].
  std::vector<double> term(static_cast<std::size_t>(out.L_prime) + 1);
  for (std::int64_t i = 0; i <= out.L_prime; ++i) {
    const std::int64_t j = base.M + i;
    const u128 w = static_cast<u128>(j);
    const Enclosure a = eval_window(G, ctx.rotate(base.x, j), w);
    const Enclosure b = eval_window(G, ctx.rotate(base.y, j), w);
    term[static_cast<std::size_t>(i)] = std::abs(a.value - b.value) + a.radius + b.radius;
    out.full_window_sum += term[static_cast<std::size_t>(i)];
  }
  // Minimum-sum subwindow of len + 1 terms, lowest start on ties.
  double run = 0;
  for (std::int64_t i = 0; i <= len; ++i) run += term[static_cast<std::size_t>(i)];
  double best = run;
  std::int64_t best_i = 0;
  for (std::int64_t i = 1; i + len <= out.L_prime; ++i) {
    run += term[static_cast<std::size_t>(i + len)] - term[static_cast<std::size_t>(i - 1)];
    if (run < best) {
      best = run;
      best_i = i;
    }
  }
  out.subwindow_sum = best;
  if (!(best < epsilon / 4)) {
    throw InvariantError("no subwindow with g-difference sum below eps/4 (best " + std::to_string(best) + ")");
  }
  const std::int64_t M = base.M + best_i;

  PairScanner gs(G, ctx, base.x, base.y);
  gs.advance(M);
  const Enclosure p0 = gs.value();
  out.p0 = p0.value;
  out.p0_radius = p0.radius;
  if (std::abs(p0.value) + p0.radius > budget.eta / 2) {
    throw InvariantError("|p0| = " + std::to_string(std::abs(p0.value)) + " exceeds eta/2");
  }

  Witness& w = out.witness;
  w = base;
  w.M = M;
  w.L = len;
  w.p = base.p + p0.value;
  w.shift = 0;
  w.diag.s = s;
  out.kappa_fg = epsilon / 4 * std::min(base.kappa, 1 / (budget.C * budget.R2));
  w.kappa = out.kappa_fg;
  if (static_cast<double>(w.L) < out.kappa_fg * static_cast<double>(w.M)) {
    throw InvariantError("L/M below kappa_{f+g}");
  }
  if (!(base.M <= w.M && w.M + w.L <= base.M + base.L && base.M + base.L < 2 * base.M)) {
    throw InvariantError("perturbed window not nested in the base window");
  }

  const RoofFunction h = perturbed_roof(f, g);
  PairScanner hs(h, ctx, base.x, base.y);
  hs.advance(M);
  std::int64_t good = 0;
  w.max_deviation = 0;
  hs.scan(M + len, [&](std::int64_t, const Enclosure& D) {
    const double dev = std::abs(D.value - w.p) + D.radius;
    w.max_deviation = std::max(w.max_deviation, dev);
    if (dev < epsilon) ++good;
  });
  w.fraction_good = static_cast<double>(good) / static_cast<double>(len + 1);
  if (enforce_limit && w.fraction_good < 1.0) {
    throw InvariantError("perturbed window misses eps at some n (max deviation " + std::to_string(w.max_deviation) +
                         ")");
  }
  return out;
}

std::vector<SweepRow> stability_sweep(const RoofFunction& f, const RotationContext& ctx,
                                      const std::vector<std::pair<std::string, Perturbation>>& family,
                                      const std::vector<Witness>& bases, const PerturbationBudget& budget,
                                      double epsilon) {
  std::vector<SweepRow> rows;
  for (const auto& [id, g] : family) {
    SweepRow row;
    row.id = id;
    row.var_g = g.variation();
    row.var_limit = budget.var_limit;
    row.min_margin = epsilon;
    for (const auto& base : bases) {
      ++row.tested;
      try {
        const PerturbedWitness pw = perturbed_witness(base, g, budget, f, ctx, epsilon, false);
        if (pw.witness.fraction_good == 1.0) {
          ++row.succeeded;
          row.min_margin = std::min(row.min_margin, epsilon - pw.witness.max_deviation);
        }
      } catch (const InvariantError&) {
        // counted as a failure
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ratner
