// Transfer of Ratner witnesses from f to f + g for perturbations g of small variation.
#pragma once

#include "ratner/witness.hpp"

#include <string>
#include <vector>

namespace ratner {

/// g = trig polynomial + jumps: a BV perturbation without singular part.
struct Perturbation {
  TrigPolynomial ac;
  std::vector<Jump> jumps;
  /// Circle variation: sum 4m|c_m| + sum |d_i| + |sum d_i| (the wrap at 0).
  double variation() const;
  double sup_abs() const;
};

struct RBounds {
  double R1 = 0;
  double R2 = 0;
  std::size_t count = 0;
};

/// R1 = min and R2 = max of M * ||x - y|| over the batch.
RBounds measure_R_bounds(const std::vector<Witness>& batch);

struct PerturbationBudget {
  double eta = 0;  ///< P lies outside (-eta, eta)
  double C = 0;
  double R1 = 0;
  double R2 = 0;
  double var_limit = 0;  ///< eta / (8 C R2)
};

PerturbationBudget make_budget(double eta, const RBounds& r, const RotationContext& ctx);

/// f + g with the floor lowered by sup |g|.
RoofFunction perturbed_roof(const RoofFunction& f, const Perturbation& g);

struct PerturbedWitness {
  Witness witness;  ///< for f + g, same oriented pair as the base
  double p_f = 0;
  double p0 = 0;
  double p0_radius = 0;
  std::int64_t L_prime = 0;     ///< min(q_s, L_f)
  double subwindow_sum = 0;     ///< certified upper bound of sum |g(T^j x) - g(T^j y)| over I_g
  double full_window_sum = 0;   ///< same over [M_f, M_f + L'_f]
  double kappa_fg = 0;
};

/// base must be an eps/2 witness for f; enforce_limit = false skips the Var g precondition
/// (used by sweeps past the theoretical limit).
PerturbedWitness perturbed_witness(const Witness& base, const Perturbation& g, const PerturbationBudget& budget,
                                   const RoofFunction& f, const RotationContext& ctx, double epsilon,
                                   bool enforce_limit = true);

struct SweepRow {
  std::string id;
  double var_g = 0;
  double var_limit = 0;
  std::int64_t tested = 0;
  std::int64_t succeeded = 0;
  double min_margin = 0;  ///< min over successes of eps - max deviation
  double success_fraction() const {
    return tested == 0 ? 0.0 : static_cast<double>(succeeded) / static_cast<double>(tested);
  }
};

/// Success counts per perturbation over a batch of eps/2 base witnesses. A pair succeeds
/// when the construction completes and every n of the new window is within eps.
std::vector<SweepRow> stability_sweep(const RoofFunction& f, const RotationContext& ctx,
                                      const std::vector<std::pair<std::string, Perturbation>>& family,
                                      const std::vector<Witness>& bases, const PerturbationBudget& budget,
                                      double epsilon);

}  // namespace ratner
