// Constructive Ratner witnesses (M, L, p), eta-shifted dual witnesses and a brute-force oracle.
#pragma once

#include "ratner/pairscan.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ratner {

enum class WitnessCase { one, two };

struct WitnessRequest {
  double epsilon = 0;
  std::int64_t N = 1;
  double eta = 0;  ///< 0: primary witness only
  u128 x = 0;
  u128 y = 0;
  WitnessCase wcase = WitnessCase::one;
};

/// Everything that depends only on the roof, alpha, epsilon and N.
struct WitnessConstants {
  WitnessCase wcase = WitnessCase::one;
  double epsilon = 0;
  std::int64_t N = 1;
  double C = 0;
  double C2 = 0;
  int K = 0;             ///< bound on m_i
  int n0 = 0;            ///< smallest n with 2K/(m_1..m_n) <= eps/4
  bool n0_clamped = false;
  BigInt k_prod_n0 = 1;  ///< k_1 .. k_n0
  int jumps = 0;         ///< k, the number of jump points in (0,1)
  double S_tilde = 0;
  double var_f = 0;
  double p_bound = 0;      ///< 2C Var f
  double ac_constant = 0;  ///< sum pi m |c_m| / ||m alpha||
  int s0 = 0;
  int s1 = 0;
  int b = 0;                  ///< case 2 only
  bool b_at_least_C = false;  ///< case 2: the b found is not below C
  double kappa = 0;
  std::vector<double> kappa_terms;
  double delta = 0;
  double eta_max = 0;
};

/// Smallest n >= 1 with 2K/(m_1..m_n) <= eps/4; clamped to 1 (flagged) when eps is large.
int n0_for(const CantorSpec& spec, double epsilon, bool* clamped = nullptr);
/// Smallest b with floor(q_{s+b}/q_{s+1}) >= 6C+4 for every s with q_{s+b} in range.
int case2_b(const RotationContext& ctx, int cap = 32);
/// Uniform bound constant for the trig part: |f_ac^(n)(y) - f_ac^(n)(x)| <= ac_constant * ||x - y||.
double ac_oscillation_constant(const TrigPolynomial& p, const RotationContext& ctx);

/// Throws InputError when the roof does not fit the case or C2 is missing.
WitnessConstants witness_constants(const RoofFunction& roof, const RotationContext& ctx, WitnessCase wcase,
                                   double epsilon, std::int64_t N);
double kappa_case1(const RoofFunction& roof, const RotationContext& ctx, double epsilon);

struct WitnessDiagnostics {
  int s = 0;
  int n0 = 0;
  std::int64_t M0 = 0;
  std::int64_t K0 = 0;
  std::vector<std::int64_t> bad_times;  ///< case 1: jump or return events in [q_s, q_{s+1}]
  std::int64_t l0 = 0;
  double H_l0 = 0;
  std::int64_t R0 = 0;
  double H_R0 = 0;
  double dev_singular = 0;  ///< max window deviation per component
  double dev_pl = 0;
  double dev_ac = 0;
  int b = 0;
  std::vector<std::int64_t> returns;   ///< case 2: R_0 < ... < R_t
  std::vector<double> return_jumps;    ///< certified lower bounds of |singular jump| at each R_i
  int interval_index = -1;             ///< case 2: chosen i
  std::int64_t j_t = 0;                ///< q_{s+b} - R_t
  int candidates_tried = 0;
  std::int64_t slow_terms = 0;
};

/// D(n) = f^(n)(x) - f^(n)(y) for the stored orientation.
struct Witness {
  std::int64_t M = 0;
  std::int64_t L = 0;
  double p = 0;
  double kappa = 0;
  double fraction_good = 0;
  double max_deviation = 0;  ///< max over the window of |D(n) - p| + certificate
  double shift = 0;          ///< eta for a dual witness
  u128 x = 0;
  u128 y = 0;
  WitnessDiagnostics diag;
};

/// Uniform x and y = x + d with d uniform in [delta/2, delta).
std::pair<u128, u128> sample_pair(std::mt19937_64& rng, double delta);

Witness construct_witness_case1(const WitnessRequest& req, const RoofFunction& roof, const RotationContext& ctx);
/// Dual witness with shift p + eta; returns base unchanged when eta == 0.
Witness eta_shift_witness_case1(const WitnessRequest& req, const RoofFunction& roof, const RotationContext& ctx,
                                const Witness& base);
/// Primary and dual witnesses for f = f_s + f_ac + c.
std::pair<Witness, Witness> construct_witness_case2(const WitnessRequest& req, const RoofFunction& roof,
                                                    const RotationContext& ctx);

/// Fraction of n in [M, M+L] with |D(n) - p| < eps, decided with certified arithmetic.
/// Pass the pair in either order; the reversed order negates p.
double check_witness(const Witness& w, const RoofFunction& roof, const RotationContext& ctx, u128 x, u128 y,
                     double epsilon);

struct OracleResult {
  std::optional<Witness> best;
  bool degenerate = false;  ///< every difference vanishes, so only p = 0 fits
  std::int64_t candidates = 0;
  std::int64_t perfect = 0;  ///< candidates with score 1
};

/// Precomputed D(n), n <= n_max, for repeated window scoring.
class DifferenceTable {
 public:
  DifferenceTable(const RoofFunction& roof, const RotationContext& ctx, u128 x, u128 y, std::int64_t n_max);
  const Enclosure& at(std::int64_t n) const { return values_.at(static_cast<std::size_t>(n)); }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }
  /// Fraction of n in [M, M+L] with |D(n) - p| < eps (undecided counts as failure).
  double score(std::int64_t M, std::int64_t L, double p, double p_radius, double epsilon) const;

 private:
  std::vector<Enclosure> values_;
};

/// Scans M in [N, M_max], L = ceil(kappa M) over a kappa grid, p over {D(M), window midrange};
/// p must lie in P = [-2C Var f, 2C Var f] minus 0.
OracleResult oracle_witness_search(const RoofFunction& roof, const RotationContext& ctx, u128 x, u128 y,
                                   double epsilon, std::int64_t N, std::int64_t M_max,
                                   const std::vector<double>& kappa_grid);

}  // namespace ratner
