#include "lab_suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace lab {

using namespace ratner;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_i(std::int64_t v) { return std::to_string(v); }
std::string fmt_b(bool v) { return v ? "1" : "0"; }

/// Per-suite generator: independent of the suite order and of --jobs.
std::mt19937_64 suite_rng(const Config& c, const std::string& suite) {
  const auto& names = known_suites();
  const auto idx = static_cast<std::uint64_t>(std::find(names.begin(), names.end(), suite) - names.begin());
  std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                    static_cast<std::uint32_t>(idx + 1)};
  return std::mt19937_64(seq);
}

u128 draw(std::mt19937_64& rng) { return (static_cast<u128>(rng()) << 64) | rng(); }

WitnessCase case_of(const RoofFunction& f) {
  return (f.singular && f.jumps.empty() && f.S_tilde == 0) ? WitnessCase::two : WitnessCase::one;
}

std::vector<double> doubles(const json& o, const std::string& suite, const char* key, std::vector<double> fallback) {
  if (!o.contains(key)) return fallback;
  const json& v = o.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) throw ConfigError("$.suite_options." + suite + "." + key + ": expected a number or a list");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("$.suite_options." + suite + "." + key + ": expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void require_positive(double v, const std::string& suite, const char* key) {
  if (!(v > 0)) throw ConfigError("$.suite_options." + suite + "." + key + ": must be positive");
}

CheckRow row(std::vector<std::string> cells, bool pass, double margin) { return {std::move(cells), pass, margin}; }

// ---- dk ---------------------------------------------------------------------------------------

SuiteReport dk_suite(const Environment& env) {
  const json& o = env.config.suite_options("dk");
  const int samples = option(o, "dk", "samples", 100);
  const int n_max = std::min(option(o, "dk", "n_max", 18), env.ctx.depth - 1);
  if (samples < 0) throw ConfigError("$.suite_options.dk.samples: must be non-negative");
  SuiteReport r;
  r.header = {"sample", "x", "n", "q_n", "residual", "radius", "var_f", "margin", "pass"};
  auto rng = suite_rng(env.config, "dk");
  for (int i = 0; i < samples; ++i) {
    const u128 x = draw(rng);
    for (int n = 1; n <= n_max; ++n) {
      const DkResidual d = dk_residual(env.config.roof, env.ctx, x, n);
      const double margin = d.bound - (d.residual + d.radius);
      r.rows.push_back(row({fmt_i(i), hex(x), fmt_i(n), to_string(env.ctx.q[n]), fmt(d.residual), fmt(d.radius),
                            fmt(d.bound), fmt(margin), fmt_b(d.pass)},
                           d.pass, margin));
    }
  }
  return r;
}

// ---- three-distance ---------------------------------------------------------------------------

SuiteReport three_distance_suite(const Environment& env) {
  const json& o = env.config.suite_options("three-distance");
  const int k_max = option(o, "three-distance", "k_max", env.config.k_max);
  if (k_max < 1) throw ConfigError("$.suite_options.three-distance.k_max: must be positive");
  const double C2 = env.ctx.C2();
  const Rational c2(C2);
  SuiteReport r;
  r.header = {"k", "distinct", "k_min_gap", "C2", "margin", "pass"};
  ThreeDistanceScanner scan(env.ctx);
  for (int k = 1; k <= k_max; ++k) {
    if (k > 1) scan.add_next();
    const QuadNum kg = to_quad(env.ctx, scan.min_gap()) * Rational(k);
    const bool gap_ok = compare(kg, c2) >= 0;
    const bool pass = scan.distinct_lengths() <= 3 && gap_ok;
    const double kgd = static_cast<double>(to_long_double(kg));
    r.rows.push_back(row({fmt_i(k), fmt_i(static_cast<std::int64_t>(scan.distinct_lengths())), fmt(kgd), fmt(C2),
                          fmt(kgd - C2), fmt_b(pass)},
                         pass, kgd - C2));
  }
  return r;
}

// ---- lemma51 ----------------------------------------------------------------------------------

SuiteReport lemma51_suite(const Environment& env) {
  const json& o = env.config.suite_options("lemma51");
  const int s = option(o, "lemma51", "s", 10);
  const int pairs = option(o, "lemma51", "pairs", 50);
  const auto shift_max = option<std::int64_t>(o, "lemma51", "shift_max", 0);
  std::vector<int> Ds = option(o, "lemma51", "D", std::vector<int>{1, 2, 3});
  if (s < 1 || s + 1 >= env.ctx.depth) throw ConfigError("$.suite_options.lemma51.s: outside the expansion depth");
  SuiteReport r;
  r.header = {"s", "D", "pairs", "checks", "bound", "max_abs", "max_internal", "violations", "internal_violations",
              "undecided", "margin", "pass"};
  auto rng = suite_rng(env.config, "lemma51");
  for (int D : Ds) {
    if (D < 1) throw ConfigError("$.suite_options.lemma51.D: entries must be positive");
    const auto rep = close_pair_bound_check(env.config.roof, env.ctx, s, D, pairs, rng(), shift_max);
    if (rep.undecided > 0 && rep.violations == 0) {
      throw PrecisionError("lemma51: " + std::to_string(rep.undecided) + " undecided comparisons at D = " +
                           std::to_string(D));
    }
    const bool pass = rep.violations == 0;
    const double margin = rep.bound - rep.max_abs;
    r.rows.push_back(row({fmt_i(s), fmt_i(D), fmt_i(rep.pairs), fmt_i(rep.checks), fmt(rep.bound), fmt(rep.max_abs),
                          fmt(rep.max_internal), fmt_i(rep.violations), fmt_i(rep.internal_violations),
                          fmt_i(rep.undecided), fmt(margin), fmt_b(pass)},
                         pass, margin));
  }
  return r;
}

// ---- witnesses --------------------------------------------------------------------------------

struct BatchOptions {
  std::vector<double> eps;
  std::int64_t N = 10;
  int pairs = 50;
};

BatchOptions batch_options(const json& o, const std::string& suite, std::vector<double> eps_default, int pairs) {
  BatchOptions b;
  b.eps = doubles(o, suite, "epsilon", std::move(eps_default));
  for (double e : b.eps) require_positive(e, suite, "epsilon");
  b.N = option<std::int64_t>(o, suite, "N", 10);
  if (b.N < 1) throw ConfigError("$.suite_options." + suite + ".N: must be positive");
  b.pairs = option(o, suite, "pairs", pairs);
  if (b.pairs < 0) throw ConfigError("$.suite_options." + suite + ".pairs: must be non-negative");
  return b;
}

std::vector<std::string> witness_header() {
  return {"epsilon", "pair", "x", "y", "M", "L", "p", "kappa", "fraction_good", "max_deviation", "margin", "pass",
          "reason"};
}

std::vector<std::string> witness_cells(double eps, int i, const Witness& w) {
  return {fmt(eps), fmt_i(i), hex(w.x), hex(w.y), fmt_i(w.M), fmt_i(w.L), fmt(w.p), fmt(w.kappa),
          fmt(w.fraction_good), fmt(w.max_deviation), fmt(eps - w.max_deviation)};
}

CheckRow failed_row(double eps, int i, u128 x, u128 y, const std::string& why) {
  return row({fmt(eps), fmt_i(i), hex(x), hex(y), "", "", "", "", "", "", "", "0", why}, false, -kInf);
}

/// Contract failures of a case-1 style window, empty when it holds.
std::string window_contract(const Witness& w, const WitnessConstants& K, std::int64_t N) {
  if (w.fraction_good != 1.0) return "fraction_good below 1";
  if (w.M < N) return "M below N";
  if (w.L < N) return "L below N";
  if (static_cast<double>(w.L) < K.kappa * static_cast<double>(w.M)) return "L/M below kappa";
  if (std::abs(w.p) > K.p_bound) return "|p| above 2C Var f";
  return {};
}

SuiteReport case1_suite(const Environment& env) {
  const json& o = env.config.suite_options("witness-case1");
  const auto b = batch_options(o, "witness-case1", {1.0}, 50);
  SuiteReport r;
  r.header = witness_header();
  auto rng = suite_rng(env.config, "witness-case1");
  for (double eps : b.eps) {
    const auto K = witness_constants(env.config.roof, env.ctx, WitnessCase::one, eps, b.N);
    for (int i = 0; i < b.pairs; ++i) {
      const auto [x, y] = sample_pair(rng, K.delta);
      try {
        const Witness w = construct_witness_case1({eps, b.N, 0, x, y, WitnessCase::one}, env.config.roof, env.ctx);
        const std::string why = window_contract(w, K, b.N);
        auto cells = witness_cells(eps, i, w);
        cells.push_back(fmt_b(why.empty()));
        cells.push_back(why);
        r.rows.push_back(row(std::move(cells), why.empty(), why.empty() ? eps - w.max_deviation : -kInf));
      } catch (const InvariantError& e) {
        r.rows.push_back(failed_row(eps, i, x, y, e.what()));
      }
    }
  }
  return r;
}

SuiteReport dual_suite(const Environment& env) {
  const json& o = env.config.suite_options("dual");
  const auto b = batch_options(o, "dual", {1.0}, 50);
  const double eta_opt = option(o, "dual", "eta", 0.0);
  if (eta_opt < 0) throw ConfigError("$.suite_options.dual.eta: must be non-negative (0 selects eta_max)");
  SuiteReport r;
  r.header = {"epsilon", "pair", "x", "y", "eta", "M", "L", "p", "M_dual", "L_dual", "p_dual", "kappa", "kappa_dual",
              "H_l0", "fraction_good", "fraction_good_dual", "margin", "pass", "reason"};
  auto rng = suite_rng(env.config, "dual");
  const WitnessCase wc = case_of(env.config.roof);
  for (double eps : b.eps) {
    const auto K = witness_constants(env.config.roof, env.ctx, wc, eps, b.N);
    const double eta = eta_opt > 0 ? eta_opt : K.eta_max;
    if (eta > K.eta_max) throw ConfigError("$.suite_options.dual.eta: above eta_max = " + fmt(K.eta_max));
    for (int i = 0; i < b.pairs; ++i) {
      const auto [x, y] = sample_pair(rng, K.delta);
      try {
        const WitnessRequest req{eps, b.N, eta, x, y, wc};
        Witness w, d;
        if (wc == WitnessCase::one) {
          w = construct_witness_case1({eps, b.N, 0, x, y, wc}, env.config.roof, env.ctx);
          d = eta_shift_witness_case1(req, env.config.roof, env.ctx, w);
        } else {
          std::tie(w, d) = construct_witness_case2(req, env.config.roof, env.ctx);
        }
        std::string why = window_contract(w, K, b.N);
        if (why.empty() && d.fraction_good != 1.0) why = "dual fraction_good below 1";
        if (why.empty() && d.shift != eta) why = "dual shift differs from eta";
        if (why.empty() && (w.kappa != K.kappa || d.kappa != K.kappa)) why = "window kappa differs from kappa(eps)";
        if (why.empty() && d.M < b.N) why = "dual M below N";
        const double margin = eps - std::max(w.max_deviation, d.max_deviation);
        r.rows.push_back(row({fmt(eps), fmt_i(i), hex(x), hex(y), fmt(eta), fmt_i(w.M), fmt_i(w.L), fmt(w.p),
                              fmt_i(d.M), fmt_i(d.L), fmt(d.p), fmt(w.kappa), fmt(d.kappa), fmt(d.diag.H_l0),
                              fmt(w.fraction_good), fmt(d.fraction_good), fmt(margin), fmt_b(why.empty()), why},
                             why.empty(), why.empty() ? margin : -kInf));
      } catch (const InvariantError& e) {
        r.rows.push_back(row({fmt(eps), fmt_i(i), hex(x), hex(y), fmt(eta), "", "", "", "", "", "", "", "", "", "",
                              "", "", "0", e.what()},
                             false, -kInf));
      }
    }
  }
  return r;
}

SuiteReport case2_suite(const Environment& env) {
  const json& o = env.config.suite_options("witness-case2");
  const auto b = batch_options(o, "witness-case2", {1.0}, 50);
  SuiteReport r;
  r.header = {"epsilon", "pair", "x",          "y",           "M",   "L",       "p",   "M_dual",
              "L_dual",  "p_dual", "returns",  "min_jump",    "b",   "fraction_good", "fraction_good_dual",
              "margin",  "pass",   "reason"};
  auto rng = suite_rng(env.config, "witness-case2");
  for (double eps : b.eps) {
    const auto K = witness_constants(env.config.roof, env.ctx, WitnessCase::two, eps, b.N);
    for (int i = 0; i < b.pairs; ++i) {
      const auto [x, y] = sample_pair(rng, K.delta);
      try {
        const auto [w, d] = construct_witness_case2({eps, b.N, 0, x, y, WitnessCase::two}, env.config.roof, env.ctx);
        double min_jump = kInf;
        for (double j : w.diag.return_jumps) min_jump = std::min(min_jump, j);
        std::string why = window_contract(w, K, b.N);
        if (why.empty() && d.fraction_good != 1.0) why = "dual fraction_good below 1";
        if (why.empty() && !(min_jump > 7.0 / 8)) why = "a return jump is not above 7/8";
        const double margin = std::min(eps - std::max(w.max_deviation, d.max_deviation), min_jump - 7.0 / 8);
        r.rows.push_back(row({fmt(eps), fmt_i(i), hex(x), hex(y), fmt_i(w.M), fmt_i(w.L), fmt(w.p), fmt_i(d.M),
                              fmt_i(d.L), fmt(d.p), fmt_i(static_cast<std::int64_t>(w.diag.returns.size())),
                              fmt(min_jump), fmt_i(w.diag.b), fmt(w.fraction_good), fmt(d.fraction_good), fmt(margin),
                              fmt_b(why.empty()), why},
                             why.empty(), why.empty() ? margin : -kInf));
      } catch (const InvariantError& e) {
        r.rows.push_back(row({fmt(eps), fmt_i(i), hex(x), hex(y), "", "", "", "", "", "", "", "", "", "", "", "",
                              "0", e.what()},
                             false, -kInf));
      }
    }
  }
  return r;
}

// ---- perturb ----------------------------------------------------------------------------------

Perturbation perturbation_shape(const json& o) {
  Perturbation g;
  if (!o.contains("g")) {
    g.ac.coeffs = {{1.0, 0.5}, {0.0, 0.25}, {0.1, 0.0}};
    return g;
  }
  g.ac = parse_trig(o.at("g"), "$.suite_options.perturb.g");
  if (!(g.ac.variation() > 0)) throw ConfigError("$.suite_options.perturb.g: needs a nonzero coefficient");
  return g;
}

SuiteReport perturb_suite(const Environment& env) {
  const json& o = env.config.suite_options("perturb");
  const auto b = batch_options(o, "perturb", {0.5}, 20);
  if (b.eps.size() != 1) throw ConfigError("$.suite_options.perturb.epsilon: expected a single value");
  const double eps = b.eps.front();
  const double scale = option(o, "perturb", "scale", 0.5);
  require_positive(scale, "perturb", "scale");
  const auto sweep = doubles(o, "perturb", "sweep", {0.01, 0.5, 0.99, 2.0});
  const Perturbation shape = perturbation_shape(o);
  const RoofFunction& f = env.config.roof;

  // Base witnesses at eps/2 with N_base = ceil(2N/eps).
  const auto N_base = static_cast<std::int64_t>(std::ceil(2.0 * static_cast<double>(b.N) / eps));
  const auto K = witness_constants(f, env.ctx, WitnessCase::one, eps / 2, N_base);
  auto rng = suite_rng(env.config, "perturb");
  std::vector<Witness> bases;
  SuiteReport r;
  r.header = {"pair", "x", "y", "var_g", "var_limit", "M", "L", "p_f", "p0", "p", "subwindow_sum", "fraction_good",
              "max_deviation", "margin", "pass", "reason"};
  for (int i = 0; i < b.pairs; ++i) {
    const auto [x, y] = sample_pair(rng, K.delta);
    try {
      bases.push_back(construct_witness_case1({eps / 2, N_base, 0, x, y, WitnessCase::one}, f, env.ctx));
    } catch (const InvariantError& e) {
      r.rows.push_back(row({fmt_i(i), hex(x), hex(y), "", "", "", "", "", "", "", "", "", "", "", "0",
                            std::string("base witness: ") + e.what()},
                           false, -kInf));
    }
  }
  if (bases.empty()) return r;
  double eta = K.eta_max;
  for (const auto& w : bases) eta = std::min(eta, std::abs(w.p));
  const auto budget = make_budget(eta, measure_R_bounds(bases), env.ctx);
  Perturbation g = shape;
  g.ac = shape.ac.scaled(scale * budget.var_limit / shape.ac.variation());

  const auto attempt = [&](int i, const Witness& base, const Perturbation& gg, bool zero) {
    try {
      const PerturbedWitness pw = perturbed_witness(base, gg, budget, f, env.ctx, eps);
      const Witness& w = pw.witness;
      std::string why;
      if (w.fraction_good != 1.0) why = "fraction_good below 1";
      if (why.empty() && std::abs(pw.p0) + pw.p0_radius > eta / 2) why = "|p0| above eta/2";
      if (why.empty() && zero && w.p != base.p) why = "g = 0 does not reproduce p_f";
      const double margin = std::min(eps - w.max_deviation, eta / 2 - std::abs(pw.p0) - pw.p0_radius);
      r.rows.push_back(row({zero ? "zero-" + fmt_i(i) : fmt_i(i), hex(base.x), hex(base.y), fmt(gg.variation()),
                            fmt(budget.var_limit), fmt_i(w.M), fmt_i(w.L), fmt(pw.p_f), fmt(pw.p0), fmt(w.p),
                            fmt(pw.subwindow_sum), fmt(w.fraction_good), fmt(w.max_deviation), fmt(margin),
                            fmt_b(why.empty()), why},
                           why.empty(), why.empty() ? margin : -kInf));
    } catch (const InvariantError& e) {
      r.rows.push_back(row({zero ? "zero-" + fmt_i(i) : fmt_i(i), hex(base.x), hex(base.y), fmt(gg.variation()),
                            fmt(budget.var_limit), "", "", fmt(base.p), "", "", "", "", "", "", "0", e.what()},
                           false, -kInf));
    }
  };
  for (std::size_t i = 0; i < bases.size(); ++i) attempt(static_cast<int>(i), bases[i], g, false);
  attempt(0, bases.front(), Perturbation{}, true);

  // Sweep across the limit: informational, so it goes to its own file and never fails the suite.
  std::vector<std::pair<std::string, Perturbation>> family;
  for (double t : sweep) {
    Perturbation gt = shape;
    gt.ac = shape.ac.scaled(t * budget.var_limit / shape.ac.variation());
    char id[32];
    std::snprintf(id, sizeof id, "trig-x%g", t);
    family.emplace_back(id, gt);
  }
  SuiteReport::Extra ex{"perturb_sweep.csv",
                        {"g_id", "var_g", "var_limit", "pairs_tested", "success_fraction", "min_margin"},
                        {}};
  for (const auto& s : stability_sweep(f, env.ctx, family, bases, budget, eps)) {
    ex.rows.push_back(row({s.id, fmt(s.var_g), fmt(s.var_limit), fmt_i(s.tested), fmt(s.success_fraction()),
                           fmt(s.min_margin)},
                          true, 0));
  }
  r.extras.push_back(std::move(ex));
  return r;
}

// ---- flow-probe -------------------------------------------------------------------------------

SuiteReport flow_probe_suite(const Environment& env) {
  const json& o = env.config.suite_options("flow-probe");
  const double eps1 = option(o, "flow-probe", "epsilon1", 0.01);
  require_positive(eps1, "flow-probe", "epsilon1");
  const int samples = option(o, "flow-probe", "samples", 1000);
  const auto rep = almost_continuity_probe(env.config.roof, env.ctx, eps1, samples, suite_rng(env.config, "flow-probe")());
  SuiteReport r;
  r.header = {"epsilon1", "samples", "tested", "excluded", "excluded_fraction", "violations", "max_error", "pass"};
  const bool pass = rep.violations == 0;
  r.rows.push_back(row({fmt(eps1), fmt_i(rep.samples), fmt_i(rep.tested), fmt_i(rep.excluded),
                        fmt(rep.excluded_fraction()), fmt_i(rep.violations), fmt(rep.max_error), fmt_b(pass)},
                       pass, pass ? kInf : -kInf));  // pass/fail only: no slack to report
  return r;
}

using SuiteFn = SuiteReport (*)(const Environment&);

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> m = {
      {"dk", dk_suite},           {"three-distance", three_distance_suite}, {"lemma51", lemma51_suite},
      {"witness-case1", case1_suite}, {"dual", dual_suite},                 {"witness-case2", case2_suite},
      {"perturb", perturb_suite}, {"flow-probe", flow_probe_suite}};
  return m;
}

}  // namespace

std::int64_t SuiteReport::passes() const {
  return std::count_if(rows.begin(), rows.end(), [](const CheckRow& c) { return c.pass; });
}

double SuiteReport::worst_margin() const {
  double m = kInf;
  for (const auto& c : rows) m = std::min(m, c.margin);
  return m;
}

const std::vector<std::string>& suite_option_keys(const std::string& suite) {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"dk", {"samples", "n_max"}},
      {"three-distance", {"k_max"}},
      {"lemma51", {"s", "D", "pairs", "shift_max"}},
      {"witness-case1", {"epsilon", "N", "pairs"}},
      {"dual", {"epsilon", "N", "pairs", "eta"}},
      {"witness-case2", {"epsilon", "N", "pairs"}},
      {"perturb", {"epsilon", "N", "pairs", "scale", "sweep", "g"}},
      {"flow-probe", {"epsilon1", "samples"}},
      {"oracle", {"epsilon", "N", "pairs"}},
      {"describe", {"epsilon", "N"}}};
  static const std::vector<std::string> none;
  const auto it = keys.find(suite);
  return it == keys.end() ? none : it->second;
}

void validate_options(const Config& c) {
  for (const auto& [suite, opts] : c.options.items()) {
    const auto& allowed = suite_option_keys(suite);
    if (allowed.empty()) throw ConfigError("$.suite_options." + suite + ": unknown suite");
    if (!opts.is_object()) throw ConfigError("$.suite_options." + suite + ": expected an object");
    for (const auto& [key, v] : opts.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError("$.suite_options." + suite + "." + key + ": unknown option");
      }
    }
  }
}

RotationContext build_context(const Config& c) { return estimate_c1_c2(expand_cfrac(c.alpha, c.depth), c.k_max); }

SuiteReport run_suite(const std::string& name, const Environment& env) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteReport r;
  try {
    r = registry().at(name)(env);
    if (r.passes() != r.checks()) r.status = Status::invariant_failure;
  } catch (const ConfigError& e) {
    r.status = Status::config_error;
    r.message = e.what();
  } catch (const InputError& e) {
    r.status = Status::config_error;
    r.message = std::string("$.suites: ") + name + ": " + e.what();
  } catch (const PrecisionError& e) {
    r.status = Status::precision_failure;
    r.message = std::string(e.what()) +
                "; raise $.depth, tighten the sampling (fewer or closer pairs) or use a dyadic/rational input";
  } catch (const InvariantError& e) {
    r.status = Status::invariant_failure;
    r.message = e.what();
  }
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

int exit_code(const std::vector<SuiteReport>& reports) {
  const auto any = [&](Status s) {
    return std::any_of(reports.begin(), reports.end(), [s](const SuiteReport& r) { return r.status == s; });
  };
  if (any(Status::config_error)) return 2;
  if (any(Status::invariant_failure)) return 1;
  if (any(Status::precision_failure)) return 3;
  return 0;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex(u128 v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "0x%016llx%016llx", static_cast<unsigned long long>(v >> 64),
                static_cast<unsigned long long>(v));
  return buf;
}

std::string csv(const std::vector<std::string>& header, const std::vector<CheckRow>& rows) {
  const auto line = [](std::ostringstream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      const auto& c = cells[i];
      if (c.find_first_of(",\"\n") == std::string::npos) {
        out << c;
      } else {
        out << '"';
        for (char ch : c) out << (ch == '"' ? "\"\"" : std::string(1, ch));
        out << '"';
      }
    }
    out << '\n';
  };
  std::ostringstream out;
  line(out, header);
  for (const auto& r : rows) line(out, r.cells);
  return out.str();
}

// ---- describe ---------------------------------------------------------------------------------

std::string describe(const Environment& env) {
  const RoofFunction& f = env.config.roof;
  const RotationContext& ctx = env.ctx;
  const json& o = env.config.suite_options("describe");
  const auto eps_list = doubles(o, "describe", "epsilon", {1.0});
  const auto N = option<std::int64_t>(o, "describe", "N", 10);
  std::ostringstream out;
  const auto line = [&](const std::string& name, const std::string& value, const std::string& formula) {
    out << "  " << name;
    for (std::size_t i = name.size(); i < 14; ++i) out << ' ';
    out << value;
    for (std::size_t i = value.size(); i < 26; ++i) out << ' ';
    out << formula << '\n';
  };
  out << "rotation\n";
  line("alpha", fmt(ctx.alpha_double), "depth " + std::to_string(ctx.depth));
  line("C", std::to_string(ctx.C), "sup a_n + 1 over the expansion" + std::string(ctx.bounded_type ? "" : " (not certified)"));
  line("C1", fmt(ctx.C1()), "max k * max_gap(k), k <= " + std::to_string(env.config.k_max) + ", rounded up");
  line("C2", fmt(ctx.C2()), "min k * min_gap(k), k <= " + std::to_string(env.config.k_max) + ", rounded down");
  const auto var = variation(f);
  out << "roof\n";
  line("Var f", fmt(var.total), "Var ac + sum |d_i| + weight * Var f_s + |S~| + |wrap jump|");
  line("S~", fmt(f.S_tilde), "sawtooth slope");
  line("jumps k", std::to_string(f.jump_count()), "distinct jump points in (0,1)");
  line("integral", fmt(f.cached_integral().value), "+- " + fmt(f.cached_integral().radius));
  if (!f.singular) {
    out << "no singular part: Cantor constants and witnesses do not apply\n";
    return out.str();
  }
  line("K", std::to_string(f.singular->spec.K()), "sup m_i");
  const WitnessCase wc = case_of(f);
  out << "witness case " << (wc == WitnessCase::one ? "1" : "2") << ", N = " << N << "\n";
  for (double eps : eps_list) {
    const auto K = witness_constants(f, ctx, wc, eps, N);
    out << "epsilon = " << fmt(eps) << "\n";
    line("n0", std::to_string(K.n0) + (K.n0_clamped ? " (clamped)" : ""), "smallest n with 2K/(m_1..m_n) <= eps/4");
    if (wc == WitnessCase::one) {
      line("kappa", fmt(K.kappa), "min(C2/(C k_1^2..k_n0^2), eps/(4|S~|C), 1/(2(2C+1)(k+1)))");
    } else {
      line("b", std::to_string(K.b), "smallest b with floor(q_{s+b}/q_{s+1}) >= 6C+4");
      line("kappa", fmt(K.kappa), "min(C2/(C^b k_1^2..k_n0^2), 1/(2C+1)^b)");
    }
    line("ac const", fmt(K.ac_constant), "sum pi m |c_m| / ||m alpha||");
    line("s0", std::to_string(K.s0), "smallest s with ac_const/q_s < eps/8");
    line("s1", std::to_string(K.s1), "q_s1 above every lower bound on the starting scale");
    line("delta", fmt(K.delta), "min(1/q_s1, 1/(k_1..k_n0))");
    line("p bound", fmt(K.p_bound), "2C Var f");
    line("eta range", "(0, " + fmt(K.eta_max) + "]",
         wc == WitnessCase::one ? "min(|S~|/(5C(2C+1)(k+1)), 1/8)" : "1/8");
    line("var_limit", "eta/(8 C R2)", "R2 = max M ||x - y|| over the witness batch");
  }
  return out.str();
}

// ---- oracle -----------------------------------------------------------------------------------

SuiteReport run_oracle(const Environment& env, std::int64_t m_max) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteReport r;
  r.name = "oracle";
  try {
    const json& o = env.config.suite_options("oracle");
    const auto b = batch_options(o, "oracle", {4.0}, 20);
    const WitnessCase wc = case_of(env.config.roof);
    r.header = {"epsilon", "pair", "x", "y", "M", "L", "p", "rescore", "oracle_best_score", "oracle_perfect",
                "oracle_candidates", "degenerate", "margin", "pass", "reason"};
    auto rng = suite_rng(env.config, "oracle");
    for (double eps : b.eps) {
      const auto K = witness_constants(env.config.roof, env.ctx, wc, eps, b.N);
      for (int i = 0; i < b.pairs; ++i) {
        const auto [x, y] = sample_pair(rng, K.delta);
        try {
          const WitnessRequest req{eps, b.N, 0, x, y, wc};
          const Witness w = wc == WitnessCase::one ? construct_witness_case1(req, env.config.roof, env.ctx)
                                                   : construct_witness_case2(req, env.config.roof, env.ctx).first;
          std::string why;
          if (w.M + w.L > m_max) {
            why = "witness window ends past m_max";
          }
          double rescore = 0;
          OracleResult res;
          if (why.empty()) {
            const DifferenceTable table(env.config.roof, env.ctx, w.x, w.y, m_max);
            rescore = table.score(w.M, w.L, w.p, 0, eps);
            res = oracle_witness_search(env.config.roof, env.ctx, w.x, w.y, eps, b.N, m_max, {K.kappa});
            if (rescore != 1.0) why = "constructed witness does not re-score to 1";
            else if (res.degenerate) why = "oracle reports only p = 0";
            else if (!res.best || res.best->fraction_good != 1.0) why = "oracle found no perfect window";
          }
          const double best = res.best ? res.best->fraction_good : 0.0;
          r.rows.push_back(row({fmt(eps), fmt_i(i), hex(x), hex(y), fmt_i(w.M), fmt_i(w.L), fmt(w.p), fmt(rescore),
                                fmt(best), fmt_i(res.perfect), fmt_i(res.candidates), fmt_b(res.degenerate),
                                fmt(eps - w.max_deviation), fmt_b(why.empty()), why},
                               why.empty(), why.empty() ? eps - w.max_deviation : -kInf));
        } catch (const InvariantError& e) {
          r.rows.push_back(row({fmt(eps), fmt_i(i), hex(x), hex(y), "", "", "", "", "", "", "", "", "", "0", e.what()},
                               false, -kInf));
        }
      }
    }
    if (r.passes() != r.checks()) r.status = Status::invariant_failure;
  } catch (const ConfigError& e) {
    r.status = Status::config_error;
    r.message = e.what();
  } catch (const InputError& e) {
    r.status = Status::config_error;
    r.message = std::string("oracle: ") + e.what();
  } catch (const PrecisionError& e) {
    r.status = Status::precision_failure;
    r.message = std::string(e.what()) + "; raise $.depth or lower --m-max";
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace lab
