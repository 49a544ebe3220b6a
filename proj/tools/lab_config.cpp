#include "lab_config.hpp"

#include <fstream>

namespace lab {

using namespace ratner;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  if (!j.contains(key)) fail(path + "." + key, "missing");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::int64_t integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

Rational rational(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (!j.is_string()) fail(path, "expected a rational string \"p/q\"");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

std::vector<int> int_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(static_cast<int>(integer(j[i], path + "[" + std::to_string(i) + "]")));
  return out;
}

}  // namespace

const json& Config::suite_options(const std::string& suite) const {
  static const json empty = json::object();
  return options.contains(suite) ? options.at(suite) : empty;
}

Irrational parse_irrational(const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "golden") return Irrational::golden();
    if (s == "silver") return Irrational::silver();
    fail(path, "unknown name '" + s + "' (golden, silver or an object)");
  }
  const auto kind = field(j, path, "kind");
  if (kind == "quadratic") {
    const Rational a = rational(field(j, path, "a"), path + ".a");
    const Rational b = rational(field(j, path, "b"), path + ".b");
    const std::int64_t d = integer(field(j, path, "d"), path + ".d");
    try {
      return Irrational::quadratic(a, b, BigInt(d));
    } catch (const InputError& e) {
      fail(path, e.what());
    }
  }
  if (kind == "cfrac") {
    const json& dj = field(j, path, "digits");
    if (!dj.is_array()) fail(path + ".digits", "expected an array");
    std::vector<std::int64_t> digits;
    for (std::size_t i = 0; i < dj.size(); ++i) digits.push_back(integer(dj[i], path + ".digits[" + std::to_string(i) + "]"));
    const auto start = j.contains("period_start") ? integer(j.at("period_start"), path + ".period_start") : 0;
    try {
      return Irrational::cfrac(digits, static_cast<std::size_t>(start));
    } catch (const InputError& e) {
      fail(path, e.what());
    }
  }
  fail(path + ".kind", "expected \"quadratic\" or \"cfrac\"");
}

CantorSpec parse_cantor(const json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "middle-thirds") return CantorSpec::middle_thirds();
    fail(path, "unknown name (middle-thirds or an object)");
  }
  CantorSpec spec;
  spec.m = int_list(field(j, path, "m"), path + ".m");
  spec.k = int_list(field(j, path, "k"), path + ".k");
  if (j.contains("pattern")) {
    const json& pj = j.at("pattern");
    if (!pj.is_array()) fail(path + ".pattern", "expected an array of arrays");
    for (std::size_t i = 0; i < pj.size(); ++i) spec.pattern.push_back(int_list(pj[i], path + ".pattern[" + std::to_string(i) + "]"));
  }
  if (j.contains("orientation")) {
    const json& o = j.at("orientation");
    if (o == "inc") {
      spec.orientation = Orientation::increasing;
    } else if (o == "dec") {
      spec.orientation = Orientation::decreasing;
    } else {
      fail(path + ".orientation", "expected \"inc\" or \"dec\"");
    }
  }
  if (j.contains("depth")) spec.depth = static_cast<int>(integer(j.at("depth"), path + ".depth"));
  try {
    spec.validate();
  } catch (const InputError& e) {
    fail(path, e.what());
  }
  return spec;
}

TrigPolynomial parse_trig(const json& cs, const std::string& path) {
  if (!cs.is_array()) fail(path, "expected [[a1,b1],[a2,b2],...]");
  TrigPolynomial t;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!cs[i].is_array() || cs[i].size() != 2) fail(p, "expected [a, b]");
    t.coeffs.emplace_back(number(cs[i][0], p + "[0]"), number(cs[i][1], p + "[1]"));
  }
  return t;
}

RoofFunction parse_roof(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  RoofFunction f;
  if (j.contains("ac")) {
    const json& a = j.at("ac");
    if (field(a, path + ".ac", "kind") != "trig") fail(path + ".ac.kind", "only \"trig\" is supported");
    f.ac = parse_trig(field(a, path + ".ac", "coeffs"), path + ".ac.coeffs");
  }
  if (j.contains("c")) f.c = number(j.at("c"), path + ".c");
  if (j.contains("jumps")) {
    const json& js = j.at("jumps");
    if (!js.is_array()) fail(path + ".jumps", "expected an array");
    for (std::size_t i = 0; i < js.size(); ++i) {
      const std::string p = path + ".jumps[" + std::to_string(i) + "]";
      const Rational beta = rational(field(js[i], p, "beta"), p + ".beta");
      if (beta < 0 || beta >= 1) fail(p + ".beta", "must lie in [0, 1)");
      f.jumps.push_back(RoofFunction::make_jump(beta, number(field(js[i], p, "d"), p + ".d")));
    }
  }
  if (j.contains("singular")) {
    const json& s = j.at("singular");
    SingularPart sp{parse_cantor(field(s, path + ".singular", "spec"), path + ".singular.spec"), 1.0};
    if (s.contains("weight")) sp.weight = number(s.at("weight"), path + ".singular.weight");
    f.singular = sp;
  }
  if (j.contains("S_tilde")) f.S_tilde = number(j.at("S_tilde"), path + ".S_tilde");
  f.floor = number(field(j, path, "floor"), path + ".floor");
  try {
    f.prepare();
  } catch (const InputError& e) {
    fail(path, e.what());
  }
  return f;
}

Config parse_config(const json& j) {
  if (!j.is_object()) fail("$", "expected an object");
  Config c;
  c.raw = j;
  c.alpha = parse_irrational(field(j, "$", "rotation"), "$.rotation");
  if (j.contains("depth")) c.depth = static_cast<int>(integer(j.at("depth"), "$.depth"));
  if (c.depth < 2 || c.depth > 90) fail("$.depth", "must lie in [2, 90]");
  if (j.contains("k_max")) c.k_max = static_cast<int>(integer(j.at("k_max"), "$.k_max"));
  if (c.k_max < 1) fail("$.k_max", "must be positive");
  c.roof = parse_roof(field(j, "$", "roof"), "$.roof");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("$.seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("suites")) {
    const json& s = j.at("suites");
    if (!s.is_array()) fail("$.suites", "expected an array of names");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string p = "$.suites[" + std::to_string(i) + "]";
      if (!s[i].is_string()) fail(p, "expected a suite name");
      const auto name = s[i].get<std::string>();
      if (std::find(known_suites().begin(), known_suites().end(), name) == known_suites().end()) {
        fail(p, "unknown suite '" + name + "'");
      }
      c.suites.push_back(name);
    }
  }
  if (j.contains("suite_options")) {
    if (!j.at("suite_options").is_object()) fail("$.suite_options", "expected an object");
    c.options = j.at("suite_options");
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) fail("$.output.dir", "expected a string");
      c.out_dir = o.at("dir").get<std::string>();
    }
  }
  return c;
}

Config load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file + ": cannot open");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(file + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const Witness& w) {
  json d = {{"s", w.diag.s},
            {"n0", w.diag.n0},
            {"M0", w.diag.M0},
            {"K0", w.diag.K0},
            {"bad_times", w.diag.bad_times},
            {"dev_singular", w.diag.dev_singular},
            {"dev_pl", w.diag.dev_pl},
            {"dev_ac", w.diag.dev_ac},
            {"slow_terms", w.diag.slow_terms}};
  if (w.shift != 0) {
    d["l0"] = w.diag.l0;
    d["H_l0"] = w.diag.H_l0;
    d["R0"] = w.diag.R0;
    d["H_R0"] = w.diag.H_R0;
  }
  if (w.diag.b > 0) {
    d["b"] = w.diag.b;
    d["returns"] = w.diag.returns;
    d["return_jumps"] = w.diag.return_jumps;
    d["interval_index"] = w.diag.interval_index;
    d["j_t"] = w.diag.j_t;
  }
  return {{"M", w.M},         {"L", w.L},         {"p", w.p},
          {"kappa", w.kappa}, {"shift", w.shift}, {"fraction_good", w.fraction_good},
          {"diagnostics", d}};
}

}  // namespace lab
