// Experiment configuration: one JSON document describing alpha, the roof and the suites to run.
#pragma once

#include "ratner/perturb.hpp"
#include "ratner/specialflow.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lab {

using json = nlohmann::json;

/// Schema violation; the message starts with the JSON path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  json raw;
  ratner::Irrational alpha;
  int depth = 60;
  int k_max = 5000;  ///< three-distance range for C1, C2
  ratner::RoofFunction roof;
  std::uint64_t seed = 1;
  std::vector<std::string> suites;
  json options = json::object();  ///< per-suite options keyed by suite name
  std::string out_dir = "ratner-out";

  /// Options of one suite, empty when absent.
  const json& suite_options(const std::string& suite) const;
};

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s = {"dk",    "three-distance", "lemma51", "witness-case1", "witness-case2",
                                             "dual",  "perturb",        "flow-probe"};
  return s;
}

ratner::Irrational parse_irrational(const json& j, const std::string& path);
ratner::CantorSpec parse_cantor(const json& j, const std::string& path);
/// [[a1, b1], [a2, b2], ...]
ratner::TrigPolynomial parse_trig(const json& j, const std::string& path);
ratner::RoofFunction parse_roof(const json& j, const std::string& path);
Config parse_config(const json& j);
Config load_config(const std::string& file);

/// Typed option lookup with a default and a path-qualified error.
template <class T>
T option(const json& o, const std::string& suite, const char* key, T fallback) {
  if (!o.is_object() || !o.contains(key)) return fallback;
  try {
    return o.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("$.suite_options." + suite + "." + key + ": wrong type");
  }
}

json to_json(const ratner::Witness& w);

}  // namespace lab
