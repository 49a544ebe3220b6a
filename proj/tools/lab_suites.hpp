// Verification suites run by ratner-lab. Each suite returns value results; reports are merged afterwards.
#pragma once

#include "lab_config.hpp"

#include <string>
#include <vector>

namespace lab {

enum class Status { ok, invariant_failure, config_error, precision_failure };

struct CheckRow {
  std::vector<std::string> cells;
  bool pass = true;
  double margin = 0;  ///< distance to the violated side; negative on failure
};

struct SuiteReport {
  std::string name;
  std::vector<std::string> header;
  std::vector<CheckRow> rows;
  /// Additional CSV files written next to the main one: (file name, header, rows).
  struct Extra {
    std::string file;
    std::vector<std::string> header;
    std::vector<CheckRow> rows;
  };
  std::vector<Extra> extras;
  Status status = Status::ok;
  std::string message;
  double seconds = 0;

  std::int64_t checks() const { return static_cast<std::int64_t>(rows.size()); }
  std::int64_t passes() const;
  double worst_margin() const;
};

/// Everything a suite needs, shared read-only across threads.
struct Environment {
  const Config& config;
  const ratner::RotationContext& ctx;
};

ratner::RotationContext build_context(const Config& c);

/// Runs one suite, turning library exceptions into a status.
SuiteReport run_suite(const std::string& name, const Environment& env);

/// Suite option keys, for schema checks on suite_options.
const std::vector<std::string>& suite_option_keys(const std::string& suite);
void validate_options(const Config& c);

/// Combined exit status: config errors first, then invariant failures, then precision failures.
int exit_code(const std::vector<SuiteReport>& reports);

std::string fmt(double v);
std::string hex(ratner::u128 v);
std::string csv(const std::vector<std::string>& header, const std::vector<CheckRow>& rows);

/// Constant derivations printed by the describe command.
std::string describe(const Environment& env);

/// Re-scores constructed witnesses with the brute-force search; the report is named "oracle".
SuiteReport run_oracle(const Environment& env, std::int64_t m_max);

}  // namespace lab
