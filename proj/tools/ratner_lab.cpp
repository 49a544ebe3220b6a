// ratner-lab: runs verification suites from a JSON experiment file and writes CSV/JSON reports.
#include "lab_suites.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

namespace fs = std::filesystem;
using namespace lab;

namespace {

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

/// Runs suites with at most `jobs` in flight; results keep the configured order.
std::vector<SuiteReport> run_all(const Environment& env, int jobs) {
  const auto& names = env.config.suites;
  std::vector<SuiteReport> out(names.size());
  std::size_t next = 0;
  while (next < names.size()) {
    std::vector<std::future<SuiteReport>> wave;
    const std::size_t first = next;
    for (; next < names.size() && static_cast<int>(next - first) < jobs; ++next) {
      wave.push_back(std::async(std::launch::async, [&env, name = names[next]] { return run_suite(name, env); }));
    }
    for (std::size_t i = 0; i < wave.size(); ++i) out[first + i] = wave[i].get();
  }
  return out;
}

void write_reports(const fs::path& dir, const std::vector<SuiteReport>& reports) {
  fs::create_directories(dir);
  json summary = json::object(), timings = json::object();
  for (const auto& r : reports) {
    json s = {{"checks", r.checks()}, {"passes", r.passes()}};
    const double wm = r.worst_margin();
    s["worst_margin"] = std::isfinite(wm) ? json(wm) : json(nullptr);
    s["status"] = r.status == Status::ok                  ? "pass"
                  : r.status == Status::invariant_failure ? "invariant-failure"
                  : r.status == Status::config_error      ? "config-error"
                                                          : "precision-failure";
    if (!r.message.empty()) s["message"] = r.message;
    summary[r.name] = s;
    timings[r.name] = r.seconds;
    if (!r.header.empty()) write_file(dir / (r.name + ".csv"), csv(r.header, r.rows));
    for (const auto& e : r.extras) write_file(dir / e.file, csv(e.header, e.rows));
  }
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  // Wall times change between runs, so they stay out of the deterministic reports.
  write_file(dir / "timings.json", timings.dump(2) + "\n");
}

void print_summary(const std::vector<SuiteReport>& reports) {
  for (const auto& r : reports) {
    std::cout << r.name << ": " << r.passes() << "/" << r.checks() << " checks pass";
    if (r.checks() > 0) std::cout << ", worst margin " << fmt(r.worst_margin());
    std::cout << "\n";
    if (!r.message.empty()) std::cerr << r.name << ": " << r.message << "\n";
  }
}

std::string output_dir(const Config& c, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv("RATNER_LAB_OUT"); env && *env) return env;
  return c.out_dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ratner-lab: certified experiments for special flows over rotations"};
  app.require_subcommand(1);
  std::string config_file, out_dir;
  int jobs = 1;
  std::int64_t m_max = 10000;

  auto* run = app.add_subcommand("run", "run the configured suites and write reports");
  run->add_option("--config", config_file, "experiment JSON")->required();
  run->add_option("--jobs", jobs, "suites run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory (else RATNER_LAB_OUT, else $.output.dir)");

  auto* desc = app.add_subcommand("describe", "print every derived constant with its formula");
  desc->add_option("--config", config_file, "experiment JSON")->required();

  auto* orc = app.add_subcommand("oracle", "re-score constructed witnesses by brute-force search");
  orc->add_option("--config", config_file, "experiment JSON")->required();
  orc->add_option("--m-max", m_max, "largest window end searched")->check(CLI::PositiveNumber);
  orc->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  Config cfg;
  try {
    cfg = load_config(config_file);
    validate_options(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    const ratner::RotationContext ctx = build_context(cfg);
    const Environment env{cfg, ctx};
    if (*desc) {
      std::cout << describe(env);
      return 0;
    }
    if (*orc) {
      std::vector<SuiteReport> reports{run_oracle(env, m_max)};
      write_reports(output_dir(cfg, out_dir), reports);
      print_summary(reports);
      return exit_code(reports);
    }
    const auto reports = run_all(env, jobs);
    write_reports(output_dir(cfg, out_dir), reports);
    print_summary(reports);
    return exit_code(reports);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ratner::InputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ratner::PrecisionError& e) {
    std::cerr << "precision failure: " << e.what() << "; raise $.depth or $.k_max resolution\n";
    return 3;
  } catch (const ratner::InvariantError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return 1;
  }
}
