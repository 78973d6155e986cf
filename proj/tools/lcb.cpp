#include "lcb/harness.hpp"
#include "lcb/validate.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <iostream>

namespace {

using lcb::harness::ConfigError;

int cmd_run(const std::string& config) {
  auto cfg = lcb::harness::load_config(config);
  auto outcome = lcb::harness::run(cfg, config);
  std::cout << "wrote " << outcome.directory.string() << '\n';
  for (const auto& s : outcome.seeds) {
    if (!s.error.empty())
      std::cout << "seed " << s.seed << ": error: " << s.error << '\n';
    else
      std::cout << "seed " << s.seed << ": " << (cfg.mode == lcb::harness::Mode::UniformConvergence ? "gap " : "regret ")
                << lcb::format_double(s.regret) << '\n';
  }
  for (const auto& c : outcome.checks)
    if (!c.passed) std::cout << "FAILED " << c.name << (c.seed ? " seed " + std::to_string(*c.seed) : "") << ": " << c.detail << '\n';
  return outcome.passed ? 0 : 1;
}

int cmd_validate(const std::string& suite, const lcb::validate::Options& opt) {
  std::vector<std::string> names;
  if (suite == "all")
    names = lcb::validate::suites();
  else
    names = {suite};
  nlohmann::json report{{"suites", nlohmann::json::object()}, {"passed", true}};
  for (const auto& name : names) {
    auto checks = lcb::validate::run_suite(name, opt);
    auto& arr = report["suites"][name] = nlohmann::json::array();
    for (const auto& c : checks) {
      arr.push_back(lcb::harness::to_json(c));
      if (!c.passed) report["passed"] = false;
    }
  }
  std::cout << report.dump(2) << '\n';
  return report["passed"].get<bool>() ? 0 : 1;
}

int cmd_replay(const std::string& trace) {
  auto mismatches = lcb::harness::replay(trace);
  if (mismatches.empty()) {
    std::cout << "replay identical: " << trace << '\n';
    return 0;
  }
  for (const auto& m : mismatches) std::cout << "replay differs: " << m << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear contextual bandits via misspecified linear bandits"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "run the experiment described by an INI config");
  run->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);

  std::string suite;
  lcb::validate::Options vopt;
  std::string fixtures = LCB_FIXTURE_DIR;
  auto* val = app.add_subcommand("validate", "run a self-check suite");
  val->add_option("suite", suite, "geometry, sampler, estimator, convergence, regret or all")->required();
  val->add_flag("--corrupt", vopt.corrupt, "perturb one expected fixture vertex by 1e-3");
  val->add_option("--fixtures", fixtures, "fixture directory");
  val->add_option("--seed", vopt.seed, "seed");

  std::string trace;
  auto* rep = app.add_subcommand("replay", "re-run the seed behind a trace file and compare outputs");
  rep->add_option("trace", trace, "trace_seed<N>.csv from a previous run")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config);
    if (*val) {
      vopt.fixtures = fixtures;
      return cmd_validate(suite, vopt);
    }
    if (*rep) return cmd_replay(trace);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
