#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "lossmesh/config.hpp"
#include "lossmesh/errors.hpp"
#include "lossmesh/experiment.hpp"
#include "lossmesh/verify.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kEngineError = 2, kVerifyFailed = 3 };

int run_mode(const std::string& mode, const std::string& config_path, const std::optional<std::string>& out,
             const std::optional<std::uint64_t>& seed, std::size_t threads) {
  lossmesh::ExperimentConfig config;
  try {
    config = lossmesh::load_config(config_path);
    if (lossmesh::to_string(config.mode) != mode) {
      throw lossmesh::ConfigError("mode", "config declares mode '" + lossmesh::to_string(config.mode) +
                                              "' but the command is '" + mode + "'", 0);
    }
  } catch (const lossmesh::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  lossmesh::RunOptions options;
  if (out) options.out_dir = *out;
  options.seed = seed;
  options.threads = threads;
  try {
    const auto result = lossmesh::run_experiment(config, options);
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    if (!result.pass) {
      std::cout << mode << ": threshold check failed\n";
      return kVerifyFailed;
    }
  } catch (const lossmesh::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "engine error: " << e.what() << '\n';
    return kEngineError;
  }
  return kOk;
}

int run_verify(const std::optional<std::string>& config_path, const std::optional<std::string>& out,
               const std::optional<std::uint64_t>& seed, std::size_t threads, const std::vector<int>& only) {
  lossmesh::VerifyOptions options;
  options.threads = threads;
  if (config_path) {
    try {
      const auto config = lossmesh::load_config(*config_path);
      options.out_dir = config.output.dir;
      options.seed = config.run.seed;
    } catch (const lossmesh::ValidationError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfigError;
    }
  }
  if (out) options.out_dir = *out;
  if (seed) options.seed = *seed;
  for (int id : only) {
    if (id < 1 || id > lossmesh::kCriteria) {
      std::cerr << "config error: no acceptance criterion " << id << '\n';
      return kConfigError;
    }
  }
  const auto results = lossmesh::run_acceptance(options, only, [](const lossmesh::CriterionResult& r) {
    std::cout << lossmesh::format_result(r) << std::endl;
  });
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.pass;
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  return passed == results.size() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field and simulation engines for power-of-d loss systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<int> only;

  const char* modes[] = {"fixedpoint", "ode_exp", "ode_phase", "ode_hetero", "simulate", "insensitivity", "transient"};
  for (const char* m : modes) {
    auto* sub = app.add_subcommand(m, std::string("run the ") + m + " experiment");
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "base seed (overrides run.seed)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }
  std::optional<std::string> verify_config;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--config", verify_config, "config supplying output.dir and run.seed");
  verify->add_option("--out", out, "directory for CSV artifacts");
  verify->add_option("--seed", seed, "base seed");
  verify->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  verify->add_option("--only", only, "run only these criteria (1-11)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (verify->parsed()) return run_verify(verify_config, out, seed, threads, only);
  for (const char* m : modes) {
    if (app.got_subcommand(m)) return run_mode(m, config_path, out, seed, threads);
  }
  return kConfigError;
}
