#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lossmesh/config.hpp"
#include "lossmesh/result_table.hpp"

namespace lossmesh {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides output.dir
  std::optional<std::uint64_t> seed;             // overrides run.seed
  std::size_t threads = 1;
  bool write = true;  // write every table as <dir>/<name>.csv
};

struct ExperimentResult {
  std::vector<ResultTable> tables;
  bool pass = true;  // verdict of modes that check a threshold
  std::vector<std::filesystem::path> files;

  const ResultTable& table(const std::string& name) const;
};

// Dispatches on config.mode. Output is a pure function of the config (seed
// included); thread count only changes wall time.
ExperimentResult run_experiment(ExperimentConfig config, const RunOptions& options = {});

// Exponential occupancy ODE from q0, sampled at increasing `times` (the
// first may be 0). Each gap is split into equal RK4 steps no longer than dt.
std::vector<std::vector<double>> exp_ode_at(std::vector<double> q0, double lambda, double mu, int d,
                                            const std::vector<double>& times, double dt);

std::vector<std::string> level_columns(const std::string& prefix, int capacity);

// Sup over all entries of |a - b|.
double sup_diff(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace lossmesh
