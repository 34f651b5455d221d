#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lossmesh/errors.hpp"
#include "lossmesh/routing.hpp"
#include "lossmesh/service_dist.hpp"
#include "lossmesh/simulator.hpp"

namespace lossmesh {

enum class Mode { FixedPoint, OdeExp, OdePhase, OdeHetero, Simulate, Insensitivity, Transient };

std::string to_string(Mode mode);
// ValidationError for an unknown name.
Mode parse_mode(const std::string& name);

// Config problem with the path of the offending field and, when known, the
// 1-based line in the source text (0 when unknown).
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string field, const std::string& what, int line);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct ExperimentConfig {
  Mode mode = Mode::FixedPoint;

  struct System {
    double lambda = 1.0;
    double mu = 1.0;
    int capacity = 1;
    int d = 2;
    // Service laws: simulate/transient/ode_phase use the first, insensitivity
    // all of them. Empty means exponential(mu).
    std::vector<ServiceDistribution> services;
    std::optional<sim::ServerMix> profile;
    sim::ProbeSampling sampling = sim::ProbeSampling::WithReplacement;
    bool operator==(const System&) const = default;
  } system;

  struct Run {
    std::vector<int> servers{1000};
    double t_total = 1000.0;
    double t_warmup = -1.0;
    int replications = 1;
    std::uint64_t seed = 1;
    int batches = 20;
    double snapshot_interval = 5.0;
    bool operator==(const Run&) const = default;
  } run;

  struct Numerics {
    double dt = 1e-3;
    double t_ode = 200.0;
    double tolerance = 1e-13;
    long max_iter = 1'000'000;
    long out_every = 100;
    int initial_points = 4;
    bool full_state = false;
    bool operator==(const Numerics&) const = default;
  } numerics;

  struct Output {
    std::string dir = "out";
    std::vector<double> y_grid;
    std::vector<double> sample_times;
    double threshold = 0.02;
    bool operator==(const Output&) const = default;
  } output;

  // Throws ConfigError (line 0) on inconsistent values.
  void validate() const;
  // Service laws with the empty-list default applied.
  std::vector<ServiceDistribution> effective_services() const;

  bool operator==(const ExperimentConfig&) const = default;
};

// Strict parse: unknown keys, wrong types and out-of-range values raise
// ConfigError naming the field and its line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical JSON text (sorted keys, every field present). Parsing it back
// yields an equal config.
std::string to_json(const ExperimentConfig& config);
// FNV-1a over the canonical JSON with output.dir cleared, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace lossmesh
