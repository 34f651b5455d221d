#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "lossmesh/insensitive_law.hpp"
#include "lossmesh/routing.hpp"
#include "lossmesh/service_dist.hpp"

namespace lossmesh::sim {

// Capacity classes for the heterogeneous cluster; type k gets round(gamma_k N)
// servers (the last type takes the remainder).
struct ServerMix {
  std::vector<double> gamma;
  std::vector<int> capacity;

  bool operator==(const ServerMix&) const = default;
};

struct SimConfig {
  int servers = 1;
  double lambda = 1.0;  // arrival rate per server; the cluster sees N*lambda
  int d = 1;
  ProbeSampling sampling = ProbeSampling::WithReplacement;
  int capacity = 1;                // homogeneous clusters
  std::optional<ServerMix> mix;    // set: max-vacancy routing over typed servers
  ServiceDistribution service = ServiceDistribution::exponential(1.0);
  double t_total = 1000.0;
  double t_warmup = -1.0;  // negative: t_total / 2
  std::uint64_t seed = 1;
  std::uint64_t replication = 0;
  int batches = 20;
  double snapshot_interval = 0.0;     // > 0: age snapshots every interval after warm-up
  std::vector<double> sample_times;   // occupancy fractions recorded at these times
  bool check_invariants = false;      // verify cluster invariants after every event

  void validate() const;
  double warmup() const noexcept { return t_warmup < 0.0 ? 0.5 * t_total : t_warmup; }
};

// Servers with n jobs at a snapshot, by type and level.
struct Snapshot {
  double time = 0.0;
  // max job age of every server, grouped by flat level index; sorted.
  std::vector<std::vector<double>> max_ages;
  std::vector<long> counts;  // servers per flat level index

  bool operator==(const Snapshot&) const = default;
};

// Everything a run measures. Levels are flattened per type: level index
// level_offsets[k] + n is "type k with n jobs".
struct SimStats {
  std::vector<int> capacities;                // per type
  std::vector<long> servers_per_type;
  std::vector<std::size_t> level_offsets;
  int d = 1;
  double warmup = 0.0;
  double batch_length = 0.0;
  // Integral over each batch of the number of servers at each level.
  std::vector<std::vector<double>> batch_level_time;
  std::vector<long> batch_arrivals;
  std::vector<long> batch_blocks;
  long arrivals = 0;
  long admissions = 0;
  long blocks = 0;
  long departures = 0;
  std::vector<Snapshot> snapshots;
  std::vector<double> sample_times;
  std::vector<std::vector<double>> samples;  // per sample time, fraction of each type's servers per level

  int types() const noexcept { return static_cast<int>(capacities.size()); }
  std::size_t levels() const noexcept { return level_offsets.back(); }

  bool operator==(const SimStats&) const = default;
};

// One replication of the finite-N loss cluster, single-threaded and fully
// determined by (config, seed, replication). All servers start empty.
SimStats run(const SimConfig& config);

struct Estimate {
  std::vector<double> value;
  std::vector<double> se;  // batch-means standard errors
};

// Time-weighted fraction of type-k servers with n = 0..C_k jobs.
// EstimationError with fewer than 2 batches.
Estimate occupancy_estimate(const SimStats& stats, int type = 0);

struct BlockingEstimate {
  double fraction = 0.0;    // blocked arrivals / arrivals in the measurement window
  double se = 0.0;
  double full_fraction = 0.0;  // time-average fraction of full servers, all types
  double predicted = 0.0;   // full_fraction^d
  double diff_se = 0.0;     // batch-means SE of (blocked fraction - full_fraction^d)
};
BlockingEstimate blocking_estimate(const SimStats& stats);

// Snapshot average of (1/N_k) #{type-k servers with exactly n jobs, all ages <= y}
// for each y in `y_grid`. DomainError if n > C_k; EstimationError without
// at least 2 snapshots.
Estimate age_cdf_estimate(const SimStats& stats, int n, const std::vector<double>& y_grid, int type = 0);

struct TransientTrace {
  std::vector<double> times;
  std::vector<std::vector<double>> mean;  // [time][level]
  std::vector<std::vector<double>> se;
  std::size_t replications = 0;
};

// Occupancy fractions at `sample_times` averaged over replications
// 0..replications-1 of `config` (same seed, distinct replication index).
TransientTrace transient_trace(const SimConfig& config, const std::vector<double>& sample_times,
                               std::size_t replications, std::size_t threads = 1);

struct SingleServerConfig {
  double t_total = 1e5;
  double t_warmup = -1.0;  // negative: t_total / 2
  std::uint64_t seed = 1;
  int batches = 20;
  double snapshot_interval = 1.0;
};

// Single server with state-dependent Poisson arrivals (rate alpha_n with n jobs
// present, none at n = C) and general service. The returned stats have one
// server of one type.
SimStats run_single_server(const StateDepArrivalLaw& law, const SingleServerConfig& config);

}  // namespace lossmesh::sim
