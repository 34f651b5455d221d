#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "lossmesh/rng.hpp"

namespace lossmesh::sim {

enum class ProbeSampling {
  WithReplacement,     // d i.i.d. uniform probes; the same server may repeat
  WithoutReplacement,  // uniform d-subset; needs d <= N
};

// Power-of-d: probe d servers, send the job to the least occupied probe
// (uniform among probes tied at the minimum). nullopt means the job is
// blocked because every probe holds `capacity` jobs. ValidationError if
// d < 1, or d > N without replacement.
std::optional<std::size_t> route_power_of_d(std::span<const int> occupancy, int capacity, int d,
                                            ProbeSampling sampling, Rng& rng);

// Occupancy, capacity and type of every server, indexed alike.
struct ServerView {
  std::span<const int> occupancy;
  std::span<const int> capacity;
  std::span<const int> type;
};

// Max-vacancy power-of-d for mixed capacities: the probe with most free slots
// wins; ties across types go to the larger capacity (then the larger type
// index), ties within a type are uniform. nullopt iff every probe is full.
// With a single type it makes the same decisions and consumes the same random
// numbers as route_power_of_d.
std::optional<std::size_t> route_max_vacancy(const ServerView& servers, int d, ProbeSampling sampling, Rng& rng);

}  // namespace lossmesh::sim
