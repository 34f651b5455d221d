#include "lossmesh/routing.hpp"

#include <array>
#include <tuple>
#include <vector>

#include <boost/random/uniform_int_distribution.hpp>

#include "lossmesh/errors.hpp"

namespace lossmesh::sim {

namespace {

void check_probe_count(std::size_t servers, int d, ProbeSampling sampling) {
  if (servers == 0) throw ValidationError("servers", "need at least one server");
  if (d < 1) throw ValidationError("d", "must be >= 1");
  if (sampling == ProbeSampling::WithoutReplacement && static_cast<std::size_t>(d) > servers) {
    throw ValidationError("d", "cannot probe more servers than exist without replacement");
  }
}

// Draws the d probes, then keeps the best one with a running uniform choice
// among ties. `better(a, b)` / `same(a, b)` compare two server indices.
template <class Better, class Same>
std::size_t pick_best(std::size_t servers, int d, ProbeSampling sampling, Rng& rng, Better better, Same same) {
  boost::random::uniform_int_distribution<std::size_t> uniform(0, servers - 1);
  std::array<std::size_t, 16> small{};
  std::vector<std::size_t> large;
  std::size_t* probes = small.data();
  if (static_cast<std::size_t>(d) > small.size()) {
    large.resize(static_cast<std::size_t>(d));
    probes = large.data();
  }
  for (int i = 0; i < d; ++i) {
    std::size_t candidate = uniform(rng);
    if (sampling == ProbeSampling::WithoutReplacement) {
      for (bool fresh = false; !fresh;) {
        fresh = true;
        for (int j = 0; j < i; ++j) {
          if (probes[j] == candidate) {
            fresh = false;
            candidate = uniform(rng);
            break;
          }
        }
      }
    }
    probes[i] = candidate;
  }

  std::size_t best = probes[0];
  std::size_t ties = 1;
  for (int i = 1; i < d; ++i) {
    const std::size_t s = probes[i];
    if (better(s, best)) {
      best = s;
      ties = 1;
    } else if (same(s, best)) {
      ++ties;
      if (boost::random::uniform_int_distribution<std::size_t>(0, ties - 1)(rng) == 0) best = s;
    }
  }
  return best;
}

}  // namespace

std::optional<std::size_t> route_power_of_d(std::span<const int> occupancy, int capacity, int d,
                                            ProbeSampling sampling, Rng& rng) {
  check_probe_count(occupancy.size(), d, sampling);
  const std::size_t best = pick_best(
      occupancy.size(), d, sampling, rng, [&](std::size_t a, std::size_t b) { return occupancy[a] < occupancy[b]; },
      [&](std::size_t a, std::size_t b) { return occupancy[a] == occupancy[b]; });
  if (occupancy[best] >= capacity) return std::nullopt;
  return best;
}

std::optional<std::size_t> route_max_vacancy(const ServerView& servers, int d, ProbeSampling sampling, Rng& rng) {
  check_probe_count(servers.occupancy.size(), d, sampling);
  auto key = [&](std::size_t s) {
    return std::tuple(servers.capacity[s] - servers.occupancy[s], servers.capacity[s], servers.type[s]);
  };
  const std::size_t best = pick_best(
      servers.occupancy.size(), d, sampling, rng, [&](std::size_t a, std::size_t b) { return key(a) > key(b); },
      [&](std::size_t a, std::size_t b) { return key(a) == key(b); });
  if (servers.occupancy[best] >= servers.capacity[best]) return std::nullopt;
  return best;
}

}  // namespace lossmesh::sim
