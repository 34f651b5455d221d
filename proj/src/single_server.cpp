#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/random/exponential_distribution.hpp>

#include "lossmesh/errors.hpp"
#include "lossmesh/simulator.hpp"
#include "recorder.hpp"

namespace lossmesh::sim {

namespace {

struct Job {
  double admitted;
  double departs;
};

}  // namespace

SimStats run_single_server(const StateDepArrivalLaw& law, const SingleServerConfig& config) {
  law.validate();
  const double warmup = config.t_warmup < 0.0 ? 0.5 * config.t_total : config.t_warmup;
  if (!(config.t_total > 0.0) || warmup >= config.t_total) {
    throw ValidationError("t_warmup", "must lie in [0, t_total)");
  }
  if (config.batches < 1) throw ValidationError("batches", "must be >= 1");

  const int capacity = law.capacity();
  SimStats stats;
  stats.capacities = {capacity};
  stats.servers_per_type = {1};
  stats.level_offsets = {0, static_cast<std::size_t>(capacity) + 1};
  detail::Recorder recorder(stats, warmup, config.t_total, config.batches, config.snapshot_interval, {});

  Rng arrival_rng = make_rng(config.seed, 0, Stream::Arrivals);
  Rng service_rng = make_rng(config.seed, 0, Stream::Service);
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(capacity));

  auto snapshot = [&](double t) {
    Snapshot snap;
    snap.time = t;
    snap.max_ages.assign(stats.levels(), {});
    snap.counts.assign(stats.levels(), 0);
    const std::size_t n = jobs.size();
    ++snap.counts[n];
    if (n > 0) {
      double oldest = t;
      for (const Job& j : jobs) oldest = std::min(oldest, j.admitted);
      snap.max_ages[n].push_back(t - oldest);
    }
    return snap;
  };

  // Arrival clock is redrawn after every event; exponential clocks are
  // memoryless, so this realizes rate alpha_n between events.
  auto next_arrival = [&](double now) {
    const std::size_t n = jobs.size();
    if (n >= static_cast<std::size_t>(capacity) || law.alpha[n] <= 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    return now + boost::random::exponential_distribution<double>(law.alpha[n])(arrival_rng);
  };

  double now = 0.0;
  double arrival_at = next_arrival(now);
  while (true) {
    auto soonest = std::min_element(jobs.begin(), jobs.end(),
                                    [](const Job& a, const Job& b) { return a.departs < b.departs; });
    const double departure_at = soonest == jobs.end() ? std::numeric_limits<double>::infinity() : soonest->departs;
    const double t = std::min(arrival_at, departure_at);
    if (t > config.t_total) break;
    recorder.observe_until(t, snapshot);
    const std::size_t n = jobs.size();
    if (arrival_at <= departure_at) {
      recorder.move(n, n + 1, t);
      jobs.push_back({t, t + law.dist.sample(service_rng)});
      ++stats.arrivals;
      ++stats.admissions;
      recorder.arrival(false);
    } else {
      recorder.move(n, n - 1, t);
      *soonest = jobs.back();
      jobs.pop_back();
      ++stats.departures;
    }
    now = t;
    arrival_at = next_arrival(now);
  }
  recorder.observe_until(config.t_total, snapshot);
  return stats;
}

}  // namespace lossmesh::sim
