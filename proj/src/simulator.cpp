#include "lossmesh/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>

#include <boost/random/exponential_distribution.hpp>

#include "lossmesh/errors.hpp"
#include "lossmesh/parallel.hpp"
#include "recorder.hpp"

namespace lossmesh::sim {

void SimConfig::validate() const {
  if (servers < 1) throw ValidationError("servers", "must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda", "must be positive");
  if (d < 1) throw ValidationError("d", "must be >= 1");
  if (sampling == ProbeSampling::WithoutReplacement && d > servers) {
    throw ValidationError("d", "cannot exceed the number of servers without replacement");
  }
  if (mix) {
    if (mix->gamma.empty() || mix->gamma.size() != mix->capacity.size()) {
      throw ValidationError("profile", "gamma and capacity need one entry per type");
    }
    double total = 0.0;
    for (double g : mix->gamma) {
      if (!(g > 0.0)) throw ValidationError("profile.gamma", "fractions must be positive");
      total += g;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("profile.gamma", "fractions must sum to 1");
    for (std::size_t k = 0; k < mix->capacity.size(); ++k) {
      if (mix->capacity[k] < 1) throw ValidationError("profile.capacity", "capacities must be >= 1");
      if (k > 0 && mix->capacity[k] < mix->capacity[k - 1]) {
        throw ValidationError("profile.capacity", "capacities must be nondecreasing");
      }
    }
  } else if (capacity < 1) {
    throw ValidationError("capacity", "must be >= 1");
  }
  if (!(t_total > 0.0)) throw ValidationError("t_total", "must be positive");
  if (!(warmup() >= 0.0) || warmup() >= t_total) throw ValidationError("t_warmup", "must lie in [0, t_total)");
  if (batches < 1) throw ValidationError("batches", "must be >= 1");
  if (snapshot_interval < 0.0) throw ValidationError("snapshot_interval", "must be nonnegative");
  for (double t : sample_times) {
    if (!(t >= 0.0) || t > t_total) throw ValidationError("sample_times", "must lie in [0, t_total]");
  }
}

namespace {

struct Event {
  double time;
  std::uint64_t seq;
  int server;  // -1: arrival

  bool operator>(const Event& other) const {
    return time != other.time ? time > other.time : seq > other.seq;
  }
};

class Cluster {
 public:
  explicit Cluster(const SimConfig& config)
      : config_(config),
        arrival_rng_(make_rng(config.seed, config.replication, Stream::Arrivals)),
        routing_rng_(make_rng(config.seed, config.replication, Stream::Routing)),
        service_rng_(make_rng(config.seed, config.replication, Stream::Service)),
        interarrival_(config.lambda * config.servers) {
    std::vector<double> gamma = config.mix ? config.mix->gamma : std::vector<double>{1.0};
    std::vector<int> caps = config.mix ? config.mix->capacity : std::vector<int>{config.capacity};
    stats_.capacities = caps;
    stats_.d = config.d;
    long assigned = 0;
    for (std::size_t k = 0; k < caps.size(); ++k) {
      long count = k + 1 == caps.size() ? config.servers - assigned
                                        : std::lround(gamma[k] * static_cast<double>(config.servers));
      if (count < 1) throw ValidationError("servers", "every server type needs at least one server");
      stats_.servers_per_type.push_back(count);
      assigned += count;
    }
    stats_.level_offsets.assign(caps.size() + 1, 0);
    for (std::size_t k = 0; k < caps.size(); ++k) {
      stats_.level_offsets[k + 1] = stats_.level_offsets[k] + static_cast<std::size_t>(caps[k]) + 1;
    }
    for (std::size_t k = 0; k < caps.size(); ++k) {
      for (long i = 0; i < stats_.servers_per_type[k]; ++i) {
        type_.push_back(static_cast<int>(k));
        capacity_.push_back(caps[k]);
      }
    }
    occupancy_.assign(type_.size(), 0);
    max_capacity_ = static_cast<std::size_t>(*std::max_element(caps.begin(), caps.end()));
    admitted_at_.assign(type_.size() * max_capacity_, 0.0);
    departs_at_.assign(type_.size() * max_capacity_, 0.0);
    job_seq_.assign(type_.size() * max_capacity_, 0);
  }

  SimStats run() {
    const double total = config_.t_total;
    detail::Recorder recorder(stats_, config_.warmup(), total, config_.batches, config_.snapshot_interval,
                              config_.sample_times);
    auto snapshot = [this](double t) { return take_snapshot(t); };
    schedule_arrival(0.0);
    while (!events_.empty() && events_.top().time <= total) {
      const Event ev = events_.top();
      recorder.observe_until(ev.time, snapshot);
      events_.pop();
      if (ev.server < 0) {
        on_arrival(ev.time, recorder);
      } else {
        on_departure(ev, recorder);
      }
      if (config_.check_invariants) check_invariants(recorder);
    }
    recorder.observe_until(total, snapshot);
    return std::move(stats_);
  }

 private:
  std::size_t level(std::size_t server, int n) const {
    return stats_.level_offsets[static_cast<std::size_t>(type_[server])] + static_cast<std::size_t>(n);
  }

  void schedule_arrival(double now) { events_.push({now + interarrival_(arrival_rng_), next_seq_++, -1}); }

  std::optional<std::size_t> route() {
    if (!config_.mix) {
      return route_power_of_d(occupancy_, config_.capacity, config_.d, config_.sampling, routing_rng_);
    }
    return route_max_vacancy({occupancy_, capacity_, type_}, config_.d, config_.sampling, routing_rng_);
  }

  void on_arrival(double now, detail::Recorder& recorder) {
    ++stats_.arrivals;
    const std::optional<std::size_t> target = route();
    if (!target) {
      ++stats_.blocks;
      recorder.arrival(true);
    } else {
      const std::size_t s = *target;
      const int n = occupancy_[s];
      recorder.move(level(s, n), level(s, n + 1), now);
      const std::size_t slot = s * max_capacity_ + static_cast<std::size_t>(n);
      const std::uint64_t seq = next_seq_++;
      admitted_at_[slot] = now;
      departs_at_[slot] = now + config_.service.sample(service_rng_);
      job_seq_[slot] = seq;
      occupancy_[s] = n + 1;
      events_.push({departs_at_[slot], seq, static_cast<int>(s)});
      ++stats_.admissions;
      recorder.arrival(false);
    }
    schedule_arrival(now);
  }

  void on_departure(const Event& ev, detail::Recorder& recorder) {
    const auto s = static_cast<std::size_t>(ev.server);
    const int n = occupancy_[s];
    const std::size_t base = s * max_capacity_;
    std::size_t slot = base;
    while (slot < base + static_cast<std::size_t>(n) && job_seq_[slot] != ev.seq) ++slot;
    if (slot == base + static_cast<std::size_t>(n)) {
      throw std::logic_error("departure for a job that is not in service");
    }
    const std::size_t last = base + static_cast<std::size_t>(n) - 1;
    admitted_at_[slot] = admitted_at_[last];
    departs_at_[slot] = departs_at_[last];
    job_seq_[slot] = job_seq_[last];
    occupancy_[s] = n - 1;
    recorder.move(level(s, n), level(s, n - 1), ev.time);
    ++stats_.departures;
  }

  Snapshot take_snapshot(double t) const {
    Snapshot snap;
    snap.time = t;
    snap.max_ages.assign(stats_.levels(), {});
    snap.counts.assign(stats_.levels(), 0);
    for (std::size_t s = 0; s < occupancy_.size(); ++s) {
      const int n = occupancy_[s];
      const std::size_t l = level(s, n);
      ++snap.counts[l];
      if (n == 0) continue;
      double oldest = t;
      for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
        oldest = std::min(oldest, admitted_at_[s * max_capacity_ + j]);
      }
      snap.max_ages[l].push_back(t - oldest);
    }
    for (auto& ages : snap.max_ages) std::sort(ages.begin(), ages.end());
    return snap;
  }

  void check_invariants(const detail::Recorder& recorder) const {
    auto fail = [](const std::string& what) { throw std::logic_error("simulator invariant violated: " + what); };
    std::vector<long> histogram(stats_.levels(), 0);
    std::size_t jobs = 0;
    for (std::size_t s = 0; s < occupancy_.size(); ++s) {
      const int n = occupancy_[s];
      if (n < 0 || n > capacity_[s]) fail("occupancy outside [0, capacity]");
      ++histogram[level(s, n)];
      jobs += static_cast<std::size_t>(n);
      for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
        const std::size_t slot = s * max_capacity_ + j;
        if (!(departs_at_[slot] > admitted_at_[slot])) fail("departure not after admission");
      }
    }
    if (histogram != recorder.counts()) fail("level counts out of sync with servers");
    for (std::size_t k = 0; k < stats_.servers_per_type.size(); ++k) {
      long sum = 0;
      for (std::size_t l = stats_.level_offsets[k]; l < stats_.level_offsets[k + 1]; ++l) sum += histogram[l];
      if (sum != stats_.servers_per_type[k]) fail("servers per type not conserved");
    }
    if (events_.size() != jobs + 1) fail("event queue must hold one departure per job plus one arrival");
    if (stats_.arrivals != stats_.admissions + stats_.blocks) fail("arrivals != admissions + blocks");
    if (stats_.admissions - stats_.departures != static_cast<long>(jobs)) fail("admissions - departures != jobs");
  }

  const SimConfig& config_;
  SimStats stats_;
  Rng arrival_rng_;
  Rng routing_rng_;
  Rng service_rng_;
  boost::random::exponential_distribution<double> interarrival_;
  std::vector<int> type_;
  std::vector<int> capacity_;
  std::vector<int> occupancy_;
  std::size_t max_capacity_ = 0;
  std::vector<double> admitted_at_;
  std::vector<double> departs_at_;
  std::vector<std::uint64_t> job_seq_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace

SimStats run(const SimConfig& config) {
  config.validate();
  return Cluster(config).run();
}

TransientTrace transient_trace(const SimConfig& config, const std::vector<double>& sample_times,
                               std::size_t replications, std::size_t threads) {
  if (replications == 0) throw ValidationError("replications", "must be >= 1");
  std::vector<SimStats> runs(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    SimConfig c = config;
    c.sample_times = sample_times;
    c.replication = config.replication + r;
    c.snapshot_interval = 0.0;
    runs[r] = run(c);
  });
  TransientTrace out;
  out.times = sample_times;
  out.replications = replications;
  const std::size_t levels = runs.front().levels();
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    std::vector<double> mean(levels, 0.0);
    std::vector<double> sq(levels, 0.0);
    for (const SimStats& s : runs) {
      for (std::size_t l = 0; l < levels; ++l) {
        mean[l] += s.samples[i][l];
        sq[l] += s.samples[i][l] * s.samples[i][l];
      }
    }
    std::vector<double> se(levels, 0.0);
    const auto r = static_cast<double>(replications);
    for (std::size_t l = 0; l < levels; ++l) {
      mean[l] /= r;
      if (replications > 1) {
        const double var = std::max(0.0, (sq[l] - r * mean[l] * mean[l]) / (r - 1.0));
        se[l] = std::sqrt(var / r);
      }
    }
    out.mean.push_back(std::move(mean));
    out.se.push_back(std::move(se));
  }
  return out;
}

}  // namespace lossmesh::sim
