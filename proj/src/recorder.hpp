#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "lossmesh/simulator.hpp"

namespace lossmesh::sim::detail {

// Time-weighted level statistics, batch bookkeeping and scheduled
// observations shared by the cluster and single-server simulators.
// Level integrals are updated lazily: only the two levels touched by an
// event are brought up to date.
class Recorder {
 public:
  Recorder(SimStats& stats, double warmup, double total, int batches, double snapshot_interval,
           const std::vector<double>& sample_times)
      : stats_(stats), counts_(stats.levels(), 0), last_(stats.levels(), 0.0) {
    for (std::size_t k = 0; k < stats.servers_per_type.size(); ++k) {
      counts_[stats.level_offsets[k]] = stats.servers_per_type[k];
    }
    stats_.warmup = warmup;
    stats_.batch_length = (total - warmup) / batches;
    stats_.batch_level_time.assign(static_cast<std::size_t>(batches), std::vector<double>(stats.levels(), 0.0));
    stats_.batch_arrivals.assign(static_cast<std::size_t>(batches), 0);
    stats_.batch_blocks.assign(static_cast<std::size_t>(batches), 0);
    stats_.sample_times = sample_times;

    for (int b = 0; b <= batches; ++b) {
      const double t = b == batches ? total : warmup + b * stats_.batch_length;
      plan_.push_back({t, Kind::Batch, b});
    }
    if (snapshot_interval > 0.0) {
      for (int j = 1;; ++j) {
        const double t = warmup + j * snapshot_interval;
        if (t > total) break;
        plan_.push_back({t, Kind::Snapshot, j});
      }
    }
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
      plan_.push_back({sample_times[i], Kind::Sample, static_cast<int>(i)});
    }
    std::stable_sort(plan_.begin(), plan_.end(),
                     [](const Planned& a, const Planned& b) { return a.time < b.time; });
    stats_.samples.assign(sample_times.size(), {});
  }

  // Handles every scheduled observation at or before t, in time order.
  // `snapshot(time)` must return the Snapshot of the current server state.
  template <class SnapshotFn>
  void observe_until(double t, SnapshotFn&& snapshot) {
    while (next_ < plan_.size() && plan_[next_].time <= t) {
      const Planned& p = plan_[next_++];
      switch (p.kind) {
        case Kind::Batch:
          flush_all(p.time);
          measuring_ = p.index < static_cast<int>(stats_.batch_arrivals.size());
          batch_ = static_cast<std::size_t>(std::max(0, p.index));
          break;
        case Kind::Snapshot:
          stats_.snapshots.push_back(snapshot(p.time));
          break;
        case Kind::Sample: {
          std::vector<double> frac(counts_.size());
          for (std::size_t k = 0; k < stats_.servers_per_type.size(); ++k) {
            for (std::size_t l = stats_.level_offsets[k]; l < stats_.level_offsets[k + 1]; ++l) {
              frac[l] = static_cast<double>(counts_[l]) / static_cast<double>(stats_.servers_per_type[k]);
            }
          }
          stats_.samples[static_cast<std::size_t>(p.index)] = std::move(frac);
          break;
        }
      }
    }
  }

  // One server moves between two flat levels at time t.
  void move(std::size_t from, std::size_t to, double t) {
    flush(from, t);
    flush(to, t);
    --counts_[from];
    ++counts_[to];
  }

  void arrival(bool blocked) {
    if (!measuring_) return;
    ++stats_.batch_arrivals[batch_];
    if (blocked) ++stats_.batch_blocks[batch_];
  }

  const std::vector<long>& counts() const noexcept { return counts_; }

 private:
  enum class Kind { Batch, Snapshot, Sample };
  struct Planned {
    double time;
    Kind kind;
    int index;
  };

  void flush(std::size_t level, double t) {
    if (measuring_) {
      stats_.batch_level_time[batch_][level] += static_cast<double>(counts_[level]) * (t - last_[level]);
    }
    last_[level] = t;
  }

  void flush_all(double t) {
    for (std::size_t l = 0; l < counts_.size(); ++l) flush(l, t);
  }

  SimStats& stats_;
  std::vector<long> counts_;
  std::vector<double> last_;
  std::vector<Planned> plan_;
  std::size_t next_ = 0;
  bool measuring_ = false;
  std::size_t batch_ = 0;
};

}  // namespace lossmesh::sim::detail
