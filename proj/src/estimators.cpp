#include <algorithm>
#include <cmath>

#include "lossmesh/errors.hpp"
#include "lossmesh/simulator.hpp"

namespace lossmesh::sim {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe batch_means(const std::vector<double>& values) {
  const auto b = static_cast<double>(values.size());
  MeanSe out;
  for (double v : values) out.mean += v;
  out.mean /= b;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / (b - 1.0) / b);
  return out;
}

void check_type(const SimStats& stats, int type) {
  if (type < 0 || type >= stats.types()) throw DomainError("type index out of range");
}

}  // namespace

Estimate occupancy_estimate(const SimStats& stats, int type) {
  check_type(stats, type);
  const std::size_t batches = stats.batch_level_time.size();
  if (batches < 2) throw EstimationError("occupancy_estimate needs at least 2 batches");
  if (!(stats.batch_length > 0.0)) throw EstimationError("measurement window is empty");
  const auto k = static_cast<std::size_t>(type);
  const auto servers = static_cast<double>(stats.servers_per_type[k]);
  Estimate out;
  std::vector<double> per_batch(batches);
  for (std::size_t l = stats.level_offsets[k]; l < stats.level_offsets[k + 1]; ++l) {
    for (std::size_t b = 0; b < batches; ++b) {
      per_batch[b] = stats.batch_level_time[b][l] / (servers * stats.batch_length);
    }
    const MeanSe m = batch_means(per_batch);
    out.value.push_back(m.mean);
    out.se.push_back(m.se);
  }
  return out;
}

BlockingEstimate blocking_estimate(const SimStats& stats) {
  const std::size_t batches = stats.batch_level_time.size();
  if (batches < 2) throw EstimationError("blocking_estimate needs at least 2 batches");
  long total_servers = 0;
  for (long n : stats.servers_per_type) total_servers += n;
  const double denom = static_cast<double>(total_servers) * stats.batch_length;

  std::vector<double> blocked(batches);
  std::vector<double> full(batches);
  std::vector<double> diff(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double full_time = 0.0;
    for (std::size_t k = 0; k < stats.capacities.size(); ++k) {
      full_time += stats.batch_level_time[b][stats.level_offsets[k + 1] - 1];
    }
    full[b] = full_time / denom;
    blocked[b] = stats.batch_arrivals[b] > 0
                     ? static_cast<double>(stats.batch_blocks[b]) / static_cast<double>(stats.batch_arrivals[b])
                     : 0.0;
    diff[b] = blocked[b] - std::pow(full[b], stats.d);
  }
  long arrivals = 0;
  long blocks = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    arrivals += stats.batch_arrivals[b];
    blocks += stats.batch_blocks[b];
  }
  BlockingEstimate out;
  out.fraction = arrivals > 0 ? static_cast<double>(blocks) / static_cast<double>(arrivals) : 0.0;
  out.se = batch_means(blocked).se;
  out.full_fraction = batch_means(full).mean;
  out.predicted = std::pow(out.full_fraction, stats.d);
  out.diff_se = batch_means(diff).se;
  return out;
}

Estimate age_cdf_estimate(const SimStats& stats, int n, const std::vector<double>& y_grid, int type) {
  check_type(stats, type);
  const auto k = static_cast<std::size_t>(type);
  if (n < 0 || n > stats.capacities[k]) throw DomainError("age_cdf_estimate: occupancy exceeds capacity");
  const std::size_t snaps = stats.snapshots.size();
  if (snaps < 2) throw EstimationError("age_cdf_estimate needs at least 2 snapshots");
  const std::size_t level = stats.level_offsets[k] + static_cast<std::size_t>(n);
  const auto servers = static_cast<double>(stats.servers_per_type[k]);
  const std::size_t groups = std::min<std::size_t>(std::max<std::size_t>(stats.batch_arrivals.size(), 2), snaps);

  Estimate out;
  for (double y : y_grid) {
    std::vector<double> sum(groups, 0.0);
    std::vector<double> count(groups, 0.0);
    for (std::size_t s = 0; s < snaps; ++s) {
      const Snapshot& snap = stats.snapshots[s];
      double hits = 0.0;
      if (n == 0) {
        hits = static_cast<double>(snap.counts[level]);
      } else {
        const auto& ages = snap.max_ages[level];
        hits = static_cast<double>(std::upper_bound(ages.begin(), ages.end(), y) - ages.begin());
      }
      const std::size_t g = s * groups / snaps;
      sum[g] += hits / servers;
      count[g] += 1.0;
    }
    std::vector<double> group_means(groups);
    double total = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
      group_means[g] = sum[g] / count[g];
      total += sum[g];
    }
    out.value.push_back(total / static_cast<double>(snaps));
    out.se.push_back(batch_means(group_means).se);
  }
  return out;
}

}  // namespace lossmesh::sim
