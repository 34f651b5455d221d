#include "lossmesh/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lossmesh/errors.hpp"
#include "lossmesh/mf_exp.hpp"

namespace lossmesh::sim {
namespace {

double tol(double se, double floor) { return std::max(floor, 3.0 * se); }

TEST(Simulator, SingleServerLossSystem) {
  for (const auto& service : {ServiceDistribution::exponential(1.0), ServiceDistribution::deterministic(1.0)}) {
    SimConfig c;
    c.servers = 1;
    c.capacity = 1;
    c.lambda = 1.0;
    c.d = 1;
    c.service = service;
    c.t_total = 1e6;
    const SimStats s = run(c);
    const Estimate occ = occupancy_estimate(s);
    EXPECT_NEAR(occ.value[1], 0.5, tol(occ.se[1], 0.005));
    const BlockingEstimate b = blocking_estimate(s);
    EXPECT_NEAR(b.fraction, 0.5, tol(b.se, 0.005));
  }
}

TEST(Simulator, NegligibleLoadStaysEmpty) {
  SimConfig c;
  c.servers = 50;
  c.capacity = 3;
  c.d = 2;
  c.lambda = 1e-12;
  c.t_total = 100.0;
  const Estimate occ = occupancy_estimate(run(c));
  EXPECT_NEAR(occ.value[0], 1.0, 1e-12);
}

TEST(Simulator, MatchesMeanFieldAtModerateScale) {
  SimConfig c;
  c.servers = 1000;
  c.capacity = 5;
  c.d = 2;
  c.lambda = 1.0;
  c.t_total = 200.0;
  c.seed = 11;
  const Estimate occ = occupancy_estimate(run(c));
  const auto pi = mfexp::solve_fixed_point(1.0, 1.0, 5, 2).occupancy();
  for (int n = 0; n <= 5; ++n) {
    EXPECT_NEAR(occ.value[static_cast<std::size_t>(n)], pi[n], tol(occ.se[static_cast<std::size_t>(n)], 0.02));
  }
}

TEST(Simulator, BlockingMatchesFullFractionPower) {
  SimConfig c;
  c.servers = 1000;
  c.capacity = 2;
  c.d = 2;
  c.lambda = 1.5;
  c.t_total = 2000.0;
  c.seed = 12;
  const BlockingEstimate b = blocking_estimate(run(c));
  EXPECT_GT(b.fraction, 0.01);
  EXPECT_NEAR(b.fraction, b.predicted, 3.0 * b.diff_se);
}

TEST(Simulator, FuzzedInvariantsHold) {
  std::mt19937_64 gen(13);
  std::uniform_int_distribution<int> servers(1, 40), cap(1, 5), dd(1, 4), coin(0, 3);
  std::uniform_real_distribution<double> load(0.2, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    SimConfig c;
    c.servers = servers(gen);
    c.capacity = cap(gen);
    c.d = dd(gen);
    c.lambda = load(gen);
    c.sampling = c.d <= c.servers && coin(gen) == 0 ? ProbeSampling::WithoutReplacement : ProbeSampling::WithReplacement;
    switch (coin(gen)) {
      case 0: c.service = ServiceDistribution::exponential(1.0); break;
      case 1: c.service = ServiceDistribution::mixed_erlang(2.1, {0.3, 0.3, 0.4}); break;
      case 2: c.service = ServiceDistribution::gamma(2.0, 0.5); break;
      default: c.service = ServiceDistribution::deterministic(1.0); break;
    }
    if (c.servers >= 4 && coin(gen) == 0) c.mix = ServerMix{{0.5, 0.5}, {c.capacity, c.capacity + 1}};
    c.t_total = 30.0;
    c.snapshot_interval = 2.0;
    c.check_invariants = true;
    c.seed = gen();
    SimStats s;
    ASSERT_NO_THROW(s = run(c)) << "trial " << trial;
    EXPECT_EQ(s.arrivals, s.admissions + s.blocks);
    long batch_arrivals = 0, batch_blocks = 0;
    for (std::size_t b = 0; b < s.batch_arrivals.size(); ++b) {
      batch_arrivals += s.batch_arrivals[b];
      batch_blocks += s.batch_blocks[b];
      EXPECT_LE(s.batch_blocks[b], s.batch_arrivals[b]);
    }
    EXPECT_LE(batch_arrivals, s.arrivals);
    EXPECT_LE(batch_blocks, s.blocks);
    for (const Snapshot& snap : s.snapshots) {
      long total = 0;
      for (long n : snap.counts) total += n;
      EXPECT_EQ(total, c.servers);
    }
  }
}

TEST(Simulator, Deterministic) {
  SimConfig c;
  c.servers = 100;
  c.capacity = 4;
  c.d = 2;
  c.lambda = 0.9;
  c.t_total = 100.0;
  c.snapshot_interval = 5.0;
  c.service = ServiceDistribution::gamma(2.0, 0.5);
  EXPECT_EQ(run(c), run(c));
  SimConfig other = c;
  other.replication = 1;
  EXPECT_NE(run(c), run(other));
}

TEST(Simulator, SingleTypeMixMatchesHomogeneous) {
  SimConfig c;
  c.servers = 64;
  c.capacity = 3;
  c.d = 2;
  c.lambda = 1.1;
  c.t_total = 200.0;
  c.snapshot_interval = 3.0;
  SimConfig m = c;
  m.mix = ServerMix{{1.0}, {3}};
  EXPECT_EQ(run(c), run(m));
}

TEST(Simulator, AgeEstimatorConsistency) {
  SimConfig c;
  c.servers = 500;
  c.capacity = 5;
  c.d = 2;
  c.lambda = 1.0;
  c.t_total = 400.0;
  c.snapshot_interval = 5.0;
  const SimStats s = run(c);
  const Estimate occ = occupancy_estimate(s);
  for (int n = 0; n <= 3; ++n) {
    const Estimate at_inf = age_cdf_estimate(s, n, {kInfinity});
    const Estimate at_zero = age_cdf_estimate(s, n, {0.0});
    const auto un = static_cast<std::size_t>(n);
    EXPECT_NEAR(at_inf.value[0], occ.value[un], 3.0 * (at_inf.se[0] + occ.se[un]) + 0.01);
    if (n > 0) EXPECT_EQ(at_zero.value[0], 0.0);
  }
  EXPECT_THROW((void)age_cdf_estimate(s, 6, {1.0}), DomainError);
}

TEST(Simulator, SampleAtTimeZeroIsEmpty) {
  SimConfig c;
  c.servers = 30;
  c.capacity = 4;
  c.d = 2;
  c.t_total = 10.0;
  c.sample_times = {0.0, 5.0, 10.0};
  const SimStats s = run(c);
  ASSERT_EQ(s.samples.size(), 3u);
  EXPECT_EQ(s.samples[0], (std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0}));
  for (const auto& row : s.samples) {
    double sum = 0.0;
    for (double v : row) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Simulator, TransientTraceIndependentOfThreads) {
  SimConfig c;
  c.servers = 50;
  c.capacity = 3;
  c.d = 2;
  c.t_total = 20.0;
  const std::vector<double> times{0.0, 1.0, 5.0, 20.0};
  const TransientTrace one = transient_trace(c, times, 6, 1);
  const TransientTrace many = transient_trace(c, times, 6, 3);
  EXPECT_EQ(one.mean, many.mean);
  EXPECT_EQ(one.se, many.se);
  EXPECT_EQ(one.mean[0], (std::vector<double>{1.0, 0.0, 0.0, 0.0}));
}

TEST(Simulator, ConfigValidation) {
  SimConfig c;
  c.d = 0;
  EXPECT_THROW(run(c), ValidationError);
  c.d = 3;
  c.servers = 2;
  c.sampling = ProbeSampling::WithoutReplacement;
  EXPECT_THROW(run(c), ValidationError);
  SimConfig m;
  m.servers = 10;
  m.mix = ServerMix{{0.5, 0.4}, {1, 2}};
  EXPECT_THROW(run(m), ValidationError);
  SimConfig w;
  w.t_warmup = 2000.0;
  EXPECT_THROW(run(w), ValidationError);
}

}  // namespace
}  // namespace lossmesh::sim
