#include <cmath>

#include <gtest/gtest.h>

#include "lossmesh/insensitive_law.hpp"
#include "lossmesh/mf_exp.hpp"
#include "lossmesh/simulator.hpp"

namespace lossmesh::sim {
namespace {

void expect_occupancy(const StateDepArrivalLaw& law, std::uint64_t seed) {
  SingleServerConfig cfg;
  cfg.seed = seed;
  const Estimate occ = occupancy_estimate(run_single_server(law, cfg));
  const auto model = single_server_occupancy(law);
  for (std::size_t n = 0; n < model.size(); ++n) {
    EXPECT_NEAR(occ.value[n], model[n], 3.0 * occ.se[n]) << "n=" << n;
  }
}

TEST(SingleServer, ConstantRateExponentialIsTruncatedPoisson) {
  const StateDepArrivalLaw law{std::vector<double>(4, 1.0), ServiceDistribution::exponential(1.0), 1.0};
  const std::vector<double> births(4, 1.0);
  const auto bd = mfexp::birth_death_stationary(births, 1.0, 4);
  const auto model = single_server_occupancy(law);
  for (int n = 0; n <= 4; ++n) EXPECT_NEAR(model[static_cast<std::size_t>(n)], bd[n], 1e-14);
  expect_occupancy(law, 1);
}

TEST(SingleServer, ConstantRateGammaService) {
  expect_occupancy({std::vector<double>(4, 1.0), ServiceDistribution::gamma(2.0, 0.5), 1.0}, 2);
}

TEST(SingleServer, MeanFieldRates) {
  const auto pi = mfexp::solve_fixed_point(2.0, 1.0, 4, 2).occupancy();
  const auto alpha = mean_field_arrival_rates(pi, 2.0, 2);
  expect_occupancy({alpha, ServiceDistribution::gamma(2.0, 0.5), 1.0}, 3);
}

TEST(SingleServer, ZeroRateNeverLeavesEmpty) {
  const StateDepArrivalLaw law{{0.0, 2.0, 2.0}, ServiceDistribution::exponential(1.0), 1.0};
  SingleServerConfig cfg;
  cfg.t_total = 1000.0;
  const SimStats s = run_single_server(law, cfg);
  const Estimate occ = occupancy_estimate(s);
  EXPECT_NEAR(occ.value[0], 1.0, 1e-12);
  EXPECT_EQ(s.arrivals, 0);
}

}  // namespace
}  // namespace lossmesh::sim
