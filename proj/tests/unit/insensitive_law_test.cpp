#include "lossmesh/insensitive_law.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "lossmesh/errors.hpp"

namespace lossmesh {
namespace {

const double kInf = kInfinity;

ServiceDistribution reference_mixed_erlang() { return ServiceDistribution::mixed_erlang(2.1, {0.3, 0.3, 0.4}); }

TEST(InsensitiveLaw, UnboundedAgesGiveOccupancy) {
  const auto fp = InsensitiveFixedPoint::solve(1.0, ServiceDistribution::exponential(1.0), 5, 2);
  const std::vector<double> inf2{kInf, kInf};
  EXPECT_EQ(eval_pi(fp, 2, inf2), fp.pi_exp()[2]);
  EXPECT_EQ(eval_pi(fp, 0, {}), fp.pi_exp()[0]);
}

TEST(InsensitiveLaw, ExponentialMedianAges) {
  const auto fp = InsensitiveFixedPoint::solve(1.0, ServiceDistribution::exponential(1.0), 5, 2);
  const std::vector<double> ages{std::log(2.0), std::log(2.0)};
  EXPECT_NEAR(eval_pi(fp, 2, ages), fp.pi_exp()[2] * 0.25, 1e-15);
}

TEST(InsensitiveLaw, ZeroAgeBound) {
  const auto fp = InsensitiveFixedPoint::solve(1.0, reference_mixed_erlang(), 5, 2);
  const std::vector<double> ages{0.0, 1.0};
  EXPECT_EQ(eval_pi(fp, 2, ages), 0.0);
}

TEST(InsensitiveLaw, SymmetricInAges) {
  const auto fp = InsensitiveFixedPoint::solve(1.0, ServiceDistribution::gamma_with_mean(2.0, 1.0), 5, 2);
  const std::vector<double> a{0.3, 1.7, 0.9}, b{1.7, 0.9, 0.3};
  EXPECT_EQ(eval_pi(fp, 3, a), eval_pi(fp, 3, b));
}

TEST(InsensitiveLaw, ArgumentChecks) {
  const auto fp = InsensitiveFixedPoint::solve(1.0, ServiceDistribution::exponential(1.0), 3, 2);
  const std::vector<double> one{1.0};
  EXPECT_THROW((void)eval_pi(fp, 2, one), DomainError);
  const std::vector<double> four(4, 1.0);
  EXPECT_THROW((void)fp.eval(four), DomainError);
  EXPECT_THROW(InsensitiveFixedPoint(fp.pi_exp(), ServiceDistribution::exponential(2.0), 1.0), ValidationError);
}

TEST(InsensitiveLaw, NormalizedAndMonotone) {
  for (const auto& dist : {ServiceDistribution::exponential(1.0), reference_mixed_erlang(),
                           ServiceDistribution::gamma_with_mean(2.0, 1.0), ServiceDistribution::lognormal(-0.125, 0.5),
                           ServiceDistribution::deterministic(1.0)}) {
    const auto fp = InsensitiveFixedPoint::solve(1.0, dist, 5, 2);
    double total = 0.0;
    for (int n = 0; n <= 5; ++n) total += eval_pi(fp, n, std::vector<double>(static_cast<std::size_t>(n), kInf));
    EXPECT_NEAR(total, 1.0, 1e-10);
    for (int n = 1; n <= 3; ++n) {
      double prev = 0.0;
      for (double y = 0.0; y <= 6.0; y += 0.25) {
        std::vector<double> ages(static_cast<std::size_t>(n), y);
        ages[0] = 0.8;
        const double v = eval_pi(fp, n, ages);
        EXPECT_GE(v, prev);
        prev = v;
      }
    }
  }
}

TEST(InsensitiveLaw, EqualMeansShareOccupancyBitwise) {
  const auto a = InsensitiveFixedPoint::solve(1.0, ServiceDistribution::exponential(1.0), 5, 2);
  const auto b = InsensitiveFixedPoint::solve(1.0, reference_mixed_erlang(), 5, 2);
  const auto c = InsensitiveFixedPoint::solve(1.0, ServiceDistribution::deterministic(1.0), 5, 2);
  for (int n = 0; n <= 5; ++n) {
    const std::vector<double> inf(static_cast<std::size_t>(n), kInf);
    EXPECT_EQ(eval_pi(a, n, inf), eval_pi(b, n, inf));
    EXPECT_EQ(eval_pi(a, n, inf), eval_pi(c, n, inf));
  }
}

TEST(SingleServerLaw, ConstantRateIsTruncatedPoisson) {
  const StateDepArrivalLaw law{std::vector<double>(6, 1.5), ServiceDistribution::exponential(1.0), 1.0};
  const auto q = single_server_occupancy(law);
  std::vector<double> poisson(7);
  for (int n = 0; n <= 6; ++n) poisson[static_cast<std::size_t>(n)] = std::exp(n * std::log(1.5) - std::lgamma(n + 1.0));
  const double z = std::accumulate(poisson.begin(), poisson.end(), 0.0);
  for (int n = 0; n <= 6; ++n) EXPECT_NEAR(q[static_cast<std::size_t>(n)], poisson[static_cast<std::size_t>(n)] / z, 1e-14);
}

TEST(SingleServerLaw, EmptyProbability) {
  const StateDepArrivalLaw law{{2.0, 1.0}, ServiceDistribution::exponential(1.0), 1.0};
  // 1 / (1 + 2 + 2*1/2)
  EXPECT_NEAR(single_server_product_form(law, 0, {}), 0.25, 1e-15);
  const std::vector<double> ages{std::log(2.0)};
  EXPECT_NEAR(single_server_product_form(law, 1, ages), 0.25, 1e-15);
}

TEST(SingleServerLaw, MeanFieldRatesReproduceFixedPoint) {
  for (int d : {1, 2, 3}) {
    for (int c : {1, 3, 5, 8}) {
      for (const auto& dist : {ServiceDistribution::exponential(0.8), reference_mixed_erlang(),
                               ServiceDistribution::gamma(2.0, 0.5)}) {
        const auto fp = InsensitiveFixedPoint::solve(1.3, dist, c, d);
        const StateDepArrivalLaw law{mean_field_arrival_rates(fp.pi_exp(), 1.3, d), dist, fp.mu()};
        ASSERT_EQ(law.capacity(), c);
        const std::vector<double> y{0.4, 1.1};
        for (int n = 0; n <= c; ++n) {
          std::vector<double> inf(static_cast<std::size_t>(n), kInf);
          EXPECT_NEAR(single_server_product_form(law, n, inf), eval_pi(fp, n, inf), 1e-12);
          if (n == 2) EXPECT_NEAR(single_server_product_form(law, n, y), eval_pi(fp, n, y), 1e-12);
        }
      }
    }
  }
}

TEST(SingleServerLaw, Validation) {
  EXPECT_THROW((StateDepArrivalLaw{{}, ServiceDistribution::exponential(1.0), 1.0}.validate()), ValidationError);
  EXPECT_THROW((StateDepArrivalLaw{{-1.0}, ServiceDistribution::exponential(1.0), 1.0}.validate()), ValidationError);
}

}  // namespace
}  // namespace lossmesh
