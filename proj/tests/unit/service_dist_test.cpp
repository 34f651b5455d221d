#include "lossmesh/service_dist.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "lossmesh/errors.hpp"

namespace lossmesh {
namespace {

const ServiceDistribution kReferenceMix = ServiceDistribution::mixed_erlang(2.1, {0.3, 0.3, 0.4});

std::vector<ServiceDistribution> all_laws() {
  return {ServiceDistribution::exponential(1.0), kReferenceMix, ServiceDistribution::gamma(2.0, 0.5),
          ServiceDistribution::gamma(0.7, 1.0 / 0.7), ServiceDistribution::lognormal(-0.125, 0.5),
          ServiceDistribution::deterministic(1.0)};
}

TEST(ServiceDist, MeanExamples) {
  EXPECT_DOUBLE_EQ(ServiceDistribution::exponential(1.0).mean(), 1.0);
  EXPECT_NEAR(kReferenceMix.mean(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(ServiceDistribution::deterministic(0.5).mean(), 0.5);
  EXPECT_NEAR(ServiceDistribution::gamma_with_mean(2.0, 1.0).mean(), 1.0, 1e-15);
}

TEST(ServiceDist, HazardExamples) {
  EXPECT_DOUBLE_EQ(ServiceDistribution::exponential(2.0).hazard(3.7), 2.0);
  EXPECT_DOUBLE_EQ(ServiceDistribution::mixed_erlang(1.0, {1.0}).hazard(5.0), 1.0);
  const double x = 1.0;
  const double oracle = x * std::exp(-x) / ((1.0 + x) * std::exp(-x));
  EXPECT_NEAR(ServiceDistribution::gamma(2.0, 1.0).hazard(x), oracle, 1e-14);
}

TEST(ServiceDist, HazardErrors) {
  EXPECT_THROW(ServiceDistribution::deterministic(1.0).hazard(0.5), UnsupportedOperation);
  EXPECT_THROW(ServiceDistribution::gamma(2.0, 1.0).hazard(1e6), DomainError);
  // The mixed-Erlang hazard is evaluated without the exponential factor and
  // tends to the phase rate far into the tail.
  EXPECT_NEAR(kReferenceMix.hazard(1e4), 2.1, 1e-3);
}

TEST(ServiceDist, AgeFactorExamples) {
  for (const auto& law : all_laws()) {
    EXPECT_EQ(law.age_factor(0.0), 0.0) << law.kind();
    EXPECT_EQ(law.age_factor(kInfinity), 1.0) << law.kind();
  }
  EXPECT_NEAR(ServiceDistribution::exponential(1.0).age_factor(std::log(2.0)), 0.5, 1e-15);
}

TEST(ServiceDist, AgeFactorQuadratureMatchesClosedForms) {
  // Gamma: integral_0^y S = y S(y) + k theta P(k+1, y/theta).
  const double k = 2.0, theta = 0.5;
  const auto g = ServiceDistribution::gamma(k, theta);
  // Lognormal: integral_0^y S = y S(y) + e^{m+s^2/2} Phi((ln y - m - s^2)/s).
  const double m = -0.125, s = 0.5;
  const auto ln = ServiceDistribution::lognormal(m, s);
  for (double y : {0.01, 0.3, 1.0, 2.5, 7.0, 30.0}) {
    const double gamma_oracle = (y * boost::math::gamma_q(k, y / theta) + k * theta * boost::math::gamma_p(k + 1, y / theta)) / g.mean();
    EXPECT_NEAR(g.age_factor(y), gamma_oracle, 1e-10) << y;
    const double z = (std::log(y) - m - s * s) / s;
    const double partial = std::exp(m + 0.5 * s * s) * 0.5 * std::erfc(-z / std::sqrt(2.0));
    const double ln_oracle = (y * ln.survival(y) + partial) / ln.mean();
    EXPECT_NEAR(ln.age_factor(y), ln_oracle, 1e-10) << y;
  }
}

TEST(ServiceDist, MixedErlangAgeFactorMatchesQuadrature) {
  for (double y : {0.1, 0.7, 2.0, 9.0}) {
    double error = 0.0;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double x) { return kReferenceMix.survival(x); }, 0.0, y, 20, 1e-14, &error);
    EXPECT_NEAR(kReferenceMix.age_factor(y), integral / kReferenceMix.mean(), 1e-12);
  }
}

TEST(ServiceDist, CdfIsMonotoneAndComplementary) {
  for (const auto& law : all_laws()) {
    double prev = law.cdf(0.0);
    EXPECT_GE(prev, 0.0);
    EXPECT_LT(prev, 1.0);
    for (double x = 0.0; x < 20.0; x += 0.013) {
      const double c = law.cdf(x);
      EXPECT_GE(c, prev) << law.kind() << " x=" << x;
      EXPECT_LE(c, 1.0);
      EXPECT_NEAR(law.survival(x), 1.0 - c, 1e-12) << law.kind();
      prev = c;
    }
    EXPECT_NEAR(law.cdf(200.0), 1.0, 1e-12) << law.kind();
  }
}

TEST(ServiceDist, IntegratedSurvivalEqualsMean) {
  boost::math::quadrature::exp_sinh<double> integrator;
  for (const auto& law : all_laws()) {
    if (!law.has_density()) continue;
    const double integral = integrator.integrate([&](double x) { return law.survival(x); }, 0.0,
                                                 std::numeric_limits<double>::infinity(), 1e-14);
    EXPECT_NEAR(integral, law.mean(), 1e-8 * law.mean()) << law.kind();
  }
}

TEST(ServiceDist, SinglePhaseMatchesExponential) {
  const auto me = ServiceDistribution::mixed_erlang(1.7, {1.0});
  const auto ex = ServiceDistribution::exponential(1.7);
  EXPECT_NEAR(me.mean(), ex.mean(), 1e-12);
  for (double x = 0.0; x < 15.0; x += 0.37) {
    EXPECT_NEAR(me.cdf(x), ex.cdf(x), 1e-12);
    EXPECT_NEAR(me.survival(x), ex.survival(x), 1e-12);
    EXPECT_NEAR(me.hazard(x), ex.hazard(x), 1e-12);
    EXPECT_NEAR(me.age_factor(x), ex.age_factor(x), 1e-12);
  }
}

TEST(ServiceDist, SamplingMeansFollowLawOfLargeNumbers) {
  Rng rng(12345);
  EXPECT_EQ(ServiceDistribution::deterministic(1.5).sample(rng), 1.5);
  for (const auto& law : {ServiceDistribution::exponential(1.0), kReferenceMix}) {
    Rng r(2024);
    double sum = 0.0;
    const int draws = 1'000'000;
    for (int i = 0; i < draws; ++i) sum += law.sample(r);
    EXPECT_NEAR(sum / draws, law.mean(), 0.01) << law.kind();
  }
}

TEST(ServiceDist, SamplingIsReproducible) {
  for (const auto& law : all_laws()) {
    Rng a(99), b(99);
    for (int i = 0; i < 1000; ++i) {
      const double x = law.sample(a);
      ASSERT_EQ(x, law.sample(b));
      ASSERT_GT(x, 0.0);
    }
  }
}

TEST(ServiceDist, ValidationErrors) {
  EXPECT_THROW(ServiceDistribution::mixed_erlang(2.1, {0.3, 0.3, 0.39}), ValidationError);
  EXPECT_THROW(ServiceDistribution::mixed_erlang(2.1, {1.2, -0.2}), ValidationError);
  EXPECT_THROW(ServiceDistribution::mixed_erlang(0.0, {1.0}), ValidationError);
  EXPECT_THROW(ServiceDistribution::exponential(-1.0), ValidationError);
  EXPECT_THROW(ServiceDistribution::gamma(2.0, 0.0), ValidationError);
  EXPECT_THROW(ServiceDistribution::deterministic(0.0), ValidationError);
  EXPECT_THROW(ServiceDistribution::lognormal(0.0, -1.0), ValidationError);
}

TEST(ServiceDist, BoundedHazardFlags) {
  EXPECT_TRUE(kReferenceMix.has_bounded_hazard());
  EXPECT_TRUE(ServiceDistribution::gamma(2.0, 0.5).has_bounded_hazard());
  EXPECT_FALSE(ServiceDistribution::gamma(0.5, 2.0).has_bounded_hazard());
  EXPECT_FALSE(ServiceDistribution::deterministic(1.0).has_bounded_hazard());
  const auto ln = ServiceDistribution::lognormal(-0.5, 1.0);
  EXPECT_TRUE(ln.has_bounded_hazard());
  double peak = 0.0;
  for (double x = 1e-6; x < 50.0; x *= 1.05) peak = std::max(peak, ln.hazard(x));
  EXPECT_TRUE(std::isfinite(peak));
  EXPECT_LT(peak, 3.0);
  EXPECT_LT(ln.hazard(1e-6), 1e-6);
}

}  // namespace
}  // namespace lossmesh
