#pragma once

#include <span>
#include <vector>

#include "lossmesh/mf_exp.hpp"
#include "lossmesh/service_dist.hpp"

namespace lossmesh {

// Equilibrium of the mean field for general service: the probability that a
// server holds n jobs whose ages are at most y_1..y_n is
//   pi_exp(n) * prod_i mu * integral_0^{y_i} survival(x) dx.
class InsensitiveFixedPoint {
 public:
  // Throws ValidationError unless mu * mean(dist) == 1 within 1e-9.
  InsensitiveFixedPoint(mfexp::OccupancyDist pi_exp, ServiceDistribution dist, double mu);

  // pi_exp taken from mfexp::solve_fixed_point(lambda, mu, capacity, d).
  static InsensitiveFixedPoint solve(double lambda, const ServiceDistribution& dist, int capacity, int d);

  const mfexp::OccupancyDist& pi_exp() const noexcept { return pi_exp_; }
  const ServiceDistribution& dist() const noexcept { return dist_; }
  double mu() const noexcept { return mu_; }
  int capacity() const noexcept { return pi_exp_.capacity(); }

  // `ages` holds n bounds (kInfinity allowed). DomainError if n > C.
  double eval(std::span<const double> ages) const;

 private:
  mfexp::OccupancyDist pi_exp_;
  ServiceDistribution dist_;
  double mu_;
};

double eval_pi(const InsensitiveFixedPoint& fp, int n, std::span<const double> ages);

// Single server with capacity C = alpha.size(): Poisson arrivals at rate
// alpha_n while n jobs are present, general service.
struct StateDepArrivalLaw {
  std::vector<double> alpha;  // alpha_0..alpha_{C-1}
  ServiceDistribution dist;
  double mu;

  int capacity() const noexcept { return static_cast<int>(alpha.size()); }
  void validate() const;
};

// Stationary probability of n jobs with ages bounded by `ages` (size n):
// prod_{i<=n} alpha_{i-1}/(i mu) / (1 + sum_m prod_{i<=m} alpha_{i-1}/(i mu))
// times the age factors.
double single_server_product_form(const StateDepArrivalLaw& law, int n, std::span<const double> ages);

// Occupancy marginal of the product form (all ages unbounded).
std::vector<double> single_server_occupancy(const StateDepArrivalLaw& law);

// alpha_n = lambda * power_sum_ratio(R_n, R_{n+1}, d) from the tails of an
// occupancy law: the arrival rates a tagged server sees in the mean field.
std::vector<double> mean_field_arrival_rates(const mfexp::OccupancyDist& q, double lambda, int d);

}  // namespace lossmesh
