#include "lossmesh/insensitive_law.hpp"

#include <algorithm>
#include <cmath>

#include "lossmesh/errors.hpp"

namespace lossmesh {

namespace {

double age_product(const ServiceDistribution& dist, std::span<const double> ages) {
  // Sorted so the floating-point product does not depend on argument order.
  std::vector<double> sorted(ages.begin(), ages.end());
  std::sort(sorted.begin(), sorted.end());
  double acc = 1.0;
  for (double y : sorted) {
    if (std::isnan(y) || y < 0.0) throw DomainError("age bound must be nonnegative");
    acc *= dist.age_factor(y);
  }
  return acc;
}

}  // namespace

InsensitiveFixedPoint::InsensitiveFixedPoint(mfexp::OccupancyDist pi_exp, ServiceDistribution dist, double mu)
    : pi_exp_(std::move(pi_exp)), dist_(std::move(dist)), mu_(mu) {
  if (std::abs(mu_ * dist_.mean() - 1.0) > 1e-9) {
    throw ValidationError("service", "mean service time must equal 1/mu");
  }
}

InsensitiveFixedPoint InsensitiveFixedPoint::solve(double lambda, const ServiceDistribution& dist, int capacity,
                                                   int d) {
  const double mu = 1.0 / dist.mean();
  return InsensitiveFixedPoint(mfexp::solve_fixed_point(lambda, mu, capacity, d).occupancy(), dist, mu);
}

double InsensitiveFixedPoint::eval(std::span<const double> ages) const {
  const auto n = static_cast<int>(ages.size());
  if (n > capacity()) throw DomainError("eval_pi: occupancy exceeds capacity");
  return pi_exp_[n] * age_product(dist_, ages);
}

double eval_pi(const InsensitiveFixedPoint& fp, int n, std::span<const double> ages) {
  if (n < 0 || n > fp.capacity()) throw DomainError("eval_pi: occupancy out of range");
  if (static_cast<int>(ages.size()) != n) throw DomainError("eval_pi: need one age bound per job");
  return fp.eval(ages);
}

void StateDepArrivalLaw::validate() const {
  if (alpha.empty()) throw ValidationError("alpha", "capacity must be >= 1");
  for (double a : alpha) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ValidationError("alpha", "rates must be nonnegative");
  }
  if (!(mu > 0.0)) throw ValidationError("mu", "must be positive");
}

std::vector<double> single_server_occupancy(const StateDepArrivalLaw& law) {
  law.validate();
  const int c = law.capacity();
  std::vector<double> weight(static_cast<std::size_t>(c) + 1);
  weight[0] = 1.0;
  double denom = 1.0;
  for (int m = 1; m <= c; ++m) {
    const auto um = static_cast<std::size_t>(m);
    weight[um] = weight[um - 1] * law.alpha[um - 1] / (m * law.mu);
    denom += weight[um];
  }
  for (double& w : weight) w /= denom;
  return weight;
}

double single_server_product_form(const StateDepArrivalLaw& law, int n, std::span<const double> ages) {
  if (n < 0 || n > law.capacity()) throw DomainError("single_server_product_form: occupancy out of range");
  if (static_cast<int>(ages.size()) != n) throw DomainError("single_server_product_form: need one age bound per job");
  return single_server_occupancy(law)[static_cast<std::size_t>(n)] * age_product(law.dist, ages);
}

std::vector<double> mean_field_arrival_rates(const mfexp::OccupancyDist& q, double lambda, int d) {
  const std::vector<double> r = mfexp::tail_sums(q.values());
  std::vector<double> alpha(static_cast<std::size_t>(q.capacity()));
  for (std::size_t n = 0; n < alpha.size(); ++n) {
    alpha[n] = lambda * mfexp::power_sum_ratio(r[n], r[n + 1], d);
  }
  return alpha;
}

}  // namespace lossmesh
