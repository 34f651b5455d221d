#include "lossmesh/mf_exp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lossmesh/errors.hpp"
#include "lossmesh/rk4.hpp"

namespace lossmesh::mfexp {

namespace detail {
double power_sum_ratio_unchecked(double a, double b, int d) {
  // Horner in a with coefficients b^(d-1-i).
  double sum = 1.0;
  double b_pow = 1.0;
  for (int k = 1; k < d; ++k) {
    b_pow *= b;
    sum = sum * a + b_pow;
  }
  return sum;
}
}  // namespace detail

OccupancyDist::OccupancyDist(std::vector<double> q) : q_(std::move(q)) {
  if (q_.empty()) {
    throw ValidationError("Q", "occupancy distribution needs at least one level");
  }
  double total = 0.0;
  for (double v : q_) {
    if (!(v >= 0.0)) {
      throw ValidationError("Q", "occupancy probabilities must be nonnegative");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw ValidationError("Q", "occupancy probabilities must sum to 1 (got " + std::to_string(total) + ")");
  }
}

TailVector::TailVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.size() < 2) {
    throw ValidationError("P", "tail vector needs entries P_0..P_{C+1}");
  }
  if (std::abs(p_.front() - 1.0) > 1e-12 || std::abs(p_.back()) > 1e-12) {
    throw ValidationError("P", "tail vector must start at 1 and end at 0");
  }
  p_.front() = 1.0;
  p_.back() = 0.0;
  for (std::size_t n = 0; n + 1 < p_.size(); ++n) {
    if (!(p_[n] >= 0.0 && p_[n] <= 1.0) || p_[n + 1] > p_[n]) {
      throw ValidationError("P", "tail vector must be nonincreasing within [0, 1]");
    }
  }
}

TailVector TailVector::from_occupancy(const OccupancyDist& q) {
  std::vector<double> r = tail_sums(q.values());
  r.front() = 1.0;
  for (double& v : r) v = std::clamp(v, 0.0, 1.0);
  return TailVector(std::move(r));
}

OccupancyDist TailVector::occupancy() const {
  std::vector<double> q(p_.size() - 1);
  for (std::size_t n = 0; n < q.size(); ++n) q[n] = p_[n] - p_[n + 1];
  return OccupancyDist(std::move(q));
}

double power_sum_ratio(double a, double b, int d) {
  if (d < 1) {
    throw DomainError("power_sum_ratio: d must be >= 1");
  }
  if (b > a) {
    throw DomainError("power_sum_ratio: tails must be monotone (b > a)");
  }
  return detail::power_sum_ratio_unchecked(a, b, d);
}

std::vector<double> tail_sums(std::span<const double> q) {
  std::vector<double> r(q.size() + 1, 0.0);
  for (std::size_t n = q.size(); n-- > 0;) r[n] = r[n + 1] + q[n];
  return r;
}

std::vector<double> lambda_map(const TailVector& p, double lambda, int d) {
  const int c = p.capacity();
  std::vector<double> rates(static_cast<std::size_t>(c) + 1);
  for (int n = 0; n <= c; ++n) {
    rates[static_cast<std::size_t>(n)] = lambda * power_sum_ratio(p[n], p[n + 1], d);
  }
  return rates;
}

OccupancyDist birth_death_stationary(std::span<const double> birth, double mu, int capacity) {
  if (capacity < 0 || birth.size() < static_cast<std::size_t>(capacity)) {
    throw ValidationError("birth", "need one birth rate per level below capacity");
  }
  if (!(mu > 0.0)) {
    throw ValidationError("mu", "must be positive");
  }
  std::vector<double> w(static_cast<std::size_t>(capacity) + 1);
  w[0] = 1.0;
  for (int n = 1; n <= capacity; ++n) {
    const auto i = static_cast<std::size_t>(n);
    w[i] = w[i - 1] * birth[i - 1] / (n * mu);
    if (w[i] > 1e250) {
      for (std::size_t j = 0; j <= i; ++j) w[j] *= 1e-250;
    }
  }
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return OccupancyDist(std::move(w));
}

TailVector fixed_point_map(const TailVector& p, double lambda, double mu, int d) {
  const std::vector<double> rates = lambda_map(p, lambda, d);
  return TailVector::from_occupancy(birth_death_stationary(rates, mu, p.capacity()));
}

TailVector solve_fixed_point(double lambda, double mu, int capacity, int d, const FixedPointOptions& options) {
  if (!(lambda > 0.0)) throw ValidationError("lambda", "must be positive");
  if (!(mu > 0.0)) throw ValidationError("mu", "must be positive");
  if (capacity < 1) throw ValidationError("capacity", "must be >= 1");
  if (d < 1) throw ValidationError("d", "must be >= 1");

  // d = 1 start: constant births give the truncated Poisson law.
  const std::vector<double> constant(static_cast<std::size_t>(capacity), lambda);
  TailVector current = TailVector::from_occupancy(birth_death_stationary(constant, mu, capacity));
  double residual = 0.0;
  for (long iter = 0; iter < options.max_iter; ++iter) {
    TailVector next = fixed_point_map(current, lambda, mu, d);
    residual = 0.0;
    for (int n = 0; n <= capacity + 1; ++n) residual = std::max(residual, std::abs(next[n] - current[n]));
    current = std::move(next);
    if (residual < options.tolerance) {
      return current;
    }
  }
  throw ConvergenceError("fixed-point iteration did not converge", residual);
}

double blocking_probability(const TailVector& p, int d) { return std::pow(p[p.capacity()], d); }

void birth_death_drift(std::span<const double> q, std::span<const double> births, double mu,
                       std::span<double> dq) {
  const std::size_t c = q.size() - 1;
  for (std::size_t n = 0; n <= c; ++n) {
    double v = -static_cast<double>(n) * mu * q[n];
    if (n < c) v += static_cast<double>(n + 1) * mu * q[n + 1] - births[n];
    if (n > 0) v += births[n - 1];
    dq[n] = v;
  }
}

void exp_occupancy_rhs(std::span<const double> q, double lambda, double mu, int d, std::span<double> dq) {
  const std::size_t c = q.size() - 1;
  const std::vector<double> r = tail_sums(q);
  std::vector<double> births(c);
  for (std::size_t n = 0; n < c; ++n) {
    births[n] = (lambda * detail::power_sum_ratio_unchecked(r[n], r[n + 1], d)) * q[n];
  }
  birth_death_drift(q, births, mu, dq);
}

std::vector<double> exp_occupancy_rhs(const OccupancyDist& q, double lambda, double mu, int d) {
  std::vector<double> dq(q.values().size());
  exp_occupancy_rhs(q.values(), lambda, mu, d, dq);
  return dq;
}

OccupancyTrajectory integrate_exp_occupancy(std::vector<double> q0, double lambda, double mu, int d,
                                            double t_end, double dt, std::size_t out_every) {
  auto rhs = [=](std::span<const double> x, std::span<double> dx) { exp_occupancy_rhs(x, lambda, mu, d, dx); };
  Rk4Stepper<decltype(rhs)> stepper(rhs, q0.size());
  const std::size_t blocks[] = {0, q0.size()};
  OccupancyTrajectory out;
  integrate_fixed(stepper, q0, blocks, t_end, dt, out_every, [&](double t, std::span<const double> x) {
    out.times.push_back(t);
    out.states.emplace_back(x.begin(), x.end());
  });
  return out;
}

}  // namespace lossmesh::mfexp
