#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lossmesh::mfexp {

// Q_0..Q_C: probability that a server holds exactly n jobs.
class OccupancyDist {
 public:
  // Throws ValidationError unless entries are >= 0 and sum to 1 within 1e-10.
  explicit OccupancyDist(std::vector<double> q);

  int capacity() const noexcept { return static_cast<int>(q_.size()) - 1; }
  double operator[](int n) const { return q_[static_cast<std::size_t>(n)]; }
  std::span<const double> values() const noexcept { return q_; }

 private:
  std::vector<double> q_;
};

// P_0..P_{C+1}: probability that a server holds at least n jobs.
class TailVector {
 public:
  // Throws ValidationError unless P_0 = 1, P_{C+1} = 0 and P is nonincreasing
  // within [0, 1].
  explicit TailVector(std::vector<double> p);
  static TailVector from_occupancy(const OccupancyDist& q);

  int capacity() const noexcept { return static_cast<int>(p_.size()) - 2; }
  double operator[](int n) const { return p_[static_cast<std::size_t>(n)]; }
  std::span<const double> values() const noexcept { return p_; }
  OccupancyDist occupancy() const;

 private:
  std::vector<double> p_;
};

// sum_{i<d} a^i b^(d-1-i), i.e. (a^d - b^d)/(a - b) without the division.
// DomainError if b > a.
double power_sum_ratio(double a, double b, int d);

namespace detail {
// Same sum without the monotonicity check; the sum is symmetric in (a, b), so
// ODE right-hand sides use it on states with tiny negative undershoot.
double power_sum_ratio_unchecked(double a, double b, int d);
}  // namespace detail

// R_n = sum_{j>=n} q_j for n = 0..C+1, accumulated from the top level down.
std::vector<double> tail_sums(std::span<const double> q);

// Per-level arrival rates seen by a server under power-of-d routing:
// lambda_n = lambda * power_sum_ratio(P_n, P_{n+1}, d), n = 0..C.
std::vector<double> lambda_map(const TailVector& p, double lambda, int d);

// Stationary law of the birth-death chain on 0..C with birth rates
// birth[0..C-1] and death rate n*mu in state n. `birth` may hold more than C
// entries; the extra ones are ignored.
OccupancyDist birth_death_stationary(std::span<const double> birth, double mu, int capacity);

// One application of the fixed-point map: lambda_map, then the stationary
// birth-death law, then tails.
TailVector fixed_point_map(const TailVector& p, double lambda, double mu, int d);

struct FixedPointOptions {
  double tolerance = 1e-13;
  long max_iter = 1'000'000;
};

// Equilibrium tails of the exponential-service mean field, obtained by
// iterating fixed_point_map from the d = 1 (Erlang-B) law. Throws
// ConvergenceError after max_iter iterations.
TailVector solve_fixed_point(double lambda, double mu, int capacity, int d,
                             const FixedPointOptions& options = {});

// (P_C)^d: probability that all d probes land on full servers.
double blocking_probability(const TailVector& p, int d);

// Births b_n (n < C) and deaths n*mu*q_n assembled into dq/dt.
void birth_death_drift(std::span<const double> q, std::span<const double> births, double mu,
                       std::span<double> dq);

// Right-hand side of the occupancy ODE for exponential service.
void exp_occupancy_rhs(std::span<const double> q, double lambda, double mu, int d, std::span<double> dq);
std::vector<double> exp_occupancy_rhs(const OccupancyDist& q, double lambda, double mu, int d);

struct OccupancyTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
};

// Fixed-step RK4 integration of the occupancy ODE from q0 over [0, t_end],
// sampled every `out_every` steps (t = 0 and t_end always included).
OccupancyTrajectory integrate_exp_occupancy(std::vector<double> q0, double lambda, double mu, int d,
                                            double t_end, double dt, std::size_t out_every);

}  // namespace lossmesh::mfexp
