#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lossmesh::mfphase {

// Server states under mixed-Erlang service: ordered tuples (l_1..l_n) of
// remaining phase counts, 1 <= l_i <= M, for n = 0..C.
//
// Index layout: states are grouped by job count n; inside a group the tuple is
// read as a base-M number with l_1 most significant (digit l_i - 1). So
// index(l) = offset(n) + sum_i (l_i - 1) * M^(n-i), offset(n) = sum_{m<n} M^m.
class PhaseSpace {
 public:
  static constexpr std::size_t kMaxStates = 1'000'000;

  // Throws ValidationError if C < 1, M < 1 or the space exceeds kMaxStates.
  PhaseSpace(int capacity, int max_phases);

  int capacity() const noexcept { return capacity_; }
  int max_phases() const noexcept { return max_phases_; }
  std::size_t size() const noexcept { return offsets_.back(); }
  // First index of states with n jobs; level_begin(C+1) == size().
  std::size_t level_begin(int n) const { return offsets_[static_cast<std::size_t>(n)]; }

  std::size_t index(std::span<const int> jobs) const;
  // Nonzero prefix (l_1..l_n) of the state at `idx`.
  std::vector<int> jobs(std::size_t idx) const;
  // Z(l): number of jobs in the state at `idx`.
  int occupancy(std::size_t idx) const;

 private:
  int capacity_;
  int max_phases_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> powers_;  // M^k
};

PhaseSpace enumerate_states(int capacity, int max_phases);

struct PhaseParams {
  double lambda = 1.0;
  double phase_rate = 1.0;
  std::vector<double> phase_probs;  // p_1..p_M
  int d = 2;

  void validate() const;
  // Mean service time sum_i i p_i / phase_rate.
  double mean_service() const;
};

// Q_n: probability mass on states with n jobs.
std::vector<double> occupancy_marginal(const PhaseSpace& space, std::span<const double> x);

// Arrival rate seen by a server with n jobs: lambda * power_sum_ratio(R_n, R_{n+1}, d)
// where R are the tails of the occupancy marginal.
double lambda_me(const PhaseSpace& space, int n, std::span<const double> x, double lambda, int d);

// Mean-field vector field h over a phase space. Transitions are precomputed
// once; evaluation is one sparse pass over the states.
class PhaseModel {
 public:
  PhaseModel(PhaseSpace space, PhaseParams params);

  const PhaseSpace& space() const noexcept { return space_; }
  const PhaseParams& params() const noexcept { return params_; }

  // dx = h(x). ValidationError on a dimension mismatch.
  void rhs(std::span<const double> x, std::span<double> dx) const;
  std::vector<double> rhs(std::span<const double> x) const;

 private:
  PhaseSpace space_;
  PhaseParams params_;
  std::vector<int> level_of_;  // Z(l) per state
  // Inflow sources per target state, compressed-row layout.
  std::vector<std::size_t> arrival_start_;
  std::vector<std::uint32_t> arrival_source_;
  std::vector<double> arrival_weight_;  // p_{l_b}/Z(l); rate lambda_{Z(l)-1}
  std::vector<std::size_t> service_start_;
  std::vector<std::uint32_t> service_source_;  // departures and phase advances, rate phase_rate
};

struct PhaseTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
};

// Fixed-step RK4; mass is renormalized whenever it drifts by more than 1e-12.
// Throws IntegrationError on a non-finite state. Sampled every `out_every`
// steps, plus t = 0 and the final time.
PhaseTrajectory integrate(const PhaseModel& model, std::vector<double> x0, double t_end, double dt,
                          std::size_t out_every);

// Same integration, streaming samples to `observe` instead of storing them.
void integrate_observe(const PhaseModel& model, std::vector<double>& x, double t_end, double dt,
                       std::size_t out_every, const std::function<void(double, std::span<const double>)>& observe);

// Default step: 1e-3 / phase_rate.
double default_step(const PhaseParams& params);

// Euclidean distance over S.
double distance_to(std::span<const double> x, std::span<const double> pi);

// All mass on the empty state.
std::vector<double> empty_state(const PhaseSpace& space);

// Uniform draw from the simplex over S (normalized exponential spacings).
std::vector<double> random_initial_point(const PhaseSpace& space, std::uint64_t seed);

struct PhaseEquilibrium {
  std::vector<double> x;
  double residual = 0.0;  // sup-norm of h at x
};

// Long integration (default T = 500) from the empty state.
PhaseEquilibrium phase_equilibrium(const PhaseModel& model, double t_end = 500.0, double dt = 0.0);

// Clamp the small negative undershoot an integrator may leave behind.
std::vector<double> clamp_state(std::span<const double> x);

}  // namespace lossmesh::mfphase
