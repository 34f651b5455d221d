#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lossmesh::mfexp {

// Server population split into K capacity classes. Type k makes up the
// fraction gamma[k] of servers and holds up to capacity[k] jobs; capacities
// are nondecreasing in k. lambda is the arrival rate per server.
struct HeteroProfile {
  std::vector<double> gamma;
  std::vector<int> capacity;
  double lambda = 1.0;
  double mu = 1.0;

  // Throws ValidationError on a malformed profile.
  void validate() const;
  int types() const noexcept { return static_cast<int>(gamma.size()); }
  // Start of each type's block Q_{k,0..C_k} in a flat state vector; the last
  // entry is the total length.
  std::vector<std::size_t> offsets() const;
};

// Arrival flow into type-k servers holding n jobs, per server of the whole
// population: lambda * (A^d - B^d), where A (B) is the probability that one
// probe is no better than (strictly worse than) a type-k server at level n
// in the max-vacancy order with cross-type ties going to the larger type.
// Evaluated as lambda * power_sum_ratio(A, B) * gamma_k * Q_{k,n}, so empty
// levels carry zero flow. n == C_k gives the flow that is blocked.
double hetero_arrival_flow(std::span<const double> state, const HeteroProfile& profile, int k, int n, int d);

// Occupancy ODE per type: births = flow/gamma_k, deaths n*mu*Q_{k,n}.
void hetero_occupancy_rhs(std::span<const double> state, const HeteroProfile& profile, int d,
                          std::span<double> dstate);
std::vector<std::vector<double>> hetero_occupancy_rhs(const std::vector<std::vector<double>>& state,
                                                      const HeteroProfile& profile, int d);

// All servers empty.
std::vector<double> hetero_empty_state(const HeteroProfile& profile);

struct HeteroTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // flat, laid out by offsets()
};

HeteroTrajectory integrate_hetero(std::vector<double> state0, const HeteroProfile& profile, int d,
                                  double t_end, double dt, std::size_t out_every);

struct HeteroEquilibrium {
  std::vector<double> state;
  double residual = 0.0;  // sup-norm of the right-hand side at `state`
};

// Long integration from the empty state; the fixed point has no closed form.
HeteroEquilibrium hetero_equilibrium(const HeteroProfile& profile, int d, double t_end = 1000.0,
                                     double dt = 1e-3);

}  // namespace lossmesh::mfexp
