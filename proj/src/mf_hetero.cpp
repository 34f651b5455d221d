#include "lossmesh/mf_hetero.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lossmesh/errors.hpp"
#include "lossmesh/mf_exp.hpp"
#include "lossmesh/rk4.hpp"

namespace lossmesh::mfexp {

void HeteroProfile::validate() const {
  if (gamma.empty()) throw ValidationError("profile.gamma", "needs at least one server type");
  if (capacity.size() != gamma.size()) {
    throw ValidationError("profile.capacity", "needs one capacity per type");
  }
  double total = 0.0;
  for (double g : gamma) {
    if (!(g > 0.0)) throw ValidationError("profile.gamma", "fractions must be positive");
    total += g;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("profile.gamma", "fractions must sum to 1");
  for (std::size_t k = 0; k < capacity.size(); ++k) {
    if (capacity[k] < 1) throw ValidationError("profile.capacity", "capacities must be >= 1");
    if (k > 0 && capacity[k] < capacity[k - 1]) {
      throw ValidationError("profile.capacity", "capacities must be nondecreasing");
    }
  }
  if (!(lambda > 0.0) && lambda != 0.0) throw ValidationError("lambda", "must be nonnegative");
  if (!(mu > 0.0)) throw ValidationError("mu", "must be positive");
}

std::vector<std::size_t> HeteroProfile::offsets() const {
  std::vector<std::size_t> out(gamma.size() + 1, 0);
  for (std::size_t k = 0; k < capacity.size(); ++k) {
    out[k + 1] = out[k] + static_cast<std::size_t>(capacity[k]) + 1;
  }
  return out;
}

namespace {

struct TypeTails {
  std::vector<std::vector<double>> tails;  // per type, R_0..R_{C_k+1}
};

TypeTails all_tails(std::span<const double> state, const HeteroProfile& profile,
                    const std::vector<std::size_t>& off) {
  TypeTails out;
  out.tails.reserve(profile.gamma.size());
  for (std::size_t k = 0; k < profile.gamma.size(); ++k) {
    out.tails.push_back(tail_sums(state.subspan(off[k], off[k + 1] - off[k])));
  }
  return out;
}

// Fraction of type-i servers whose vacancy is <= v (v >= -1).
double vacancy_at_most(const std::vector<double>& tails, int capacity, int v) {
  const int level = std::max(0, capacity - v);
  return tails[static_cast<std::size_t>(level)];
}

double flow_from_tails(const TypeTails& t, std::span<const double> state, const HeteroProfile& profile,
                       const std::vector<std::size_t>& off, int k, int n, int d) {
  const int vacancy = profile.capacity[static_cast<std::size_t>(k)] - n;
  double no_better = 0.0;
  double worse = 0.0;
  for (int i = 0; i < profile.types(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double at_most = profile.gamma[ui] * vacancy_at_most(t.tails[ui], profile.capacity[ui], vacancy);
    const double below = profile.gamma[ui] * vacancy_at_most(t.tails[ui], profile.capacity[ui], vacancy - 1);
    no_better += i <= k ? at_most : below;
    worse += i < k ? at_most : below;
  }
  const auto uk = static_cast<std::size_t>(k);
  const double mass = profile.gamma[uk] * state[off[uk] + static_cast<std::size_t>(n)];
  return (profile.lambda * detail::power_sum_ratio_unchecked(no_better, worse, d)) * mass;
}

}  // namespace

double hetero_arrival_flow(std::span<const double> state, const HeteroProfile& profile, int k, int n, int d) {
  profile.validate();
  const auto off = profile.offsets();
  if (state.size() != off.back()) throw ValidationError("state", "size does not match profile");
  if (k < 0 || k >= profile.types()) throw DomainError("hetero_arrival_flow: type out of range");
  if (n < 0 || n > profile.capacity[static_cast<std::size_t>(k)]) {
    throw DomainError("hetero_arrival_flow: occupancy out of range");
  }
  const TypeTails t = all_tails(state, profile, off);
  return flow_from_tails(t, state, profile, off, k, n, d);
}

void hetero_occupancy_rhs(std::span<const double> state, const HeteroProfile& profile, int d,
                          std::span<double> dstate) {
  const auto off = profile.offsets();
  const TypeTails t = all_tails(state, profile, off);
  std::vector<double> births;
  for (int k = 0; k < profile.types(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const int c = profile.capacity[uk];
    births.assign(static_cast<std::size_t>(c), 0.0);
    for (int n = 0; n < c; ++n) {
      births[static_cast<std::size_t>(n)] = flow_from_tails(t, state, profile, off, k, n, d) / profile.gamma[uk];
    }
    const std::size_t len = off[uk + 1] - off[uk];
    birth_death_drift(state.subspan(off[uk], len), births, profile.mu, dstate.subspan(off[uk], len));
  }
}

std::vector<std::vector<double>> hetero_occupancy_rhs(const std::vector<std::vector<double>>& state,
                                                      const HeteroProfile& profile, int d) {
  profile.validate();
  std::vector<double> flat;
  for (const auto& q : state) flat.insert(flat.end(), q.begin(), q.end());
  const auto off = profile.offsets();
  if (flat.size() != off.back()) throw ValidationError("state", "size does not match profile");
  std::vector<double> dflat(flat.size());
  hetero_occupancy_rhs(flat, profile, d, dflat);
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k + 1 < off.size(); ++k) {
    out.emplace_back(dflat.begin() + static_cast<std::ptrdiff_t>(off[k]),
                     dflat.begin() + static_cast<std::ptrdiff_t>(off[k + 1]));
  }
  return out;
}

std::vector<double> hetero_empty_state(const HeteroProfile& profile) {
  const auto off = profile.offsets();
  std::vector<double> x(off.back(), 0.0);
  for (std::size_t k = 0; k + 1 < off.size(); ++k) x[off[k]] = 1.0;
  return x;
}

HeteroTrajectory integrate_hetero(std::vector<double> state0, const HeteroProfile& profile, int d, double t_end,
                                  double dt, std::size_t out_every) {
  profile.validate();
  const auto off = profile.offsets();
  if (state0.size() != off.back()) throw ValidationError("state", "size does not match profile");
  auto rhs = [&profile, d](std::span<const double> x, std::span<double> dx) {
    hetero_occupancy_rhs(x, profile, d, dx);
  };
  Rk4Stepper<decltype(rhs)> stepper(rhs, state0.size());
  HeteroTrajectory out;
  integrate_fixed(stepper, state0, off, t_end, dt, out_every, [&](double t, std::span<const double> x) {
    out.times.push_back(t);
    out.states.emplace_back(x.begin(), x.end());
  });
  return out;
}

HeteroEquilibrium hetero_equilibrium(const HeteroProfile& profile, int d, double t_end, double dt) {
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  HeteroTrajectory traj = integrate_hetero(hetero_empty_state(profile), profile, d, t_end, dt, steps);
  HeteroEquilibrium eq;
  eq.state = std::move(traj.states.back());
  std::vector<double> ds(eq.state.size());
  hetero_occupancy_rhs(eq.state, profile, d, ds);
  for (double v : ds) eq.residual = std::max(eq.residual, std::abs(v));
  return eq;
}

}  // namespace lossmesh::mfexp
