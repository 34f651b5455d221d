#include "lossmesh/mf_phase.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/random/exponential_distribution.hpp>

#include "lossmesh/errors.hpp"
#include "lossmesh/mf_exp.hpp"
#include "lossmesh/rk4.hpp"
#include "lossmesh/rng.hpp"

namespace lossmesh::mfphase {

PhaseSpace::PhaseSpace(int capacity, int max_phases) : capacity_(capacity), max_phases_(max_phases) {
  if (capacity < 1) throw ValidationError("capacity", "must be >= 1");
  if (max_phases < 1) throw ValidationError("max_phases", "must be >= 1");
  offsets_.assign(1, 0);
  powers_.assign(1, 1);
  for (int n = 0; n <= capacity; ++n) {
    const std::size_t level = powers_.back();
    offsets_.push_back(offsets_.back() + level);
    if (offsets_.back() > kMaxStates) {
      throw ValidationError("capacity", "phase state space exceeds " + std::to_string(kMaxStates) + " states");
    }
    powers_.push_back(level * static_cast<std::size_t>(max_phases));
  }
}

std::size_t PhaseSpace::index(std::span<const int> jobs) const {
  const auto n = jobs.size();
  if (n > static_cast<std::size_t>(capacity_)) throw DomainError("PhaseSpace::index: too many jobs");
  std::size_t within = 0;
  for (int l : jobs) {
    if (l < 1 || l > max_phases_) throw DomainError("PhaseSpace::index: phase count out of range");
    within = within * static_cast<std::size_t>(max_phases_) + static_cast<std::size_t>(l - 1);
  }
  return offsets_[n] + within;
}

int PhaseSpace::occupancy(std::size_t idx) const {
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), idx);
  return static_cast<int>(it - offsets_.begin()) - 1;
}

std::vector<int> PhaseSpace::jobs(std::size_t idx) const {
  const int n = occupancy(idx);
  std::size_t within = idx - offsets_[static_cast<std::size_t>(n)];
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(within % static_cast<std::size_t>(max_phases_)) + 1;
    within /= static_cast<std::size_t>(max_phases_);
  }
  return out;
}

PhaseSpace enumerate_states(int capacity, int max_phases) { return PhaseSpace(capacity, max_phases); }

void PhaseParams::validate() const {
  if (!(lambda >= 0.0)) throw ValidationError("lambda", "must be nonnegative");
  if (!(phase_rate > 0.0)) throw ValidationError("phase_rate", "must be positive");
  if (phase_probs.empty()) throw ValidationError("phase_probs", "must not be empty");
  double total = 0.0;
  for (double p : phase_probs) {
    if (!(p >= 0.0)) throw ValidationError("phase_probs", "entries must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("phase_probs", "must sum to 1");
  if (d < 1) throw ValidationError("d", "must be >= 1");
}

double PhaseParams::mean_service() const {
  double phases = 0.0;
  for (std::size_t i = 0; i < phase_probs.size(); ++i) phases += static_cast<double>(i + 1) * phase_probs[i];
  return phases / phase_rate;
}

std::vector<double> occupancy_marginal(const PhaseSpace& space, std::span<const double> x) {
  if (x.size() != space.size()) throw ValidationError("x", "dimension does not match state space");
  std::vector<double> q(static_cast<std::size_t>(space.capacity()) + 1, 0.0);
  for (int n = 0; n <= space.capacity(); ++n) {
    double acc = 0.0;
    for (std::size_t i = space.level_begin(n); i < space.level_begin(n + 1); ++i) acc += x[i];
    q[static_cast<std::size_t>(n)] = acc;
  }
  return q;
}

double lambda_me(const PhaseSpace& space, int n, std::span<const double> x, double lambda, int d) {
  if (n < 0 || n >= space.capacity()) throw DomainError("lambda_me: occupancy must lie in [0, C-1]");
  const std::vector<double> r = mfexp::tail_sums(occupancy_marginal(space, x));
  const auto un = static_cast<std::size_t>(n);
  return lambda * mfexp::detail::power_sum_ratio_unchecked(r[un], r[un + 1], d);
}

PhaseModel::PhaseModel(PhaseSpace space, PhaseParams params) : space_(std::move(space)), params_(std::move(params)) {
  params_.validate();
  const int m = space_.max_phases();
  if (static_cast<int>(params_.phase_probs.size()) != m) {
    throw ValidationError("phase_probs", "length must equal the number of phases of the state space");
  }
  const int c = space_.capacity();
  level_of_.resize(space_.size());
  arrival_start_.assign(1, 0);
  service_start_.assign(1, 0);
  std::vector<int> buf;
  for (std::size_t idx = 0; idx < space_.size(); ++idx) {
    const std::vector<int> l = space_.jobs(idx);
    const int z = static_cast<int>(l.size());
    level_of_[idx] = z;

    // Arrival inflow: job b of l was the one that just arrived.
    for (int b = 0; b < z; ++b) {
      buf = l;
      buf.erase(buf.begin() + b);
      const double w = params_.phase_probs[static_cast<std::size_t>(l[static_cast<std::size_t>(b)] - 1)] / z;
      arrival_source_.push_back(static_cast<std::uint32_t>(space_.index(buf)));
      arrival_weight_.push_back(w);
    }
    // Departure inflow: a job with one phase left sat at position b.
    if (z < c) {
      for (int b = 0; b <= z; ++b) {
        buf = l;
        buf.insert(buf.begin() + b, 1);
        service_source_.push_back(static_cast<std::uint32_t>(space_.index(buf)));
      }
    }
    // Phase advance inflow: job b had one more phase.
    for (int b = 0; b < z; ++b) {
      if (l[static_cast<std::size_t>(b)] < m) {
        buf = l;
        buf[static_cast<std::size_t>(b)] += 1;
        service_source_.push_back(static_cast<std::uint32_t>(space_.index(buf)));
      }
    }
    arrival_start_.push_back(arrival_source_.size());
    service_start_.push_back(service_source_.size());
  }
}

void PhaseModel::rhs(std::span<const double> x, std::span<double> dx) const {
  if (x.size() != space_.size() || dx.size() != space_.size()) {
    throw ValidationError("x", "dimension does not match state space");
  }
  const int c = space_.capacity();
  // Per-level arrival rates from the occupancy marginal.
  std::vector<double> q(static_cast<std::size_t>(c) + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) q[static_cast<std::size_t>(level_of_[i])] += x[i];
  const std::vector<double> r = mfexp::tail_sums(q);
  std::vector<double> rate(static_cast<std::size_t>(c) + 1, 0.0);
  for (int n = 0; n < c; ++n) {
    const auto un = static_cast<std::size_t>(n);
    rate[un] = params_.lambda * mfexp::detail::power_sum_ratio_unchecked(r[un], r[un + 1], params_.d);
  }

  const double mu = params_.phase_rate;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto z = static_cast<std::size_t>(level_of_[i]);
    double arrivals = 0.0;
    for (std::size_t a = arrival_start_[i]; a < arrival_start_[i + 1]; ++a) {
      arrivals += arrival_weight_[a] * x[arrival_source_[a]];
    }
    double services = 0.0;
    for (std::size_t s = service_start_[i]; s < service_start_[i + 1]; ++s) services += x[service_source_[s]];
    double v = -(rate[z] + static_cast<double>(z) * mu) * x[i] + mu * services;
    if (z > 0) v += rate[z - 1] * arrivals;
    dx[i] = v;
  }
}

std::vector<double> PhaseModel::rhs(std::span<const double> x) const {
  std::vector<double> dx(x.size());
  rhs(x, dx);
  return dx;
}

double default_step(const PhaseParams& params) { return 1e-3 / params.phase_rate; }

void integrate_observe(const PhaseModel& model, std::vector<double>& x, double t_end, double dt,
                       std::size_t out_every, const std::function<void(double, std::span<const double>)>& observe) {
  if (x.size() != model.space().size()) throw ValidationError("x0", "dimension does not match state space");
  auto rhs = [&model](std::span<const double> s, std::span<double> ds) { model.rhs(s, ds); };
  Rk4Stepper<decltype(rhs)> stepper(rhs, x.size());
  const std::size_t blocks[] = {0, x.size()};
  integrate_fixed(stepper, x, blocks, t_end, dt, out_every, observe);
}

PhaseTrajectory integrate(const PhaseModel& model, std::vector<double> x0, double t_end, double dt,
                          std::size_t out_every) {
  PhaseTrajectory out;
  integrate_observe(model, x0, t_end, dt, out_every, [&](double t, std::span<const double> s) {
    out.times.push_back(t);
    out.states.emplace_back(s.begin(), s.end());
  });
  return out;
}

double distance_to(std::span<const double> x, std::span<const double> pi) {
  if (x.size() != pi.size()) throw ValidationError("pi", "dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - pi[i];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

std::vector<double> empty_state(const PhaseSpace& space) {
  std::vector<double> x(space.size(), 0.0);
  x[0] = 1.0;
  return x;
}

std::vector<double> random_initial_point(const PhaseSpace& space, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0, Stream::InitialPoint);
  boost::random::exponential_distribution<double> spacing(1.0);
  std::vector<double> x(space.size());
  double total = 0.0;
  for (double& v : x) {
    v = spacing(rng);
    total += v;
  }
  for (double& v : x) v /= total;
  return x;
}

PhaseEquilibrium phase_equilibrium(const PhaseModel& model, double t_end, double dt) {
  if (dt <= 0.0) dt = default_step(model.params());
  std::vector<double> x = empty_state(model.space());
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  integrate_observe(model, x, t_end, dt, steps, [](double, std::span<const double>) {});
  PhaseEquilibrium eq;
  const std::vector<double> h = model.rhs(x);
  for (double v : h) eq.residual = std::max(eq.residual, std::abs(v));
  eq.x = std::move(x);
  return eq;
}

std::vector<double> clamp_state(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v = std::max(v, 0.0);
  return out;
}

}  // namespace lossmesh::mfphase
