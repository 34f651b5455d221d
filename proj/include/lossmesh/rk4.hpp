#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lossmesh/errors.hpp"

namespace lossmesh {

// Classical fourth-order Runge-Kutta with a fixed step over a flat state
// vector. `Rhs` is callable as rhs(std::span<const double> x, std::span<double> dx).
template <class Rhs>
class Rk4Stepper {
 public:
  Rk4Stepper(Rhs rhs, std::size_t dim)
      : rhs_(std::move(rhs)), k1_(dim), k2_(dim), k3_(dim), k4_(dim), work_(dim) {}

  void step(std::vector<double>& x, double dt) {
    const std::size_t n = x.size();
    rhs_(std::span<const double>(x), std::span<double>(k1_));
    for (std::size_t i = 0; i < n; ++i) work_[i] = x[i] + 0.5 * dt * k1_[i];
    rhs_(std::span<const double>(work_), std::span<double>(k2_));
    for (std::size_t i = 0; i < n; ++i) work_[i] = x[i] + 0.5 * dt * k2_[i];
    rhs_(std::span<const double>(work_), std::span<double>(k3_));
    for (std::size_t i = 0; i < n; ++i) work_[i] = x[i] + dt * k3_[i];
    rhs_(std::span<const double>(work_), std::span<double>(k4_));
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

  const Rhs& rhs() const noexcept { return rhs_; }

 private:
  Rhs rhs_;
  std::vector<double> k1_, k2_, k3_, k4_, work_;
};

// Rescale each block [offsets[i], offsets[i+1]) to unit mass when it has
// drifted by more than `threshold`.
inline void renormalize_blocks(std::vector<double>& x, std::span<const std::size_t> offsets,
                               double threshold = 1e-12) {
  for (std::size_t b = 0; b + 1 < offsets.size(); ++b) {
    double mass = 0.0;
    for (std::size_t i = offsets[b]; i < offsets[b + 1]; ++i) mass += x[i];
    if (std::abs(mass - 1.0) > threshold) {
      for (std::size_t i = offsets[b]; i < offsets[b + 1]; ++i) x[i] /= mass;
    }
  }
}

inline void check_finite(std::span<const double> x, std::size_t step) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw IntegrationError("non-finite state", step);
    }
  }
}

// Integrates x over round(t_end/dt) steps of size dt; `observe(t, x)` runs at
// t = 0, every `out_every` steps and after the last step.
template <class Rhs, class Observer>
void integrate_fixed(Rk4Stepper<Rhs>& stepper, std::vector<double>& x, std::span<const std::size_t> blocks,
                     double t_end, double dt, std::size_t out_every, Observer&& observe) {
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  observe(0.0, std::span<const double>(x));
  if (out_every == 0) out_every = 1;
  for (std::size_t s = 1; s <= steps; ++s) {
    stepper.step(x, dt);
    renormalize_blocks(x, blocks);
    check_finite(x, s);
    if (s % out_every == 0 || s == steps) {
      observe(static_cast<double>(s) * dt, std::span<const double>(x));
    }
  }
}

}  // namespace lossmesh
