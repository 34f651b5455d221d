#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "lossmesh/rng.hpp"

namespace lossmesh {

// Nonnegative service-time law. Immutable after construction; every factory
// validates its parameters and throws ValidationError on bad input.
//
// Assumption of a bounded continuous hazard holds for Exponential,
// MixedErlang, Gamma with shape >= 1 and Lognormal (hazard vanishes at 0 and
// at infinity). It fails for Gamma with shape < 1 (hazard blows up at 0) and
// for Deterministic (no density at all). The simulator accepts all of them;
// see `has_bounded_hazard()`.
class ServiceDistribution {
 public:
  struct Exponential {
    double rate;
    bool operator==(const Exponential&) const = default;
  };
  struct MixedErlang {
    double phase_rate;
    std::vector<double> phase_probs;  // p_1..p_M
    bool operator==(const MixedErlang&) const = default;
  };
  struct Gamma {
    double shape;
    double scale;
    bool operator==(const Gamma&) const = default;
  };
  struct Lognormal {
    double log_mean;
    double log_sd;
    bool operator==(const Lognormal&) const = default;
  };
  struct Deterministic {
    double value;
    bool operator==(const Deterministic&) const = default;
  };
  using Params = std::variant<Exponential, MixedErlang, Gamma, Lognormal, Deterministic>;

  static ServiceDistribution exponential(double rate);
  static ServiceDistribution mixed_erlang(double phase_rate, std::vector<double> phase_probs);
  static ServiceDistribution gamma(double shape, double scale);
  static ServiceDistribution gamma_with_mean(double shape, double mean);
  static ServiceDistribution lognormal(double log_mean, double log_sd);
  static ServiceDistribution deterministic(double value);

  const Params& params() const noexcept { return params_; }
  std::string kind() const;
  bool has_density() const noexcept;
  bool has_bounded_hazard() const noexcept;

  double mean() const noexcept { return mean_; }
  double cdf(double x) const;
  double survival(double x) const;
  // Throws UnsupportedOperation for Deterministic.
  double density(double x) const;
  // g(x)/survival(x). DomainError where survival(x) == 0.
  double hazard(double x) const;
  // mu * integral_0^y survival(x) dx with mu = 1/mean(); y may be +inf.
  double age_factor(double y) const;

  double sample(Rng& rng) const;

  friend bool operator==(const ServiceDistribution& a, const ServiceDistribution& b);

 private:
  explicit ServiceDistribution(Params p);

  Params params_;
  double mean_ = 0.0;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace lossmesh
