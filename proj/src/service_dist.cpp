#include "lossmesh/service_dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/lognormal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "lossmesh/errors.hpp"

namespace lossmesh {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(name, "must be a positive finite number");
  }
}

double compute_mean(const ServiceDistribution::Params& p) {
  return std::visit(
      overloaded{
          [](const ServiceDistribution::Exponential& e) { return 1.0 / e.rate; },
          [](const ServiceDistribution::MixedErlang& m) {
            double phases = 0.0;
            for (std::size_t i = 0; i < m.phase_probs.size(); ++i) {
              phases += static_cast<double>(i + 1) * m.phase_probs[i];
            }
            return phases / m.phase_rate;
          },
          [](const ServiceDistribution::Gamma& g) { return g.shape * g.scale; },
          [](const ServiceDistribution::Lognormal& l) {
            return std::exp(l.log_mean + 0.5 * l.log_sd * l.log_sd);
          },
          [](const ServiceDistribution::Deterministic& d) { return d.value; },
      },
      p);
}

boost::math::gamma_distribution<double> as_boost(const ServiceDistribution::Gamma& g) {
  return {g.shape, g.scale};
}

boost::math::lognormal_distribution<double> as_boost(const ServiceDistribution::Lognormal& l) {
  return {l.log_mean, l.log_sd};
}

// integral_0^y survival(x) dx for laws without a closed form.
template <class Survival>
double integrate_survival(Survival&& survival, double y) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(survival, 0.0, y, 25, 1e-13,
                                                                        &error);
}

}  // namespace

ServiceDistribution::ServiceDistribution(Params p) : params_(std::move(p)), mean_(compute_mean(params_)) {
  if (!(mean_ > 0.0) || !std::isfinite(mean_)) {
    throw ValidationError("service", "mean must be positive and finite");
  }
}

ServiceDistribution ServiceDistribution::exponential(double rate) {
  require_positive(rate, "rate");
  return ServiceDistribution(Exponential{rate});
}

ServiceDistribution ServiceDistribution::mixed_erlang(double phase_rate, std::vector<double> phase_probs) {
  require_positive(phase_rate, "phase_rate");
  if (phase_probs.empty()) {
    throw ValidationError("phase_probs", "must contain at least one probability");
  }
  for (double p : phase_probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError("phase_probs", "entries must be nonnegative");
    }
  }
  const double total = std::accumulate(phase_probs.begin(), phase_probs.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("phase_probs", "must sum to 1 (got " + std::to_string(total) + ")");
  }
  return ServiceDistribution(MixedErlang{phase_rate, std::move(phase_probs)});
}

ServiceDistribution ServiceDistribution::gamma(double shape, double scale) {
  require_positive(shape, "shape");
  require_positive(scale, "scale");
  return ServiceDistribution(Gamma{shape, scale});
}

ServiceDistribution ServiceDistribution::gamma_with_mean(double shape, double mean) {
  require_positive(shape, "shape");
  require_positive(mean, "mean");
  return gamma(shape, mean / shape);
}

ServiceDistribution ServiceDistribution::lognormal(double log_mean, double log_sd) {
  if (!std::isfinite(log_mean)) {
    throw ValidationError("log_mean", "must be finite");
  }
  require_positive(log_sd, "log_sd");
  return ServiceDistribution(Lognormal{log_mean, log_sd});
}

ServiceDistribution ServiceDistribution::deterministic(double value) {
  require_positive(value, "value");
  return ServiceDistribution(Deterministic{value});
}

std::string ServiceDistribution::kind() const {
  return std::visit(overloaded{
                        [](const Exponential&) { return std::string("exponential"); },
                        [](const MixedErlang&) { return std::string("mixed_erlang"); },
                        [](const Gamma&) { return std::string("gamma"); },
                        [](const Lognormal&) { return std::string("lognormal"); },
                        [](const Deterministic&) { return std::string("deterministic"); },
                    },
                    params_);
}

bool ServiceDistribution::has_density() const noexcept {
  return !std::holds_alternative<Deterministic>(params_);
}

bool ServiceDistribution::has_bounded_hazard() const noexcept {
  if (const auto* g = std::get_if<Gamma>(&params_)) {
    return g->shape >= 1.0;
  }
  return std::holds_alternative<Exponential>(params_) || std::holds_alternative<MixedErlang>(params_) ||
         std::holds_alternative<Lognormal>(params_);
}

double ServiceDistribution::cdf(double x) const {
  if (x <= 0.0) {
    return 0.0;
  }
  if (std::isinf(x)) {
    return 1.0;
  }
  return std::visit(overloaded{
                        [x](const Exponential& e) { return -std::expm1(-e.rate * x); },
                        [x](const MixedErlang& m) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < m.phase_probs.size(); ++i) {
                            acc += m.phase_probs[i] *
                                   boost::math::gamma_p(static_cast<double>(i + 1), m.phase_rate * x);
                          }
                          return acc;
                        },
                        [x](const Gamma& g) { return boost::math::cdf(as_boost(g), x); },
                        [x](const Lognormal& l) { return boost::math::cdf(as_boost(l), x); },
                        [x](const Deterministic& d) { return x >= d.value ? 1.0 : 0.0; },
                    },
                    params_);
}

double ServiceDistribution::survival(double x) const {
  if (x <= 0.0) {
    return 1.0;
  }
  if (std::isinf(x)) {
    return 0.0;
  }
  return std::visit(
      overloaded{
          [x](const Exponential& e) { return std::exp(-e.rate * x); },
          [x](const MixedErlang& m) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m.phase_probs.size(); ++i) {
              acc += m.phase_probs[i] * boost::math::gamma_q(static_cast<double>(i + 1), m.phase_rate * x);
            }
            return acc;
          },
          [x](const Gamma& g) { return boost::math::cdf(boost::math::complement(as_boost(g), x)); },
          [x](const Lognormal& l) { return boost::math::cdf(boost::math::complement(as_boost(l), x)); },
          [x](const Deterministic& d) { return x >= d.value ? 0.0 : 1.0; },
      },
      params_);
}

double ServiceDistribution::density(double x) const {
  if (x < 0.0) {
    return 0.0;
  }
  return std::visit(
      overloaded{
          [x](const Exponential& e) { return e.rate * std::exp(-e.rate * x); },
          [x](const MixedErlang& m) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m.phase_probs.size(); ++i) {
              acc += m.phase_probs[i] * m.phase_rate *
                     boost::math::gamma_p_derivative(static_cast<double>(i + 1), m.phase_rate * x);
            }
            return acc;
          },
          [x](const Gamma& g) { return boost::math::pdf(as_boost(g), x); },
          [x](const Lognormal& l) { return x == 0.0 ? 0.0 : boost::math::pdf(as_boost(l), x); },
          [](const Deterministic&) -> double {
            throw UnsupportedOperation("deterministic service has no density");
          },
      },
      params_);
}

double ServiceDistribution::hazard(double x) const {
  if (x < 0.0) {
    throw DomainError("hazard: age must be nonnegative");
  }
  if (std::holds_alternative<Deterministic>(params_)) {
    throw UnsupportedOperation("hazard undefined for deterministic service (no density)");
  }
  if (const auto* e = std::get_if<Exponential>(&params_)) {
    return e->rate;
  }
  if (const auto* m = std::get_if<MixedErlang>(&params_)) {
    // Both numerator and denominator carry exp(-rate*x); cancel it so the
    // ratio stays finite far into the tail.
    const double z = m->phase_rate * x;
    double term = 1.0;  // z^k / k!
    double cumulative = 0.0;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < m->phase_probs.size(); ++i) {
      if (i > 0) {
        term *= z / static_cast<double>(i);
      }
      cumulative += term;
      num += m->phase_probs[i] * term;
      den += m->phase_probs[i] * cumulative;
    }
    if (den <= 0.0) {
      throw DomainError("hazard undefined beyond support");
    }
    return m->phase_rate * num / den;
  }
  const double s = survival(x);
  if (!(s > 0.0)) {
    throw DomainError("hazard undefined beyond support");
  }
  return density(x) / s;
}

double ServiceDistribution::age_factor(double y) const {
  if (!(y > 0.0)) {
    return 0.0;
  }
  if (std::isinf(y)) {
    return 1.0;
  }
  const double mu = 1.0 / mean_;
  const double value = std::visit(
      overloaded{
          [y](const Exponential& e) { return -std::expm1(-e.rate * y); },
          [y, mu](const MixedErlang& m) {
            // integral_0^y of the Erlang(i) survival is (1/rate) sum_{k=1..i} P(k, rate*y).
            const double z = m.phase_rate * y;
            double acc = 0.0;
            double partial = 0.0;
            for (std::size_t i = 0; i < m.phase_probs.size(); ++i) {
              partial += boost::math::gamma_p(static_cast<double>(i + 1), z);
              acc += m.phase_probs[i] * partial;
            }
            return mu * acc / m.phase_rate;
          },
          [this, y, mu](const Gamma&) {
            return mu * integrate_survival([this](double x) { return survival(x); }, y);
          },
          [this, y, mu](const Lognormal&) {
            return mu * integrate_survival([this](double x) { return survival(x); }, y);
          },
          [y](const Deterministic& d) { return std::min(y, d.value) / d.value; },
      },
      params_);
  return std::clamp(value, 0.0, 1.0);
}

double ServiceDistribution::sample(Rng& rng) const {
  return std::visit(
      overloaded{
          [&rng](const Exponential& e) { return boost::random::exponential_distribution<double>(e.rate)(rng); },
          [&rng](const MixedErlang& m) {
            const double u = boost::random::uniform_01<double>()(rng);
            std::size_t phases = m.phase_probs.size();
            double cumulative = 0.0;
            for (std::size_t i = 0; i < m.phase_probs.size(); ++i) {
              cumulative += m.phase_probs[i];
              if (u < cumulative) {
                phases = i + 1;
                break;
              }
            }
            boost::random::exponential_distribution<double> phase(m.phase_rate);
            double total = 0.0;
            for (std::size_t i = 0; i < phases; ++i) {
              total += phase(rng);
            }
            return total;
          },
          [&rng](const Gamma& g) { return boost::random::gamma_distribution<double>(g.shape, g.scale)(rng); },
          [&rng](const Lognormal& l) {
            return boost::random::lognormal_distribution<double>(l.log_mean, l.log_sd)(rng);
          },
          [](const Deterministic& d) { return d.value; },
      },
      params_);
}

bool operator==(const ServiceDistribution& a, const ServiceDistribution& b) {
  return a.params_ == b.params_;
}

}  // namespace lossmesh
