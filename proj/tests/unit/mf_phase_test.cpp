#include "lossmesh/mf_phase.hpp"

#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "lossmesh/errors.hpp"
#include "lossmesh/mf_exp.hpp"

namespace lossmesh::mfphase {
namespace {

PhaseParams reference_params() { return {1.0, 2.1, {0.3, 0.3, 0.4}, 2}; }

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(n);
  double total = 0.0;
  for (double& v : x) total += (v = e(rng));
  for (double& v : x) v /= total;
  return x;
}

// The mean-field vector field written term by term over tuples held in a map,
// independent of the index arithmetic and precomputed links of PhaseModel.
std::vector<double> literal_rhs(const PhaseSpace& space, const PhaseParams& p, const std::vector<double>& x) {
  const int c = space.capacity(), m = space.max_phases();
  std::map<std::vector<int>, double> mass;
  for (std::size_t i = 0; i < x.size(); ++i) mass[space.jobs(i)] = x[i];
  auto at = [&](const std::vector<int>& l) {
    const auto it = mass.find(l);
    return it == mass.end() ? 0.0 : it->second;
  };
  std::vector<double> agg(static_cast<std::size_t>(c) + 1, 0.0);
  for (const auto& [l, v] : mass) agg[l.size()] += v;
  auto rate = [&](int n) {
    double rn = 0.0, rn1 = 0.0;
    for (int i = n; i <= c; ++i) rn += agg[static_cast<std::size_t>(i)];
    for (int i = n + 1; i <= c; ++i) rn1 += agg[static_cast<std::size_t>(i)];
    if (rn - rn1 <= 0.0) return p.lambda * p.d * std::pow(rn, p.d - 1);
    return p.lambda * (std::pow(rn, p.d) - std::pow(rn1, p.d)) / (rn - rn1);
  };
  std::vector<double> h(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::vector<int> l = space.jobs(i);
    const int z = static_cast<int>(l.size());
    double v = 0.0;
    for (int b = 0; b < z; ++b) {
      auto removed = l;
      removed.erase(removed.begin() + b);
      v += p.phase_probs[static_cast<std::size_t>(l[static_cast<std::size_t>(b)] - 1)] / z * at(removed) * rate(z - 1);
    }
    if (z < c) {
      v -= at(l) * rate(z);
      for (int b = 0; b <= z; ++b) {
        auto inserted = l;
        inserted.insert(inserted.begin() + b, 1);
        v += p.phase_rate * at(inserted);
      }
    }
    for (int b = 0; b < z; ++b) {
      if (l[static_cast<std::size_t>(b)] < m) {
        auto advanced = l;
        ++advanced[static_cast<std::size_t>(b)];
        v += p.phase_rate * at(advanced);
      }
    }
    v -= z * p.phase_rate * at(l);
    h[i] = v;
  }
  return h;
}

TEST(PhaseSpace, Sizes) {
  EXPECT_EQ(enumerate_states(5, 3).size(), 364u);
  EXPECT_EQ(enumerate_states(1, 1).size(), 2u);
  EXPECT_EQ(enumerate_states(2, 2).size(), 7u);
  EXPECT_THROW(enumerate_states(0, 2), ValidationError);
  EXPECT_THROW(enumerate_states(20, 3), ValidationError);
}

TEST(PhaseSpace, IndexIsLexicographicByLevelThenTuple) {
  const PhaseSpace s(3, 3);
  std::vector<int> prev_jobs;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto l = s.jobs(i);
    EXPECT_EQ(s.index(l), i);
    EXPECT_EQ(s.occupancy(i), static_cast<int>(l.size()));
    if (i > 0) {
      EXPECT_TRUE(prev_jobs.size() < l.size() || (prev_jobs.size() == l.size() && prev_jobs < l));
    }
    prev_jobs = l;
  }
  const std::vector<int> example{2, 1, 3};
  EXPECT_EQ(s.index(example), 1u + 3u + 9u + (1 * 9 + 0 * 3 + 2));
}

TEST(PhaseRates, Examples) {
  const PhaseSpace s(1, 1);
  const std::vector<double> empty{1.0, 0.0};
  EXPECT_DOUBLE_EQ(lambda_me(s, 0, empty, 1.0, 3), 1.0);
  const std::vector<double> half{0.5, 0.5};
  EXPECT_NEAR(lambda_me(s, 0, half, 1.0, 2), 1.5, 1e-15);
  std::mt19937_64 rng(1);
  const PhaseSpace big(4, 2);
  const auto x = random_simplex(rng, big.size());
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(lambda_me(big, n, x, 0.7, 1), 0.7, 1e-15);
  EXPECT_THROW((void)lambda_me(s, 1, half, 1.0, 2), DomainError);
}

TEST(PhaseRhs, SingleServerSinglePhaseExample) {
  const PhaseModel model(PhaseSpace(1, 1), {1.0, 1.0, {1.0}, 2});
  const auto h = model.rhs(std::vector<double>{0.5, 0.5});
  EXPECT_NEAR(h[0], -0.25, 1e-15);
  EXPECT_NEAR(h[1], 0.25, 1e-15);
}

TEST(PhaseRhs, MatchesLiteralFormula) {
  std::mt19937_64 rng(2);
  for (auto [c, m] : {std::pair{1, 1}, {2, 2}, {3, 3}, {5, 3}}) {
    PhaseParams p{1.3, 1.9, {}, 1 + c % 3};
    p.phase_probs = random_simplex(rng, static_cast<std::size_t>(m));
    const PhaseModel model(PhaseSpace(c, m), p);
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = random_simplex(rng, model.space().size());
      const auto fast = model.rhs(x);
      const auto slow = literal_rhs(model.space(), p, x);
      for (std::size_t i = 0; i < x.size(); ++i) ASSERT_NEAR(fast[i], slow[i], 1e-12) << "C=" << c << " M=" << m;
    }
  }
}

TEST(PhaseRhs, ConservesMass) {
  std::mt19937_64 rng(3);
  const PhaseModel model(PhaseSpace(5, 3), reference_params());
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = random_simplex(rng, model.space().size());
    double sum = 0.0;
    for (double v : model.rhs(x)) sum += v;
    EXPECT_LT(std::abs(sum), 1e-12);
  }
}

TEST(PhaseRhs, SinglePhasePushforwardIsExponentialOde) {
  std::mt19937_64 rng(4);
  for (int c = 1; c <= 6; ++c) {
    for (int d = 1; d <= 3; ++d) {
      const PhaseModel model(PhaseSpace(c, 1), {1.4, 0.8, {1.0}, d});
      const auto x = random_simplex(rng, model.space().size());
      const auto h = model.rhs(x);
      std::vector<double> dq(x.size());
      mfexp::exp_occupancy_rhs(x, 1.4, 0.8, d, dq);
      const auto pushed = occupancy_marginal(model.space(), h);
      for (std::size_t n = 0; n < dq.size(); ++n) EXPECT_NEAR(pushed[n], dq[n], 1e-14);
    }
  }
}

TEST(PhaseRhs, PureDeathChainConservesMass) {
  const PhaseModel model(PhaseSpace(3, 3), {0.0, 1.0, {0.2, 0.3, 0.5}, 2});
  std::vector<double> x(model.space().size(), 0.0);
  x[model.space().index(std::vector<int>{3})] = 1.0;
  const auto traj = integrate(model, x, 5.0, 1e-3, 1000);
  for (const auto& s : traj.states) {
    double sum = 0.0;
    for (double v : s) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    for (std::size_t i = model.space().level_begin(2); i < s.size(); ++i) EXPECT_EQ(s[i], 0.0);
  }
}

TEST(PhaseRhs, DimensionMismatch) {
  const PhaseModel model(PhaseSpace(2, 2), {1.0, 1.0, {0.5, 0.5}, 2});
  EXPECT_THROW((void)model.rhs(std::vector<double>(3, 0.1)), ValidationError);
  EXPECT_THROW(PhaseModel(PhaseSpace(2, 2), {1.0, 1.0, {1.0}, 2}), ValidationError);
}

TEST(PhaseMarginal, Examples) {
  const PhaseSpace s(3, 2);
  const auto q = occupancy_marginal(s, empty_state(s));
  EXPECT_EQ(q[0], 1.0);
  EXPECT_EQ(q[1], 0.0);
  const PhaseSpace small(1, 2);
  const std::vector<double> uniform(3, 1.0 / 3.0);
  const auto u = occupancy_marginal(small, uniform);
  EXPECT_NEAR(u[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(u[1], 2.0 / 3.0, 1e-15);
}

TEST(PhaseDistance, Examples) {
  const std::vector<double> a{0.3, 0.7};
  EXPECT_EQ(distance_to(a, a), 0.0);
  EXPECT_NEAR(distance_to(std::vector<double>{1, 0, 0}, std::vector<double>{0, 0, 1}), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(distance_to(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0}), std::sqrt(0.5), 1e-15);
}

TEST(PhaseIntegrate, EquilibriumIsStationaryAndInsensitive) {
  const PhaseModel model(PhaseSpace(3, 3), reference_params());
  const auto eq = phase_equilibrium(model, 200.0);
  EXPECT_LT(eq.residual, 1e-10);
  const auto traj = integrate(model, eq.x, 10.0, default_step(model.params()), 1000);
  for (const auto& s : traj.states) EXPECT_LT(distance_to(s, eq.x), 1e-9);
  const auto q = occupancy_marginal(model.space(), eq.x);
  const auto pi = mfexp::solve_fixed_point(1.0, 1.0 / model.params().mean_service(), 3, 2).occupancy();
  for (int n = 0; n <= 3; ++n) EXPECT_NEAR(q[static_cast<std::size_t>(n)], pi[n], 1e-9);
}

TEST(PhaseIntegrate, FourthOrderConvergence) {
  const PhaseModel model(PhaseSpace(3, 3), reference_params());
  const auto x0 = random_initial_point(model.space(), 9);
  auto endpoint = [&](double dt) { return integrate(model, x0, 1.0, dt, 1'000'000).states.back(); };
  const auto coarse = endpoint(0.02), mid = endpoint(0.01), fine = endpoint(0.005);
  const double ratio = distance_to(coarse, mid) / distance_to(mid, fine);
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(PhaseIntegrate, RejectsNonFiniteState) {
  const PhaseModel model(PhaseSpace(1, 1), {1.0, 1.0, {1.0}, 2});
  std::vector<double> x{std::nan(""), 0.5};
  EXPECT_THROW((void)integrate(model, x, 1.0, 0.1, 1), IntegrationError);
}

TEST(PhaseInitialPoints, SeededAndOnSimplex) {
  const PhaseSpace s(5, 3);
  const auto a = random_initial_point(s, 1), b = random_initial_point(s, 1), c = random_initial_point(s, 2);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  double sum = 0.0;
  for (double v : a) {
    EXPECT_GE(v, 0.0);
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

}  // namespace
}  // namespace lossmesh::mfphase
