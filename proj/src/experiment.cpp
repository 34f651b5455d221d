#include "lossmesh/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "lossmesh/errors.hpp"
#include "lossmesh/insensitive_law.hpp"
#include "lossmesh/mf_exp.hpp"
#include "lossmesh/mf_hetero.hpp"
#include "lossmesh/mf_phase.hpp"
#include "lossmesh/parallel.hpp"
#include "lossmesh/simulator.hpp"

namespace lossmesh {

namespace {

using mfexp::HeteroProfile;

double as_real(std::size_t v) { return static_cast<double>(v); }

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

double mu_of(const ServiceDistribution& s) { return 1.0 / s.mean(); }

mfexp::OccupancyDist exp_fixed_point(const ExperimentConfig& c, double mu) {
  return mfexp::solve_fixed_point(c.system.lambda, mu, c.system.capacity, c.system.d,
                                  {c.numerics.tolerance, c.numerics.max_iter})
      .occupancy();
}

HeteroProfile hetero_profile(const ExperimentConfig& c, double mu) {
  HeteroProfile p{c.system.profile->gamma, c.system.profile->capacity, c.system.lambda, mu};
  p.validate();
  return p;
}

sim::SimConfig sim_config(const ExperimentConfig& c, int servers, const ServiceDistribution& service,
                          std::uint64_t replication) {
  sim::SimConfig s;
  s.servers = servers;
  s.lambda = c.system.lambda;
  s.d = c.system.d;
  s.sampling = c.system.sampling;
  s.capacity = c.system.capacity;
  s.mix = c.system.profile;
  s.service = service;
  s.t_total = c.run.t_total;
  s.t_warmup = c.run.t_warmup;
  s.seed = c.run.seed;
  s.replication = replication;
  s.batches = c.run.batches;
  s.snapshot_interval = c.output.y_grid.empty() ? 0.0 : c.run.snapshot_interval;
  return s;
}

// Mean-field occupancy per type: pi_exp for one type, the long-run hetero ODE
// state otherwise.
std::vector<std::vector<double>> model_occupancy(const ExperimentConfig& c, double mu) {
  if (!c.system.profile) {
    const auto pi = exp_fixed_point(c, mu);
    return {std::vector<double>(pi.values().begin(), pi.values().end())};
  }
  const HeteroProfile p = hetero_profile(c, mu);
  const auto eq = mfexp::hetero_equilibrium(p, c.system.d, std::max(1000.0, c.numerics.t_ode), c.numerics.dt);
  const auto off = p.offsets();
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k + 1 < off.size(); ++k) {
    out.emplace_back(eq.state.begin() + static_cast<std::ptrdiff_t>(off[k]),
                     eq.state.begin() + static_cast<std::ptrdiff_t>(off[k + 1]));
  }
  return out;
}

ExperimentResult fixedpoint(const ExperimentConfig& c) {
  const auto p = mfexp::solve_fixed_point(c.system.lambda, c.system.mu, c.system.capacity, c.system.d,
                                          {c.numerics.tolerance, c.numerics.max_iter});
  const auto q = p.occupancy();
  const auto rates = mfexp::lambda_map(p, c.system.lambda, c.system.d);
  ResultTable t("fixedpoint", {"n", "P_n", "Q_n", "lambda_n"});
  for (int n = 0; n <= c.system.capacity; ++n) {
    t.add_row({double(n), p[n], q[n], rates[static_cast<std::size_t>(n)]});
  }
  t.set_meta("blocking_probability", format_real(mfexp::blocking_probability(p, c.system.d)));
  ExperimentResult r;
  r.tables.push_back(std::move(t));
  return r;
}

ExperimentResult ode_exp(const ExperimentConfig& c) {
  std::vector<double> q0(static_cast<std::size_t>(c.system.capacity) + 1, 0.0);
  q0[0] = 1.0;
  const auto traj = mfexp::integrate_exp_occupancy(q0, c.system.lambda, c.system.mu, c.system.d, c.numerics.t_ode,
                                                   c.numerics.dt, static_cast<std::size_t>(c.numerics.out_every));
  const auto pi = exp_fixed_point(c, c.system.mu);
  const std::vector<double> target(pi.values().begin(), pi.values().end());
  ResultTable t("ode_exp", concat({"t"}, concat(level_columns("Q_", c.system.capacity), {"sup_dist"})));
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    t.add_row(concat(concat({traj.times[i]}, traj.states[i]), {sup_diff(traj.states[i], target)}));
  }
  ExperimentResult r;
  r.tables.push_back(std::move(t));
  return r;
}

ExperimentResult ode_phase(const ExperimentConfig& c, std::size_t threads) {
  const ServiceDistribution service = c.effective_services().front();
  const auto& me = std::get<ServiceDistribution::MixedErlang>(service.params());
  const mfphase::PhaseModel model(mfphase::PhaseSpace(c.system.capacity, static_cast<int>(me.phase_probs.size())),
                                  {c.system.lambda, me.phase_rate, me.phase_probs, c.system.d});
  const double dt = c.numerics.dt;
  const auto eq = mfphase::phase_equilibrium(model, std::max(500.0, c.numerics.t_ode), dt);
  const auto pi = exp_fixed_point(c, mu_of(service));
  const std::vector<double> pi_exp(pi.values().begin(), pi.values().end());
  const auto eq_marginal = mfphase::occupancy_marginal(model.space(), eq.x);

  const auto points = static_cast<std::size_t>(c.numerics.initial_points);
  const int cap = c.system.capacity;
  std::vector<ResultTable> per_point(points);
  std::vector<std::string> cols = concat({"t", "dE2"}, level_columns("Q_", cap));
  if (c.numerics.full_state) {
    for (std::size_t i = 0; i < model.space().size(); ++i) cols.push_back("x_" + std::to_string(i));
  }
  parallel_for(points, threads, [&](std::size_t i) {
    ResultTable t("ode_phase_point" + std::to_string(i + 1), cols);
    std::vector<double> x = mfphase::random_initial_point(model.space(), c.run.seed + i);
    mfphase::integrate_observe(model, x, c.numerics.t_ode, dt, static_cast<std::size_t>(c.numerics.out_every),
                               [&](double time, std::span<const double> state) {
                                 const double dist = mfphase::distance_to(state, eq.x);
                                 std::vector<double> row{time, dist * dist};
                                 const auto q = mfphase::occupancy_marginal(model.space(), state);
                                 row.insert(row.end(), q.begin(), q.end());
                                 if (c.numerics.full_state) row.insert(row.end(), state.begin(), state.end());
                                 t.add_row(std::move(row));
                               });
    t.set_meta("initial_point_seed", std::to_string(c.run.seed + i));
    per_point[i] = std::move(t);
  });

  std::vector<std::string> curve_cols{"t"};
  for (std::size_t i = 0; i < points; ++i) curve_cols.push_back("dE2_" + std::to_string(i + 1));
  ResultTable curves("ode_phase_curves", curve_cols);
  ResultTable summary("ode_phase_summary", {"point", "seed", "terminal_dE2", "pass"});
  ExperimentResult r;
  if (points > 0) {
    for (std::size_t row = 0; row < per_point[0].rows.size(); ++row) {
      std::vector<double> v{per_point[0].rows[row][0]};
      for (const auto& t : per_point) v.push_back(t.rows[row][1]);
      curves.add_row(std::move(v));
    }
  }
  for (std::size_t i = 0; i < points; ++i) {
    const double terminal = per_point[i].rows.back()[1];
    const bool ok = terminal < 1e-8;
    r.pass = r.pass && ok;
    summary.add_row({double(i + 1), double(c.run.seed + i), terminal, ok ? 1.0 : 0.0});
  }
  const double marginal_gap = sup_diff(eq_marginal, pi_exp);
  summary.set_meta("equilibrium_residual", format_real(eq.residual));
  summary.set_meta("equilibrium_marginal_sup_diff", format_real(marginal_gap));
  summary.set_meta("states", std::to_string(model.space().size()));
  r.pass = r.pass && marginal_gap <= 1e-6;
  r.tables.push_back(std::move(summary));
  r.tables.push_back(std::move(curves));
  for (auto& t : per_point) r.tables.push_back(std::move(t));
  return r;
}

ExperimentResult ode_hetero(const ExperimentConfig& c) {
  const HeteroProfile p = hetero_profile(c, c.system.mu);
  const auto traj = mfexp::integrate_hetero(mfexp::hetero_empty_state(p), p, c.system.d, c.numerics.t_ode,
                                            c.numerics.dt, static_cast<std::size_t>(c.numerics.out_every));
  const int cmax = *std::max_element(p.capacity.begin(), p.capacity.end());
  const auto off = p.offsets();
  ResultTable t("ode_hetero", concat({"t", "k"}, level_columns("Q_", cmax)));
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    for (std::size_t k = 0; k + 1 < off.size(); ++k) {
      std::vector<double> row{traj.times[i], double(k)};
      for (int n = 0; n <= cmax; ++n) {
        const std::size_t at = off[k] + static_cast<std::size_t>(n);
        row.push_back(at < off[k + 1] ? traj.states[i][at] : 0.0);
      }
      t.add_row(std::move(row));
    }
  }
  std::vector<double> h(off.back());
  mfexp::hetero_occupancy_rhs(traj.states.back(), p, c.system.d, h);
  double residual = 0.0;
  for (double v : h) residual = std::max(residual, std::abs(v));
  t.set_meta("terminal_residual", format_real(residual));
  ExperimentResult r;
  r.tables.push_back(std::move(t));
  return r;
}

ExperimentResult simulate(const ExperimentConfig& c, std::size_t threads) {
  const ServiceDistribution service = c.effective_services().front();
  const auto model = model_occupancy(c, mu_of(service));
  const std::optional<InsensitiveFixedPoint> age_model =
      c.system.profile ? std::nullopt
                       : std::optional<InsensitiveFixedPoint>(InsensitiveFixedPoint(
                             exp_fixed_point(c, mu_of(service)), service, mu_of(service)));

  struct Job {
    int servers;
    std::uint64_t replication;
  };
  std::vector<Job> jobs;
  for (int n : c.run.servers) {
    for (int rep = 0; rep < c.run.replications; ++rep) jobs.push_back({n, static_cast<std::uint64_t>(rep)});
  }
  std::vector<sim::SimStats> stats(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    stats[i] = sim::run(sim_config(c, jobs[i].servers, service, jobs[i].replication));
  });

  ResultTable occ("occupancy", {"N", "replication", "k", "n", "fraction", "se", "model"});
  ResultTable summary("summary", {"N", "replication", "arrivals", "admissions", "blocks", "blocking", "blocking_se",
                                  "full_fraction", "predicted_blocking", "diff_se"});
  ResultTable ages("ages", {"N", "replication", "k", "n", "y", "estimate", "se", "model"});
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const sim::SimStats& s = stats[i];
    const double n_servers = jobs[i].servers, rep = double(jobs[i].replication);
    for (int k = 0; k < s.types(); ++k) {
      const auto e = sim::occupancy_estimate(s, k);
      for (std::size_t n = 0; n < e.value.size(); ++n) {
        occ.add_row({n_servers, rep, double(k), as_real(n), e.value[n], e.se[n], model[static_cast<std::size_t>(k)][n]});
      }
      if (!c.output.y_grid.empty() && s.snapshots.size() >= 2) {
        for (int n = 0; n <= s.capacities[static_cast<std::size_t>(k)]; ++n) {
          const auto a = sim::age_cdf_estimate(s, n, c.output.y_grid, k);
          for (std::size_t j = 0; j < c.output.y_grid.size(); ++j) {
            double m = std::nan("");
            if (age_model) m = eval_pi(*age_model, n, std::vector<double>(static_cast<std::size_t>(n), c.output.y_grid[j]));
            ages.add_row({n_servers, rep, double(k), double(n), c.output.y_grid[j], a.value[j], a.se[j], m});
          }
        }
      }
    }
    const auto b = sim::blocking_estimate(s);
    summary.add_row({n_servers, rep, double(s.arrivals), double(s.admissions), double(s.blocks), b.fraction, b.se,
                     b.full_fraction, b.predicted, b.diff_se});
  }
  ExperimentResult r;
  r.tables.push_back(std::move(occ));
  r.tables.push_back(std::move(summary));
  if (!ages.rows.empty()) r.tables.push_back(std::move(ages));
  return r;
}

ExperimentResult insensitivity(const ExperimentConfig& c, std::size_t threads) {
  if (c.system.profile) throw ConfigError("system.profile", "insensitivity compares homogeneous clusters", 0);
  const auto services = c.effective_services();
  const int n_servers = c.run.servers.front();
  std::vector<sim::SimStats> stats(services.size());
  parallel_for(services.size(), threads, [&](std::size_t i) {
    sim::SimConfig s = sim_config(c, n_servers, services[i], 0);
    s.snapshot_interval = 0.0;
    stats[i] = sim::run(s);
  });

  ResultTable occ("insensitivity_occupancy", {"service", "n", "estimate", "se", "model"});
  ResultTable report("insensitivity_report",
                     {"service", "mean", "sup_diff", "max_se", "blocking", "predicted_blocking", "diff_se", "pass"});
  ExperimentResult r;
  for (std::size_t i = 0; i < services.size(); ++i) {
    const auto pi = exp_fixed_point(c, mu_of(services[i]));
    const auto e = sim::occupancy_estimate(stats[i]);
    ResultTable model("model", {"n", "value"});
    ResultTable est("estimate", {"n", "value", "se"});
    double max_se = 0.0;
    for (int n = 0; n <= c.system.capacity; ++n) {
      const auto un = static_cast<std::size_t>(n);
      model.add_row({double(n), pi[n]});
      est.add_row({double(n), e.value[un], e.se[un]});
      occ.add_row({double(i), double(n), e.value[un], e.se[un], pi[n]});
      max_se = std::max(max_se, e.se[un]);
    }
    const auto cmp = compare_report(model, est, {{"n"}, "value", "value", "se", c.output.threshold, 3.0});
    const auto b = sim::blocking_estimate(stats[i]);
    const bool blocking_ok = std::abs(b.fraction - b.predicted) <= 3.0 * b.diff_se;
    const bool ok = cmp.pass && blocking_ok;
    r.pass = r.pass && ok;
    report.add_row({double(i), services[i].mean(), cmp.worst_delta, max_se, b.fraction, b.predicted, b.diff_se,
                    ok ? 1.0 : 0.0});
    report.set_meta("service_" + std::to_string(i), services[i].kind());
  }
  report.set_meta("servers", std::to_string(n_servers));
  report.set_meta("threshold", format_real(c.output.threshold));
  r.tables.push_back(std::move(report));
  r.tables.push_back(std::move(occ));
  return r;
}

ExperimentResult transient(const ExperimentConfig& c, std::size_t threads) {
  if (c.system.profile) throw ConfigError("system.profile", "transient mode supports homogeneous clusters only", 0);
  const ServiceDistribution service = c.effective_services().front();
  std::vector<double> times = c.output.sample_times;
  if (times.empty()) {
    for (int i = 0; i <= 40; ++i) times.push_back(c.run.t_total * i / 40.0);
  }
  std::sort(times.begin(), times.end());
  const int cap = c.system.capacity;

  std::vector<std::vector<double>> ode;
  if (const auto* me = std::get_if<ServiceDistribution::MixedErlang>(&service.params())) {
    const mfphase::PhaseModel model(mfphase::PhaseSpace(cap, static_cast<int>(me->phase_probs.size())),
                                    {c.system.lambda, me->phase_rate, me->phase_probs, c.system.d});
    std::vector<double> x = mfphase::empty_state(model.space());
    double now = 0.0;
    for (double t : times) {
      if (t > now) {
        const double steps = std::ceil((t - now) / c.numerics.dt - 1e-9);
        mfphase::integrate_observe(model, x, t - now, (t - now) / steps, static_cast<std::size_t>(steps),
                                   [](double, std::span<const double>) {});
        now = t;
      }
      ode.push_back(mfphase::occupancy_marginal(model.space(), x));
    }
  } else {
    std::vector<double> q0(static_cast<std::size_t>(cap) + 1, 0.0);
    q0[0] = 1.0;
    ode = exp_ode_at(q0, c.system.lambda, mu_of(service), c.system.d, times, c.numerics.dt);
  }

  ResultTable t("transient", concat(concat(concat({"t", "N"}, level_columns("Q_", cap)), level_columns("se_", cap)),
                                    concat(level_columns("ode_", cap), {"sup_diff"})));
  ResultTable summary("transient_summary", {"N", "replications", "sup_distance"});
  for (int n : c.run.servers) {
    sim::SimConfig s = sim_config(c, n, service, 0);
    s.snapshot_interval = 0.0;
    const auto trace = sim::transient_trace(s, times, static_cast<std::size_t>(c.run.replications), threads);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double gap = sup_diff(trace.mean[i], ode[i]);
      worst = std::max(worst, gap);
      t.add_row(concat(concat(concat({times[i], double(n)}, trace.mean[i]), trace.se[i]), concat(ode[i], {gap})));
    }
    summary.add_row({double(n), double(c.run.replications), worst});
  }
  ExperimentResult r;
  r.tables.push_back(std::move(summary));
  r.tables.push_back(std::move(t));
  return r;
}

}  // namespace

const ResultTable& ExperimentResult::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw AlignmentError("no table named '" + name + "'");
}

std::vector<std::string> level_columns(const std::string& prefix, int capacity) {
  std::vector<std::string> out;
  for (int n = 0; n <= capacity; ++n) out.push_back(prefix + std::to_string(n));
  return out;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw AlignmentError("sup_diff: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

std::vector<std::vector<double>> exp_ode_at(std::vector<double> q0, double lambda, double mu, int d,
                                            const std::vector<double>& times, double dt) {
  std::vector<std::vector<double>> out;
  double now = 0.0;
  for (double t : times) {
    if (t < now) throw ValidationError("sample_times", "must be increasing");
    if (t > now) {
      const double steps = std::ceil((t - now) / dt - 1e-9);
      q0 = mfexp::integrate_exp_occupancy(q0, lambda, mu, d, t - now, (t - now) / steps,
                                          static_cast<std::size_t>(steps))
               .states.back();
      now = t;
    }
    out.push_back(q0);
  }
  return out;
}

ExperimentResult run_experiment(ExperimentConfig config, const RunOptions& options) {
  if (options.seed) config.run.seed = *options.seed;
  if (options.out_dir) config.output.dir = options.out_dir->string();
  config.validate();
  const std::size_t threads = std::max<std::size_t>(1, options.threads);

  ExperimentResult r;
  switch (config.mode) {
    case Mode::FixedPoint: r = fixedpoint(config); break;
    case Mode::OdeExp: r = ode_exp(config); break;
    case Mode::OdePhase: r = ode_phase(config, threads); break;
    case Mode::OdeHetero: r = ode_hetero(config); break;
    case Mode::Simulate: r = simulate(config, threads); break;
    case Mode::Insensitivity: r = insensitivity(config, threads); break;
    case Mode::Transient: r = transient(config, threads); break;
  }

  const std::string hash = config_hash(config);
  for (auto& t : r.tables) {
    std::vector<std::pair<std::string, std::string>> head{
        {"mode", to_string(config.mode)}, {"config_hash", hash}, {"seed", std::to_string(config.run.seed)},
        {"version", std::string("lossmesh ") + kVersion}};
    head.insert(head.end(), t.metadata.begin(), t.metadata.end());
    t.metadata = std::move(head);
  }
  if (options.write) {
    const std::filesystem::path dir(config.output.dir);
    for (const auto& t : r.tables) {
      const auto path = dir / (t.name + ".csv");
      t.write_csv(path);
      r.files.push_back(path);
    }
  }
  return r;
}

}  // namespace lossmesh
