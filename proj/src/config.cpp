#include "lossmesh/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lossmesh/result_table.hpp"

namespace lossmesh {

using json = nlohmann::json;

namespace {

const std::pair<Mode, const char*> kModes[] = {
    {Mode::FixedPoint, "fixedpoint"}, {Mode::OdeExp, "ode_exp"},   {Mode::OdePhase, "ode_phase"},
    {Mode::OdeHetero, "ode_hetero"},  {Mode::Simulate, "simulate"}, {Mode::Insensitivity, "insensitivity"},
    {Mode::Transient, "transient"},
};

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the key named by a dotted path such as "system.services[1].phase_probs":
// each key is searched for after the previous one.
int line_of_path(const std::string& text, const std::string& path) {
  if (text.empty() || path.empty()) return 0;
  std::size_t pos = 0;
  std::size_t start = 0;
  bool found = false;
  while (start <= path.size()) {
    std::size_t end = path.find('.', start);
    if (end == std::string::npos) end = path.size();
    std::string key = path.substr(start, end - start);
    key = key.substr(0, key.find('['));
    if (!key.empty()) {
      const std::size_t at = text.find('"' + key + '"', pos);
      if (at == std::string::npos) break;
      pos = at;
      found = true;
    }
    start = end + 1;
  }
  return found ? line_of_offset(text, pos) : 0;
}

std::string strip_field(const ValidationError& e) {
  const std::string what = e.what();
  const std::string prefix = e.field() + ": ";
  return !e.field().empty() && what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ConfigError(path, what, line_of_path(text_, path));
  }

  void require_object(const json& j, const std::string& path) const {
    if (!j.is_object()) fail(path, "expected an object");
  }

  void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) const {
    require_object(j, path);
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) fail(join(path, key), "unknown key");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  double real(const json& j, const std::string& path) const {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
      const auto s = j.get<std::string>();
      if (s == "inf") return HUGE_VAL;
    }
    fail(path, "expected a number");
  }

  long integer(const json& j, const std::string& path) const {
    if (j.is_number_integer()) return j.get<long>();
    if (j.is_number_float()) {
      const double v = j.get<double>();
      if (v == std::floor(v) && std::abs(v) < 9e15) return static_cast<long>(v);
    }
    fail(path, "expected an integer");
  }

  std::uint64_t unsigned_integer(const json& j, const std::string& path) const {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
    fail(path, "expected a nonnegative integer");
  }

  std::vector<double> reals(const json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(real(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<int> integers(const json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(static_cast<int>(integer(j[i], path + "[" + std::to_string(i) + "]")));
    }
    return out;
  }

  std::string string(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }

  bool boolean(const json& j, const std::string& path) const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
  }

  ServiceDistribution service(const json& j, const std::string& path) const {
    require_object(j, path);
    if (!j.contains("kind")) fail(path + ".kind", "missing distribution kind");
    const std::string kind = string(j.at("kind"), path + ".kind");
    auto num = [&](const char* key) {
      if (!j.contains(key)) fail(join(path, key), "missing field");
      return real(j.at(key), join(path, key));
    };
    try {
      if (kind == "exponential") {
        check_keys(j, path, {"kind", "rate"});
        return ServiceDistribution::exponential(num("rate"));
      }
      if (kind == "mixed_erlang") {
        check_keys(j, path, {"kind", "phase_rate", "phase_probs"});
        if (!j.contains("phase_probs")) fail(path + ".phase_probs", "missing field");
        return ServiceDistribution::mixed_erlang(num("phase_rate"), reals(j.at("phase_probs"), path + ".phase_probs"));
      }
      if (kind == "gamma") {
        check_keys(j, path, {"kind", "shape", "scale", "mean"});
        if (j.contains("scale") == j.contains("mean")) fail(path, "gamma needs exactly one of scale or mean");
        if (j.contains("mean")) return ServiceDistribution::gamma_with_mean(num("shape"), num("mean"));
        return ServiceDistribution::gamma(num("shape"), num("scale"));
      }
      if (kind == "lognormal") {
        check_keys(j, path, {"kind", "log_mean", "log_sd"});
        return ServiceDistribution::lognormal(num("log_mean"), num("log_sd"));
      }
      if (kind == "deterministic") {
        check_keys(j, path, {"kind", "value"});
        return ServiceDistribution::deterministic(num("value"));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError& e) {
      const std::string field = e.field() == "service" ? path : join(path, e.field());
      fail(field, strip_field(e));
    }
    fail(path + ".kind", "unknown distribution kind '" + kind + "'");
  }

  const std::string& text() const { return text_; }

 private:
  const std::string& text_;
};

json service_to_json(const ServiceDistribution& dist) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ServiceDistribution::Exponential>) {
          return {{"kind", "exponential"}, {"rate", p.rate}};
        } else if constexpr (std::is_same_v<T, ServiceDistribution::MixedErlang>) {
          return {{"kind", "mixed_erlang"}, {"phase_rate", p.phase_rate}, {"phase_probs", p.phase_probs}};
        } else if constexpr (std::is_same_v<T, ServiceDistribution::Gamma>) {
          return {{"kind", "gamma"}, {"shape", p.shape}, {"scale", p.scale}};
        } else if constexpr (std::is_same_v<T, ServiceDistribution::Lognormal>) {
          return {{"kind", "lognormal"}, {"log_mean", p.log_mean}, {"log_sd", p.log_sd}};
        } else {
          return {{"kind", "deterministic"}, {"value", p.value}};
        }
      },
      dist.params());
}

json reals_to_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) {
    if (std::isinf(x)) {
      out.push_back(x > 0 ? "inf" : "-inf");
    } else {
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& what, int line)
    : ValidationError(std::move(field), line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
      line_(line) {}

std::string to_string(Mode mode) {
  for (const auto& [m, name] : kModes) {
    if (m == mode) return name;
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (const auto& [m, n] : kModes) {
    if (name == n) return m;
  }
  throw ConfigError("mode", "unknown mode '" + name + "'", 0);
}

std::vector<ServiceDistribution> ExperimentConfig::effective_services() const {
  if (!system.services.empty()) return system.services;
  return {ServiceDistribution::exponential(system.mu)};
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& what) { throw ConfigError(field, what, 0); };
  if (!(system.lambda > 0.0) || !std::isfinite(system.lambda)) fail("system.lambda", "must be positive");
  if (!(system.mu > 0.0) || !std::isfinite(system.mu)) fail("system.mu", "must be positive");
  if (system.d < 1) fail("system.d", "must be >= 1");
  for (const auto& law : system.services) {
    if (std::abs(system.mu * law.mean() - 1.0) > 1e-9) fail("system.mu", "every service law must have mean 1/mu");
  }
  if (system.capacity < 1) fail("system.capacity", "must be >= 1");
  if (system.profile) {
    const auto& p = *system.profile;
    if (p.gamma.empty() || p.gamma.size() != p.capacity.size()) {
      fail("system.profile", "gamma and capacity need one entry per type");
    }
    double total = 0.0;
    for (double g : p.gamma) {
      if (!(g > 0.0)) fail("system.profile.gamma", "fractions must be positive");
      total += g;
    }
    if (std::abs(total - 1.0) > 1e-12) fail("system.profile.gamma", "fractions must sum to 1");
    for (std::size_t k = 0; k < p.capacity.size(); ++k) {
      if (p.capacity[k] < 1) fail("system.profile.capacity", "capacities must be >= 1");
      if (k > 0 && p.capacity[k] < p.capacity[k - 1]) fail("system.profile.capacity", "must be nondecreasing");
    }
  }
  if (run.servers.empty()) fail("run.servers", "need at least one system size");
  for (int n : run.servers) {
    if (n < 1) fail("run.servers", "must be >= 1");
    if (system.sampling == sim::ProbeSampling::WithoutReplacement && system.d > n) {
      fail("system.d", "cannot exceed run.servers without replacement");
    }
  }
  if (!(run.t_total > 0.0)) fail("run.t_total", "must be positive");
  if (run.t_warmup >= run.t_total) fail("run.t_warmup", "must be below run.t_total");
  if (run.replications < 1) fail("run.replications", "must be >= 1");
  if (run.batches < 2) fail("run.batches", "must be >= 2");
  if (run.snapshot_interval < 0.0) fail("run.snapshot_interval", "must be nonnegative");
  if (!(numerics.dt > 0.0)) fail("numerics.dt", "must be positive");
  if (!(numerics.t_ode > 0.0)) fail("numerics.t_ode", "must be positive");
  if (!(numerics.tolerance > 0.0)) fail("numerics.tolerance", "must be positive");
  if (numerics.max_iter < 1) fail("numerics.max_iter", "must be >= 1");
  if (numerics.out_every < 1) fail("numerics.out_every", "must be >= 1");
  if (numerics.initial_points < 0) fail("numerics.initial_points", "must be nonnegative");
  for (double y : output.y_grid) {
    if (!(y >= 0.0)) fail("output.y_grid", "ages must be nonnegative");
  }
  for (double t : output.sample_times) {
    if (!(t >= 0.0) || t > run.t_total) fail("output.sample_times", "must lie in [0, run.t_total]");
  }
  if (!(output.threshold >= 0.0)) fail("output.threshold", "must be nonnegative");

  switch (mode) {
    case Mode::OdePhase:
      if (!std::holds_alternative<ServiceDistribution::MixedErlang>(effective_services().front().params())) {
        fail("system.service", "ode_phase needs a mixed_erlang service");
      }
      break;
    case Mode::OdeHetero:
      if (!system.profile) fail("system.profile", "ode_hetero needs a server profile");
      break;
    case Mode::Insensitivity:
      if (system.services.empty()) fail("system.services", "insensitivity needs at least one service law");
      if (system.profile) fail("system.profile", "insensitivity compares homogeneous clusters");
      break;
    case Mode::Transient:
      if (system.profile) fail("system.profile", "transient mode supports homogeneous clusters only");
      break;
    default:
      break;
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what(), line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  const Reader r(text);
  r.check_keys(root, "", {"mode", "system", "run", "numerics", "output"});
  ExperimentConfig c;
  if (!root.contains("mode")) r.fail("mode", "missing field");
  try {
    c.mode = parse_mode(r.string(root.at("mode"), "mode"));
  } catch (const ConfigError& e) {
    r.fail("mode", e.what());
  }

  if (root.contains("system")) {
    const json& s = root.at("system");
    r.check_keys(s, "system", {"lambda", "mu", "capacity", "d", "service", "services", "profile", "sampling"});
    if (s.contains("lambda")) c.system.lambda = r.real(s.at("lambda"), "system.lambda");
    if (s.contains("mu")) c.system.mu = r.real(s.at("mu"), "system.mu");
    if (s.contains("capacity")) c.system.capacity = static_cast<int>(r.integer(s.at("capacity"), "system.capacity"));
    if (s.contains("d")) c.system.d = static_cast<int>(r.integer(s.at("d"), "system.d"));
    if (s.contains("service") && s.contains("services")) r.fail("system.services", "give either service or services");
    if (s.contains("service")) c.system.services.push_back(r.service(s.at("service"), "system.service"));
    if (s.contains("services")) {
      const json& list = s.at("services");
      if (!list.is_array()) r.fail("system.services", "expected an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        c.system.services.push_back(r.service(list[i], "system.services[" + std::to_string(i) + "]"));
      }
    }
    if (!s.contains("mu") && !c.system.services.empty()) c.system.mu = 1.0 / c.system.services.front().mean();
    if (s.contains("profile")) {
      const json& p = s.at("profile");
      r.check_keys(p, "system.profile", {"gamma", "capacity"});
      if (!p.contains("gamma") || !p.contains("capacity")) r.fail("system.profile", "needs gamma and capacity");
      c.system.profile = sim::ServerMix{r.reals(p.at("gamma"), "system.profile.gamma"),
                                        r.integers(p.at("capacity"), "system.profile.capacity")};
    }
    if (s.contains("sampling")) {
      const std::string v = r.string(s.at("sampling"), "system.sampling");
      if (v == "with_replacement") {
        c.system.sampling = sim::ProbeSampling::WithReplacement;
      } else if (v == "without_replacement") {
        c.system.sampling = sim::ProbeSampling::WithoutReplacement;
      } else {
        r.fail("system.sampling", "expected with_replacement or without_replacement");
      }
    }
  }

  if (root.contains("run")) {
    const json& s = root.at("run");
    r.check_keys(s, "run", {"servers", "t_total", "t_warmup", "replications", "seed", "batches", "snapshot_interval"});
    if (s.contains("servers")) {
      const json& v = s.at("servers");
      c.run.servers = v.is_array() ? r.integers(v, "run.servers")
                                   : std::vector<int>{static_cast<int>(r.integer(v, "run.servers"))};
    }
    if (s.contains("t_total")) c.run.t_total = r.real(s.at("t_total"), "run.t_total");
    if (s.contains("t_warmup")) c.run.t_warmup = r.real(s.at("t_warmup"), "run.t_warmup");
    if (s.contains("replications")) {
      c.run.replications = static_cast<int>(r.integer(s.at("replications"), "run.replications"));
    }
    if (s.contains("seed")) c.run.seed = r.unsigned_integer(s.at("seed"), "run.seed");
    if (s.contains("batches")) c.run.batches = static_cast<int>(r.integer(s.at("batches"), "run.batches"));
    if (s.contains("snapshot_interval")) {
      c.run.snapshot_interval = r.real(s.at("snapshot_interval"), "run.snapshot_interval");
    }
  }

  if (root.contains("numerics")) {
    const json& s = root.at("numerics");
    r.check_keys(s, "numerics",
                 {"dt", "t_ode", "tolerance", "max_iter", "out_every", "initial_points", "full_state"});
    if (s.contains("dt")) c.numerics.dt = r.real(s.at("dt"), "numerics.dt");
    if (s.contains("t_ode")) c.numerics.t_ode = r.real(s.at("t_ode"), "numerics.t_ode");
    if (s.contains("tolerance")) c.numerics.tolerance = r.real(s.at("tolerance"), "numerics.tolerance");
    if (s.contains("max_iter")) c.numerics.max_iter = r.integer(s.at("max_iter"), "numerics.max_iter");
    if (s.contains("out_every")) c.numerics.out_every = r.integer(s.at("out_every"), "numerics.out_every");
    if (s.contains("initial_points")) {
      c.numerics.initial_points = static_cast<int>(r.integer(s.at("initial_points"), "numerics.initial_points"));
    }
    if (s.contains("full_state")) c.numerics.full_state = r.boolean(s.at("full_state"), "numerics.full_state");
  }

  if (root.contains("output")) {
    const json& s = root.at("output");
    r.check_keys(s, "output", {"dir", "y_grid", "sample_times", "threshold"});
    if (s.contains("dir")) c.output.dir = r.string(s.at("dir"), "output.dir");
    if (s.contains("y_grid")) c.output.y_grid = r.reals(s.at("y_grid"), "output.y_grid");
    if (s.contains("sample_times")) c.output.sample_times = r.reals(s.at("sample_times"), "output.sample_times");
    if (s.contains("threshold")) c.output.threshold = r.real(s.at("threshold"), "output.threshold");
  }

  try {
    c.validate();
  } catch (const ConfigError& e) {
    r.fail(e.field(), strip_field(e));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string(), 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& c) {
  json system = {
      {"lambda", c.system.lambda},
      {"mu", c.system.mu},
      {"capacity", c.system.capacity},
      {"d", c.system.d},
      {"sampling", c.system.sampling == sim::ProbeSampling::WithReplacement ? "with_replacement" : "without_replacement"},
  };
  json services = json::array();
  for (const auto& s : c.system.services) services.push_back(service_to_json(s));
  system["services"] = services;
  if (c.system.profile) system["profile"] = {{"gamma", c.system.profile->gamma}, {"capacity", c.system.profile->capacity}};
  json root = {
      {"mode", to_string(c.mode)},
      {"system", system},
      {"run",
       {{"servers", c.run.servers},
        {"t_total", c.run.t_total},
        {"t_warmup", c.run.t_warmup},
        {"replications", c.run.replications},
        {"seed", c.run.seed},
        {"batches", c.run.batches},
        {"snapshot_interval", c.run.snapshot_interval}}},
      {"numerics",
       {{"dt", c.numerics.dt},
        {"t_ode", c.numerics.t_ode},
        {"tolerance", c.numerics.tolerance},
        {"max_iter", c.numerics.max_iter},
        {"out_every", c.numerics.out_every},
        {"initial_points", c.numerics.initial_points},
        {"full_state", c.numerics.full_state}}},
      {"output",
       {{"dir", c.output.dir},
        {"y_grid", reals_to_json(c.output.y_grid)},
        {"sample_times", reals_to_json(c.output.sample_times)},
        {"threshold", c.output.threshold}}},
  };
  return root.dump(2);
}

std::string config_hash(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.output.dir.clear();
  return hex64(fnv1a64(to_json(c)));
}

}  // namespace lossmesh
