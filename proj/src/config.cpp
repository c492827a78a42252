#include "sqrtpen/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "sqrtpen/io.hpp"

namespace sqrtpen {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x)) {
    throw UsageError(fmt::format("{}: '{}' is not a finite number", key, v));
  }
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  if (v.empty() || v[0] == '-') throw UsageError(fmt::format("{}: '{}' is not a nonnegative integer", key, v));
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || errno == ERANGE) {
    throw UsageError(fmt::format("{}: '{}' is not a nonnegative integer", key, v));
  }
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const std::uint64_t x = to_u64(key, v);
  if (x > 1'000'000) throw UsageError(fmt::format("{}: {} is out of range", key, v));
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw UsageError(fmt::format("{}: expected true or false, got '{}'", key, v));
}

std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (v == a) return v;
  }
  throw UsageError(fmt::format("{}: unknown value '{}'", key, v));
}

std::vector<std::size_t> to_grid(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_u64(key, trim(item)));
  if (out.empty()) throw UsageError(fmt::format("{}: empty list", key));
  return out;
}

std::string grid_text(const std::vector<std::size_t>& g) {
  std::string s;
  for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + std::to_string(g[i]);
  return s;
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::map<std::string, Field>& fields() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::map<std::string, Field> table = {
      {"model.kind", {[](C& c, S k, S v) { c.model_kind = one_of(k, v, {"channel", "regression", "margin"}); },
                      [](const C& c) { return c.model_kind; }}},
      {"model.p", {[](C& c, S k, S v) { c.p = to_double(k, v); }, [](const C& c) { return format_double(c.p); }}},
      {"model.kappa",
       {[](C& c, S k, S v) { c.kappa = to_double(k, v); }, [](const C& c) { return format_double(c.kappa); }}},
      {"model.h", {[](C& c, S k, S v) { c.h = to_double(k, v); }, [](const C& c) { return format_double(c.h); }}},
      {"model.noise", {[](C& c, S k, S v) { c.noise = one_of(k, v, {"none", "uniform", "two-point"}); },
                       [](const C& c) { return c.noise; }}},
      {"model.noise_bound", {[](C& c, S k, S v) { c.noise_bound = to_double(k, v); },
                             [](const C& c) { return format_double(c.noise_bound); }}},
      {"model.edge", {[](C& c, S k, S v) { c.edge = one_of(k, v, {"dyadic", "holder", "constant"}); },
                      [](const C& c) { return c.edge; }}},
      {"model.edge_level",
       {[](C& c, S k, S v) { c.edge_level = to_int(k, v); }, [](const C& c) { return std::to_string(c.edge_level); }}},
      {"model.edge_value", {[](C& c, S k, S v) { c.edge_value = to_double(k, v); },
                            [](const C& c) { return format_double(c.edge_value); }}},
      {"model.gamma",
       {[](C& c, S k, S v) { c.gamma = to_double(k, v); }, [](const C& c) { return format_double(c.gamma); }}},
      {"model.c_hold",
       {[](C& c, S k, S v) { c.c_hold = to_double(k, v); }, [](const C& c) { return format_double(c.c_hold); }}},
      {"model.edge_seed",
       {[](C& c, S k, S v) {
          if (v == "auto") c.edge_seed.reset();
          else c.edge_seed = to_u64(k, v);
        },
        [](const C& c) { return c.edge_seed ? std::to_string(*c.edge_seed) : std::string("auto"); }}},
      {"basis.d", {[](C& c, S k, S v) { c.d = to_int(k, v); }, [](const C& c) { return std::to_string(c.d); }}},
      {"basis.levels",
       {[](C& c, S k, S v) { c.levels = to_int(k, v); }, [](const C& c) { return std::to_string(c.levels); }}},
      {"penalty.c_lambda", {[](C& c, S k, S v) { c.c_lambda = to_double(k, v); },
                            [](const C& c) { return format_double(c.c_lambda); }}},
      {"penalty.q_0",
       {[](C& c, S k, S v) {
          if (v == "auto") c.q_0.reset();
          else c.q_0 = to_double(k, v);
        },
        [](const C& c) { return c.q_0 ? format_double(*c.q_0) : std::string("auto"); }}},
      {"solver.method",
       {[](C& c, S k, S v) {
          try {
            c.method = to_string(parse_method(v));
          } catch (const std::invalid_argument&) {
            throw UsageError(fmt::format("{}: unknown value '{}'", k, v));
          }
        },
        [](const C& c) { return c.method; }}},
      {"solver.restarts",
       {[](C& c, S k, S v) { c.restarts = to_int(k, v); }, [](const C& c) { return std::to_string(c.restarts); }}},
      {"solver.max_sweeps",
       {[](C& c, S k, S v) { c.max_sweeps = to_int(k, v); }, [](const C& c) { return std::to_string(c.max_sweeps); }}},
      {"solver.lattice_M", {[](C& c, S k, S v) { c.lattice_M = to_double(k, v); },
                            [](const C& c) { return format_double(c.lattice_M); }}},
      {"solver.lattice_delta", {[](C& c, S k, S v) { c.lattice_delta = to_double(k, v); },
                                [](const C& c) { return format_double(c.lattice_delta); }}},
      {"solver.cell_moves", {[](C& c, S k, S v) { c.cell_moves = to_bool(k, v); },
                             [](const C& c) { return std::string(c.cell_moves ? "true" : "false"); }}},
      {"run.seed", {[](C& c, S k, S v) { c.seed = to_u64(k, v); },
                    [](const C& c) { return c.seed ? std::to_string(*c.seed) : std::string("unset"); }}},
      {"run.n", {[](C& c, S k, S v) { c.n = to_u64(k, v); }, [](const C& c) { return std::to_string(c.n); }}},
      {"run.n_grid", {[](C& c, S k, S v) { c.n_grid = to_grid(k, v); }, [](const C& c) { return grid_text(c.n_grid); }}},
      {"run.replicates",
       {[](C& c, S k, S v) { c.replicates = to_u64(k, v); }, [](const C& c) { return std::to_string(c.replicates); }}},
      {"run.fresh_truth", {[](C& c, S k, S v) { c.fresh_truth = to_bool(k, v); },
                           [](const C& c) { return std::string(c.fresh_truth ? "true" : "false"); }}},
      {"run.data", {[](C& c, S, S v) { c.data = v; }, [](const C& c) { return c.data; }}},
      {"run.out", {[](C& c, S, S v) { c.out = v; }, nullptr}},
      {"checks.trials", {[](C& c, S k, S v) { c.check_trials = to_u64(k, v); },
                         [](const C& c) { return std::to_string(c.check_trials); }}},
      {"checks.net_levels",
       {[](C& c, S k, S v) { c.net_levels = to_int(k, v); }, [](const C& c) { return std::to_string(c.net_levels); }}},
      {"checks.net_M",
       {[](C& c, S k, S v) { c.net_M = to_double(k, v); }, [](const C& c) { return format_double(c.net_M); }}},
      {"checks.net_delta", {[](C& c, S k, S v) { c.net_delta = to_double(k, v); },
                            [](const C& c) { return format_double(c.net_delta); }}},
      {"checks.net_n",
       {[](C& c, S k, S v) {
          if (v == "auto") c.net_n.reset();
          else c.net_n = to_u64(k, v);
        },
        [](const C& c) { return c.net_n ? std::to_string(*c.net_n) : std::string("auto"); }}},
      {"checks.net_points", {[](C& c, S k, S v) { c.net_points = to_u64(k, v); },
                             [](const C& c) { return std::to_string(c.net_points); }}},
      {"oracle.replicates", {[](C& c, S k, S v) { c.oracle_replicates = to_u64(k, v); },
                             [](const C& c) { return std::to_string(c.oracle_replicates); }}},
      {"oracle.delta", {[](C& c, S k, S v) { c.oracle_delta = to_double(k, v); },
                        [](const C& c) { return format_double(c.oracle_delta); }}},
      {"oracle.c_probe",
       {[](C& c, S k, S v) { c.c_probe = to_double(k, v); }, [](const C& c) { return format_double(c.c_probe); }}},
      {"oracle.probe_replicates", {[](C& c, S k, S v) { c.probe_replicates = to_u64(k, v); },
                                   [](const C& c) { return std::to_string(c.probe_replicates); }}},
  };
  return table;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw UsageError(fmt::format("unknown configuration key '{}'", key));
  it->second.set(*this, key, trim(value));
}

std::map<std::string, std::string> ExperimentConfig::to_key_values() const {
  std::map<std::string, std::string> out;
  for (const auto& [key, f] : fields()) {
    if (f.get) out[key] = f.get(*this);
  }
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::string s;
  for (const auto& [k, v] : to_key_values()) s += k + "=" + v + "\n";
  return s;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash() const { return fmt::format("{:016x}", fnv1a64(canonical())); }

std::uint64_t ExperimentConfig::require_seed() const {
  if (!seed) throw UsageError("run.seed is mandatory (--seed)");
  return *seed;
}

std::uint64_t ExperimentConfig::resolved_edge_seed() const { return edge_seed ? *edge_seed : require_seed(); }

void ExperimentConfig::validate() const {
  require_seed();
  if (d < 1 || d > 3) throw UsageError("basis.d must be 1, 2 or 3");
  if (levels < 1 || d * levels > 20) throw UsageError("basis.levels must be >= 1 with d * levels <= 20");
  if (!(c_lambda > 0.0)) throw UsageError("penalty.c_lambda must be > 0");
  if (q_0 && !(*q_0 >= 1.0)) throw UsageError("penalty.q_0 must be >= 1");
  if (!(p > 0.5 && p < 1.0)) throw UsageError("model.p must lie in (1/2, 1)");
  if (!(kappa >= 1.0)) throw UsageError("model.kappa must be >= 1");
  if (model_kind != "margin" && kappa != 1.0) throw UsageError("model.kappa applies to the margin model only");
  if (!(h > 0.0)) throw UsageError("model.h must be > 0");
  if (!(noise_bound >= 0.0)) throw UsageError("model.noise_bound must be >= 0");
  if (edge_level < 0 || d * edge_level > 20) throw UsageError("model.edge_level out of range");
  if (!(gamma > 0.0) || !(c_hold > 0.0)) throw UsageError("model.gamma and model.c_hold must be > 0");
  if (restarts < 1 || max_sweeps < 1) throw UsageError("solver.restarts and solver.max_sweeps must be >= 1");
  if (!(lattice_M >= 0.0) || !(lattice_delta > 0.0)) throw UsageError("solver lattice needs M >= 0 and delta > 0");
  if (n < 1) throw UsageError("run.n must be >= 1");
  if (check_trials < 1 || net_points < 1) throw UsageError("checks.trials and checks.net_points must be >= 1");
  if (net_levels < 1 || (net_n && *net_n < 1) || !(net_M >= 0.0) || !(net_delta > 0.0)) throw UsageError("bad bracket-net settings");
  if (oracle_replicates < 1 || probe_replicates < 1) throw UsageError("oracle replicates must be >= 1");
  if (!(oracle_delta > 0.0) || !(c_probe > 0.0)) throw UsageError("oracle.delta and oracle.c_probe must be > 0");
}

BasisSystem ExperimentConfig::build_basis() const { return make_haar_basis(d, levels); }

ModelSpec ExperimentConfig::build_model(std::uint64_t seed_for_edge) const {
  EdgeFunction f0;
  if (edge == "dyadic") {
    f0 = sample_dyadic_edge(d, edge_level, seed_for_edge);
  } else if (edge == "holder") {
    f0 = sample_holder_edge(d, gamma, c_hold, seed_for_edge);
  } else {
    f0 = EdgeFunction::constant(d, edge_value);
  }
  ModelSpec model;
  if (model_kind == "channel") {
    model = make_binary_channel_model(f0, p);
  } else if (model_kind == "margin") {
    model = make_margin_model(f0, kappa, h);
  } else {
    NoiseSpec ns;
    ns.kind = noise == "none" ? NoiseSpec::Kind::kNone
                              : (noise == "uniform" ? NoiseSpec::Kind::kUniform : NoiseSpec::Kind::kTwoPoint);
    ns.bound = noise_bound;
    model = make_regression_model(f0, ns);
  }
  if (q_0) {
    if (*q_0 < model.design.q_0) {
      throw UsageError(fmt::format("penalty.q_0 = {} is below the design bound {}", *q_0, model.design.q_0));
    }
    model.design.q_0 = *q_0;
  }
  return model;
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig s;
  s.method = parse_method(method);
  s.restarts = restarts;
  s.max_sweeps = max_sweeps;
  s.lattice_M = lattice_M;
  s.lattice_delta = lattice_delta;
  s.cell_moves = cell_moves;
  s.seed = seed.value_or(0);
  return s;
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("config line {}: expected key=value", lineno));
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

}  // namespace sqrtpen
