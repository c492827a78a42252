#include "sqrtpen/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sqrtpen/config.hpp"
#include "sqrtpen/experiments.hpp"
#include "sqrtpen/io.hpp"
#include "sqrtpen/risk.hpp"
#include "sqrtpen/theory.hpp"

namespace sqrtpen {

namespace {

using nlohmann::json;

/// A check whose failure makes the command exit with kExitCheckFailed.
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

unsigned worker_count() {
  const char* env = std::getenv("SQRTPEN_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) throw UsageError(fmt::format("SQRTPEN_WORKERS: bad value '{}'", env));
  return static_cast<unsigned>(v);
}

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {
    stamp_.config_hash = cfg.hash();
    stamp_.seed = cfg.require_seed();
  }

  void simulate() {
    const ModelSpec model = cfg_.build_model();
    const Dataset data = sample_dataset(model, cfg_.n, stamp_.seed);
    std::ostringstream csv;
    write_dataset_csv(csv, data, &stamp_);
    emit("dataset.csv", csv.str());
    json doc = header("simulate");
    doc["dataset"] = dataset_meta_json(data);
    if (model.f0.has_table()) {
      std::ostringstream edge;
      write_edge_csv(edge, model.f0.table(), &stamp_);
      emit("truth_edge.csv", edge.str());
      doc["truth_edge"] = "truth_edge.csv";
    }
    emit("dataset.json", dump_json(doc));
  }

  void fit() {
    if (cfg_.data.empty()) throw UsageError("fit needs a dataset (--data or run.data)");
    std::istringstream is(read_text_file(cfg_.data));
    const Dataset data = read_dataset_csv(is);
    const BasisSystem basis = cfg_.build_basis();
    if (data.d() != basis.d()) {
      throw SchemaError(fmt::format("dataset has d = {} but basis.d = {}", data.d(), basis.d()));
    }
    if (data.size() < 2) throw SchemaError("dataset needs at least 2 rows");
    PenaltyConfig pen;
    pen.c_lambda = cfg_.c_lambda;
    pen.lambda_n = lambda_n(data.size(), basis, cfg_.q_0.value_or(1.0), cfg_.c_lambda);
    const SolverConfig scfg = cfg_.solver_config();
    const FitResult fit = solve(data, basis, pen, scfg);
    json doc = header("fit");
    doc["n"] = data.size();
    doc["fit"] = fit_result_to_json(fit, pen, scfg);
    doc["edge"] = "fit_edge.csv";
    std::ostringstream edge;
    write_edge_csv(edge, synthesize_table(basis, fit.alpha), &stamp_);
    emit("fit_edge.csv", edge.str());
    emit("fit.json", dump_json(doc));
  }

  void rates() {
    RateStudyConfig rc;
    rc.n_grid = cfg_.n_grid;
    rc.replicates = cfg_.replicates;
    rc.c_lambda = cfg_.c_lambda;
    rc.seed = stamp_.seed;
    rc.workers = worker_count();
    rc.fresh_truth = cfg_.fresh_truth;
    rc.rho = cfg_.edge == "holder" ? FunctionClassSpec::holder(cfg_.d, cfg_.gamma, cfg_.c_hold).rho : 0.0;
    try {
      rc.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const BasisSystem basis = cfg_.build_basis();
    const ExperimentConfig& cfg = cfg_;
    const ModelFactory factory = [&cfg](std::uint64_t s) {
      return cfg.build_model(cfg.fresh_truth ? s : cfg.resolved_edge_seed());
    };
    const RateTable table = rate_study(factory, basis, rc, cfg_.solver_config());
    std::ostringstream csv;
    write_rate_table_csv(csv, table, &stamp_);
    emit("rates.csv", csv.str());
    json doc = header("rates");
    doc["rho"] = rc.rho;
    doc["table"] = rate_table_to_json(table);
    emit("rates.json", dump_json(doc));
  }

  void checks() {
    const BasisSystem basis = cfg_.build_basis();
    json reports = json::array();
    bool ok = true;
    auto add = [&](json j, bool passed) {
      j["passed"] = passed;
      ok = ok && passed;
      reports.push_back(std::move(j));
    };
    const AssumptionBReport ab = verify_assumption_b(basis, 64, stamp_.seed);
    add(json{{"name", "assumption_b"}, {"report", assumption_b_to_json(ab)}}, ab.passed());
    for (const CheckReport& r : {check_lemma1(basis, cfg_.check_trials, mix_seed(stamp_.seed, 1)),
                                 check_lemma2(basis, cfg_.check_trials, mix_seed(stamp_.seed, 2)),
                                 check_lemma5(cfg_.check_trials, mix_seed(stamp_.seed, 5))}) {
      add(check_report_to_json(r), r.passed());
    }

    const BasisSystem net_basis = make_haar_basis(cfg_.d, cfg_.net_levels);
    const std::size_t net_n = cfg_.net_n.value_or(net_basis.total());
    const BracketNet net = build_bracket_net(net_basis, cfg_.net_M, cfg_.net_delta, net_n);
    const CheckReport cover = check_net_cover(net_basis, net, cfg_.net_points, mix_seed(stamp_.seed, 3));
    add(check_report_to_json(cover), cover.passed());
    const CardinalityCheck card = check_net_cardinality(net, net_n);
    add(json{{"name", "net_cardinality"},
             {"cardinality", net.cardinality()},
             {"log_count", card.log_count},
             {"bound", card.bound},
             {"full_product", net.full_product}},
        card.passed);
    const BracketNet dense = build_densified_net(net_basis, cfg_.net_M, cfg_.net_delta, net_n);
    const CardinalityCheck dense_card = check_net_cardinality(dense, net_n);
    add(json{{"name", "net_cardinality_densified_control"},
             {"cardinality", dense.cardinality()},
             {"log_count", dense_card.log_count},
             {"bound", dense_card.bound},
             {"expected", "bound violated"}},
        !dense_card.passed);

    const ModelSpec model = cfg_.build_model();
    const CheckReport margin = check_margin(model, basis, 200, mix_seed(stamp_.seed, 4), 0.1);
    add(check_report_to_json(margin), margin.passed());

    json doc = header("checks");
    doc["reports"] = reports;
    doc["all_passed"] = ok;
    emit("checks.json", dump_json(doc));
    if (!ok) throw CheckFailed("at least one deterministic check failed");
  }

  void oracle() {
    const BasisSystem basis = cfg_.build_basis();
    const ModelSpec model = cfg_.build_model();
    const ProbeReport event = check_oracle_inequality(model, basis, cfg_.n, cfg_.oracle_replicates, cfg_.oracle_delta,
                                                      cfg_.c_lambda, cfg_.solver_config(), stamp_.seed);
    const ProbeReport probe = probe_lemma4(model, basis, analyze(basis, model.f0), cfg_.n, cfg_.probe_replicates,
                                           cfg_.c_probe, mix_seed(stamp_.seed, 4));
    json doc = header("oracle");
    doc["oracle_inequality"] = probe_report_to_json(event);
    doc["lemma4_probe"] = probe_report_to_json(probe);
    emit("oracle.json", dump_json(doc));
  }

 private:
  json header(const std::string& command) const {
    json config = json::object();
    for (const auto& [k, v] : cfg_.to_key_values()) config[k] = v;
    return json{{"command", command}, {"config_hash", stamp_.config_hash}, {"seed", stamp_.seed}, {"config", config}};
  }

  void emit(const std::string& name, const std::string& text) {
    std::filesystem::create_directories(cfg_.out);
    const std::string path = (std::filesystem::path(cfg_.out) / name).string();
    write_text_file(path, text);
    out_ << path << '\n';
  }

  const ExperimentConfig& cfg_;
  std::ostream& out_;
  OutputStamp stamp_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Square-root penalized boundary-fragment classifier"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> assignments;
  // Flag -> configuration key, applied after the file and --set entries.
  const std::vector<std::pair<std::string, std::string>> flag_keys = {
      {"--seed", "run.seed"},          {"--d", "basis.d"},
      {"--levels", "basis.levels"},    {"--n", "run.n"},
      {"--p", "model.p"},              {"--kappa", "model.kappa"},
      {"--c-lambda", "penalty.c_lambda"}, {"--method", "solver.method"},
      {"--restarts", "solver.restarts"}, {"--out", "run.out"},
      {"--data", "run.data"},          {"--n-grid", "run.n_grid"},
      {"--replicates", "run.replicates"}};
  std::vector<std::optional<std::string>> flag_values(flag_keys.size());

  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--set", assignments, "extra key=value assignment (repeatable)");
  for (std::size_t i = 0; i < flag_keys.size(); ++i) {
    app.add_option(flag_keys[i].first, flag_values[i], "sets " + flag_keys[i].second);
  }
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "sample a dataset from the configured model"},
      {"fit", "fit the penalized estimator to a dataset CSV"},
      {"rates", "Monte Carlo rate study over run.n_grid"},
      {"checks", "deterministic lemma, basis, net and margin checks"},
      {"oracle", "oracle-inequality event and empirical-process probe"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) apply_config_text(cfg, read_text_file(config_path));
    for (const std::string& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw UsageError(fmt::format("--set expects key=value, got '{}'", a));
      cfg.set(a.substr(0, eq), a.substr(eq + 1));
    }
    for (std::size_t i = 0; i < flag_keys.size(); ++i) {
      if (flag_values[i]) cfg.set(flag_keys[i].second, *flag_values[i]);
    }
    cfg.validate();

    Runner runner(cfg, out);
    if (command == "simulate") runner.simulate();
    else if (command == "fit") runner.fit();
    else if (command == "rates") runner.rates();
    else if (command == "checks") runner.checks();
    else runner.oracle();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CheckFailed& e) {
    err << "check failed: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace sqrtpen
