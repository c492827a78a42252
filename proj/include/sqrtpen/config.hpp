#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqrtpen/basis.hpp"
#include "sqrtpen/model.hpp"
#include "sqrtpen/penalty.hpp"
#include "sqrtpen/solver.hpp"

namespace sqrtpen {

/// Invalid configuration or command-line input.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flat experiment configuration. Keys carry a section prefix (model.p=0.75).
struct ExperimentConfig {
  // model
  std::string model_kind = "channel";  // channel | regression | margin
  double p = 0.75;
  double kappa = 1.0;  // margin model only; the other models have kappa = 1
  double h = 0.1;
  std::string noise = "uniform";  // none | uniform | two-point
  double noise_bound = 0.25;
  std::string edge = "dyadic";  // dyadic | holder | constant
  int edge_level = 2;
  double edge_value = 0.5;
  double gamma = 1.0;
  double c_hold = 1.0;
  std::optional<std::uint64_t> edge_seed;  // defaults to run.seed
  // basis
  int d = 1;
  int levels = 7;
  // penalty
  double c_lambda = 0.01;
  std::optional<double> q_0;
  // solver
  std::string method = "coordinate-descent";
  int restarts = 3;
  int max_sweeps = 200;
  double lattice_M = 1.0;
  double lattice_delta = 0.5;
  bool cell_moves = true;
  // run
  std::optional<std::uint64_t> seed;
  std::size_t n = 512;
  std::vector<std::size_t> n_grid = {256, 512, 1024, 2048, 4096, 8192};
  std::size_t replicates = 40;
  bool fresh_truth = false;
  std::string data;         // dataset path for fit
  std::string out = "out";  // output directory; not part of the hash
  // checks
  std::size_t check_trials = 1000;
  int net_levels = 2;
  double net_M = 1.0;
  double net_delta = 0.5;
  std::optional<std::size_t> net_n;  // defaults to the net basis size
  std::size_t net_points = 200;
  // oracle
  std::size_t oracle_replicates = 100;
  double oracle_delta = 1.0;
  double c_probe = 1.0;
  std::size_t probe_replicates = 20;

  /// Sets one key; throws UsageError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Every key with its canonical value, sorted; run.out is omitted.
  std::map<std::string, std::string> to_key_values() const;
  /// key=value lines of to_key_values().
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), 16 hex digits.
  std::string hash() const;

  std::uint64_t require_seed() const;
  std::uint64_t resolved_edge_seed() const;

  /// Range checks shared by all commands; throws UsageError.
  void validate() const;

  BasisSystem build_basis() const;
  /// The model with the configured edge, drawn from `edge_seed`. A q_0
  /// override replaces the design's tightest bound and must not be smaller.
  ModelSpec build_model(std::uint64_t edge_seed) const;
  ModelSpec build_model() const { return build_model(resolved_edge_seed()); }
  SolverConfig solver_config() const;
};

/// Parses key=value lines; '#' starts a comment, blank lines are ignored.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace sqrtpen
