#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sqrtpen/basis.hpp"
#include "sqrtpen/model.hpp"
#include "sqrtpen/solver.hpp"

namespace sqrtpen {

struct PredictedExponents {
  double excess = 0.0;
  double l1 = 0.0;
};

/// (kappa / (2 kappa + rho - 1), 1 / (2 kappa + rho - 1)); rho = 0 is the VC case.
PredictedExponents predicted_exponents(double kappa, double rho);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

/// x = ln(n / ln^4 n) when log_factor is set, else ln n.
double rate_abscissa(double n, bool log_factor);

/// Least squares of ln(error) on rate_abscissa(n). Needs >= 3 points with
/// positive errors; throws std::invalid_argument otherwise.
SlopeFit fit_slope(std::span<const double> n, std::span<const double> error, bool log_factor);

struct RateRow {
  std::size_t n = 0;
  std::size_t replicates = 0;
  double lambda = 0.0;
  double mean_excess = 0.0;
  double se_excess = 0.0;
  double mean_l1 = 0.0;
  double se_l1 = 0.0;
  double disagreement_fraction = 0.0;  // replicates whose restarts disagreed
};

struct RateTable {
  std::vector<RateRow> rows;
  SlopeFit excess_slope;        // against ln(n / ln^4 n)
  SlopeFit l1_slope;
  SlopeFit excess_slope_plain;  // against ln n
  SlopeFit l1_slope_plain;
  PredictedExponents predicted;
  bool degenerate = false;  // errors too close to zero for a slope
};

struct RateStudyConfig {
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 40;
  double c_lambda = 1.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool fresh_truth = false;  // draw a new f* per replicate
  double rho = 0.0;          // class complexity used for the predicted exponents

  void validate() const;
};

/// seed -> model; called once with the study seed, or once per replicate when
/// fresh_truth is set.
using ModelFactory = std::function<ModelSpec(std::uint64_t)>;

/// Per-replicate measurements, exposed for cross-module checks.
struct ReplicateResult {
  double excess = 0.0;
  double l1 = 0.0;
  bool disagree = false;
};

/// Fits one replicate: samples n points, solves, and measures exact excess risk
/// and the clipped L1 edge error.
ReplicateResult run_replicate(const ModelSpec& model, const BasisSystem& basis, std::size_t n, double c_lambda,
                              const SolverConfig& solver_cfg, std::uint64_t seed);

/// Monte Carlo rate study. Replicate r at grid point g uses seed
/// mix_seed(seed, g * 2^32 + r) regardless of the worker count.
RateTable rate_study(const ModelFactory& factory, const BasisSystem& basis, const RateStudyConfig& cfg,
                     const SolverConfig& solver_cfg);

struct Calibration {
  std::vector<double> grid;
  std::vector<double> scores;  // summed mean L1 error over the models, per grid value
  double best = 0.0;           // first grid value with the smallest score
};

/// Picks c_lambda from `grid` by the summed mean L1 edge error over `models` at
/// a single n. Replicate r uses seed mix_seed(seed, r) for every grid value and model.
Calibration calibrate_c_lambda(const std::vector<ModelSpec>& models, const BasisSystem& basis, std::size_t n,
                               std::size_t replicates, const std::vector<double>& grid,
                               const SolverConfig& solver_cfg, std::uint64_t seed);

}  // namespace sqrtpen
