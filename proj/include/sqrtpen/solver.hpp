#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sqrtpen/basis.hpp"
#include "sqrtpen/dataset.hpp"
#include "sqrtpen/penalty.hpp"

namespace sqrtpen {

/// Finite per-coordinate value sets. The default lattice puts level-l
/// coordinates on k delta 2^{-dl/2}, |k| <= floor(M / delta).
struct Lattice {
  std::vector<std::vector<double>> values;  // one sorted list per coordinate

  static Lattice levelwise(const BasisSystem& basis, double M, double delta);
  /// Product of the list sizes, saturating at SIZE_MAX.
  std::size_t cardinality() const;
};

struct SolverConfig {
  enum class Method { kLattice, kCoordinateDescent };
  Method method = Method::kCoordinateDescent;
  double lattice_M = 1.0;
  double lattice_delta = 0.5;
  std::size_t lattice_budget = 10'000'000;
  int max_sweeps = 200;
  int restarts = 3;  // starts: zero, pilot, then random
  /// Coordinate descent moves only on the lattice (used to compare with solve_lattice).
  bool restrict_to_lattice = false;
  /// Only one tie-break rule exists: smallest |x|, then smallest signed x.
  std::string tie_break = "min-abs-then-min";
  std::uint64_t seed = 0;
  /// Record the objective after every accepted coordinate update.
  bool record_trace = false;
  /// After each coordinate sweep, also minimize exactly along the indicator of
  /// every dyadic cell of depth <= L (shifts f_alpha by a constant on that cell).
  /// With restrict_to_lattice, minimize jointly over every pair of coordinates
  /// on the lattice instead.
  bool cell_moves = true;

  void validate() const;
};

std::string to_string(SolverConfig::Method method);
SolverConfig::Method parse_method(const std::string& name);

struct FitResult {
  explicit FitResult(CoefficientVector a) : alpha(std::move(a)) {}

  CoefficientVector alpha;
  double objective = 0.0;
  double empirical_risk = 0.0;
  double penalty = 0.0;
  int sweeps = 0;
  std::string certificate;  // "global-on-lattice" or "local"
  std::vector<double> restart_objectives;
  bool restarts_disagree = false;  // objectives spread by more than 1e-6
  std::vector<double> trace;       // filled when record_trace is set
};

/// R_n(G_alpha) + lambda_n sqrt(I(alpha)).
double objective(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                 const CoefficientVector& alpha);

/// {0} together with (T_i - f_{alpha \ k}(S_i)) / psi_k(S_i) over samples in the
/// support of psi_k, sorted and deduplicated. Between consecutive candidates the
/// empirical risk is constant in alpha_k.
std::vector<double> breakpoints_1d(const Dataset& data, const BasisSystem& basis, const CoefficientVector& alpha,
                                   std::size_t k);

/// Per finest dyadic cell, the threshold with the fewest squared errors among
/// 0, 1 and the midpoints between consecutive T_i (ties: closest to 1/2; empty
/// cells: 1/2), analyzed into coefficients.
CoefficientVector pilot_estimate(const Dataset& data, const BasisSystem& basis);

/// Cyclic coordinate descent with exact 1-D minimization, best over restarts.
FitResult solve_coordinate_descent(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                                   const SolverConfig& solver_cfg);

/// Coordinate descent from a given start (no restarts).
FitResult descend_from(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                       const SolverConfig& solver_cfg, const CoefficientVector& start);

/// Exhaustive minimum over the lattice. Throws std::length_error over budget.
FitResult solve_lattice(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                        const SolverConfig& solver_cfg, const Lattice& lattice);
FitResult solve_lattice(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                        const SolverConfig& solver_cfg);

/// Dispatches on solver_cfg.method.
FitResult solve(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                const SolverConfig& solver_cfg);

/// A lambda above which alpha = 0 is the unique minimizer for this dataset:
/// R_n(0) / (2^{d/4} sqrt(t_min / L)), with t_min the smallest positive T_i.
/// Returns 0 when R_n(0) = 0.
double kill_threshold(const Dataset& data, const BasisSystem& basis);

}  // namespace sqrtpen
