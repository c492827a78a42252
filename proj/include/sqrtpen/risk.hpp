#pragma once

#include <cstdint>
#include <optional>

#include "sqrtpen/basis.hpp"
#include "sqrtpen/dataset.hpp"
#include "sqrtpen/dyadic.hpp"
#include "sqrtpen/model.hpp"

namespace sqrtpen {

/// Draw count and seed for Monte Carlo integration when no exact path exists.
struct MonteCarloBudget {
  std::size_t draws = 100000;
  std::uint64_t seed = 0;
};

/// A risk or measure with its Monte Carlo standard error (0 when exact).
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = true;
};

/// R_n(G_f) = (1/n) sum (Y_i - 1{f(S_i) >= T_i})^2. Throws on an empty dataset.
double empirical_risk(const Dataset& data, const BasisSystem& basis, const CoefficientVector& alpha);
double empirical_risk(const Dataset& data, const EdgeFunction& f);

/// R(G_f) = E[(Y - 1_{G_f}(X))^2] under the model. Exact cellwise integration
/// when f, f0 and the design density are all tabulated; Monte Carlo over s
/// (exact in t) otherwise. Throws std::invalid_argument when neither is possible.
Estimate population_risk(const ModelSpec& model, const EdgeFunction& f,
                         std::optional<MonteCarloBudget> budget = std::nullopt);
Estimate population_risk(const ModelSpec& model, const BasisSystem& basis, const CoefficientVector& alpha,
                         std::optional<MonteCarloBudget> budget = std::nullopt);

/// R(G*) with G* = {eta > 1/2} = G_{f0}.
Estimate bayes_risk(const ModelSpec& model, std::optional<MonteCarloBudget> budget = std::nullopt);

/// R(G_alpha) - R(G*).
Estimate excess_risk(const ModelSpec& model, const BasisSystem& basis, const CoefficientVector& alpha,
                     std::optional<MonteCarloBudget> budget = std::nullopt);
Estimate excess_risk(const ModelSpec& model, const EdgeFunction& f,
                     std::optional<MonteCarloBudget> budget = std::nullopt);

/// mu_{d+1}(G_f sym-diff G_g) = int |clip f - clip g|, clip to [0,1].
Estimate sym_diff_measure(const EdgeFunction& f, const EdgeFunction& g,
                          std::optional<MonteCarloBudget> budget = std::nullopt);

/// int |f| d mu_d, unclipped.
Estimate l1_norm(const EdgeFunction& f, std::optional<MonteCarloBudget> budget = std::nullopt);

/// Q(G_f sym-diff G_g) = int_{G_f sym-diff G_g} q. Exact (tabulated edges required).
/// Throws std::domain_error when the design violates 1/q_0 <= q <= q_0.
double q_measure_sym_diff(const ModelSpec& model, const EdgeFunction& f, const EdgeFunction& g);

/// sup_s |f(s) - g(s)| over tabulated edges, unclipped.
double sup_distance(const EdgeFunction& f, const EdgeFunction& g);

double clip_unit(double v);

}  // namespace sqrtpen
