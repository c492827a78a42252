#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sqrtpen/basis.hpp"
#include "sqrtpen/model.hpp"
#include "sqrtpen/penalty.hpp"
#include "sqrtpen/solver.hpp"

namespace sqrtpen {

/// Outcome of a deterministic inequality check over random trials.
struct CheckReport {
  std::string name;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double tolerance = 0.0;
  double worst_ratio = 0.0;  // max lhs / rhs over trials with rhs > 0
  std::map<std::string, double> params;
  std::vector<std::string> notes;
  bool passed() const { return violations == 0; }
};

/// ||f_alpha||_1 <= c_psi I(alpha) on random alpha.
CheckReport check_lemma1(const BasisSystem& basis, std::size_t trials, std::uint64_t seed);

/// I(alpha) <= c_d c_psi^2 N(alpha) ||f_alpha||_1 on random alpha truncated at random levels.
CheckReport check_lemma2(const BasisSystem& basis, std::size_t trials, std::uint64_t seed);

/// v t^{1/(2 kappa)} <= (delta/2) t + c_kappa delta^{-1/(2 kappa - 1)} v^{2 kappa/(2 kappa - 1)}
/// on random (v, t, kappa, delta), plus the equality family
/// t = (v / (kappa delta))^{2 kappa / (2 kappa - 1)}.
CheckReport check_lemma5(std::size_t trials, std::uint64_t seed);

/// Both sides of the scalar inequality above.
struct Lemma5Sides {
  double lhs = 0.0;
  double rhs = 0.0;
};
Lemma5Sides lemma5_sides(double v, double t, double kappa, double delta);

/// Random coefficient vectors with mixed sparsity and tail behaviour; pattern
/// is chosen by the generator. Used by the lemma checks and the tests.
CoefficientVector random_coefficients(const BasisSystem& basis, Rng& rng);

/// Finite sup-norm net of the body {I(alpha) <= M}.
struct BracketNet {
  int d = 0;
  int levels = 0;
  double M = 0.0;
  double delta = 0.0;      // the delta of the claimed radius and the cardinality bound
  double grid_step = 0.0;  // level-l grid step is grid_step 2^{-dl/2}; equals delta unless densified
  std::size_t n_nominal = 0;
  double claimed_radius = 0.0;  // (c_psi^2 / d) ln(n_nominal) delta
  bool full_product = false;    // every grid point vs. at most floor(M/delta) nonzeros
  double count = 0.0;           // number of elements, counted in closed form
  std::vector<CoefficientVector> elements;  // empty for count-only nets

  double cardinality() const { return count; }
};

/// Enumerates the net. Up to 6 coefficients: the full product of the level
/// grids {k step 2^{-dl/2} : |k| <= M/step}. Otherwise: vectors with at most
/// floor(M/delta) nonzero grid entries. Throws std::length_error above `budget` elements.
BracketNet build_bracket_net(const BasisSystem& basis, double M, double delta, std::size_t n_nominal,
                             std::size_t budget = 2'000'000);

/// The same construction on a grid of step delta/2 while keeping delta in the
/// bound; a negative control for check_net_cardinality. Counted, not enumerated.
BracketNet build_densified_net(const BasisSystem& basis, double M, double delta, std::size_t n_nominal);

/// Levelwise rounding: |alpha_{j,l}| <= step 2^{-dl/2} -> 0, else the nearest grid point.
CoefficientVector round_to_net(const BracketNet& net, const CoefficientVector& alpha);

/// Random alpha with I(alpha) <= M (scaled into the body).
CoefficientVector random_body_point(const BasisSystem& basis, double M, Rng& rng);

/// Checks that the rounding of `trials` random body points is an element of the
/// net within the claimed sup radius.
CheckReport check_net_cover(const BasisSystem& basis, const BracketNet& net, std::size_t trials, std::uint64_t seed);

struct CardinalityCheck {
  double log_count = 0.0;
  double bound = 0.0;  // (M/delta)(ln(2M/delta + 1) + ln(n + 1))
  bool passed = false;
};
CardinalityCheck check_net_cardinality(const BracketNet& net, std::size_t n_nominal);

/// Monte Carlo probe output.
struct ProbeReport {
  std::string name;
  std::vector<double> statistics;  // one per replicate
  double bound = 0.0;
  double frequency = 0.0;  // exceedance frequency (lemma 4) or event frequency (oracle)
  double tail_value = 0.0;
  std::map<std::string, double> params;
  std::vector<std::string> notes;
};

/// max over the family of |nu_n(alpha) - nu_n(alpha*)| / (sqrt(I(alpha - alpha*)) + sqrt(ln^4 n / n)),
/// nu_n(alpha) = sqrt(n) (R_n(G_alpha) - R(G_alpha)) with R exact.
double lemma4_ratio(const Dataset& data, const ModelSpec& model, const BasisSystem& basis,
                    const CoefficientVector& alpha_star, const std::vector<CoefficientVector>& family);

/// Random perturbations of alpha_star at several scales.
std::vector<CoefficientVector> lemma4_family(const BasisSystem& basis, const CoefficientVector& alpha_star,
                                             std::size_t size, std::uint64_t seed);

/// Per replicate: fresh data, the family plus the coordinate-descent fit on that
/// data; reports the exceedance frequency of C_probe sqrt(q_0 c_psi^2 ln^4 n / d)
/// and the tail value C_probe exp(-c_psi ln^4 n / (C_probe^2 d)).
ProbeReport probe_lemma4(const ModelSpec& model, const BasisSystem& basis, const CoefficientVector& alpha_star,
                         std::size_t n, std::size_t replicates, double c_probe, std::uint64_t seed);

/// Oracle-inequality event
///   excess(alpha_hat) <= (1 + delta)^2 min_m {excess(alpha^(m)) + delta^{-1/(2 kappa - 1)} V_n(N_m)}
///                        + 2 lambda_n sqrt(ln^4 n / n),
/// with alpha^(m) the level-m truncation of analyze(f*) standing in for the
/// infimum over all alpha. Requires n >= 8 q_0 c_psi^2.
ProbeReport check_oracle_inequality(const ModelSpec& model, const BasisSystem& basis, std::size_t n,
                                    std::size_t replicates, double delta_slack, double c_lambda,
                                    const SolverConfig& solver_cfg, std::uint64_t seed);

/// (1/sigma_0) Q^kappa(G_alpha sym-diff G*) <= excess(alpha) <= sigma_0 q_0^kappa ||f_alpha - f*||_inf^kappa
/// on random alpha near analyze(f*) (sup deviation at most max_deviation).
CheckReport check_margin(const ModelSpec& model, const BasisSystem& basis, std::size_t trials, std::uint64_t seed,
                         double max_deviation = 0.1);

}  // namespace sqrtpen
