#pragma once

#include <cstddef>

#include "sqrtpen/basis.hpp"

namespace sqrtpen {

/// Regularization setting of the square-root penalty lambda_n sqrt(I(alpha)).
/// Level weights are w_l = 2^{dl/2} and come from the coefficient layout.
struct PenaltyConfig {
  double lambda_n = 0.0;
  double c_lambda = 1.0;  // calibration constant used to produce lambda_n

  void validate() const;
};

/// Margin and design constants entering the variance term V_n.
struct TheoryConstants {
  double kappa = 1.0;
  double sigma_0 = 1.0;
  double q_0 = 1.0;

  void validate() const;
  /// (2 kappa - 1)/(2 kappa) kappa^{-1/(2 kappa - 1)}
  double c_kappa() const;
};

/// 2 (2^d - 1) / (2^{d/2} - 1)^2
double c_d(int d);
double c_kappa(double kappa);

/// sum_j |alpha_{j,l}| for one level, accumulated in extended precision.
long double level_abs_sum(const CoefficientVector& alpha, int l);

/// Block square-root nonsparsity I(alpha) = (sum_l 2^{dl/4} sqrt(sum_j |alpha_{j,l}|))^2.
double nonsparsity(const CoefficientVector& alpha);

/// sqrt(I(alpha)) without squaring and re-rooting.
double sqrt_nonsparsity(const CoefficientVector& alpha);

/// lambda_n sqrt(I(alpha)).
double penalty(const CoefficientVector& alpha, const PenaltyConfig& cfg);

/// Smallest m with every level above m identically zero (0 for alpha = 0).
int m_of(const CoefficientVector& alpha);

/// N_m = sum_{l <= m} |I_l|, with N_0 = 0.
std::size_t N_m(const BasisSystem& basis, int m);

/// N(alpha) = N_{m(alpha)}.
std::size_t N_of(const BasisSystem& basis, const CoefficientVector& alpha);

/// lambda_n = c_lambda sqrt(q_0 c_psi^2 log^4 n / (n d)); throws for n < 2.
double lambda_n(std::size_t n, const BasisSystem& basis, double q_0, double c_lambda);

/// V_n(N) = 4 c_kappa (4 c_d q_0 c_psi^2 sigma_0^{1/kappa} lambda^2 N)^{kappa/(2 kappa - 1)}.
double V_n(std::size_t N, const BasisSystem& basis, const TheoryConstants& constants, double lambda);

/// sqrt(I) split at level m*: first = levels 1..m*, second = levels m*+1..L.
/// Returned as (I1, I2) with sqrt(I1) + sqrt(I2) = sqrt(I(alpha)).
struct LevelSplit {
  double I1 = 0.0;
  double I2 = 0.0;
  double sqrt_I1 = 0.0;
  double sqrt_I2 = 0.0;
};
LevelSplit split_levels(const CoefficientVector& alpha, int m_star);

}  // namespace sqrtpen
