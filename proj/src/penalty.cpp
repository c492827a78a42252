#include "sqrtpen/penalty.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace sqrtpen {

void PenaltyConfig::validate() const {
  if (!(lambda_n >= 0.0) || !std::isfinite(lambda_n)) {
    throw std::invalid_argument(fmt::format("penalty: lambda_n must be finite and >= 0, got {}", lambda_n));
  }
  if (!(c_lambda > 0.0)) throw std::invalid_argument("penalty: c_lambda must be > 0");
}

void TheoryConstants::validate() const {
  if (!(kappa >= 1.0)) throw std::invalid_argument("theory constants: kappa must be >= 1");
  if (!(sigma_0 > 0.0)) throw std::invalid_argument("theory constants: sigma_0 must be > 0");
  if (!(q_0 >= 1.0)) throw std::invalid_argument("theory constants: q_0 must be >= 1");
}

double c_kappa(double kappa) {
  const double e = 2.0 * kappa - 1.0;
  return e / (2.0 * kappa) * std::pow(kappa, -1.0 / e);
}

double TheoryConstants::c_kappa() const { return sqrtpen::c_kappa(kappa); }

double c_d(int d) {
  const double root = std::pow(2.0, 0.5 * d) - 1.0;
  return 2.0 * (std::ldexp(1.0, d) - 1.0) / (root * root);
}

long double level_abs_sum(const CoefficientVector& alpha, int l) {
  long double s = 0.0L;
  for (double v : alpha.level(l)) s += std::fabs(static_cast<long double>(v));
  return s;
}

namespace {

long double weighted_root(const CoefficientVector& alpha, int l) {
  // 2^{dl/4} sqrt(sum_j |alpha_{j,l}|)
  return std::pow(2.0L, alpha.d() * l / 4.0L) * std::sqrt(level_abs_sum(alpha, l));
}

long double root_sum(const CoefficientVector& alpha, int from, int to) {
  long double s = 0.0L;
  for (int l = from; l <= to; ++l) s += weighted_root(alpha, l);
  return s;
}

}  // namespace

double sqrt_nonsparsity(const CoefficientVector& alpha) {
  return static_cast<double>(root_sum(alpha, 1, alpha.levels()));
}

double nonsparsity(const CoefficientVector& alpha) {
  const long double r = root_sum(alpha, 1, alpha.levels());
  return static_cast<double>(r * r);
}

double penalty(const CoefficientVector& alpha, const PenaltyConfig& cfg) {
  return cfg.lambda_n * sqrt_nonsparsity(alpha);
}

int m_of(const CoefficientVector& alpha) {
  for (int l = alpha.levels(); l >= 1; --l) {
    for (double v : alpha.level(l)) {
      if (v != 0.0) return l;
    }
  }
  return 0;
}

std::size_t N_m(const BasisSystem& basis, int m) {
  if (m < 0 || m > basis.levels()) throw std::out_of_range(fmt::format("N_m: m = {} outside [0, L]", m));
  return m == 0 ? 0 : basis.block_offset(m) + basis.block_size(m);
}

std::size_t N_of(const BasisSystem& basis, const CoefficientVector& alpha) {
  return N_m(basis, m_of(alpha));
}

double lambda_n(std::size_t n, const BasisSystem& basis, double q_0, double c_lambda) {
  if (n < 2) throw std::invalid_argument("lambda_n: sample size must be >= 2");
  const double log_n = std::log(static_cast<double>(n));
  const double c = basis.c_psi();
  return c_lambda * std::sqrt(q_0 * c * c * std::pow(log_n, 4) / (static_cast<double>(n) * basis.d()));
}

double V_n(std::size_t N, const BasisSystem& basis, const TheoryConstants& k, double lambda) {
  if (N == 0) return 0.0;
  const double c = basis.c_psi();
  const double inner = 4.0 * c_d(basis.d()) * k.q_0 * c * c * std::pow(k.sigma_0, 1.0 / k.kappa) * lambda *
                       lambda * static_cast<double>(N);
  return 4.0 * k.c_kappa() * std::pow(inner, k.kappa / (2.0 * k.kappa - 1.0));
}

LevelSplit split_levels(const CoefficientVector& alpha, int m_star) {
  if (m_star < 0 || m_star > alpha.levels()) throw std::out_of_range("split_levels: m* outside [0, L]");
  const long double r1 = root_sum(alpha, 1, m_star);
  const long double r2 = root_sum(alpha, m_star + 1, alpha.levels());
  return LevelSplit{static_cast<double>(r1 * r1), static_cast<double>(r2 * r2), static_cast<double>(r1),
                    static_cast<double>(r2)};
}

}  // namespace sqrtpen
