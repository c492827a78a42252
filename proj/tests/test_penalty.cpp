#include <cmath>

#include <gtest/gtest.h>

#include "sqrtpen/basis.hpp"
#include "sqrtpen/penalty.hpp"
#include "sqrtpen/rng.hpp"
#include "sqrtpen/theory.hpp"

namespace sqrtpen {
namespace {

CoefficientVector two_level_example(const BasisSystem& b) {
  CoefficientVector a(b);
  a[0] = 0.4;
  a[1] = -0.6;  // level 1 abs-sum 1
  a[2] = 0.25;
  a[3] = 0.75;  // level 2 abs-sum 1
  return a;
}

TEST(Nonsparsity, Examples) {
  const BasisSystem b = make_haar_basis(1, 2);
  EXPECT_EQ(nonsparsity(CoefficientVector(b)), 0.0);

  CoefficientVector one_block(b);
  one_block[2] = 0.1;
  one_block[3] = -0.15;
  EXPECT_NEAR(nonsparsity(one_block), 0.5, 1e-15);

  const CoefficientVector two = two_level_example(b);
  const double expected = std::pow(std::pow(2.0, 0.25) + std::sqrt(2.0), 2.0);
  EXPECT_NEAR(nonsparsity(two), expected, 1e-13);
  EXPECT_NEAR(nonsparsity(two), 6.77780, 5e-6);
  EXPECT_NEAR(sqrt_nonsparsity(two), std::pow(2.0, 0.25) + std::sqrt(2.0), 1e-14);
}

TEST(Penalty, Examples) {
  const BasisSystem b = make_haar_basis(1, 2);
  PenaltyConfig cfg;
  cfg.lambda_n = 123.0;
  EXPECT_EQ(penalty(CoefficientVector(b), cfg), 0.0);

  CoefficientVector a(b);
  a[2] = 0.25;  // I = 0.5
  cfg.lambda_n = 0.1;
  EXPECT_NEAR(penalty(a, cfg), 0.1 * std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(penalty(a, cfg), 0.070711, 1e-6);

  PenaltyConfig bad;
  bad.lambda_n = -1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Penalty, ScalingCoefficientsByFourDoublesPenalty) {
  const BasisSystem b = make_haar_basis(2, 3);
  Rng rng(3);
  PenaltyConfig cfg;
  cfg.lambda_n = 0.7;
  for (int t = 0; t < 50; ++t) {
    const CoefficientVector a = random_coefficients(b, rng);
    const double p = penalty(a, cfg);
    EXPECT_NEAR(penalty(4.0 * a, cfg), 2.0 * p, 1e-12 * (1.0 + p));
  }
}

TEST(MAndN, Examples) {
  const BasisSystem b = make_haar_basis(1, 3);
  CoefficientVector a(b);
  EXPECT_EQ(m_of(a), 0);
  EXPECT_EQ(N_of(b, a), 0u);
  EXPECT_EQ(N_m(b, 0), 0u);

  a[b.block_offset(2)] = 1e-3;
  EXPECT_EQ(m_of(a), 2);
  EXPECT_EQ(N_of(b, a), 4u);

  a[b.block_offset(3) + 1] = -2.0;
  EXPECT_EQ(m_of(a), 3);
  EXPECT_EQ(N_of(b, a), b.total());
}

TEST(LambdaN, Examples) {
  const BasisSystem b = make_haar_basis(1, 3);
  ASSERT_DOUBLE_EQ(b.c_psi(), 2.0);
  const double l4 = std::pow(std::log(1024.0), 4.0);
  EXPECT_NEAR(l4, 2308.4, 0.1);
  EXPECT_NEAR(lambda_n(1024, b, 1.0, 1.0), std::sqrt(4.0 * l4 / 1024.0), 1e-12);
  EXPECT_NEAR(lambda_n(1024, b, 1.0, 1.0), 3.0029, 1e-4);
  EXPECT_EQ(lambda_n(1024, b, 1.0, 0.0), 0.0);
  EXPECT_THROW(lambda_n(1, b, 1.0, 1.0), std::invalid_argument);
}

TEST(LambdaN, ScalesLikeSqrtQ0AndLinearInC) {
  const BasisSystem b = make_haar_basis(2, 3);
  const double base = lambda_n(500, b, 1.0, 1.0);
  EXPECT_NEAR(lambda_n(500, b, 4.0, 1.0), 2.0 * base, 1e-12);
  EXPECT_NEAR(lambda_n(500, b, 1.0, 0.3), 0.3 * base, 1e-12);
}

TEST(VN, Examples) {
  const BasisSystem b = make_haar_basis(1, 3);
  TheoryConstants tc;
  EXPECT_EQ(V_n(0, b, tc, 0.5), 0.0);

  EXPECT_NEAR(c_d(1), 2.0 / std::pow(std::sqrt(2.0) - 1.0, 2.0), 1e-12);
  EXPECT_NEAR(c_d(1), 11.6569, 5e-5);
  EXPECT_NEAR(c_kappa(1.0), 0.5, 1e-15);

  tc.kappa = 1.0;
  tc.sigma_0 = 2.0;
  tc.q_0 = 1.5;
  const double lambda = 0.3;
  const std::size_t N = 6;
  const double expected = 8.0 * c_d(1) * tc.q_0 * 4.0 * tc.sigma_0 * lambda * lambda * N;
  EXPECT_NEAR(V_n(N, b, tc, lambda), expected, 1e-10 * expected);
}

TEST(VN, KappaTwoExponent) {
  const BasisSystem b = make_haar_basis(1, 3);
  TheoryConstants tc;
  tc.kappa = 2.0;
  tc.sigma_0 = 1.0;
  tc.q_0 = 1.0;
  // exponent kappa / (2 kappa - 1) = 2/3
  const double r = V_n(8, b, tc, 0.1) / V_n(1, b, tc, 0.1);
  EXPECT_NEAR(r, std::pow(8.0, 2.0 / 3.0), 1e-12);
  EXPECT_NEAR(c_kappa(2.0), 0.75 * std::pow(2.0, -1.0 / 3.0), 1e-15);
}

TEST(SplitLevels, Examples) {
  const BasisSystem b = make_haar_basis(1, 2);
  const CoefficientVector a = two_level_example(b);
  const double I = nonsparsity(a);

  const LevelSplit all = split_levels(a, 2);
  EXPECT_NEAR(all.I1, I, 1e-13);
  EXPECT_EQ(all.I2, 0.0);

  const LevelSplit none = split_levels(a, 0);
  EXPECT_EQ(none.I1, 0.0);
  EXPECT_NEAR(none.I2, I, 1e-13);

  const LevelSplit mid = split_levels(a, 1);
  EXPECT_NEAR(mid.sqrt_I1, std::pow(2.0, 0.25), 1e-15);
  EXPECT_NEAR(mid.sqrt_I2, std::sqrt(2.0), 1e-15);
}

TEST(PenaltyProperties, HomogeneitySubadditivityAndSplit) {
  for (int d = 1; d <= 2; ++d) {
    const BasisSystem b = make_haar_basis(d, 4);
    Rng rng(40 + d);
    for (int t = 0; t < 200; ++t) {
      const CoefficientVector a = random_coefficients(b, rng);
      const CoefficientVector c = random_coefficients(b, rng);
      const double sa = sqrt_nonsparsity(a);
      const double sc = sqrt_nonsparsity(c);
      const double scale = rng.uniform(-5.0, 5.0);
      EXPECT_NEAR(nonsparsity(scale * a), std::abs(scale) * nonsparsity(a), 1e-12 * (1.0 + nonsparsity(a)));
      EXPECT_LE(sqrt_nonsparsity(a + c), sa + sc + 1e-12);
      EXPECT_GE(nonsparsity(a), 0.0);
      const int m = static_cast<int>(rng.below(b.levels() + 1));
      const LevelSplit s = split_levels(a, m);
      EXPECT_NEAR(s.sqrt_I1 + s.sqrt_I2, sa, 1e-12 * (1.0 + sa));
    }
  }
}

TEST(PenaltyProperties, ZeroingEntriesNeverIncreases) {
  const BasisSystem b = make_haar_basis(2, 3);
  Rng rng(50);
  for (int t = 0; t < 100; ++t) {
    CoefficientVector a = random_coefficients(b, rng);
    double prev = nonsparsity(a);
    for (int k = 0; k < 5; ++k) {
      a[rng.below(a.size())] = 0.0;
      const double now = nonsparsity(a);
      EXPECT_LE(now, prev + 1e-15);
      prev = now;
    }
    EXPECT_LE(nonsparsity(a.truncated(1)), nonsparsity(a) + 1e-15);
  }
}

}  // namespace
}  // namespace sqrtpen
