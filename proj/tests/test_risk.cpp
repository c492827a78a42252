#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "sqrtpen/basis.hpp"
#include "sqrtpen/model.hpp"
#include "sqrtpen/risk.hpp"
#include "sqrtpen/theory.hpp"

namespace sqrtpen {
namespace {

Dataset three_point_toy(double third_label) {
  Dataset data(1);
  const double s[3] = {0.2, 0.6, 0.9};
  data.push_back(std::span<const double>(&s[0], 1), 0.3, 1.0);
  data.push_back(std::span<const double>(&s[1], 1), 0.7, 0.0);
  data.push_back(std::span<const double>(&s[2], 1), 0.1, third_label);
  return data;
}

EdgeFunction untabulated(int d, double value) {
  return EdgeFunction(d, [value](std::span<const double>) { return value; });
}

TEST(EmpiricalRisk, Examples) {
  const EdgeFunction half = EdgeFunction::constant(1, 0.5);
  EXPECT_EQ(empirical_risk(three_point_toy(1.0), half), 0.0);
  EXPECT_DOUBLE_EQ(empirical_risk(three_point_toy(0.0), half), 1.0 / 3.0);

  Dataset ones(1);
  for (int i = 0; i < 5; ++i) {
    const double s = 0.1 * i;
    ones.push_back(std::span<const double>(&s, 1), 0.2 + 0.1 * i, 1.0);
  }
  EXPECT_EQ(empirical_risk(ones, EdgeFunction::constant(1, -1.0)), 1.0);
  EXPECT_THROW(empirical_risk(Dataset(1), half), std::invalid_argument);
}

TEST(EmpiricalRisk, CoefficientAndEdgePathsAgree) {
  const BasisSystem b = make_haar_basis(1, 3);
  CoefficientVector a(b);
  a[0] = 0.5;
  EXPECT_EQ(empirical_risk(three_point_toy(0.0), b, a), empirical_risk(three_point_toy(0.0), EdgeFunction::constant(1, 0.5)));
}

TEST(PopulationRisk, ChannelExamples) {
  const ModelSpec m = make_binary_channel_model(EdgeFunction::constant(1, 0.5), 0.75);
  EXPECT_NEAR(population_risk(m, m.f0).value, 0.25, 1e-15);
  EXPECT_NEAR(bayes_risk(m).value, 0.25, 1e-15);
  EXPECT_NEAR(population_risk(m, EdgeFunction::constant(1, 0.6)).value, 0.30, 1e-15);
  EXPECT_NEAR(excess_risk(m, EdgeFunction::constant(1, 0.6)).value, 0.05, 1e-15);
  EXPECT_TRUE(population_risk(m, m.f0).exact);
}

TEST(PopulationRisk, NoiselessWholeCubeIsZero) {
  const ModelSpec m = make_regression_model(EdgeFunction::constant(2, 1.0), NoiseSpec{});
  EXPECT_NEAR(population_risk(m, EdgeFunction::constant(2, 1.0)).value, 0.0, 1e-15);
  EXPECT_NEAR(population_risk(m, EdgeFunction::constant(2, 3.0)).value, 0.0, 1e-15);
}

TEST(PopulationRisk, RegressionAddsNoiseVariance) {
  const ModelSpec m = make_regression_model(EdgeFunction::constant(1, 0.4), NoiseSpec{NoiseSpec::Kind::kUniform, 0.25});
  const double var = 0.25 * 0.25 / 3.0;
  EXPECT_NEAR(m.noise.variance(), var, 1e-15);
  EXPECT_NEAR(population_risk(m, EdgeFunction::constant(1, 0.7)).value, var + 0.3, 1e-14);
  EXPECT_NEAR(excess_risk(m, EdgeFunction::constant(1, 0.7)).value, 0.3, 1e-14);
}

TEST(ExcessRisk, ReproducingTruthIsZero) {
  const BasisSystem b = make_haar_basis(1, 4);
  const ModelSpec m = make_binary_channel_model(sample_dyadic_edge(1, 3, 5), 0.8);
  EXPECT_NEAR(excess_risk(m, b, analyze(b, m.f0)).value, 0.0, 1e-14);
}

TEST(ExcessRisk, NonnegativeOnRandomAlpha) {
  const BasisSystem b = make_haar_basis(2, 3);
  const ModelSpec m = make_margin_model(sample_dyadic_edge(2, 2, 6), 2.0, 0.1);
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const CoefficientVector a = analyze(b, m.f0) + 0.05 * random_coefficients(b, rng);
    const Estimate e = excess_risk(m, b, a);
    EXPECT_GE(e.value, -1e-12 - 3.0 * e.std_error);
  }
}

TEST(SymDiff, Examples) {
  const EdgeFunction a = EdgeFunction::constant(1, 0.5);
  EXPECT_NEAR(sym_diff_measure(a, EdgeFunction::constant(1, 0.6)).value, 0.1, 1e-15);
  EXPECT_EQ(sym_diff_measure(a, a).value, 0.0);
  EXPECT_NEAR(sym_diff_measure(EdgeFunction::constant(1, 1.2), a).value, 0.5, 1e-15);
}

TEST(L1Norm, Examples) {
  EXPECT_EQ(l1_norm(EdgeFunction::constant(1, 0.0)).value, 0.0);
  EXPECT_NEAR(l1_norm(EdgeFunction::constant(1, -0.3)).value, 0.3, 1e-15);
  const BasisSystem b = make_haar_basis(1, 2);
  CoefficientVector w(b);
  w[1] = 1.0;
  EXPECT_NEAR(l1_norm(edge_from_coefficients(b, w)).value, 1.0, 1e-15);
}

TEST(QMeasure, UniformMatchesSymDiff) {
  const ModelSpec m = make_binary_channel_model(EdgeFunction::constant(1, 0.5), 0.75);
  const EdgeFunction f = sample_dyadic_edge(1, 3, 8);
  const EdgeFunction g = sample_dyadic_edge(1, 4, 9);
  EXPECT_NEAR(q_measure_sym_diff(m, f, g), sym_diff_measure(f, g).value, 1e-15);
  EXPECT_EQ(q_measure_sym_diff(m, f, f), 0.0);
}

TEST(QMeasure, PiecewiseDensityOnDifferenceRegion) {
  const DesignDensity design = DesignDensity::piecewise(DyadicTable(1, 2, {1.2, 2.8 / 3, 2.8 / 3, 2.8 / 3}));
  EXPECT_NEAR(design.q_0, 1.2, 1e-15);
  const ModelSpec m = make_binary_channel_model(EdgeFunction::constant(1, 0.5), 0.75, design);
  const EdgeFunction f = EdgeFunction::constant(1, 0.5);
  const EdgeFunction g = EdgeFunction::from_table(DyadicTable(1, 2, {0.9, 0.5, 0.5, 0.5}));
  EXPECT_NEAR(sym_diff_measure(f, g).value, 0.1, 1e-15);
  EXPECT_NEAR(q_measure_sym_diff(m, f, g), 0.1 * design.q_0, 1e-15);
}

TEST(QMeasure, RejectsDensityOutsideBounds) {
  ModelSpec m = make_binary_channel_model(EdgeFunction::constant(1, 0.5), 0.75);
  m.design = DesignDensity{DyadicTable(1, 1, {1.5, 0.5}), 1.5};
  EXPECT_THROW(q_measure_sym_diff(m, m.f0, m.f0), std::domain_error);
}

TEST(RiskProperties, ChannelIdentityOnRandomAlpha) {
  for (int d = 1; d <= 2; ++d) {
    const BasisSystem b = make_haar_basis(d, 3);
    const ModelSpec m = make_binary_channel_model(sample_dyadic_edge(d, 2, 10 + d), 0.75);
    Rng rng(20 + d);
    for (int t = 0; t < 100; ++t) {
      const CoefficientVector a = analyze(b, m.f0) + 0.3 * random_coefficients(b, rng);
      const EdgeFunction f = edge_from_coefficients(b, a);
      EXPECT_NEAR(excess_risk(m, f).value, 0.5 * sym_diff_measure(f, m.f0).value, 1e-10);
    }
  }
}

TEST(RiskProperties, TriangleInequalityAndQBounds) {
  const BasisSystem b = make_haar_basis(1, 4);
  const DesignDensity design = DesignDensity::piecewise(DyadicTable(1, 2, {1.5, 0.8, 1.0, 0.7}));
  const ModelSpec m = make_binary_channel_model(EdgeFunction::constant(1, 0.5), 0.75, design);
  Rng rng(30);
  for (int t = 0; t < 100; ++t) {
    const EdgeFunction f = edge_from_coefficients(b, random_coefficients(b, rng));
    const EdgeFunction g = edge_from_coefficients(b, random_coefficients(b, rng));
    const EdgeFunction h = edge_from_coefficients(b, random_coefficients(b, rng));
    const double fg = sym_diff_measure(f, g).value;
    EXPECT_LE(fg, sym_diff_measure(f, h).value + sym_diff_measure(h, g).value + 1e-14);
    const double q = q_measure_sym_diff(m, f, g);
    EXPECT_LE(q, design.q_0 * fg + 1e-14);
    EXPECT_GE(q, fg / design.q_0 - 1e-14);
  }
}

TEST(RiskProperties, EmpiricalRiskIsUnbiased) {
  const BasisSystem b = make_haar_basis(1, 3);
  const ModelSpec m = make_binary_channel_model(sample_dyadic_edge(1, 2, 31), 0.75);
  Rng rng(32);
  const CoefficientVector a = analyze(b, m.f0) + 0.2 * random_coefficients(b, rng);
  const double R = population_risk(m, b, a).value;
  const int reps = 200;
  const std::size_t n = 500;
  double mean = 0.0;
  for (int r = 0; r < reps; ++r) mean += empirical_risk(sample_dataset(m, n, mix_seed(33, r)), b, a);
  mean /= reps;
  const double se = std::sqrt(R * (1.0 - R) / (n * reps));
  EXPECT_NEAR(mean, R, 4.0 * se);
}

TEST(MonteCarlo, FallbackMatchesExactAndNeedsBudget) {
  const ModelSpec m = make_binary_channel_model(EdgeFunction::constant(1, 0.5), 0.75);
  const EdgeFunction f = untabulated(1, 0.6);
  EXPECT_THROW(population_risk(m, f), std::invalid_argument);
  EXPECT_THROW(l1_norm(f), std::invalid_argument);
  const Estimate est = population_risk(m, f, MonteCarloBudget{20000, 1});
  EXPECT_FALSE(est.exact);
  EXPECT_NEAR(est.value, 0.30, 1e-12 + 4.0 * est.std_error);

  const EdgeFunction wave(1, [](std::span<const double> s) { return 0.5 + 0.3 * std::sin(6.0 * s[0]); });
  const Estimate l1 = l1_norm(wave, MonteCarloBudget{50000, 2});
  const double exact = 0.5 + 0.3 * (1.0 - std::cos(6.0)) / 6.0;
  EXPECT_NEAR(l1.value, exact, 4.0 * l1.std_error + 1e-12);
  const Estimate sd = sym_diff_measure(wave, EdgeFunction::constant(1, 0.5), MonteCarloBudget{50000, 3});
  // int_0^1 |0.3 sin 6s| ds = 0.05 (3 + cos 6)
  EXPECT_NEAR(sd.value, 0.05 * (3.0 + std::cos(6.0)), 4.0 * sd.std_error + 1e-12);
  EXPECT_GT(sd.std_error, 0.0);
}

}  // namespace
}  // namespace sqrtpen
