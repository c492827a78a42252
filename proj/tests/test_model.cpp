#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "sqrtpen/basis.hpp"
#include "sqrtpen/io.hpp"
#include "sqrtpen/model.hpp"
#include "sqrtpen/risk.hpp"

namespace sqrtpen {
namespace {

TEST(ChannelModel, EtaValues) {
  const ModelSpec m = make_binary_channel_model(EdgeFunction::constant(1, 0.5), 0.75);
  const double s = 0.3;
  EXPECT_DOUBLE_EQ(m.eta(std::span<const double>(&s, 1), 0.2), 0.75);
  EXPECT_DOUBLE_EQ(m.eta(std::span<const double>(&s, 1), 0.9), 0.25);
  EXPECT_DOUBLE_EQ(m.sigma_0, 2.0);
  EXPECT_EQ(m.kappa, 1.0);

  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double p = rng.uniform(0.51, 0.99);
    const ModelSpec mp = make_binary_channel_model(sample_dyadic_edge(1, 2, i), p);
    const double u = rng.uniform();
    const double e = mp.eta(std::span<const double>(&u, 1), rng.uniform());
    EXPECT_TRUE(e == p || e == 1.0 - p);
  }
}

TEST(ChannelModel, RejectsBadInputs) {
  EXPECT_THROW(make_binary_channel_model(EdgeFunction::constant(1, 0.5), 0.5), std::invalid_argument);
  EXPECT_THROW(make_binary_channel_model(EdgeFunction::constant(1, 0.5), 1.0), std::invalid_argument);
  EXPECT_THROW(make_binary_channel_model(EdgeFunction::constant(1, 1.5), 0.75), std::invalid_argument);
}

TEST(ChannelModel, BayesSetIsTheEdgeSet) {
  const ModelSpec m = make_binary_channel_model(sample_dyadic_edge(2, 2, 3), 0.7);
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const double s[2] = {rng.uniform(), rng.uniform()};
    const double t = rng.uniform();
    EXPECT_EQ(m.eta(std::span<const double>(s, 2), t) > 0.5, clean_label(m, std::span<const double>(s, 2), t) == 1.0);
  }
}

TEST(ChannelModel, FlipFractionMatchesChannel) {
  const double p = 0.75;
  const ModelSpec m = make_binary_channel_model(sample_dyadic_edge(1, 3, 5), p);
  const std::size_t n = 100000;
  const Dataset data = sample_dataset(m, n, 6);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < n; ++i) flips += data.y(i) != clean_label(m, data.s(i), data.t(i));
  const double se = std::sqrt(p * (1.0 - p) / n);
  EXPECT_NEAR(static_cast<double>(flips) / n, 1.0 - p, 4.0 * se);
}

TEST(RegressionModel, NoiselessLabelsAreIndicators) {
  const ModelSpec m = make_regression_model(sample_dyadic_edge(1, 2, 7), NoiseSpec{});
  const Dataset data = sample_dataset(m, 1000, 8);
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(data.y(i), clean_label(m, data.s(i), data.t(i)));
}

TEST(RegressionModel, NoiseIsCenteredAndBounded) {
  const NoiseSpec two{NoiseSpec::Kind::kTwoPoint, 0.3};
  const ModelSpec m2 = make_regression_model(EdgeFunction::constant(1, 0.5), two);
  const double s = 0.5;
  EXPECT_DOUBLE_EQ(m2.eta(std::span<const double>(&s, 1), 0.2), 1.0);
  EXPECT_DOUBLE_EQ(m2.eta(std::span<const double>(&s, 1), 0.7), 0.0);
  EXPECT_NEAR(two.variance(), 0.09, 1e-15);

  const NoiseSpec uni{NoiseSpec::Kind::kUniform, 0.25};
  Rng rng(9);
  const std::size_t N = 100000;
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double x = uni.sample(rng);
    ASSERT_LE(std::abs(x), 0.25);
    sum += x;
  }
  EXPECT_NEAR(sum / N, 0.0, 4.0 * std::sqrt(uni.variance() / N));
}

TEST(MarginModel, ProfileValues) {
  const ModelSpec m1 = make_margin_model(EdgeFunction::constant(1, 0.5), 1.0, 0.1);
  const double s = 0.5;
  EXPECT_DOUBLE_EQ(m1.eta(std::span<const double>(&s, 1), 0.499), 1.0);
  EXPECT_DOUBLE_EQ(m1.eta(std::span<const double>(&s, 1), 0.501), 0.0);

  const ModelSpec m2 = make_margin_model(EdgeFunction::constant(1, 0.5), 2.0, 0.1);
  EXPECT_NEAR(m2.eta(std::span<const double>(&s, 1), 0.45), 0.75, 1e-12);
  EXPECT_NEAR(m2.eta(std::span<const double>(&s, 1), 0.55), 0.25, 1e-12);
  EXPECT_DOUBLE_EQ(m2.eta(std::span<const double>(&s, 1), 0.2), 1.0);
  EXPECT_THROW(make_margin_model(EdgeFunction::constant(1, 0.95), 2.0, 0.1), std::invalid_argument);
  EXPECT_THROW(make_margin_model(EdgeFunction::constant(1, 0.5), 0.5, 0.1), std::invalid_argument);
}

TEST(MarginModel, StripExcessMatchesNumericIntegral) {
  for (double kappa : {1.5, 2.0, 3.0}) {
    const double h = 0.2;
    const ModelSpec m = make_margin_model(EdgeFunction::constant(1, 0.5), kappa, h);
    for (double u : {0.01, 0.05, 0.13, 0.2}) {
      // midpoint rule for int_{f0}^{f0+u} |2 eta - 1| dt
      const int steps = 200000;
      double acc = 0.0;
      const double s = 0.3;
      for (int i = 0; i < steps; ++i) {
        const double t = 0.5 + (i + 0.5) * u / steps;
        acc += std::abs(2.0 * m.eta(std::span<const double>(&s, 1), t) - 1.0);
      }
      acc *= u / steps;
      const double closed = std::pow(u, kappa) / (kappa * std::pow(h, kappa - 1.0));
      EXPECT_NEAR(acc, closed, 1e-6 * closed + 1e-12);
      EXPECT_NEAR(excess_risk(m, EdgeFunction::constant(1, 0.5 + u)).value, closed, 1e-12);
      EXPECT_NEAR(excess_risk(m, EdgeFunction::constant(1, 0.5 - u)).value, closed, 1e-12);
    }
  }
}

TEST(SampleDataset, DeterministicCsv) {
  const ModelSpec m = make_binary_channel_model(sample_dyadic_edge(2, 2, 10), 0.8);
  std::ostringstream a;
  std::ostringstream b;
  write_dataset_csv(a, sample_dataset(m, 300, 11));
  write_dataset_csv(b, sample_dataset(m, 300, 11));
  EXPECT_EQ(a.str(), b.str());
  std::ostringstream c;
  write_dataset_csv(c, sample_dataset(m, 300, 12));
  EXPECT_NE(a.str(), c.str());
}

TEST(SampleDataset, FollowsPiecewiseDesign) {
  const DesignDensity design = DesignDensity::piecewise(DyadicTable(1, 1, {1.6, 0.8}));
  const ModelSpec m = make_binary_channel_model(EdgeFunction::constant(1, 0.5), 0.75, design);
  const std::size_t n = 50000;
  const Dataset data = sample_dataset(m, n, 13);
  std::size_t left = 0;
  for (std::size_t i = 0; i < n; ++i) left += data.s(i)[0] < 0.5;
  const double p_left = 1.6 / 2.4;
  EXPECT_NEAR(static_cast<double>(left) / n, p_left, 4.0 * std::sqrt(p_left * (1 - p_left) / n));
}

TEST(EdgeSamplers, DyadicEdges) {
  const EdgeFunction c = sample_dyadic_edge(1, 0, 14);
  ASSERT_TRUE(c.has_table());
  EXPECT_EQ(c.table().size(), 1u);
  for (int d = 1; d <= 2; ++d) {
    for (int level = 0; level <= 3; ++level) {
      const EdgeFunction f = sample_dyadic_edge(d, level, 15 + level);
      for (double v : f.table().values()) {
        EXPECT_GE(v, 0.2);
        EXPECT_LE(v, 0.8);
      }
      const BasisSystem b = make_haar_basis(d, 4);
      const CoefficientVector a = analyze(b, f).truncated(std::max(level, 1));
      EXPECT_LT(sup_distance(edge_from_coefficients(b, a), f), 1e-14);
      EXPECT_EQ(f.table().values()[0], sample_dyadic_edge(d, level, 15 + level).table().values()[0]);
    }
  }
}

TEST(EdgeSamplers, HolderTruncationDecays) {
  const EdgeFunction f = sample_holder_edge(1, 1.0, 1.0, 16);
  ASSERT_TRUE(f.has_table());
  for (double v : f.table().values()) {
    EXPECT_GE(v, 0.2);
    EXPECT_LE(v, 0.8);
  }
  const BasisSystem b = make_haar_basis(1, 10);
  const CoefficientVector a = analyze(b, f);
  double prev = 1.0;
  for (int m = 2; m <= 9; ++m) {
    const double err = sup_distance(edge_from_coefficients(b, a.truncated(m)), f);
    // level m resolves cells of side 2^{-(m-1)}; a Lipschitz edge is off by at most its slope times that
    EXPECT_LE(err, std::pow(2.0, -(m - 1)));
    EXPECT_LE(err, prev * 0.75) << "m=" << m;
    prev = err;
  }
}

TEST(FunctionClass, HolderRho) {
  EXPECT_DOUBLE_EQ(FunctionClassSpec::holder(1, 1.0, 1.0).rho, 1.0);
  EXPECT_DOUBLE_EQ(FunctionClassSpec::holder(2, 0.5, 1.0).rho, 4.0);
  EXPECT_TRUE(FunctionClassSpec::vc_class().vc());
}

}  // namespace
}  // namespace sqrtpen
