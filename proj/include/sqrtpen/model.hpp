#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "sqrtpen/dataset.hpp"
#include "sqrtpen/dyadic.hpp"
#include "sqrtpen/penalty.hpp"
#include "sqrtpen/rng.hpp"

namespace sqrtpen {

enum class ModelKind { kBinaryChannel, kRegression, kMargin };

std::string to_string(ModelKind kind);

/// Shape of eta across the edge: eta(s, t) = 1/2 + phi(f0(s) - t) / 2 with phi odd.
///   jump:  phi(v) = jump * sgn(v), sgn(0) = +1
///   ramp:  phi(v) = sgn(v) min(1, (|v| / h)^{kappa - 1})
struct MarginProfile {
  enum class Shape { kJump, kRamp };
  Shape shape = Shape::kJump;
  double jump = 1.0;
  double kappa = 1.0;
  double h = 1.0;

  double phi(double v) const;
  /// Phi(u) = int_0^u |phi(v)| dv for u >= 0; int_0^x phi = Phi(|x|) for any x.
  double abs_primitive(double u) const;
};

/// Design density q(s, t) = w(s) with w piecewise constant on a dyadic grid,
/// mean 1, and 1/q_0 <= w <= q_0.
struct DesignDensity {
  DyadicTable weights;
  double q_0 = 1.0;

  static DesignDensity uniform(int d);
  /// Normalizes `weights` to mean 1 and sets q_0 to the tightest bound.
  static DesignDensity piecewise(DyadicTable weights);

  bool is_uniform() const;
  double max_weight() const;
  double min_weight() const;
  /// Throws std::domain_error when some weight lies outside [1/q_0, q_0].
  void check_bounds() const;
};

/// Zero-mean bounded noise for the additive regression model.
struct NoiseSpec {
  enum class Kind { kNone, kUniform, kTwoPoint };
  Kind kind = Kind::kNone;
  double bound = 0.0;

  double variance() const;
  double sample(Rng& rng) const;
};

/// Joint law of (X, Y) with boundary-fragment Bayes set {f0(s) >= t}.
struct ModelSpec {
  ModelKind kind = ModelKind::kBinaryChannel;
  int d = 1;
  EdgeFunction f0;
  MarginProfile profile;
  DesignDensity design;
  double kappa = 1.0;    // declared margin exponent
  double sigma_0 = 1.0;  // declared margin constant
  double p = 1.0;        // channel fidelity (channel model)
  double h = 1.0;        // ramp half-width (margin model)
  NoiseSpec noise;       // regression model

  /// E[Y | X = (s, t)].
  double eta(std::span<const double> s, double t) const;
  /// eta given the edge value b = f0(s).
  double eta_from_edge(double b, double t) const;
  /// Var(Y | X) - eta (1 - eta): the additive noise variance for regression, 0 otherwise.
  double extra_variance() const;
  bool binary_labels() const { return kind != ModelKind::kRegression; }
  TheoryConstants constants() const;
};

/// eta = p on G0 and 1 - p off it; kappa = 1, sigma_0 = 1/(2p - 1).
ModelSpec make_binary_channel_model(EdgeFunction f0, double p, DesignDensity design);
ModelSpec make_binary_channel_model(EdgeFunction f0, double p);

/// Y = 1_{G0}(X) + xi with bounded zero-mean xi; kappa = 1, sigma_0 = 1.
ModelSpec make_regression_model(EdgeFunction f0, NoiseSpec noise);

/// eta(s, t) = 1/2 + 1/2 sgn(f0(s) - t) min(1, (|f0(s) - t| / h)^{kappa - 1}).
/// Declared sigma_0 = max(kappa h^{kappa-1}, 1/(kappa h^{kappa-1})): the first
/// term gives the lower margin bound, the second the upper one.
ModelSpec make_margin_model(EdgeFunction f0, double kappa, double h);

/// X ~ q (inverse transform for uniform q, rejection otherwise), then Y | X.
Dataset sample_dataset(const ModelSpec& model, std::size_t n, std::uint64_t seed);

/// Clean label 1{f0(s) >= t}.
double clean_label(const ModelSpec& model, std::span<const double> s, double t);

/// Random piecewise-constant edge on the level-m dyadic grid, values in [0.2, 0.8].
EdgeFunction sample_dyadic_edge(int d, int level, std::uint64_t seed);

/// Random edge of regularity gamma mapped into [0.2, 0.8], tabulated at its
/// cell midpoints on a grid of `table_depth` (default 14/d, at least 1).
/// gamma >= 1: a few low-frequency cosine modes with gradient bound c_hold.
/// gamma < 1: a lacunary cosine series with amplitudes 2^{-j gamma}.
EdgeFunction sample_holder_edge(int d, double gamma, double c_hold, std::uint64_t seed,
                                std::optional<int> table_depth = std::nullopt);

/// Parameters of a complexity class F_rho (rho = 0 tags the VC case).
struct FunctionClassSpec {
  double rho = 0.0;
  double c_0 = 1.0;
  double gamma = 1.0;

  bool vc() const { return rho == 0.0; }
  static FunctionClassSpec holder(int d, double gamma, double c_0);
  static FunctionClassSpec vc_class();
};

}  // namespace sqrtpen
