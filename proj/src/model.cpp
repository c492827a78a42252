#include "sqrtpen/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace sqrtpen {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBinaryChannel:
      return "channel";
    case ModelKind::kRegression:
      return "regression";
    case ModelKind::kMargin:
      return "margin";
  }
  return "unknown";
}

double MarginProfile::phi(double v) const {
  const double sign = v >= 0.0 ? 1.0 : -1.0;
  if (shape == Shape::kJump) return sign * jump;
  const double a = std::abs(v);
  if (a >= h) return sign;
  return sign * std::pow(a / h, kappa - 1.0);
}

double MarginProfile::abs_primitive(double u) const {
  u = std::abs(u);
  if (shape == Shape::kJump) return jump * u;
  if (u <= h) return std::pow(u, kappa) / (kappa * std::pow(h, kappa - 1.0));
  return h / kappa + (u - h);
}

DesignDensity DesignDensity::uniform(int d) { return DesignDensity{DyadicTable::constant(d, 1.0), 1.0}; }

DesignDensity DesignDensity::piecewise(DyadicTable weights) {
  long double sum = 0.0L;
  for (double w : weights.values()) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("design density: weights must be positive");
    sum += w;
  }
  const double mean = static_cast<double>(sum / static_cast<long double>(weights.size()));
  for (double& w : weights.values()) w /= mean;
  DesignDensity out{std::move(weights), 1.0};
  out.q_0 = std::max(out.max_weight(), 1.0 / out.min_weight());
  return out;
}

bool DesignDensity::is_uniform() const {
  return std::all_of(weights.values().begin(), weights.values().end(), [](double w) { return w == 1.0; });
}

double DesignDensity::max_weight() const {
  return *std::max_element(weights.values().begin(), weights.values().end());
}

double DesignDensity::min_weight() const {
  return *std::min_element(weights.values().begin(), weights.values().end());
}

void DesignDensity::check_bounds() const {
  constexpr double kTol = 1e-12;
  if (!(q_0 >= 1.0)) throw std::domain_error("design density: q_0 must be >= 1");
  if (max_weight() > q_0 * (1 + kTol) || min_weight() < (1 - kTol) / q_0) {
    throw std::domain_error(fmt::format("design density outside [1/q_0, q_0] with q_0 = {}", q_0));
  }
}

double NoiseSpec::variance() const {
  switch (kind) {
    case Kind::kNone:
      return 0.0;
    case Kind::kUniform:
      return bound * bound / 3.0;
    case Kind::kTwoPoint:
      return bound * bound;
  }
  return 0.0;
}

double NoiseSpec::sample(Rng& rng) const {
  switch (kind) {
    case Kind::kNone:
      return 0.0;
    case Kind::kUniform:
      return rng.uniform(-bound, bound);
    case Kind::kTwoPoint:
      return rng.bernoulli(0.5) ? bound : -bound;
  }
  return 0.0;
}

double ModelSpec::eta_from_edge(double b, double t) const { return 0.5 + 0.5 * profile.phi(b - t); }

double ModelSpec::eta(std::span<const double> s, double t) const { return eta_from_edge(f0(s), t); }

double ModelSpec::extra_variance() const { return kind == ModelKind::kRegression ? noise.variance() : 0.0; }

TheoryConstants ModelSpec::constants() const { return TheoryConstants{kappa, sigma_0, design.q_0}; }

namespace {

// min and max of an edge over its table, or over a midpoint grid when untabulated.
std::pair<double, double> edge_range(const EdgeFunction& f) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (f.has_table()) {
    for (double v : f.table().values()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return {lo, hi};
  }
  const DyadicTable grid(f.d(), std::max(1, 12 / f.d()));
  std::vector<double> mid(f.d());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    grid.midpoint(c, mid);
    const double v = f(mid);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace

ModelSpec make_binary_channel_model(EdgeFunction f0, double p, DesignDensity design) {
  if (!(p > 0.5 && p < 1.0)) throw std::invalid_argument(fmt::format("channel model: need 1/2 < p < 1, got {}", p));
  const auto [lo, hi] = edge_range(f0);
  if (lo < 0.0 || hi > 1.0) throw std::invalid_argument("channel model: f0 must map into [0, 1]");
  if (design.weights.d() != f0.d()) throw std::invalid_argument("channel model: design dimension mismatch");
  design.check_bounds();
  ModelSpec m;
  m.kind = ModelKind::kBinaryChannel;
  m.d = f0.d();
  m.f0 = std::move(f0);
  m.profile = MarginProfile{MarginProfile::Shape::kJump, 2.0 * p - 1.0, 1.0, 1.0};
  m.design = std::move(design);
  m.kappa = 1.0;
  m.sigma_0 = 1.0 / (2.0 * p - 1.0);
  m.p = p;
  return m;
}

ModelSpec make_binary_channel_model(EdgeFunction f0, double p) {
  const int d = f0.d();
  return make_binary_channel_model(std::move(f0), p, DesignDensity::uniform(d));
}

ModelSpec make_regression_model(EdgeFunction f0, NoiseSpec noise) {
  if (!(noise.bound >= 0.0) || !std::isfinite(noise.bound)) {
    throw std::invalid_argument("regression model: noise must have a finite bound");
  }
  if (noise.kind != NoiseSpec::Kind::kNone && noise.bound == 0.0) noise.kind = NoiseSpec::Kind::kNone;
  ModelSpec m;
  m.kind = ModelKind::kRegression;
  m.d = f0.d();
  m.design = DesignDensity::uniform(f0.d());
  m.f0 = std::move(f0);
  m.profile = MarginProfile{MarginProfile::Shape::kJump, 1.0, 1.0, 1.0};
  m.kappa = 1.0;
  m.sigma_0 = 1.0;
  m.noise = noise;
  return m;
}

ModelSpec make_margin_model(EdgeFunction f0, double kappa, double h) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("margin model: kappa must be >= 1");
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("margin model: plateau width h must lie in (0, 1]");
  const auto [lo, hi] = edge_range(f0);
  if (lo < h || hi > 1.0 - h) {
    throw std::invalid_argument(
        fmt::format("margin model: f0 range [{}, {}] is within h = {} of the t-boundary", lo, hi, h));
  }
  ModelSpec m;
  m.kind = ModelKind::kMargin;
  m.d = f0.d();
  m.design = DesignDensity::uniform(f0.d());
  m.f0 = std::move(f0);
  if (kappa == 1.0) {
    m.profile = MarginProfile{MarginProfile::Shape::kJump, 1.0, 1.0, h};
  } else {
    m.profile = MarginProfile{MarginProfile::Shape::kRamp, 1.0, kappa, h};
  }
  m.kappa = kappa;
  const double lower = kappa * std::pow(h, kappa - 1.0);
  m.sigma_0 = std::max(lower, 1.0 / lower);
  m.h = h;
  return m;
}

double clean_label(const ModelSpec& model, std::span<const double> s, double t) {
  return model.f0(s) >= t ? 1.0 : 0.0;
}

Dataset sample_dataset(const ModelSpec& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_dataset: n must be >= 1");
  Rng rng(seed);
  Dataset data(model.d);
  data.reserve(n);
  const bool uniform = model.design.is_uniform();
  const double w_max = model.design.max_weight();
  std::vector<double> s(model.d);
  for (std::size_t i = 0; i < n; ++i) {
    double t = 0.0;
    for (;;) {
      for (double& x : s) x = rng.uniform();
      t = rng.uniform();
      if (uniform || rng.uniform() * w_max < model.design.weights.value_at(s)) break;
    }
    const double b = model.f0(s);
    double y = 0.0;
    if (model.binary_labels()) {
      y = rng.bernoulli(model.eta_from_edge(b, t)) ? 1.0 : 0.0;
    } else {
      y = (b >= t ? 1.0 : 0.0) + model.noise.sample(rng);
    }
    data.push_back(s, t, y);
  }
  DatasetMeta& meta = data.meta();
  meta.model_kind = to_string(model.kind);
  meta.seed = seed;
  meta.params["n"] = static_cast<double>(n);
  meta.params["d"] = model.d;
  meta.params["kappa"] = model.kappa;
  meta.params["sigma_0"] = model.sigma_0;
  meta.params["q_0"] = model.design.q_0;
  if (model.kind == ModelKind::kBinaryChannel) meta.params["p"] = model.p;
  if (model.kind == ModelKind::kMargin) meta.params["h"] = model.h;
  if (model.kind == ModelKind::kRegression) meta.params["noise_bound"] = model.noise.bound;
  return data;
}

EdgeFunction sample_dyadic_edge(int d, int level, std::uint64_t seed) {
  if (level < 0) throw std::invalid_argument("sample_dyadic_edge: level must be >= 0");
  DyadicTable table(d, level);
  Rng rng(seed);
  for (double& v : table.values()) v = rng.uniform(0.2, 0.8);
  return EdgeFunction::from_table(std::move(table));
}

namespace {

struct CosineMode {
  std::vector<double> freq;  // angular frequency per axis
  double amplitude;
  double phase;
};

}  // namespace

EdgeFunction sample_holder_edge(int d, double gamma, double c_hold, std::uint64_t seed,
                                std::optional<int> table_depth) {
  if (d < 1) throw std::invalid_argument("sample_holder_edge: d must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("sample_holder_edge: gamma must be > 0");
  if (!(c_hold > 0.0)) throw std::invalid_argument("sample_holder_edge: c_hold must be > 0");
  const int depth = table_depth.value_or(std::max(1, 14 / d));
  Rng rng(seed);
  std::vector<CosineMode> modes;
  if (gamma >= 1.0) {
    constexpr int kModes = 6;
    double amp_sum = 0.0;
    double grad_sum = 0.0;
    for (int m = 0; m < kModes; ++m) {
      CosineMode mode{std::vector<double>(d), rng.normal(), rng.uniform(0.0, 2.0 * M_PI)};
      double norm2 = 0.0;
      for (double& f : mode.freq) {
        f = M_PI * static_cast<double>(1 + rng.below(4));
        norm2 += f * f;
      }
      amp_sum += std::abs(mode.amplitude);
      grad_sum += std::abs(mode.amplitude) * std::sqrt(norm2);
      modes.push_back(std::move(mode));
    }
    const double scale = std::min(0.3 / amp_sum, c_hold / grad_sum);
    for (auto& mode : modes) mode.amplitude *= scale;
  } else {
    constexpr int kOctaves = 24;
    double amp_sum = 0.0;
    for (int j = 0; j < kOctaves; ++j) {
      CosineMode mode{std::vector<double>(d), std::pow(2.0, -gamma * j),
                      rng.uniform(0.0, 2.0 * M_PI)};
      for (double& f : mode.freq) f = M_PI * std::ldexp(1.0, j) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
      amp_sum += mode.amplitude;
      modes.push_back(std::move(mode));
    }
    const double scale = 0.3 / amp_sum * std::min(1.0, c_hold);
    for (auto& mode : modes) mode.amplitude *= scale;
  }
  auto shared = std::make_shared<const std::vector<CosineMode>>(std::move(modes));
  auto eval = [shared](std::span<const double> s) {
    double v = 0.5;
    for (const auto& mode : *shared) {
      double arg = mode.phase;
      for (std::size_t i = 0; i < mode.freq.size(); ++i) arg += mode.freq[i] * s[i];
      v += mode.amplitude * std::cos(arg);
    }
    return v;
  };
  DyadicTable table(d, depth);
  std::vector<double> mid(d);
  for (std::size_t c = 0; c < table.size(); ++c) {
    table.midpoint(c, mid);
    table[c] = eval(mid);
  }
  return EdgeFunction(d, std::move(eval), std::move(table));
}

FunctionClassSpec FunctionClassSpec::holder(int d, double gamma, double c_0) {
  if (!(gamma > 0.0) || !(c_0 > 0.0)) throw std::invalid_argument("function class: need gamma > 0, c_0 > 0");
  return FunctionClassSpec{static_cast<double>(d) / gamma, c_0, gamma};
}

FunctionClassSpec FunctionClassSpec::vc_class() { return FunctionClassSpec{0.0, 1.0, 0.0}; }

}  // namespace sqrtpen
