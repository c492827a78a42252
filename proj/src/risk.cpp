#include "sqrtpen/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sqrtpen/rng.hpp"

namespace sqrtpen {

double clip_unit(double v) { return std::clamp(v, 0.0, 1.0); }

double empirical_risk(const Dataset& data, const BasisSystem& basis, const CoefficientVector& alpha) {
  if (data.empty()) throw std::invalid_argument("empirical_risk: empty dataset");
  long double sum = 0.0L;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double pred = synthesize(basis, alpha, data.s(i)) >= data.t(i) ? 1.0 : 0.0;
    const double r = data.y(i) - pred;
    sum += r * r;
  }
  return static_cast<double>(sum / static_cast<long double>(data.size()));
}

double empirical_risk(const Dataset& data, const EdgeFunction& f) {
  if (data.empty()) throw std::invalid_argument("empirical_risk: empty dataset");
  long double sum = 0.0L;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double pred = f(data.s(i)) >= data.t(i) ? 1.0 : 0.0;
    const double r = data.y(i) - pred;
    sum += r * r;
  }
  return static_cast<double>(sum / static_cast<long double>(data.size()));
}

namespace {

// int_0^1 E[(Y - 1{t <= a})^2 | s, t] dt for edge value b = f0(s) and clipped
// classifier edge a, integrating eta through its primitive:
//   int_0^x phi(b - t) dt = Phi(|b|) - Phi(|b - x|).
double column_risk(const ModelSpec& model, double a, double b) {
  const MarginProfile& prof = model.profile;
  const double phi_b = prof.abs_primitive(std::abs(b));
  const double eta_total = 0.5 + 0.5 * (phi_b - prof.abs_primitive(std::abs(b - 1.0)));
  const double eta_below_a = 0.5 * a + 0.5 * (phi_b - prof.abs_primitive(std::abs(b - a)));
  return model.extra_variance() + eta_total - 2.0 * eta_below_a + a;
}

bool exact_path(const ModelSpec& model, const EdgeFunction& f) { return f.has_table() && model.f0.has_table(); }

// Sum over cells of vol * q * g(a, b), where a = clip f, b = f0 on the common grid.
template <class CellFn>
double integrate_cells(const ModelSpec& model, const EdgeFunction& f, CellFn&& g) {
  const int depth = std::max({f.table().depth(), model.f0.table().depth(), model.design.weights.depth()});
  const DyadicTable ft = f.table_at(depth);
  const DyadicTable bt = model.f0.table_at(depth);
  const DyadicTable wt = model.design.weights.refined(depth);
  long double acc = 0.0L;
  for (std::size_t c = 0; c < ft.size(); ++c) acc += wt[c] * g(clip_unit(ft[c]), bt[c]);
  return static_cast<double>(acc * ft.cell_volume());
}

template <class PointFn>
Estimate monte_carlo_over_s(const ModelSpec& model, const MonteCarloBudget& budget, PointFn&& g) {
  if (budget.draws < 2) throw std::invalid_argument("Monte Carlo budget needs at least 2 draws");
  Rng rng(budget.seed);
  const bool uniform = model.design.is_uniform();
  const double w_max = model.design.max_weight();
  std::vector<double> s(model.d);
  long double sum = 0.0L;
  long double sum2 = 0.0L;
  for (std::size_t i = 0; i < budget.draws; ++i) {
    for (;;) {
      for (double& x : s) x = rng.uniform();
      if (uniform || rng.uniform() * w_max < model.design.weights.value_at(s)) break;
    }
    const double v = g(s);
    sum += v;
    sum2 += static_cast<long double>(v) * v;
  }
  const long double n = static_cast<long double>(budget.draws);
  const long double mean = sum / n;
  const long double var = std::max(0.0L, (sum2 - n * mean * mean) / (n - 1));
  return Estimate{static_cast<double>(mean), static_cast<double>(std::sqrt(var / n)), false};
}

Estimate risk_functional(const ModelSpec& model, const EdgeFunction& f, std::optional<MonteCarloBudget> budget,
                         bool subtract_bayes) {
  if (exact_path(model, f)) {
    const double v = integrate_cells(model, f, [&](double a, double b) {
      const double r = column_risk(model, a, b);
      return subtract_bayes ? r - column_risk(model, clip_unit(b), b) : r;
    });
    return Estimate{v, 0.0, true};
  }
  if (!budget) {
    throw std::invalid_argument("population risk: no dyadic representation and no Monte Carlo budget");
  }
  return monte_carlo_over_s(model, *budget, [&](std::span<const double> s) {
    const double b = model.f0(s);
    const double r = column_risk(model, clip_unit(f(s)), b);
    return subtract_bayes ? r - column_risk(model, clip_unit(b), b) : r;
  });
}

}  // namespace

Estimate population_risk(const ModelSpec& model, const EdgeFunction& f, std::optional<MonteCarloBudget> budget) {
  return risk_functional(model, f, budget, false);
}

Estimate population_risk(const ModelSpec& model, const BasisSystem& basis, const CoefficientVector& alpha,
                         std::optional<MonteCarloBudget> budget) {
  return population_risk(model, edge_from_coefficients(basis, alpha), budget);
}

Estimate bayes_risk(const ModelSpec& model, std::optional<MonteCarloBudget> budget) {
  return population_risk(model, model.f0, budget);
}

Estimate excess_risk(const ModelSpec& model, const EdgeFunction& f, std::optional<MonteCarloBudget> budget) {
  return risk_functional(model, f, budget, true);
}

Estimate excess_risk(const ModelSpec& model, const BasisSystem& basis, const CoefficientVector& alpha,
                     std::optional<MonteCarloBudget> budget) {
  return excess_risk(model, edge_from_coefficients(basis, alpha), budget);
}

namespace {

template <class CellFn>
double integrate_pair(const EdgeFunction& f, const EdgeFunction& g, CellFn&& fn) {
  const int depth = common_depth(f.table(), g.table());
  const DyadicTable ft = f.table_at(depth);
  const DyadicTable gt = g.table_at(depth);
  long double acc = 0.0L;
  for (std::size_t c = 0; c < ft.size(); ++c) acc += fn(ft[c], gt[c]);
  return static_cast<double>(acc * ft.cell_volume());
}

template <class PointFn>
Estimate uniform_monte_carlo(int d, const MonteCarloBudget& budget, PointFn&& fn) {
  if (budget.draws < 2) throw std::invalid_argument("Monte Carlo budget needs at least 2 draws");
  Rng rng(budget.seed);
  std::vector<double> s(d);
  long double sum = 0.0L;
  long double sum2 = 0.0L;
  for (std::size_t i = 0; i < budget.draws; ++i) {
    for (double& x : s) x = rng.uniform();
    const double v = fn(s);
    sum += v;
    sum2 += static_cast<long double>(v) * v;
  }
  const long double n = static_cast<long double>(budget.draws);
  const long double mean = sum / n;
  const long double var = std::max(0.0L, (sum2 - n * mean * mean) / (n - 1));
  return Estimate{static_cast<double>(mean), static_cast<double>(std::sqrt(var / n)), false};
}

}  // namespace

Estimate sym_diff_measure(const EdgeFunction& f, const EdgeFunction& g, std::optional<MonteCarloBudget> budget) {
  if (f.d() != g.d()) throw std::invalid_argument("sym_diff_measure: dimension mismatch");
  if (f.has_table() && g.has_table()) {
    return Estimate{integrate_pair(f, g, [](double a, double b) { return std::abs(clip_unit(a) - clip_unit(b)); }),
                    0.0, true};
  }
  if (!budget) throw std::invalid_argument("sym_diff_measure: no dyadic representation and no Monte Carlo budget");
  return uniform_monte_carlo(f.d(), *budget,
                             [&](std::span<const double> s) { return std::abs(clip_unit(f(s)) - clip_unit(g(s))); });
}

Estimate l1_norm(const EdgeFunction& f, std::optional<MonteCarloBudget> budget) {
  if (f.has_table()) {
    long double acc = 0.0L;
    for (double v : f.table().values()) acc += std::abs(v);
    return Estimate{static_cast<double>(acc * f.table().cell_volume()), 0.0, true};
  }
  if (!budget) throw std::invalid_argument("l1_norm: no dyadic representation and no Monte Carlo budget");
  return uniform_monte_carlo(f.d(), *budget, [&](std::span<const double> s) { return std::abs(f(s)); });
}

double q_measure_sym_diff(const ModelSpec& model, const EdgeFunction& f, const EdgeFunction& g) {
  model.design.check_bounds();
  const int depth = std::max({f.table().depth(), g.table().depth(), model.design.weights.depth()});
  const DyadicTable ft = f.table_at(depth);
  const DyadicTable gt = g.table_at(depth);
  const DyadicTable wt = model.design.weights.refined(depth);
  long double acc = 0.0L;
  for (std::size_t c = 0; c < ft.size(); ++c) acc += wt[c] * std::abs(clip_unit(ft[c]) - clip_unit(gt[c]));
  return static_cast<double>(acc * ft.cell_volume());
}

double sup_distance(const EdgeFunction& f, const EdgeFunction& g) {
  const int depth = common_depth(f.table(), g.table());
  const DyadicTable ft = f.table_at(depth);
  const DyadicTable gt = g.table_at(depth);
  double m = 0.0;
  for (std::size_t c = 0; c < ft.size(); ++c) m = std::max(m, std::abs(ft[c] - gt[c]));
  return m;
}

}  // namespace sqrtpen
