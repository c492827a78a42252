#include "sqrtpen/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "sqrtpen/penalty.hpp"
#include "sqrtpen/risk.hpp"
#include "sqrtpen/rng.hpp"

namespace sqrtpen {

PredictedExponents predicted_exponents(double kappa, double rho) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("predicted_exponents: kappa must be >= 1");
  if (!(rho >= 0.0)) throw std::invalid_argument("predicted_exponents: rho must be >= 0");
  const double denom = 2.0 * kappa + rho - 1.0;
  return {kappa / denom, 1.0 / denom};
}

double rate_abscissa(double n, bool log_factor) {
  const double ln = std::log(n);
  return log_factor ? ln - 4.0 * std::log(ln) : ln;
}

SlopeFit fit_slope(std::span<const double> n, std::span<const double> error, bool log_factor) {
  if (n.size() != error.size()) throw std::invalid_argument("fit_slope: size mismatch");
  if (n.size() < 3) throw std::invalid_argument("fit_slope: need at least 3 points");
  const std::size_t m = n.size();
  std::vector<double> x(m);
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(error[i] > 0.0)) throw std::invalid_argument(fmt::format("fit_slope: nonpositive error {}", error[i]));
    if (!(n[i] > 1.0)) throw std::invalid_argument("fit_slope: n must exceed 1");
    x[i] = rate_abscissa(n[i], log_factor);
    y[i] = std::log(error[i]);
  }
  long double mx = 0.0L;
  long double my = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  long double sxx = 0.0L;
  long double sxy = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0L) throw std::invalid_argument("fit_slope: abscissae are all equal");
  SlopeFit fit;
  fit.slope = static_cast<double>(sxy / sxx);
  fit.intercept = static_cast<double>(my - sxy / sxx * mx);
  long double rss = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    const long double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += r * r;
  }
  const long double s2 = m > 2 ? rss / (m - 2) : 0.0L;
  fit.slope_se = static_cast<double>(std::sqrt(s2 / sxx));
  fit.intercept_se = static_cast<double>(std::sqrt(s2 * (1.0L / m + mx * mx / sxx)));
  return fit;
}

void RateStudyConfig::validate() const {
  if (n_grid.size() < 4) throw std::invalid_argument("rate study: n grid needs at least 4 points");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("rate study: n grid must be strictly increasing");
  }
  if (n_grid.front() < 2 || n_grid.back() < 16 * n_grid.front()) {
    throw std::invalid_argument("rate study: n grid must span at least a factor 16");
  }
  if (replicates < 2) throw std::invalid_argument("rate study: need at least 2 replicates");
  if (!(c_lambda > 0.0)) throw std::invalid_argument("rate study: c_lambda must be > 0");
  if (workers < 1) throw std::invalid_argument("rate study: workers must be >= 1");
}

ReplicateResult run_replicate(const ModelSpec& model, const BasisSystem& basis, std::size_t n, double c_lambda,
                              const SolverConfig& solver_cfg, std::uint64_t seed) {
  const Dataset data = sample_dataset(model, n, mix_seed(seed, 0));
  PenaltyConfig pen;
  pen.c_lambda = c_lambda;
  pen.lambda_n = lambda_n(n, basis, model.design.q_0, c_lambda);
  SolverConfig scfg = solver_cfg;
  scfg.seed = mix_seed(seed, 1);
  const FitResult fit = solve(data, basis, pen, scfg);
  const EdgeFunction fhat = edge_from_coefficients(basis, fit.alpha);
  ReplicateResult out;
  out.excess = excess_risk(model, fhat).value;
  out.l1 = sym_diff_measure(fhat, model.f0).value;
  out.disagree = fit.restarts_disagree;
  return out;
}

namespace {

void mean_and_se(const std::vector<double>& v, double& mean, double& se) {
  long double s = 0.0L;
  for (double x : v) s += x;
  const long double m = s / v.size();
  long double ss = 0.0L;
  for (double x : v) ss += (x - m) * (x - m);
  mean = static_cast<double>(m);
  se = v.size() > 1 ? static_cast<double>(std::sqrt(ss / (v.size() - 1) / v.size())) : 0.0;
}

}  // namespace

RateTable rate_study(const ModelFactory& factory, const BasisSystem& basis, const RateStudyConfig& cfg,
                     const SolverConfig& solver_cfg) {
  cfg.validate();
  solver_cfg.validate();
  const std::size_t reps = cfg.replicates;
  const std::size_t grid = cfg.n_grid.size();

  std::vector<ModelSpec> models;
  if (cfg.fresh_truth) {
    for (std::size_t r = 0; r < reps; ++r) models.push_back(factory(mix_seed(cfg.seed ^ 0x5EEDF00DULL, r)));
  } else {
    models.push_back(factory(cfg.seed));
  }

  std::vector<ReplicateResult> results(grid * reps);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= results.size()) return;
      const std::size_t g = job / reps;
      const std::size_t r = job % reps;
      try {
        const ModelSpec& model = models[cfg.fresh_truth ? r : 0];
        results[job] = run_replicate(model, basis, cfg.n_grid[g], cfg.c_lambda, solver_cfg,
                                     mix_seed(cfg.seed, (static_cast<std::uint64_t>(g) << 32) + r));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers = std::min<std::size_t>(cfg.workers, results.size());
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  RateTable table;
  table.predicted = predicted_exponents(models.front().kappa, cfg.rho);
  std::vector<double> ns;
  std::vector<double> ex;
  std::vector<double> l1;
  for (std::size_t g = 0; g < grid; ++g) {
    RateRow row;
    row.n = cfg.n_grid[g];
    row.replicates = reps;
    row.lambda = lambda_n(row.n, basis, models.front().design.q_0, cfg.c_lambda);
    std::vector<double> e(reps);
    std::vector<double> a(reps);
    std::size_t disagree = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      e[r] = results[g * reps + r].excess;
      a[r] = results[g * reps + r].l1;
      disagree += results[g * reps + r].disagree ? 1 : 0;
    }
    mean_and_se(e, row.mean_excess, row.se_excess);
    mean_and_se(a, row.mean_l1, row.se_l1);
    row.disagreement_fraction = static_cast<double>(disagree) / reps;
    table.rows.push_back(row);
    ns.push_back(static_cast<double>(row.n));
    ex.push_back(row.mean_excess);
    l1.push_back(row.mean_l1);
  }
  const double largest = std::max(*std::max_element(ex.begin(), ex.end()), *std::max_element(l1.begin(), l1.end()));
  const bool any_zero = std::any_of(ex.begin(), ex.end(), [](double v) { return !(v > 0.0); }) ||
                        std::any_of(l1.begin(), l1.end(), [](double v) { return !(v > 0.0); });
  table.degenerate = any_zero || largest < 1e-4;
  if (!any_zero) {
    table.excess_slope = fit_slope(ns, ex, true);
    table.l1_slope = fit_slope(ns, l1, true);
    table.excess_slope_plain = fit_slope(ns, ex, false);
    table.l1_slope_plain = fit_slope(ns, l1, false);
  }
  return table;
}

Calibration calibrate_c_lambda(const std::vector<ModelSpec>& models, const BasisSystem& basis, std::size_t n,
                               std::size_t replicates, const std::vector<double>& grid,
                               const SolverConfig& solver_cfg, std::uint64_t seed) {
  if (models.empty() || grid.empty() || replicates < 1) {
    throw std::invalid_argument("calibrate_c_lambda: need models, a grid and replicates");
  }
  Calibration cal;
  cal.grid = grid;
  for (double c : grid) {
    double score = 0.0;
    for (const ModelSpec& model : models) {
      long double sum = 0.0L;
      for (std::size_t r = 0; r < replicates; ++r) {
        sum += run_replicate(model, basis, n, c, solver_cfg, mix_seed(seed, r)).l1;
      }
      score += static_cast<double>(sum / replicates);
    }
    cal.scores.push_back(score);
  }
  const auto it = std::min_element(cal.scores.begin(), cal.scores.end());
  cal.best = grid[static_cast<std::size_t>(it - cal.scores.begin())];
  return cal;
}

}  // namespace sqrtpen
