#include "sqrtpen/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "sqrtpen/risk.hpp"
#include "sqrtpen/rng.hpp"

namespace sqrtpen {

Lattice Lattice::levelwise(const BasisSystem& basis, double M, double delta) {
  if (!(delta > 0.0) || !(M >= 0.0)) throw std::invalid_argument("lattice: need delta > 0 and M >= 0");
  const auto kmax = static_cast<long>(std::floor(M / delta + 1e-12));
  Lattice lat;
  lat.values.resize(basis.total());
  for (int l = 1; l <= basis.levels(); ++l) {
    const double step = delta * std::pow(2.0, -basis.d() * l / 2.0);
    std::vector<double> vals;
    for (long k = -kmax; k <= kmax; ++k) vals.push_back(static_cast<double>(k) * step);
    for (std::size_t j = 0; j < basis.block_size(l); ++j) lat.values[basis.block_offset(l) + j] = vals;
  }
  return lat;
}

std::size_t Lattice::cardinality() const {
  std::size_t c = 1;
  for (const auto& v : values) {
    if (v.empty()) return 0;
    if (c > std::numeric_limits<std::size_t>::max() / v.size()) return std::numeric_limits<std::size_t>::max();
    c *= v.size();
  }
  return c;
}

void SolverConfig::validate() const {
  if (max_sweeps < 1) throw std::invalid_argument("solver: max_sweeps must be >= 1");
  if (restarts < 1) throw std::invalid_argument("solver: restarts must be >= 1");
  if (!(lattice_delta > 0.0)) throw std::invalid_argument("solver: lattice delta must be > 0");
  if (!(lattice_M >= 0.0)) throw std::invalid_argument("solver: lattice M must be >= 0");
  if (tie_break != "min-abs-then-min") throw std::invalid_argument("solver: unknown tie-break rule " + tie_break);
}

std::string to_string(SolverConfig::Method method) {
  return method == SolverConfig::Method::kLattice ? "lattice" : "coordinate-descent";
}

SolverConfig::Method parse_method(const std::string& name) {
  if (name == "lattice") return SolverConfig::Method::kLattice;
  if (name == "coordinate-descent" || name == "cd") return SolverConfig::Method::kCoordinateDescent;
  throw std::invalid_argument("unknown solver method: " + name);
}

double objective(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                 const CoefficientVector& alpha) {
  return empirical_risk(data, basis, alpha) + penalty(alpha, cfg);
}

std::vector<double> breakpoints_1d(const Dataset& data, const BasisSystem& basis, const CoefficientVector& alpha,
                                   std::size_t k) {
  if (k >= basis.total()) throw std::out_of_range("breakpoints_1d: coordinate out of range");
  std::vector<double> out{0.0};
  for (std::size_t i = 0; i < data.size(); ++i) {
    double psi = 0.0;
    double f = 0.0;
    basis.for_each_nonzero(data.s(i), [&](std::size_t j, double v) {
      if (j == k) {
        psi = v;
      } else {
        f += alpha[j] * v;
      }
    });
    if (psi != 0.0) out.push_back((data.t(i) - f) / psi);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CoefficientVector pilot_estimate(const Dataset& data, const BasisSystem& basis) {
  const int depth = basis.finest_depth();
  DyadicTable table(basis.d(), depth);
  std::vector<std::vector<std::size_t>> members(table.size());
  for (std::size_t i = 0; i < data.size(); ++i) members[table.cell_of(data.s(i))].push_back(i);
  for (std::size_t c = 0; c < table.size(); ++c) {
    const auto& idx = members[c];
    if (idx.empty()) {
      table[c] = 0.5;
      continue;
    }
    // Loss of threshold u is sum_{T_i <= u} (y-1)^2 + sum_{T_i > u} y^2.
    std::vector<std::pair<double, double>> pts;  // (T, loss1 - loss0)
    long double loss_all_off = 0.0L;
    for (std::size_t i : idx) {
      const double y = data.y(i);
      pts.emplace_back(data.t(i), (y - 1.0) * (y - 1.0) - y * y);
      loss_all_off += y * y;
    }
    std::sort(pts.begin(), pts.end());
    auto better = [](long double loss, double u, long double best_loss, double best_u) {
      if (loss != best_loss) return loss < best_loss;
      return std::abs(u - 0.5) < std::abs(best_u - 0.5);
    };
    // Candidate thresholds sit midway between consecutive distinct T values
    // (and at 0 / 1 at the ends) so no sample lies exactly on the edge.
    double best_u = 0.0;
    long double best = loss_all_off;
    long double run = loss_all_off;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      run += pts[j].second;
      if (j + 1 < pts.size() && pts[j + 1].first == pts[j].first) continue;
      const double u = j + 1 < pts.size() ? 0.5 * (pts[j].first + pts[j + 1].first) : 1.0;
      if (better(run, u, best, best_u)) {
        best = run;
        best_u = u;
      }
    }
    table[c] = best_u;
  }
  return analyze(basis, table);
}

namespace {

constexpr double kAcceptTol = 1e-13;

// Basis functions touching each sample, stored by coordinate.
struct SupportIndex {
  std::vector<std::vector<std::uint32_t>> rows;
  std::vector<std::vector<double>> vals;

  SupportIndex(const Dataset& data, const BasisSystem& basis) : rows(basis.total()), vals(basis.total()) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      basis.for_each_nonzero(data.s(i), [&](std::size_t k, double v) {
        rows[k].push_back(static_cast<std::uint32_t>(i));
        vals[k].push_back(v);
      });
    }
  }
};

// Indicator directions of dyadic cells: adding u to f_alpha on cell C changes
// alpha_k by u vol(C) psi_k(C) for the scaling function and every wavelet of
// resolution below depth(C); finer wavelets integrate to zero over C.
struct CellDirection {
  std::vector<std::size_t> coords;
  std::vector<double> weights;
  std::vector<std::uint32_t> samples;
};

struct CellDirections {
  std::vector<CellDirection> directions;

  CellDirections(const Dataset& data, const BasisSystem& basis) {
    const int d = basis.d();
    const std::size_t per_res = (std::size_t{1} << d) - 1;
    for (int depth = 0; depth <= basis.finest_depth(); ++depth) {
      DyadicTable grid(d, depth);
      std::vector<CellDirection> level(grid.size());
      std::vector<double> mid(d);
      for (std::size_t c = 0; c < grid.size(); ++c) {
        grid.midpoint(c, mid);
        const std::size_t keep = 1 + static_cast<std::size_t>(depth) * per_res;
        std::size_t seen = 0;
        basis.for_each_nonzero(mid, [&](std::size_t k, double v) {
          if (seen++ < keep) {
            level[c].coords.push_back(k);
            level[c].weights.push_back(v * grid.cell_volume());
          }
        });
      }
      for (std::size_t i = 0; i < data.size(); ++i) {
        level[grid.cell_of(data.s(i))].samples.push_back(static_cast<std::uint32_t>(i));
      }
      for (auto& dir : level) {
        if (!dir.samples.empty()) directions.push_back(std::move(dir));
      }
    }
  }
};

// Points at distance eps = 2^-40 max(|b|, 1) on either side of each distinct
// breakpoint b. A side is dropped when the neighbouring breakpoint is closer
// than 2 eps: a candidate there would sit within rounding of the neighbour.
void append_neighbours(std::vector<double> b, std::vector<double>& out) {
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  auto eps = [](double v) { return std::ldexp(std::max(std::abs(v), 1.0), -40); };
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double e = eps(b[j]);
    if (j == 0 || b[j] - b[j - 1] > 2.0 * std::max(e, eps(b[j - 1]))) out.push_back(b[j] - e);
    if (j + 1 == b.size() || b[j + 1] - b[j] > 2.0 * std::max(e, eps(b[j + 1]))) out.push_back(b[j] + e);
  }
}

// Lexicographic (objective, |x|, x) order used for every tie-break.
bool preferred(double obj, double x, double best_obj, double best_x) {
  if (obj != best_obj) return obj < best_obj;
  if (std::abs(x) != std::abs(best_x)) return std::abs(x) < std::abs(best_x);
  return x < best_x;
}

class Descent {
 public:
  Descent(const Dataset& data, const BasisSystem& basis, const SupportIndex& support, const PenaltyConfig& cfg,
          const SolverConfig& scfg, const Lattice* lattice, const CellDirections* cells)
      : data_(data), basis_(basis), sup_(support), cfg_(cfg), scfg_(scfg), lattice_(lattice), cells_(cells),
        alpha_(basis), f_(data.size()), pred_(data.size()), level_sum_(basis.levels() + 1),
        level_weight_(basis.levels() + 1) {
    for (int l = 1; l <= basis.levels(); ++l) level_weight_[l] = std::pow(2.0L, basis.d() * l / 4.0L);
    loss0_.resize(data.size());
    loss1_.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double y = data.y(i);
      loss0_[i] = y * y;
      loss1_[i] = (y - 1.0) * (y - 1.0);
    }
  }

  FitResult run(const CoefficientVector& start) {
    alpha_ = start;
    refresh();
    FitResult res(alpha_);
    if (scfg_.record_trace) res.trace.push_back(current_);
    int sweeps = 0;
    while (sweeps < scfg_.max_sweeps) {
      ++sweeps;
      bool changed = false;
      const double before = current_;
      for (std::size_t k = 0; k < basis_.total(); ++k) {
        if (update(k)) {
          changed = true;
          if (scfg_.record_trace) res.trace.push_back(current_);
        }
      }
      if (lattice_ != nullptr && scfg_.cell_moves) {
        for (std::size_t k1 = 0; k1 < basis_.total(); ++k1) {
          for (std::size_t k2 = k1 + 1; k2 < basis_.total(); ++k2) {
            if (pair_update(k1, k2)) {
              changed = true;
              if (scfg_.record_trace) res.trace.push_back(current_);
            }
          }
        }
      }
      if (cells_) {
        for (const CellDirection& dir : cells_->directions) {
          if (cell_update(dir)) {
            changed = true;
            if (scfg_.record_trace) res.trace.push_back(current_);
          }
        }
      }
      refresh();
      if (current_ > before + 1e-12) {
        throw std::logic_error(fmt::format("coordinate descent increased the objective: {} -> {}", before, current_));
      }
      if (!changed) break;
    }
    res.alpha = alpha_;
    res.sweeps = sweeps;
    return res;
  }

 private:
  double loss(std::size_t i, bool on) const { return on ? loss1_[i] : loss0_[i]; }

  long double penalty_with(int l, long double level_sum) const {
    long double root = 0.0L;
    for (int m = 1; m <= basis_.levels(); ++m) {
      const long double s = (m == l) ? level_sum : level_sum_[m];
      root += level_weight_[m] * std::sqrt(std::max(0.0L, s));
    }
    return cfg_.lambda_n * root;
  }

  // Recomputes f, predictions, risk and block sums from alpha.
  void refresh() {
    risk_sum_ = 0.0L;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      f_[i] = synthesize(basis_, alpha_, data_.s(i));
      pred_[i] = f_[i] >= data_.t(i);
      risk_sum_ += loss(i, pred_[i]);
    }
    for (int l = 1; l <= basis_.levels(); ++l) level_sum_[l] = level_abs_sum(alpha_, l);
    current_ = static_cast<double>(risk_sum_ / n() + penalty_with(0, 0.0L));
  }

  long double n() const { return static_cast<long double>(data_.size()); }

  // Objective after setting alpha_k = x, computed with actual arithmetic.
  double evaluate(std::size_t k, int l, double x, long double* new_risk) const {
    const double x0 = alpha_[k];
    long double r = risk_sum_;
    const auto& rows = sup_.rows[k];
    const auto& vals = sup_.vals[k];
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const std::uint32_t i = rows[j];
      const bool on = (f_[i] - x0 * vals[j]) + x * vals[j] >= data_.t(i);
      if (on != pred_[i]) r += loss(i, on) - loss(i, pred_[i]);
    }
    if (new_risk) *new_risk = r;
    const long double s = level_sum_[l] - std::fabs(static_cast<long double>(x0)) + std::fabs(x);
    return static_cast<double>(r / n() + penalty_with(l, s));
  }

  void commit(std::size_t k, int l, double x, long double new_risk, double new_obj) {
    const double x0 = alpha_[k];
    const auto& rows = sup_.rows[k];
    const auto& vals = sup_.vals[k];
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const std::uint32_t i = rows[j];
      f_[i] = (f_[i] - x0 * vals[j]) + x * vals[j];
      pred_[i] = f_[i] >= data_.t(i);
    }
    level_sum_[l] += std::fabs(static_cast<long double>(x)) - std::fabs(static_cast<long double>(x0));
    alpha_[k] = x;
    risk_sum_ = new_risk;
    if (new_obj > current_) throw std::logic_error("coordinate update increased the objective");
    current_ = new_obj;
  }

  bool update(std::size_t k) {
    const int l = basis_.level_of(k);
    std::vector<std::pair<double, double>> ranked;  // (estimated objective, x)
    if (lattice_ != nullptr) {
      for (double x : lattice_->values[k]) ranked.emplace_back(evaluate(k, l, x, nullptr), x);
    } else {
      ranked = estimate_candidates(k, l);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return preferred(a.first, a.second, b.first, b.second);
    });
    const double x0 = alpha_[k];
    int attempts = 0;
    for (const auto& [est, x] : ranked) {
      if (est >= current_ - kAcceptTol || attempts >= 8) break;
      if (x == x0) continue;
      ++attempts;
      long double r = 0.0L;
      const double obj = evaluate(k, l, x, &r);
      if (obj < current_ - kAcceptTol) {
        commit(k, l, x, r, obj);
        return true;
      }
    }
    return false;
  }

  // Exact minimization over the lattice values of coordinates k1 and k2 jointly.
  bool pair_update(std::size_t k1, std::size_t k2) {
    struct Row {
      std::uint32_t i;
      double v1;
      double v2;
    };
    std::vector<Row> rows;
    std::vector<std::size_t> at(data_.size(), SIZE_MAX);
    for (std::size_t j = 0; j < sup_.rows[k1].size(); ++j) {
      at[sup_.rows[k1][j]] = rows.size();
      rows.push_back({sup_.rows[k1][j], sup_.vals[k1][j], 0.0});
    }
    for (std::size_t j = 0; j < sup_.rows[k2].size(); ++j) {
      const std::uint32_t i = sup_.rows[k2][j];
      if (at[i] == SIZE_MAX) {
        rows.push_back({i, 0.0, sup_.vals[k2][j]});
      } else {
        rows[at[i]].v2 = sup_.vals[k2][j];
      }
    }
    const double a1 = alpha_[k1];
    const double a2 = alpha_[k2];
    const int l1 = basis_.level_of(k1);
    const int l2 = basis_.level_of(k2);
    double best_obj = current_;
    double b1 = a1;
    double b2 = a2;
    long double best_risk = risk_sum_;
    for (double x1 : lattice_->values[k1]) {
      for (double x2 : lattice_->values[k2]) {
        if (x1 == a1 || x2 == a2) continue;  // single-coordinate moves are covered by update()
        long double r = risk_sum_;
        for (const Row& row : rows) {
          const double f = ((f_[row.i] - a1 * row.v1) + x1 * row.v1 - a2 * row.v2) + x2 * row.v2;
          const bool on = f >= data_.t(row.i);
          if (on != pred_[row.i]) r += loss(row.i, on) - loss(row.i, pred_[row.i]);
        }
        std::vector<long double> sums(level_sum_);
        sums[l1] += std::fabs(static_cast<long double>(x1)) - std::fabs(static_cast<long double>(a1));
        sums[l2] += std::fabs(static_cast<long double>(x2)) - std::fabs(static_cast<long double>(a2));
        long double root = 0.0L;
        for (int m = 1; m <= basis_.levels(); ++m) root += level_weight_[m] * std::sqrt(std::max(0.0L, sums[m]));
        const double obj = static_cast<double>(r / n() + cfg_.lambda_n * root);
        if (obj < best_obj - kAcceptTol) {
          best_obj = obj;
          b1 = x1;
          b2 = x2;
          best_risk = r;
        }
      }
    }
    if (b1 == a1 && b2 == a2) return false;
    for (const Row& row : rows) {
      f_[row.i] = ((f_[row.i] - a1 * row.v1) + b1 * row.v1 - a2 * row.v2) + b2 * row.v2;
      pred_[row.i] = f_[row.i] >= data_.t(row.i);
    }
    level_sum_[l1] += std::fabs(static_cast<long double>(b1)) - std::fabs(static_cast<long double>(a1));
    level_sum_[l2] += std::fabs(static_cast<long double>(b2)) - std::fabs(static_cast<long double>(a2));
    alpha_[k1] = b1;
    alpha_[k2] = b2;
    risk_sum_ = best_risk;
    current_ = best_obj;
    return true;
  }

  // Objective after alpha += u * dir, from the level sums and the risk change
  // of the samples in the cell (f moves by exactly u there).
  long double cell_penalty(const CellDirection& dir, double u) const {
    std::vector<long double> sums(level_sum_);
    for (std::size_t j = 0; j < dir.coords.size(); ++j) {
      const std::size_t k = dir.coords[j];
      const double a = alpha_[k];
      sums[basis_.level_of(k)] += std::fabs(static_cast<long double>(a + u * dir.weights[j])) - std::fabs(a);
    }
    long double root = 0.0L;
    for (int m = 1; m <= basis_.levels(); ++m) root += level_weight_[m] * std::sqrt(std::max(0.0L, sums[m]));
    return cfg_.lambda_n * root;
  }

  bool cell_update(const CellDirection& dir) {
    std::vector<std::pair<double, double>> pts;  // (b, loss change when on); on iff u >= b
    long double base = risk_sum_;
    for (std::uint32_t i : dir.samples) {
      base += loss0_[i] - loss(i, pred_[i]);
      pts.emplace_back(data_.t(i) - f_[i], loss1_[i] - loss0_[i]);
    }
    std::sort(pts.begin(), pts.end());
    std::vector<long double> prefix(pts.size() + 1, 0.0L);
    for (std::size_t j = 0; j < pts.size(); ++j) prefix[j + 1] = prefix[j] + pts[j].second;
    std::vector<double> cand{0.0};
    std::vector<double> bs;
    for (const auto& pt : pts) bs.push_back(pt.first);
    append_neighbours(std::move(bs), cand);
    // Kinks of the penalty, where a path coefficient crosses zero.
    for (std::size_t j = 0; j < dir.coords.size(); ++j) cand.push_back(-alpha_[dir.coords[j]] / dir.weights[j]);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    std::vector<std::pair<double, double>> ranked;
    std::size_t pi = 0;
    for (double u : cand) {
      while (pi < pts.size() && pts[pi].first <= u) ++pi;
      ranked.emplace_back(static_cast<double>((base + prefix[pi]) / n() + cell_penalty(dir, u)), u);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return preferred(a.first, a.second, b.first, b.second);
    });
    int attempts = 0;
    for (const auto& [est, u] : ranked) {
      if (est >= current_ - kAcceptTol || attempts >= 8) break;
      if (u == 0.0) continue;
      ++attempts;
      // Verify with the coefficients actually written back.
      std::vector<double> next(dir.coords.size());
      for (std::size_t j = 0; j < dir.coords.size(); ++j) next[j] = alpha_[dir.coords[j]] + u * dir.weights[j];
      long double r = risk_sum_;
      std::vector<double> fnew(dir.samples.size());
      for (std::size_t j = 0; j < dir.samples.size(); ++j) {
        const std::uint32_t i = dir.samples[j];
        double f = f_[i];
        for (std::size_t q = 0; q < dir.coords.size(); ++q) {
          f += (next[q] - alpha_[dir.coords[q]]) * basis_.evaluate(dir.coords[q], data_.s(i));
        }
        fnew[j] = f;
        const bool on = f >= data_.t(i);
        if (on != pred_[i]) r += loss(i, on) - loss(i, pred_[i]);
      }
      std::vector<long double> sums(level_sum_);
      for (std::size_t q = 0; q < dir.coords.size(); ++q) {
        const std::size_t k = dir.coords[q];
        sums[basis_.level_of(k)] += std::fabs(static_cast<long double>(next[q])) - std::fabs(alpha_[k]);
      }
      long double root = 0.0L;
      for (int m = 1; m <= basis_.levels(); ++m) root += level_weight_[m] * std::sqrt(std::max(0.0L, sums[m]));
      const double obj = static_cast<double>(r / n() + cfg_.lambda_n * root);
      if (obj < current_ - kAcceptTol) {
        for (std::size_t q = 0; q < dir.coords.size(); ++q) alpha_[dir.coords[q]] = next[q];
        for (std::size_t j = 0; j < dir.samples.size(); ++j) {
          const std::uint32_t i = dir.samples[j];
          f_[i] = fnew[j];
          pred_[i] = f_[i] >= data_.t(i);
        }
        level_sum_ = sums;
        risk_sum_ = r;
        current_ = obj;
        return true;
      }
    }
    return false;
  }

  // Candidates 0, the current value, and both neighbours of each breakpoint,
  // scored from sorted prefix sums of the per-sample loss change. Breakpoints
  // themselves are skipped: which side a sample lands on there depends on
  // rounding in f, which a later full recomputation can flip.
  std::vector<std::pair<double, double>> estimate_candidates(std::size_t k, int l) const {
    const double x0 = alpha_[k];
    const auto& rows = sup_.rows[k];
    const auto& vals = sup_.vals[k];
    std::vector<std::pair<double, double>> pos;  // on iff x >= b
    std::vector<std::pair<double, double>> neg;  // on iff x <= b
    long double base = risk_sum_;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const std::uint32_t i = rows[j];
      const double v = vals[j];
      const double b = (data_.t(i) - (f_[i] - x0 * v)) / v;
      base += loss0_[i] - loss(i, pred_[i]);
      (v > 0.0 ? pos : neg).emplace_back(b, loss1_[i] - loss0_[i]);
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    std::vector<long double> pos_prefix(pos.size() + 1, 0.0L);
    for (std::size_t j = 0; j < pos.size(); ++j) pos_prefix[j + 1] = pos_prefix[j] + pos[j].second;
    std::vector<long double> neg_suffix(neg.size() + 1, 0.0L);
    for (std::size_t j = neg.size(); j-- > 0;) neg_suffix[j] = neg_suffix[j + 1] + neg[j].second;

    std::vector<double> cand{0.0, x0};
    std::vector<double> bs;
    bs.reserve(rows.size());
    for (const auto* side : {&pos, &neg}) {
      for (const auto& pt : *side) bs.push_back(pt.first);
    }
    append_neighbours(std::move(bs), cand);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    const long double other_level = level_sum_[l] - std::fabs(static_cast<long double>(x0));
    std::vector<std::pair<double, double>> out;
    out.reserve(cand.size());
    std::size_t pi = 0;
    std::size_t ni = 0;
    for (double x : cand) {
      while (pi < pos.size() && pos[pi].first <= x) ++pi;
      while (ni < neg.size() && neg[ni].first < x) ++ni;
      const long double r = base + pos_prefix[pi] + neg_suffix[ni];
      out.emplace_back(static_cast<double>(r / n() + penalty_with(l, other_level + std::fabs(x))), x);
    }
    return out;
  }

  const Dataset& data_;
  const BasisSystem& basis_;
  const SupportIndex& sup_;
  const PenaltyConfig& cfg_;
  const SolverConfig& scfg_;
  const Lattice* lattice_;
  const CellDirections* cells_;
  CoefficientVector alpha_;
  std::vector<double> f_;
  std::vector<bool> pred_;
  std::vector<double> loss0_;
  std::vector<double> loss1_;
  std::vector<long double> level_sum_;
  std::vector<long double> level_weight_;
  long double risk_sum_ = 0.0L;
  double current_ = 0.0;
};

void finalize(FitResult& res, const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg) {
  res.empirical_risk = empirical_risk(data, basis, res.alpha);
  res.penalty = penalty(res.alpha, cfg);
  res.objective = res.empirical_risk + res.penalty;
}

double nearest_on_list(const std::vector<double>& vals, double x) {
  auto it = std::lower_bound(vals.begin(), vals.end(), x);
  if (it == vals.end()) return vals.back();
  if (it == vals.begin()) return *it;
  const double hi = *it;
  const double lo = *(it - 1);
  return (x - lo <= hi - x) ? lo : hi;
}

std::vector<CoefficientVector> starting_points(const Dataset& data, const BasisSystem& basis,
                                               const SolverConfig& scfg, const Lattice* lattice) {
  std::vector<CoefficientVector> starts;
  starts.emplace_back(basis);
  if (scfg.restarts >= 2) {
    CoefficientVector pilot = pilot_estimate(data, basis);
    if (lattice) {
      for (std::size_t k = 0; k < pilot.size(); ++k) pilot[k] = nearest_on_list(lattice->values[k], pilot[k]);
    }
    starts.push_back(std::move(pilot));
  }
  for (int r = 2; r < scfg.restarts; ++r) {
    Rng rng(mix_seed(scfg.seed, static_cast<std::uint64_t>(r)));
    CoefficientVector a = lattice ? CoefficientVector(basis) : starts[1];
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (lattice) {
        const auto& vals = lattice->values[k];
        a[k] = vals[rng.below(vals.size())];
      } else {
        const int l = basis.level_of(k);
        a[k] += 0.1 * std::pow(2.0, -basis.d() * l / 2.0) * rng.normal();
      }
    }
    starts.push_back(std::move(a));
  }
  return starts;
}

}  // namespace

FitResult descend_from(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                       const SolverConfig& solver_cfg, const CoefficientVector& start) {
  if (data.empty()) throw std::invalid_argument("solver: empty dataset");
  cfg.validate();
  solver_cfg.validate();
  std::optional<Lattice> lattice;
  if (solver_cfg.restrict_to_lattice) lattice = Lattice::levelwise(basis, solver_cfg.lattice_M, solver_cfg.lattice_delta);
  const SupportIndex support(data, basis);
  std::optional<CellDirections> cells;
  if (solver_cfg.cell_moves && !lattice) cells.emplace(data, basis);
  Descent descent(data, basis, support, cfg, solver_cfg, lattice ? &*lattice : nullptr, cells ? &*cells : nullptr);
  FitResult res = descent.run(start);
  finalize(res, data, basis, cfg);
  res.certificate = "local";
  res.restart_objectives = {res.objective};
  return res;
}

FitResult solve_coordinate_descent(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                                   const SolverConfig& solver_cfg) {
  if (data.empty()) throw std::invalid_argument("solver: empty dataset");
  if (data.d() != basis.d()) throw std::invalid_argument("solver: dataset and basis dimensions differ");
  cfg.validate();
  solver_cfg.validate();
  std::optional<Lattice> lattice;
  if (solver_cfg.restrict_to_lattice) lattice = Lattice::levelwise(basis, solver_cfg.lattice_M, solver_cfg.lattice_delta);
  const Lattice* lat = lattice ? &*lattice : nullptr;
  const SupportIndex support(data, basis);
  std::optional<CellDirections> cells;
  if (solver_cfg.cell_moves && !lat) cells.emplace(data, basis);
  Descent descent(data, basis, support, cfg, solver_cfg, lat, cells ? &*cells : nullptr);

  std::optional<FitResult> best;
  std::vector<double> objectives;
  for (const CoefficientVector& start : starting_points(data, basis, solver_cfg, lat)) {
    FitResult res = descent.run(start);
    finalize(res, data, basis, cfg);
    objectives.push_back(res.objective);
    if (!best || res.objective < best->objective) best = std::move(res);
  }
  best->certificate = "local";
  best->restart_objectives = objectives;
  const auto [lo, hi] = std::minmax_element(objectives.begin(), objectives.end());
  best->restarts_disagree = *hi - *lo > 1e-6;
  return *best;
}

FitResult solve_lattice(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                        const SolverConfig& solver_cfg, const Lattice& lattice) {
  if (data.empty()) throw std::invalid_argument("solver: empty dataset");
  cfg.validate();
  if (lattice.values.size() != basis.total()) throw std::invalid_argument("lattice: wrong number of coordinates");
  const std::size_t count = lattice.cardinality();
  if (count == 0) throw std::invalid_argument("lattice: a coordinate has no values");
  if (count > solver_cfg.lattice_budget) {
    throw std::length_error(fmt::format("lattice of {} points exceeds the budget of {}", count, solver_cfg.lattice_budget));
  }
  // Dense psi values per sample, in for_each_nonzero order.
  std::vector<std::size_t> idx;
  std::vector<double> val;
  const std::size_t per = 1 + static_cast<std::size_t>(basis.levels()) * ((std::size_t{1} << basis.d()) - 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    basis.for_each_nonzero(data.s(i), [&](std::size_t k, double v) {
      idx.push_back(k);
      val.push_back(v);
    });
  }
  std::vector<std::size_t> pos(basis.total(), 0);
  CoefficientVector a(basis);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = lattice.values[k][0];

  CoefficientVector best(basis);
  double best_obj = std::numeric_limits<double>::infinity();
  auto better = [&](double obj) {
    if (obj != best_obj) return obj < best_obj;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (std::abs(a[k]) != std::abs(best[k])) return std::abs(a[k]) < std::abs(best[k]);
      if (a[k] != best[k]) return a[k] < best[k];
    }
    return false;
  };
  for (std::size_t it = 0; it < count; ++it) {
    long double risk = 0.0L;
    for (std::size_t i = 0; i < data.size(); ++i) {
      double f = 0.0;
      for (std::size_t j = i * per; j < (i + 1) * per; ++j) f += a[idx[j]] * val[j];
      const double pred = f >= data.t(i) ? 1.0 : 0.0;
      const double r = data.y(i) - pred;
      risk += r * r;
    }
    const double obj = static_cast<double>(risk / static_cast<long double>(data.size())) + penalty(a, cfg);
    if (better(obj)) {
      best_obj = obj;
      best = a;
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (++pos[k] < lattice.values[k].size()) {
        a[k] = lattice.values[k][pos[k]];
        break;
      }
      pos[k] = 0;
      a[k] = lattice.values[k][0];
    }
  }
  FitResult res(best);
  finalize(res, data, basis, cfg);
  res.certificate = "global-on-lattice";
  res.restart_objectives = {res.objective};
  return res;
}

FitResult solve_lattice(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                        const SolverConfig& solver_cfg) {
  return solve_lattice(data, basis, cfg, solver_cfg,
                       Lattice::levelwise(basis, solver_cfg.lattice_M, solver_cfg.lattice_delta));
}

FitResult solve(const Dataset& data, const BasisSystem& basis, const PenaltyConfig& cfg,
                const SolverConfig& solver_cfg) {
  return solver_cfg.method == SolverConfig::Method::kLattice ? solve_lattice(data, basis, cfg, solver_cfg)
                                                             : solve_coordinate_descent(data, basis, cfg, solver_cfg);
}

double kill_threshold(const Dataset& data, const BasisSystem& basis) {
  const double r0 = empirical_risk(data, basis, CoefficientVector(basis));
  if (r0 == 0.0) return 0.0;
  double t_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.t(i) <= 0.0) return std::numeric_limits<double>::infinity();
    t_min = std::min(t_min, data.t(i));
  }
  return r0 / (std::pow(2.0, basis.d() / 4.0) * std::sqrt(t_min / basis.levels()));
}

}  // namespace sqrtpen
