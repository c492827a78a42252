#include "sqrtpen/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "sqrtpen/risk.hpp"
#include "sqrtpen/rng.hpp"

namespace sqrtpen {

namespace {

constexpr double kLemmaTolerance = 1e-10;

double level_scale(int d, int l) { return std::pow(2.0, -0.5 * d * l); }

void record(CheckReport& rep, double lhs, double rhs, double tol) {
  ++rep.trials;
  if (rhs > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
  if (lhs > rhs + tol * std::max(1.0, std::abs(rhs))) {
    ++rep.violations;
    if (rep.notes.size() < 10) rep.notes.push_back(fmt::format("violation: lhs={:.17g} rhs={:.17g}", lhs, rhs));
  }
}

double l1_of(const BasisSystem& basis, const CoefficientVector& alpha) {
  return l1_norm(edge_from_coefficients(basis, alpha)).value;
}

}  // namespace

CoefficientVector random_coefficients(const BasisSystem& basis, Rng& rng) {
  CoefficientVector a(basis);
  const int d = basis.d();
  const double scale = std::pow(10.0, rng.uniform(-3.0, 1.0));
  const int pattern = static_cast<int>(rng.below(6));
  const int only_level = 1 + static_cast<int>(rng.below(basis.levels()));
  for (std::size_t k = 0; k < a.size(); ++k) {
    const int l = a.level_of(k);
    double v = 0.0;
    switch (pattern) {
      case 0:  // dense, light tails
        v = rng.normal();
        break;
      case 1:  // sparse
        v = rng.bernoulli(0.2) ? rng.normal() : 0.0;
        break;
      case 2:  // filled below
        break;
      case 3: {  // heavy tails
        const double u = std::max(rng.uniform(), 1e-3);
        v = rng.normal() / u;
        break;
      }
      case 4:  // smooth-like decay across levels
        v = rng.normal() * level_scale(d, l);
        break;
      default:  // a single level
        v = l == only_level ? rng.normal() : 0.0;
        break;
    }
    a[k] = scale * v;
  }
  if (pattern == 2) a[rng.below(a.size())] = scale * rng.normal();
  return a;
}

CheckReport check_lemma1(const BasisSystem& basis, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_lemma1: trials must be >= 1");
  CheckReport rep;
  rep.name = "lemma1";
  rep.tolerance = kLemmaTolerance;
  rep.params = {{"d", basis.d()}, {"L", basis.levels()}, {"c_psi", basis.c_psi()},
                {"seed", static_cast<double>(seed)}};
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const CoefficientVector a = random_coefficients(basis, rng);
    record(rep, l1_of(basis, a), basis.c_psi() * nonsparsity(a), kLemmaTolerance);
  }
  return rep;
}

CheckReport check_lemma2(const BasisSystem& basis, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_lemma2: trials must be >= 1");
  CheckReport rep;
  rep.name = "lemma2";
  rep.tolerance = kLemmaTolerance;
  rep.params = {{"d", basis.d()}, {"L", basis.levels()}, {"c_psi", basis.c_psi()}, {"c_d", c_d(basis.d())},
                {"seed", static_cast<double>(seed)}};
  Rng rng(seed);
  const double c2 = basis.c_psi() * basis.c_psi();
  for (std::size_t t = 0; t < trials; ++t) {
    const int m = static_cast<int>(rng.below(basis.levels() + 1));
    const CoefficientVector a = random_coefficients(basis, rng).truncated(m);
    const double rhs = c_d(basis.d()) * c2 * static_cast<double>(N_of(basis, a)) * l1_of(basis, a);
    record(rep, nonsparsity(a), rhs, kLemmaTolerance);
  }
  return rep;
}

Lemma5Sides lemma5_sides(double v, double t, double kappa, double delta) {
  Lemma5Sides s;
  s.lhs = v * std::pow(t, 1.0 / (2.0 * kappa));
  s.rhs = 0.5 * delta * t +
          c_kappa(kappa) * std::pow(delta, -1.0 / (2.0 * kappa - 1.0)) * std::pow(v, 2.0 * kappa / (2.0 * kappa - 1.0));
  return s;
}

CheckReport check_lemma5(std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_lemma5: trials must be >= 1");
  CheckReport rep;
  rep.name = "lemma5";
  rep.tolerance = 1e-12;
  rep.params = {{"seed", static_cast<double>(seed)}};
  Rng rng(seed);
  double worst_equality_gap = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const double v = 10.0 * (1.0 - rng.uniform());
    const double t = 10.0 * (1.0 - rng.uniform());
    const double kappa = rng.uniform(1.0, 5.0);
    const double delta = 1.0 - rng.uniform();
    const Lemma5Sides s = lemma5_sides(v, t, kappa, delta);
    record(rep, s.lhs, s.rhs, rep.tolerance);

    // Equality family: the right side is tight at the minimizer in t.
    const double t_star = std::pow(v / (kappa * delta), 2.0 * kappa / (2.0 * kappa - 1.0));
    const Lemma5Sides e = lemma5_sides(v, t_star, kappa, delta);
    record(rep, e.lhs, e.rhs, rep.tolerance);
    worst_equality_gap = std::max(worst_equality_gap, std::abs(e.rhs - e.lhs) / std::max(1.0, e.rhs));
  }
  rep.params["worst_equality_gap"] = worst_equality_gap;
  if (worst_equality_gap > 1e-12) {
    ++rep.violations;
    rep.notes.push_back(fmt::format("equality family not tight: gap {:.3g}", worst_equality_gap));
  }
  return rep;
}

namespace {

struct GridSpec {
  std::vector<double> step;  // per coefficient
  long K = 0;                // grid indices -K..K
};

GridSpec grid_spec(const BasisSystem& basis, double M, double step) {
  GridSpec g;
  g.K = M > 0.0 ? static_cast<long>(std::floor(M / step + 1e-12)) : 0;
  g.step.resize(basis.total());
  for (std::size_t k = 0; k < basis.total(); ++k) g.step[k] = step * level_scale(basis.d(), basis.level_of(k));
  return g;
}

double grid_value(const GridSpec& g, std::size_t k, long i) { return static_cast<double>(i) * g.step[k]; }

double log_binomial(std::size_t n, std::size_t k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

BracketNet build_net(const BasisSystem& basis, double M, double delta, double step, std::size_t n_nominal,
                     std::size_t budget, bool materialize) {
  if (!(M >= 0.0) || !(delta > 0.0)) throw std::invalid_argument("bracket net: need M >= 0 and delta > 0");
  if (n_nominal < 1) throw std::invalid_argument("bracket net: n_nominal must be >= 1");
  BracketNet net;
  net.d = basis.d();
  net.levels = basis.levels();
  net.M = M;
  net.delta = delta;
  net.grid_step = step;
  net.n_nominal = n_nominal;
  const double c = basis.c_psi();
  net.claimed_radius = c * c / basis.d() * std::log(static_cast<double>(n_nominal)) * delta;

  const GridSpec g = grid_spec(basis, M, step);
  const std::size_t total = basis.total();
  net.full_product = total <= 6;
  const std::size_t max_nonzero = net.full_product ? total : std::min<std::size_t>(total, g.K);

  // Count before materializing.
  long double count = 0.0L;
  for (std::size_t s = 0; s <= max_nonzero; ++s) {
    count += std::exp(static_cast<long double>(log_binomial(total, s))) * std::pow(2.0L * g.K, static_cast<long double>(s));
  }
  net.count = static_cast<double>(count);
  if (!materialize) return net;
  if (count > static_cast<long double>(budget) + 0.5L) {
    throw std::length_error(fmt::format("bracket net: {:.4g} elements exceed the budget {}", static_cast<double>(count), budget));
  }

  CoefficientVector cur(basis);
  std::size_t nonzero = 0;
  // Depth-first over coordinates; lexicographic in (coordinate, grid index).
  auto rec = [&](auto&& self, std::size_t k) -> void {
    if (k == total) {
      net.elements.push_back(cur);
      return;
    }
    for (long i = -g.K; i <= g.K; ++i) {
      if (i != 0 && nonzero >= max_nonzero) continue;
      cur[k] = grid_value(g, k, i);
      nonzero += i != 0;
      self(self, k + 1);
      nonzero -= i != 0;
    }
    cur[k] = 0.0;
  };
  rec(rec, 0);
  net.count = static_cast<double>(net.elements.size());
  return net;
}

}  // namespace

BracketNet build_bracket_net(const BasisSystem& basis, double M, double delta, std::size_t n_nominal,
                             std::size_t budget) {
  return build_net(basis, M, delta, delta, n_nominal, budget, true);
}

BracketNet build_densified_net(const BasisSystem& basis, double M, double delta, std::size_t n_nominal) {
  return build_net(basis, M, delta, 0.5 * delta, n_nominal, 0, false);
}

CoefficientVector round_to_net(const BracketNet& net, const CoefficientVector& alpha) {
  const BasisSystem basis = make_haar_basis(net.d, net.levels);
  if (!alpha.compatible_with(basis)) throw std::invalid_argument("round_to_net: layout mismatch");
  const GridSpec g = grid_spec(basis, net.M, net.grid_step);
  CoefficientVector out(basis);
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (std::abs(alpha[k]) <= g.step[k]) continue;
    const long i = std::clamp(static_cast<long>(std::lround(alpha[k] / g.step[k])), -g.K, g.K);
    out[k] = grid_value(g, k, i);
  }
  return out;
}

CoefficientVector random_body_point(const BasisSystem& basis, double M, Rng& rng) {
  CoefficientVector a = random_coefficients(basis, rng);
  const double I = nonsparsity(a);
  if (!(I > 0.0)) return a;
  // I is positively homogeneous of degree one.
  return (M * (1.0 - rng.uniform()) / I) * a;
}

CheckReport check_net_cover(const BasisSystem& basis, const BracketNet& net, std::size_t trials,
                            std::uint64_t seed) {
  CheckReport rep;
  rep.name = "net_cover";
  rep.tolerance = 1e-12;
  rep.params = {{"M", net.M}, {"delta", net.delta}, {"claimed_radius", net.claimed_radius},
                {"cardinality", net.cardinality()}, {"seed", static_cast<double>(seed)}};
  std::set<std::vector<double>> members;
  for (const auto& e : net.elements) members.emplace(e.values().begin(), e.values().end());
  Rng rng(seed);
  double worst_distance = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const CoefficientVector a = random_body_point(basis, net.M, rng);
    const CoefficientVector r = round_to_net(net, a);
    const bool member = members.count(std::vector<double>(r.values().begin(), r.values().end())) > 0;
    const double dist = sup_distance(edge_from_coefficients(basis, a), edge_from_coefficients(basis, r));
    worst_distance = std::max(worst_distance, dist);
    record(rep, dist, net.claimed_radius, rep.tolerance);
    if (!member) {
      ++rep.violations;
      if (rep.notes.size() < 10) rep.notes.push_back("rounded point is not a net element");
    }
  }
  rep.params["worst_sup_distance"] = worst_distance;
  return rep;
}

CardinalityCheck check_net_cardinality(const BracketNet& net, std::size_t n_nominal) {
  CardinalityCheck c;
  c.log_count = std::log(net.cardinality());
  const double r = net.M / net.delta;
  c.bound = r * (std::log(2.0 * r + 1.0) + std::log(static_cast<double>(n_nominal) + 1.0));
  c.passed = c.log_count <= c.bound + 1e-9;
  return c;
}

double lemma4_ratio(const Dataset& data, const ModelSpec& model, const BasisSystem& basis,
                    const CoefficientVector& alpha_star, const std::vector<CoefficientVector>& family) {
  const double n = static_cast<double>(data.size());
  const double ln = std::log(n);
  const double floor_term = std::sqrt(std::pow(ln, 4) / n);
  auto nu = [&](const CoefficientVector& a) {
    return std::sqrt(n) * (empirical_risk(data, basis, a) - population_risk(model, basis, a).value);
  };
  const double nu_star = nu(alpha_star);
  double worst = 0.0;
  for (const auto& a : family) {
    const double num = std::abs(nu(a) - nu_star);
    const double den = sqrt_nonsparsity(a - alpha_star) + floor_term;
    worst = std::max(worst, num / den);
  }
  return worst;
}

std::vector<CoefficientVector> lemma4_family(const BasisSystem& basis, const CoefficientVector& alpha_star,
                                             std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CoefficientVector> family;
  family.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    CoefficientVector u = random_coefficients(basis, rng);
    const double I = nonsparsity(u);
    if (!(I > 0.0)) {
      family.push_back(alpha_star);
      continue;
    }
    const double target = std::pow(10.0, rng.uniform(-3.0, 0.0));
    family.push_back(alpha_star + (target / I) * u);
  }
  return family;
}

ProbeReport probe_lemma4(const ModelSpec& model, const BasisSystem& basis, const CoefficientVector& alpha_star,
                         std::size_t n, std::size_t replicates, double c_probe, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("probe_lemma4: n must be >= 2");
  if (replicates < 1) throw std::invalid_argument("probe_lemma4: replicates must be >= 1");
  if (!(c_probe > 0.0)) throw std::invalid_argument("probe_lemma4: C_probe must be > 0");
  const double ln = std::log(static_cast<double>(n));
  const double ln4 = std::pow(ln, 4);
  const double c = basis.c_psi();
  ProbeReport rep;
  rep.name = "lemma4_probe";
  rep.bound = c_probe * std::sqrt(model.design.q_0 * c * c * ln4 / basis.d());
  rep.tail_value = c_probe * std::exp(-c * ln4 / (c_probe * c_probe * basis.d()));
  const std::vector<CoefficientVector> fixed = lemma4_family(basis, alpha_star, 24, mix_seed(seed, 0xFA111));

  PenaltyConfig pen;
  pen.c_lambda = 0.01;
  pen.lambda_n = lambda_n(n, basis, model.design.q_0, pen.c_lambda);
  SolverConfig scfg;
  scfg.restarts = 1;

  std::size_t exceed = 0;
  for (std::size_t r = 0; r < replicates; ++r) {
    const Dataset data = sample_dataset(model, n, mix_seed(seed, r));
    std::vector<CoefficientVector> family = fixed;
    const CoefficientVector pilot = pilot_estimate(data, basis);
    family.push_back(pilot);
    scfg.seed = mix_seed(seed, r + (std::uint64_t{1} << 40));
    family.push_back(descend_from(data, basis, pen, scfg, pilot).alpha);
    const double stat = lemma4_ratio(data, model, basis, alpha_star, family);
    rep.statistics.push_back(stat);
    exceed += stat > rep.bound;
  }
  rep.frequency = static_cast<double>(exceed) / replicates;
  rep.params = {{"n", static_cast<double>(n)},
                {"replicates", static_cast<double>(replicates)},
                {"C_probe", c_probe},
                {"c_psi", c},
                {"q_0", model.design.q_0},
                {"d", basis.d()},
                {"L", basis.levels()},
                {"family_size", static_cast<double>(fixed.size() + 2)},
                {"seed", static_cast<double>(seed)}};
  rep.notes.push_back("family: 24 random perturbations of alpha*, the pilot estimate and a descent fit from it");
  return rep;
}

ProbeReport check_oracle_inequality(const ModelSpec& model, const BasisSystem& basis, std::size_t n,
                                    std::size_t replicates, double delta_slack, double c_lambda,
                                    const SolverConfig& solver_cfg, std::uint64_t seed) {
  if (replicates < 1) throw std::invalid_argument("oracle: replicates must be >= 1");
  if (!(delta_slack > 0.0)) throw std::invalid_argument("oracle: delta must be > 0");
  const TheoryConstants k = model.constants();
  const double c = basis.c_psi();
  const double n_min = 8.0 * k.q_0 * c * c;
  if (static_cast<double>(n) < n_min) {
    throw std::invalid_argument(fmt::format("oracle: n = {} is below 8 q_0 c_psi^2 = {:.6g}", n, n_min));
  }
  const double lambda = lambda_n(n, basis, k.q_0, c_lambda);
  const double ln = std::log(static_cast<double>(n));

  const CoefficientVector full = analyze(basis, model.f0);
  double best = std::numeric_limits<double>::infinity();
  int best_m = 0;
  double best_excess = 0.0;
  for (int m = 0; m <= basis.levels(); ++m) {
    const double ex = excess_risk(model, basis, full.truncated(m)).value;
    const double term = ex + std::pow(delta_slack, -1.0 / (2.0 * k.kappa - 1.0)) * V_n(N_m(basis, m), basis, k, lambda);
    if (term < best) {
      best = term;
      best_m = m;
      best_excess = ex;
    }
  }
  ProbeReport rep;
  rep.name = "oracle_inequality";
  rep.bound = (1.0 + delta_slack) * (1.0 + delta_slack) * best + 2.0 * lambda * std::sqrt(std::pow(ln, 4) / n);

  PenaltyConfig pen;
  pen.c_lambda = c_lambda;
  pen.lambda_n = lambda;
  std::size_t holds = 0;
  for (std::size_t r = 0; r < replicates; ++r) {
    const Dataset data = sample_dataset(model, n, mix_seed(seed, r));
    SolverConfig scfg = solver_cfg;
    scfg.seed = mix_seed(seed, r + (std::uint64_t{1} << 40));
    const FitResult fit = solve(data, basis, pen, scfg);
    const double ex = excess_risk(model, basis, fit.alpha).value;
    rep.statistics.push_back(ex);
    holds += ex <= rep.bound;
  }
  rep.frequency = static_cast<double>(holds) / replicates;
  rep.params = {{"n", static_cast<double>(n)},
                {"replicates", static_cast<double>(replicates)},
                {"delta", delta_slack},
                {"c_lambda", c_lambda},
                {"lambda_n", lambda},
                {"kappa", k.kappa},
                {"sigma_0", k.sigma_0},
                {"q_0", k.q_0},
                {"oracle_level", best_m},
                {"oracle_excess", best_excess},
                {"oracle_term", best},
                {"seed", static_cast<double>(seed)}};
  rep.notes.push_back("infimum surrogate: level-m truncations of analyze(f*), m = 0..L");
  return rep;
}

CheckReport check_margin(const ModelSpec& model, const BasisSystem& basis, std::size_t trials, std::uint64_t seed,
                         double max_deviation) {
  if (trials < 1) throw std::invalid_argument("check_margin: trials must be >= 1");
  const TheoryConstants k = model.constants();
  CheckReport rep;
  rep.name = "margin";
  rep.tolerance = kLemmaTolerance;
  rep.params = {{"kappa", k.kappa}, {"sigma_0", k.sigma_0}, {"q_0", k.q_0}, {"max_deviation", max_deviation},
                {"seed", static_cast<double>(seed)}};
  const CoefficientVector base = analyze(basis, model.f0);
  Rng rng(seed);
  double worst_lower = 0.0;
  double worst_upper = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    CoefficientVector a = base;
    if (t > 0) {
      const CoefficientVector u = random_coefficients(basis, rng);
      const DyadicTable tab = synthesize_table(basis, u);
      double sup = 0.0;
      for (double v : tab.values()) sup = std::max(sup, std::abs(v));
      if (sup > 0.0) a = a + (max_deviation * (1.0 - rng.uniform()) / sup) * u;
    }
    const EdgeFunction f = edge_from_coefficients(basis, a);
    const double excess = excess_risk(model, f).value;
    const double lower = std::pow(q_measure_sym_diff(model, f, model.f0), k.kappa) / k.sigma_0;
    const double upper = k.sigma_0 * std::pow(k.q_0, k.kappa) * std::pow(sup_distance(f, model.f0), k.kappa);
    record(rep, lower, excess, kLemmaTolerance);
    record(rep, excess, upper, kLemmaTolerance);
    if (excess > 0.0) worst_lower = std::max(worst_lower, lower / excess);
    if (upper > 0.0) worst_upper = std::max(worst_upper, excess / upper);
  }
  rep.trials /= 2;
  rep.params["worst_lower_ratio"] = worst_lower;
  rep.params["worst_upper_ratio"] = worst_upper;
  return rep;
}

}  // namespace sqrtpen
