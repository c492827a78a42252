// Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "sqrtpen/basis.hpp"
#include "sqrtpen/experiments.hpp"
#include "sqrtpen/io.hpp"
#include "sqrtpen/model.hpp"
#include "sqrtpen/penalty.hpp"
#include "sqrtpen/risk.hpp"
#include "sqrtpen/solver.hpp"
#include "sqrtpen/theory.hpp"

#ifndef SQRTPEN_TOOL_PATH
#error "SQRTPEN_TOOL_PATH must name the command-line executable"
#endif

namespace sqrtpen {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  fmt::print("{} criterion {}: {}\n", ok ? "PASS" : "FAIL", criterion, detail);
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const std::string& line) {
  fmt::print("  {}\n", line);
  std::fflush(stdout);
}

void lemma_suite() {
  const auto start = Clock::now();
  std::size_t violations = 0;
  std::size_t runs = 0;
  double worst1 = 0.0;
  double worst2 = 0.0;
  for (int d = 1; d <= 2; ++d) {
    for (int L = 1; L <= 5; ++L) {
      const BasisSystem b = make_haar_basis(d, L);
      const CheckReport r1 = check_lemma1(b, 1000, mix_seed(101, 10 * d + L));
      const CheckReport r2 = check_lemma2(b, 1000, mix_seed(102, 10 * d + L));
      violations += r1.violations + r2.violations;
      worst1 = std::max(worst1, r1.worst_ratio);
      worst2 = std::max(worst2, r2.worst_ratio);
      runs += 2;
    }
  }
  const CheckReport r5 = check_lemma5(1000, 105);
  violations += r5.violations;
  ++runs;
  const double secs = seconds_since(start);
  report(1, violations == 0 && secs < 10.0,
         fmt::format("{} lemma runs x 1000 trials, {} violations, worst ratios {:.4f} / {:.4f}, "
                     "equality gap {:.2e}, {:.2f} s",
                     runs, violations, worst1, worst2, r5.params.at("worst_equality_gap"), secs));
}

void basis_certification() {
  const double expected[3] = {2.0, 2.0, 2.475};
  bool all_ok = true;
  std::vector<std::string> lines;
  for (int d = 1; d <= 3; ++d) {
    bool passes = true;
    double minimal = 0.0;
    for (int L = 1; L <= 5; ++L) {
      const AssumptionBReport rep = verify_assumption_b(make_haar_basis(d, L), 64, mix_seed(200, 10 * d + L));
      passes = passes && rep.passed();
      if (L >= 2) minimal = std::max(minimal, rep.minimal_c_psi);
    }
    const bool matches = std::abs(minimal - expected[d - 1]) <= 1e-3;
    all_ok = all_ok && passes && matches;
    lines.push_back(fmt::format("d={}: bounds {} for L=1..5, minimal c_psi {:.6f} (expected {:.3f}) {}", d,
                                passes ? "hold" : "VIOLATED", minimal, expected[d - 1], matches ? "match" : "MISMATCH"));
  }
  report(2, all_ok, "Assumption-B certification for d = 1, 2, 3 and L <= 5");
  for (const std::string& l : lines) note(l);
}

void bracket_net() {
  const auto start = Clock::now();
  const BasisSystem b = make_haar_basis(1, 2);
  const BracketNet net = build_bracket_net(b, 1.0, 0.5, 4);
  const CheckReport cover = check_net_cover(b, net, 200, 300);
  const CardinalityCheck card = check_net_cardinality(net, 4);
  const BracketNet dense = build_densified_net(b, 1.0, 0.5, 4);
  const CardinalityCheck dense_card = check_net_cardinality(dense, 4);
  const double secs = seconds_since(start);
  report(3, cover.passed() && card.passed && !dense_card.passed && secs < 5.0,
         fmt::format("cover {}/200 ok (worst sup {:.3f} <= radius {:.3f}), ln|net| = {:.6f} <= {:.6f}, "
                     "densified ln {:.4f} > {:.4f} {}, {:.2f} s",
                     200 - cover.violations, cover.params.at("worst_sup_distance"), net.claimed_radius,
                     card.log_count, card.bound, dense_card.log_count, dense_card.bound,
                     dense_card.passed ? "NOT rejected" : "rejected", secs));
}

void solver_oracle() {
  const auto start = Clock::now();
  const BasisSystem b = make_haar_basis(1, 2);
  std::size_t matched = 0;
  std::size_t below = 0;
  std::size_t unrestricted_better = 0;
  double worst_gap = 0.0;
  const int instances = 50;
  for (int i = 0; i < instances; ++i) {
    Rng rng(mix_seed(400, i));
    const std::size_t n = 5 + rng.below(16);
    const ModelSpec m = make_binary_channel_model(sample_dyadic_edge(1, 2, mix_seed(401, i)), 0.75);
    const Dataset data = sample_dataset(m, n, mix_seed(402, i));
    PenaltyConfig pen;
    pen.c_lambda = 0.01;
    pen.lambda_n = lambda_n(n, b, 1.0, pen.c_lambda);
    SolverConfig scfg;
    scfg.lattice_M = 1.0;
    scfg.lattice_delta = 0.5;
    scfg.restarts = 5;
    scfg.seed = mix_seed(403, i);
    const FitResult global = solve_lattice(data, b, pen, scfg);
    SolverConfig restricted = scfg;
    restricted.restrict_to_lattice = true;
    const FitResult cd = solve_coordinate_descent(data, b, pen, restricted);
    const double gap = cd.objective - global.objective;
    worst_gap = std::max(worst_gap, gap);
    if (std::abs(gap) <= 1e-9) ++matched;
    if (gap < -1e-9) ++below;
    const FitResult free = solve_coordinate_descent(data, b, pen, scfg);
    if (free.objective < global.objective - 1e-9) ++unrestricted_better;
  }
  const double secs = seconds_since(start);
  const double share = static_cast<double>(matched) / instances;
  report(4, share >= 0.9 && below == 0 && secs < 60.0,
         fmt::format("lattice-restricted descent matched the 625-point lattice optimum in {}/{} instances "
                     "({:.0f}%), {} below it, worst gap {:.3g}, {:.2f} s",
                     matched, instances, 100.0 * share, below, worst_gap, secs));
  note(fmt::format("unrestricted descent beat the lattice optimum in {}/{} instances", unrestricted_better, instances));
}

void channel_identity() {
  const auto start = Clock::now();
  const double p = 0.75;
  const BasisSystem b = make_haar_basis(1, 5);
  const ModelSpec m = make_binary_channel_model(sample_dyadic_edge(1, 3, 500), p);
  const CoefficientVector star = analyze(b, m.f0);
  Rng rng(501);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const CoefficientVector a = star + (0.5 * rng.uniform()) * random_coefficients(b, rng);
    const EdgeFunction f = edge_from_coefficients(b, a);
    const double excess = excess_risk(m, f).value;
    const double mu = sym_diff_measure(f, m.f0).value;
    worst = std::max(worst, std::abs(excess - (2.0 * p - 1.0) * mu));
  }
  const double secs = seconds_since(start);
  report(5, worst <= 1e-10 && secs < 10.0,
         fmt::format("200 random alpha, max |excess - (2p-1) mu(sym diff)| = {:.3g}, {:.2f} s", worst, secs));
}

ModelSpec vc_model() { return make_binary_channel_model(sample_dyadic_edge(1, 2, 11), 0.75); }
ModelSpec holder_model() { return make_binary_channel_model(sample_holder_edge(1, 1.0, 1.0, 11), 0.75); }

SolverConfig study_solver() {
  SolverConfig s;
  s.restarts = 3;
  return s;
}

double calibrate() {
  const auto start = Clock::now();
  const std::vector<double> grid = {0.001, 0.003, 0.01, 0.03, 0.1};
  const Calibration cal =
      calibrate_c_lambda({vc_model(), holder_model()}, make_haar_basis(1, 7), 1024, 20, grid, study_solver(), 999);
  std::string scores;
  for (std::size_t i = 0; i < grid.size(); ++i) scores += fmt::format(" {}:{:.5f}", grid[i], cal.scores[i]);
  note(fmt::format("c_lambda calibration at n=1024, 20 replicates, summed mean L1:{} -> {} ({:.1f} s)", scores,
                   cal.best, seconds_since(start)));
  return cal.best;
}

void rate_criterion(int criterion, bool holder, double c_lambda) {
  const auto start = Clock::now();
  RateStudyConfig rc;
  rc.n_grid = {256, 512, 1024, 2048, 4096, 8192};
  rc.replicates = 40;
  rc.c_lambda = c_lambda;
  rc.seed = 11;
  rc.rho = holder ? 1.0 : 0.0;
  const ModelFactory factory = [holder](std::uint64_t seed) {
    const EdgeFunction f = holder ? sample_holder_edge(1, 1.0, 1.0, seed) : sample_dyadic_edge(1, 2, seed);
    return make_binary_channel_model(f, 0.75);
  };
  const RateTable t = rate_study(factory, make_haar_basis(1, 7), rc, study_solver());
  const double target = -t.predicted.l1;
  const double slope = t.l1_slope.slope;
  const double secs = seconds_since(start);
  const double limit = holder ? 1200.0 : 900.0;
  report(criterion, !t.degenerate && std::abs(slope - target) <= 0.25 && secs <= limit,
         fmt::format("{} edge: L1 slope vs ln(n/ln^4 n) = {:.3f} +- {:.3f}, target {:.2f} +- 0.25 "
                     "(slope vs ln n {:.3f}), {:.0f} s",
                     holder ? "Hoelder gamma=1" : "dyadic", slope, t.l1_slope.slope_se, target,
                     t.l1_slope_plain.slope, secs));
  for (const RateRow& r : t.rows) {
    note(fmt::format("n={:5d} lambda={:.4f} mean L1={:.5f} (se {:.5f}) excess={:.5f} restarts disagree {:.0f}%", r.n,
                     r.lambda, r.mean_l1, r.se_l1, r.mean_excess, 100.0 * r.disagreement_fraction));
  }
}

void oracle_probe(double c_lambda) {
  constexpr double kGolden = 1.0;
  const auto start = Clock::now();
  const BasisSystem b = make_haar_basis(1, 7);
  const ModelSpec m = make_binary_channel_model(sample_dyadic_edge(1, 2, 42), 0.75);
  auto freq = [&](double c) {
    return check_oracle_inequality(m, b, 512, 100, 1.0, c, study_solver(), 42).frequency;
  };
  const double f = freq(c_lambda);
  const std::vector<double> grid = {0.003, 0.01, 0.03};
  std::vector<double> trend;
  for (double c : grid) trend.push_back(c == c_lambda ? f : freq(c));
  int inversions = 0;
  for (std::size_t i = 0; i + 1 < trend.size(); ++i) inversions += trend[i] > trend[i + 1];
  report(8, std::abs(f - kGolden) <= 0.05 && inversions <= 1,
         fmt::format("event frequency {:.2f} at c_lambda {} (golden {:.2f} +- 0.05); frequencies at c = "
                     "0.003/0.01/0.03: {:.2f}/{:.2f}/{:.2f}, {} inversion(s), {:.0f} s",
                     f, c_lambda, kGolden, trend[0], trend[1], trend[2], inversions, seconds_since(start)));
}

bool same_outputs(const fs::path& a, const fs::path& b, std::string& diff) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count_b;
  if (names.empty() || names.size() != count_b) {
    diff = "file sets differ";
    return false;
  }
  for (const std::string& n : names) {
    if (!fs::exists(b / n) || read_text_file((a / n).string()) != read_text_file((b / n).string())) {
      diff = n;
      return false;
    }
  }
  return true;
}

void determinism() {
  const auto start = Clock::now();
  const fs::path root = fs::temp_directory_path() / fmt::format("sqrtpen_acceptance_{}", ::getpid());
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string tool = SQRTPEN_TOOL_PATH;
  const std::string data = (root / "data.csv").string();
  {
    const std::string cmd = fmt::format("'{}' simulate --seed 3 --n 300 --out '{}' > /dev/null", tool, (root / "seed").string());
    if (std::system(cmd.c_str()) != 0) {
      report(9, false, "could not create the fit input");
      return;
    }
    fs::copy_file(root / "seed" / "dataset.csv", data);
  }
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "--seed 7 --n 500 --p 0.8"},
      {"fit", "--seed 7 --levels 5 --data '" + data + "'"},
      {"rates", "--seed 7 --levels 4 --n-grid 32,64,128,512 --replicates 3"},
      {"checks", "--seed 7 --d 2 --levels 3"},
      {"oracle", "--seed 7 --n 64 --levels 3 --set oracle.replicates=3 --set oracle.probe_replicates=2"}};
  bool ok = true;
  std::vector<std::string> details;
  for (const auto& [name, args] : commands) {
    const fs::path a = root / (name + "_a");
    const fs::path b = root / (name + "_b");
    int codes[2];
    for (int k = 0; k < 2; ++k) {
      const std::string cmd =
          fmt::format("'{}' {} {} --out '{}' > /dev/null", tool, name, args, (k == 0 ? a : b).string());
      codes[k] = std::system(cmd.c_str());
    }
    std::string diff;
    const bool same = codes[0] == 0 && codes[1] == 0 && same_outputs(a, b, diff);
    ok = ok && same;
    details.push_back(same ? name : fmt::format("{} (DIFFERS: {})", name, diff.empty() ? "exit status" : diff));
  }
  fs::remove_all(root);
  std::string joined;
  for (const std::string& d : details) joined += (joined.empty() ? "" : ", ") + d;
  report(9, ok, fmt::format("two runs per command give byte-identical outputs: {}, {:.1f} s", joined,
                            seconds_since(start)));
}

}  // namespace
}  // namespace sqrtpen

int main() {
  using namespace sqrtpen;
  lemma_suite();
  basis_certification();
  bracket_net();
  solver_oracle();
  channel_identity();
  const double c_lambda = calibrate();
  rate_criterion(6, false, c_lambda);
  rate_criterion(7, true, c_lambda);
  oracle_probe(c_lambda);
  determinism();
  fmt::print("{} of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
