#include "sqrtpen/basis.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include "sqrtpen/rng.hpp"

namespace sqrtpen {

namespace {

// 2^{e/2}
double pow2_half(int e) {
  return (e % 2 == 0) ? std::ldexp(1.0, e / 2) : std::ldexp(M_SQRT2, (e - 1) / 2);
}

std::vector<std::size_t> layout_offsets(int d, int levels) {
  std::vector<std::size_t> offsets(levels + 1);
  offsets[0] = 0;
  for (int l = 1; l <= levels; ++l) offsets[l] = std::size_t{1} << (d * l);
  return offsets;
}

int level_from_offsets(std::span<const std::size_t> offsets, std::size_t k) {
  auto it = std::upper_bound(offsets.begin(), offsets.end(), k);
  if (it == offsets.begin() || it == offsets.end()) throw std::out_of_range("coefficient index out of range");
  return static_cast<int>(it - offsets.begin());
}

}  // namespace

double minimal_c_psi(int d, int levels) {
  const double two_d = std::ldexp(1.0, d);
  double c = 1.0;
  // Block 1: ||1||_1 = ||psi_0||_1 = 1 against 2^{-d/2}; sup-sum 1 + (2^d - 1) = 2^d against 2^{d/2}.
  c = std::max(c, pow2_half(d));
  if (levels >= 2) {
    // Resolution r = l - 1: ||psi||_1 = 2^{-dr/2}, sup-sum (2^d - 1) 2^{dr/2}, |I_l| = (2^d - 1) 2^{dr}.
    c = std::max(c, pow2_half(d));
    c = std::max(c, (two_d - 1.0) / pow2_half(d));
    c = std::max(c, two_d / (two_d - 1.0));
  }
  // L <= c log(2^{dL}) / d  <=>  c >= 1 / log 2.
  c = std::max(c, 1.0 / std::log(2.0));
  return c;
}

BasisSystem make_haar_basis(int d, int levels) {
  if (d < 1 || levels < 1) throw std::invalid_argument("make_haar_basis: need d >= 1 and L >= 1");
  if (static_cast<long long>(d) * levels > 62) {
    throw std::overflow_error(fmt::format("make_haar_basis: (2^{})^{} does not fit in 64 bits", d, levels));
  }
  BasisSystem b;
  b.d_ = d;
  b.levels_ = levels;
  b.offsets_ = layout_offsets(d, levels);
  b.total_ = b.offsets_.back();
  b.c_psi_ = minimal_c_psi(d, levels);
  return b;
}

int BasisSystem::level_of(std::size_t k) const { return level_from_offsets(offsets_, k); }

HaarIndex BasisSystem::describe(std::size_t k) const {
  HaarIndex idx;
  idx.level = level_of(k);
  idx.cell.assign(d_, 0);
  if (k == 0) return idx;
  // Resolution r occupies [2^{dr}, 2^{d(r+1)}).
  int r = 0;
  while ((std::size_t{1} << (d_ * (r + 1))) <= k) ++r;
  const std::size_t masks = (std::size_t{1} << d_) - 1;
  const std::size_t local = k - (std::size_t{1} << (d_ * r));
  std::size_t cell = local / masks;
  idx.resolution = r;
  idx.mask = static_cast<unsigned>(local % masks) + 1u;
  for (int i = d_ - 1; i >= 0; --i) {
    idx.cell[i] = static_cast<std::int64_t>(cell & ((std::size_t{1} << r) - 1));
    cell >>= r;
  }
  return idx;
}

double BasisSystem::evaluate(std::size_t k, std::span<const double> s) const {
  if (k >= total_) throw std::out_of_range("basis index out of range");
  if (k == 0) return 1.0;
  const HaarIndex idx = describe(k);
  const int r = idx.resolution;
  bool negative = false;
  for (int i = 0; i < d_; ++i) {
    const std::int64_t fine = axis_cell(s[i], r + 1);
    if ((fine >> 1) != idx.cell[i]) return 0.0;
    if (((idx.mask >> i) & 1u) && (fine & 1)) negative = !negative;
  }
  const double amp = pow2_half(d_ * r);
  return negative ? -amp : amp;
}

CoefficientVector::CoefficientVector(const BasisSystem& basis)
    : d_(basis.d()),
      offsets_(basis.offsets().begin(), basis.offsets().end()),
      values_(basis.total(), 0.0) {}

CoefficientVector::CoefficientVector(const BasisSystem& basis, std::vector<double> values)
    : d_(basis.d()), offsets_(basis.offsets().begin(), basis.offsets().end()), values_(std::move(values)) {
  if (values_.size() != basis.total()) {
    throw std::invalid_argument(
        fmt::format("coefficient vector has {} entries, basis has {}", values_.size(), basis.total()));
  }
}

std::span<const double> CoefficientVector::level(int l) const {
  return std::span<const double>(values_).subspan(offsets_.at(l - 1), offsets_.at(l) - offsets_.at(l - 1));
}

std::span<double> CoefficientVector::level(int l) {
  return std::span<double>(values_).subspan(offsets_.at(l - 1), offsets_.at(l) - offsets_.at(l - 1));
}

int CoefficientVector::level_of(std::size_t k) const { return level_from_offsets(offsets_, k); }

bool CoefficientVector::compatible_with(const BasisSystem& basis) const {
  return d_ == basis.d() && std::equal(offsets_.begin(), offsets_.end(), basis.offsets().begin(),
                                       basis.offsets().end());
}

bool CoefficientVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

CoefficientVector CoefficientVector::truncated(int m) const {
  CoefficientVector out = *this;
  const std::size_t keep = offsets_.at(std::clamp(m, 0, levels()));
  std::fill(out.values_.begin() + static_cast<std::ptrdiff_t>(keep), out.values_.end(), 0.0);
  return out;
}

CoefficientVector operator+(CoefficientVector a, const CoefficientVector& b) {
  if (a.offsets_ != b.offsets_) throw std::invalid_argument("coefficient layouts differ");
  for (std::size_t k = 0; k < a.values_.size(); ++k) a.values_[k] += b.values_[k];
  return a;
}

CoefficientVector operator-(CoefficientVector a, const CoefficientVector& b) {
  if (a.offsets_ != b.offsets_) throw std::invalid_argument("coefficient layouts differ");
  for (std::size_t k = 0; k < a.values_.size(); ++k) a.values_[k] -= b.values_[k];
  return a;
}

CoefficientVector operator*(double c, CoefficientVector a) {
  for (double& v : a.values_) v *= c;
  return a;
}

double synthesize(const BasisSystem& basis, const CoefficientVector& alpha, std::span<const double> s) {
  double sum = 0.0;
  basis.for_each_nonzero(s, [&](std::size_t k, double psi) { sum += alpha[k] * psi; });
  return sum;
}

DyadicTable synthesize_table(const BasisSystem& basis, const CoefficientVector& alpha, int depth) {
  if (depth < basis.finest_depth()) {
    throw std::invalid_argument("synthesize_table: grid coarser than the basis resolution");
  }
  DyadicTable out(basis.d(), depth);
  std::vector<double> mid(basis.d());
  for (std::size_t cell = 0; cell < out.size(); ++cell) {
    out.midpoint(cell, mid);
    out[cell] = synthesize(basis, alpha, mid);
  }
  return out;
}

DyadicTable synthesize_table(const BasisSystem& basis, const CoefficientVector& alpha) {
  return synthesize_table(basis, alpha, basis.finest_depth());
}

EdgeFunction edge_from_coefficients(const BasisSystem& basis, const CoefficientVector& alpha) {
  return EdgeFunction::from_table(synthesize_table(basis, alpha));
}

CoefficientVector analyze(const BasisSystem& basis, const DyadicTable& f) {
  if (f.d() != basis.d()) throw std::invalid_argument("analyze: dimension mismatch");
  if (f.depth() < basis.finest_depth()) {
    throw std::invalid_argument(
        fmt::format("analyze: representation depth {} is coarser than basis resolution {}", f.depth(),
                    basis.finest_depth()));
  }
  std::vector<long double> acc(basis.total(), 0.0L);
  std::vector<double> mid(basis.d());
  for (std::size_t cell = 0; cell < f.size(); ++cell) {
    const double v = f[cell];
    if (v == 0.0) continue;
    f.midpoint(cell, mid);
    basis.for_each_nonzero(mid, [&](std::size_t k, double psi) { acc[k] += static_cast<long double>(v) * psi; });
  }
  const long double vol = f.cell_volume();
  std::vector<double> values(basis.total());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = static_cast<double>(acc[k] * vol);
  return CoefficientVector(basis, std::move(values));
}

CoefficientVector analyze(const BasisSystem& basis, const EdgeFunction& f) {
  const int depth = std::max(basis.finest_depth(), f.table().depth());
  return analyze(basis, f.table_at(depth));
}

namespace {

int support_depth(const BasisSystem& basis, std::size_t k) {
  return k == 0 ? 0 : basis.describe(k).resolution + 1;
}

// Integral of |psi_k|^p (p = 1 or 2) on the grid where psi_k is constant.
double integrate_power(const BasisSystem& basis, std::size_t k, int p) {
  const int depth = support_depth(basis, k);
  const DyadicTable grid(basis.d(), depth);
  std::vector<double> mid(basis.d());
  long double acc = 0.0L;
  for (std::size_t cell = 0; cell < grid.size(); ++cell) {
    grid.midpoint(cell, mid);
    const double v = std::abs(basis.evaluate(k, mid));
    acc += (p == 1) ? v : v * v;
  }
  return static_cast<double>(acc * grid.cell_volume());
}

}  // namespace

double inner_product(const BasisSystem& basis, std::size_t a, std::size_t b) {
  const int depth = std::max(support_depth(basis, a), support_depth(basis, b));
  const DyadicTable grid(basis.d(), depth);
  std::vector<double> mid(basis.d());
  long double acc = 0.0L;
  for (std::size_t cell = 0; cell < grid.size(); ++cell) {
    grid.midpoint(cell, mid);
    acc += static_cast<long double>(basis.evaluate(a, mid)) * basis.evaluate(b, mid);
  }
  return static_cast<double>(acc * grid.cell_volume());
}

AssumptionBReport verify_assumption_b(const BasisSystem& basis, std::size_t sample_count,
                                      std::uint64_t seed) {
  AssumptionBReport report;
  report.d = basis.d();
  report.levels = basis.levels();
  report.stored_c_psi = basis.c_psi();
  const int d = basis.d();
  const double c = basis.c_psi();
  constexpr double kRelTol = 1e-12;
  Rng rng(seed);

  std::vector<std::size_t> checked;
  double minimal = 1.0;
  for (int l = 1; l <= basis.levels(); ++l) {
    LevelCertificate cert;
    cert.level = l;
    cert.size = basis.block_size(l);
    const std::size_t begin = basis.block_offset(l);

    std::set<std::size_t> picks;
    if (cert.size <= sample_count) {
      for (std::size_t k = begin; k < begin + cert.size; ++k) picks.insert(k);
    } else {
      picks.insert(begin);
      picks.insert(begin + cert.size - 1);
      while (picks.size() < sample_count) picks.insert(begin + rng.below(cert.size));
    }
    for (std::size_t k : picks) {
      cert.max_l1_norm = std::max(cert.max_l1_norm, integrate_power(basis, k, 1));
      const double norm2 = integrate_power(basis, k, 2);
      report.max_orthonormality_error = std::max(report.max_orthonormality_error, std::abs(norm2 - 1.0));
      checked.push_back(k);
    }

    // sum_j |psi_{j,l}| is constant on the depth-l grid.
    const DyadicTable grid(d, l);
    std::vector<double> mid(d);
    for (std::size_t cell = 0; cell < grid.size(); ++cell) {
      grid.midpoint(cell, mid);
      double sum = 0.0;
      basis.for_each_nonzero(mid, [&](std::size_t k, double psi) {
        if (k >= begin && k < begin + cert.size) sum += std::abs(psi);
      });
      cert.sup_abs_sum = std::max(cert.sup_abs_sum, sum);
    }

    const double w = pow2_half(d * l);  // 2^{dl/2}
    const double two_dl = std::ldexp(1.0, d * l);
    const double sz = static_cast<double>(cert.size);
    cert.required_c_psi = std::max({cert.max_l1_norm * w, cert.sup_abs_sum / w, two_dl / sz, sz / two_dl});
    minimal = std::max(minimal, cert.required_c_psi);

    if (cert.max_l1_norm > c / w * (1 + kRelTol)) {
      report.violations.push_back(fmt::format("level {}: ||psi||_1 = {} exceeds c_psi 2^(-dl/2) = {}", l,
                                              cert.max_l1_norm, c / w));
    }
    if (cert.sup_abs_sum > c * w * (1 + kRelTol)) {
      report.violations.push_back(fmt::format("level {}: sup-sum = {} exceeds c_psi 2^(dl/2) = {}", l,
                                              cert.sup_abs_sum, c * w));
    }
    if (two_dl / c > sz * (1 + kRelTol) || sz > c * two_dl * (1 + kRelTol)) {
      report.violations.push_back(fmt::format("level {}: |I_l| = {} outside [2^(dl)/c, c 2^(dl)]", l, cert.size));
    }
    report.per_level.push_back(cert);
  }

  const double level_bound = static_cast<double>(basis.levels()) * d / std::log(static_cast<double>(basis.total()));
  minimal = std::max(minimal, level_bound);
  if (level_bound > c * (1 + kRelTol)) {
    report.violations.push_back(fmt::format("L = {} exceeds c_psi log(n)/d", basis.levels()));
  }

  // Random pairs for orthogonality.
  for (std::size_t i = 0; i < sample_count && checked.size() > 1; ++i) {
    const std::size_t a = checked[rng.below(checked.size())];
    const std::size_t b = checked[rng.below(checked.size())];
    const double ip = inner_product(basis, a, b);
    report.max_orthonormality_error = std::max(report.max_orthonormality_error, std::abs(ip - (a == b ? 1.0 : 0.0)));
  }
  if (report.max_orthonormality_error > 1e-12) {
    report.violations.push_back(
        fmt::format("orthonormality error {} exceeds 1e-12", report.max_orthonormality_error));
  }
  report.functions_checked = checked.size();
  report.minimal_c_psi = minimal;
  if (minimal > c * (1 + kRelTol)) {
    report.violations.push_back(fmt::format("stored c_psi {} is below the measured minimum {}", c, minimal));
  }
  return report;
}

}  // namespace sqrtpen
