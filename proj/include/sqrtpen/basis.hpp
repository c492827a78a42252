#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sqrtpen/dyadic.hpp"

namespace sqrtpen {

/// Position of one Haar function inside the tensor-product system.
struct HaarIndex {
  int level = 1;        // block l in 1..L
  int resolution = -1;  // -1 for the scaling function, otherwise r = support side exponent
  std::vector<std::int64_t> cell;  // support cell on the 2^-r grid, one index per axis
  unsigned mask = 0;    // axes carrying the mother wavelet; 0 for the scaling function
};

/// Tensor-product Haar system on [0,1]^d grouped in L level blocks.
///
/// Block 1 holds the scaling function and the resolution-0 wavelets; block l
/// (l >= 2) holds the 2^{d(l-1)} (2^d - 1) wavelets of support side 2^{-(l-1)}.
/// Inside a resolution the order is support cell (row-major) then axis mask.
/// Every function is constant on the cells of the depth-L dyadic grid.
class BasisSystem {
 public:
  int d() const { return d_; }
  int levels() const { return levels_; }
  double c_psi() const { return c_psi_; }
  std::size_t total() const { return total_; }

  /// Depth of the dyadic grid on which every basis function is constant.
  int finest_depth() const { return levels_; }

  std::size_t block_offset(int level) const { return offsets_.at(level - 1); }
  std::size_t block_size(int level) const { return offsets_.at(level) - offsets_.at(level - 1); }
  std::span<const std::size_t> offsets() const { return offsets_; }
  int level_of(std::size_t k) const;

  HaarIndex describe(std::size_t k) const;
  double evaluate(std::size_t k, std::span<const double> s) const;

  /// Calls fn(k, psi_k(s)) for every basis function that is nonzero at s, in
  /// increasing k. Exactly 1 + L (2^d - 1) calls.
  template <class Fn>
  void for_each_nonzero(std::span<const double> s, Fn&& fn) const;

  bool operator==(const BasisSystem&) const = default;

 private:
  friend BasisSystem make_haar_basis(int d, int levels);

  int d_ = 1;
  int levels_ = 1;
  double c_psi_ = 1.0;
  std::size_t total_ = 0;
  std::vector<std::size_t> offsets_;  // L + 1 entries, offsets_[l-1] = start of block l
};

/// Builds the Haar system and stores the smallest c_psi satisfying the
/// Assumption-B inequalities for it (see minimal_c_psi).
BasisSystem make_haar_basis(int d, int levels);

/// Closed-form smallest constant c >= 1 with
///   ||psi_{j,l}||_1 <= c 2^{-dl/2},  sup_s sum_j |psi_{j,l}(s)| <= c 2^{dl/2},
///   2^{dl}/c <= |I_l| <= c 2^{dl},   L <= c log(total)/d
/// for the tensor Haar system.
double minimal_c_psi(int d, int levels);

/// Level-blocked coefficients alpha_{j,l} attached to a basis layout.
class CoefficientVector {
 public:
  explicit CoefficientVector(const BasisSystem& basis);
  CoefficientVector(const BasisSystem& basis, std::vector<double> values);

  int d() const { return d_; }
  int levels() const { return static_cast<int>(offsets_.size()) - 1; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::span<const double> level(int l) const;
  std::span<double> level(int l);
  int level_of(std::size_t k) const;

  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  bool compatible_with(const BasisSystem& basis) const;
  bool all_finite() const;

  /// Copy with every level above `m` set to zero.
  CoefficientVector truncated(int m) const;

  friend CoefficientVector operator+(CoefficientVector a, const CoefficientVector& b);
  friend CoefficientVector operator-(CoefficientVector a, const CoefficientVector& b);
  friend CoefficientVector operator*(double c, CoefficientVector a);
  bool operator==(const CoefficientVector&) const = default;

 private:
  int d_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

/// f_alpha(s) = sum_{j,l} alpha_{j,l} psi_{j,l}(s).
double synthesize(const BasisSystem& basis, const CoefficientVector& alpha, std::span<const double> s);

/// f_alpha on the dyadic grid at `depth` (>= basis.finest_depth()), exact.
DyadicTable synthesize_table(const BasisSystem& basis, const CoefficientVector& alpha, int depth);
DyadicTable synthesize_table(const BasisSystem& basis, const CoefficientVector& alpha);

/// f_alpha as an edge function with its exact depth-L table.
EdgeFunction edge_from_coefficients(const BasisSystem& basis, const CoefficientVector& alpha);

/// Exact inner products <f, psi_{j,l}> of a piecewise-constant function whose
/// grid is at least as fine as the basis. Throws std::invalid_argument otherwise.
CoefficientVector analyze(const BasisSystem& basis, const DyadicTable& f);
CoefficientVector analyze(const BasisSystem& basis, const EdgeFunction& f);

/// Exact <psi_a, psi_b> by integration on the depth-L grid.
double inner_product(const BasisSystem& basis, std::size_t a, std::size_t b);

struct LevelCertificate {
  int level = 0;
  std::size_t size = 0;          // |I_l|
  double max_l1_norm = 0.0;      // max over checked j of ||psi_{j,l}||_1
  double sup_abs_sum = 0.0;      // sup_s sum_j |psi_{j,l}(s)|
  double required_c_psi = 0.0;   // smallest c meeting (3.4)-(3.6) at this level
};

struct AssumptionBReport {
  int d = 0;
  int levels = 0;
  double stored_c_psi = 0.0;
  double minimal_c_psi = 0.0;  // from the measured quantities
  double max_orthonormality_error = 0.0;
  std::size_t functions_checked = 0;
  std::vector<LevelCertificate> per_level;
  std::vector<std::string> violations;
  bool passed() const { return violations.empty(); }
};

/// Measures the Assumption-B quantities by exact dyadic integration and checks
/// them against basis.c_psi(). L1 norms and orthonormality are checked on up to
/// `sample_count` functions per level (all of them when the level is smaller)
/// plus `sample_count` random pairs; sup-sums are computed over the full grid.
AssumptionBReport verify_assumption_b(const BasisSystem& basis, std::size_t sample_count,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------

template <class Fn>
void BasisSystem::for_each_nonzero(std::span<const double> s, Fn&& fn) const {
  fn(std::size_t{0}, 1.0);
  const unsigned masks = (1u << d_) - 1u;
  for (int r = 0; r < levels_; ++r) {
    std::size_t cell = 0;
    unsigned halves = 0;
    for (int i = 0; i < d_; ++i) {
      const std::int64_t fine = axis_cell(s[i], r + 1);
      cell = (cell << r) | static_cast<std::size_t>(fine >> 1);
      halves |= static_cast<unsigned>(fine & 1) << i;
    }
    // 2^{dr/2}
    const int e = d_ * r;
    const double amp = (e % 2 == 0) ? std::ldexp(1.0, e / 2) : std::ldexp(M_SQRT2, (e - 1) / 2);
    const std::size_t base = (std::size_t{1} << (d_ * r)) + cell * masks;
    for (unsigned mask = 1; mask <= masks; ++mask) {
      const bool negative = __builtin_parity(mask & halves);
      fn(base + (mask - 1), negative ? -amp : amp);
    }
  }
}

}  // namespace sqrtpen
