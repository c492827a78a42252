#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sqrtpen {

/// Number of cells per axis at a given dyadic depth.
inline std::int64_t cells_per_axis(int depth) { return std::int64_t{1} << depth; }

/// Index of the depth-`depth` cell containing coordinate x in [0,1]. Cells are
/// half-open [k 2^-depth, (k+1) 2^-depth) except the last, which includes 1.
std::int64_t axis_cell(double x, int depth);

/// Values of a function that is constant on the cells of the dyadic grid of
/// side 2^-depth in [0,1]^d. Cells are stored in row-major order with
/// coordinate 0 most significant.
class DyadicTable {
 public:
  DyadicTable() = default;
  DyadicTable(int d, int depth);
  DyadicTable(int d, int depth, std::vector<double> values);

  static DyadicTable constant(int d, double value);

  int d() const { return d_; }
  int depth() const { return depth_; }
  std::size_t size() const { return values_.size(); }
  double cell_volume() const;

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t cell) const { return values_[cell]; }
  double& operator[](std::size_t cell) { return values_[cell]; }

  std::size_t cell_of(std::span<const double> s) const;
  double value_at(std::span<const double> s) const { return values_[cell_of(s)]; }

  /// Midpoint of a cell, written into `out` (size d).
  void midpoint(std::size_t cell, std::span<double> out) const;

  /// The same function on a finer grid. Throws if depth < this->depth().
  DyadicTable refined(int depth) const;

 private:
  int d_ = 0;
  int depth_ = 0;
  std::vector<double> values_;
};

/// An edge function [0,1]^d -> R, optionally carrying an exact dyadic table.
/// When a table is present the evaluator agrees with it at cell midpoints.
class EdgeFunction {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  /// The zero edge on [0,1].
  EdgeFunction();
  EdgeFunction(int d, Evaluator eval, std::optional<DyadicTable> table = std::nullopt);

  /// Piecewise-constant edge whose evaluator is table lookup.
  static EdgeFunction from_table(DyadicTable table);
  static EdgeFunction constant(int d, double value);

  int d() const { return d_; }
  double operator()(std::span<const double> s) const { return eval_(s); }
  bool has_table() const { return table_.has_value(); }
  const DyadicTable& table() const;

  /// Table at `depth`, refining the stored table when it is coarser.
  DyadicTable table_at(int depth) const;

 private:
  int d_;
  Evaluator eval_;
  std::optional<DyadicTable> table_;
};

/// max(a.depth, b.depth) after checking dimensions match.
int common_depth(const DyadicTable& a, const DyadicTable& b);

}  // namespace sqrtpen
