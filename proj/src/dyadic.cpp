#include "sqrtpen/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

namespace sqrtpen {

std::int64_t axis_cell(double x, int depth) {
  const std::int64_t n = cells_per_axis(depth);
  const auto k = static_cast<std::int64_t>(std::floor(x * static_cast<double>(n)));
  return std::clamp<std::int64_t>(k, 0, n - 1);
}

namespace {

std::size_t table_size(int d, int depth) {
  if (d < 1 || depth < 0) throw std::invalid_argument("dyadic table: need d >= 1, depth >= 0");
  if (static_cast<long long>(d) * depth > 40) {
    throw std::length_error("dyadic table: 2^(d*depth) cells is too large");
  }
  return std::size_t{1} << (d * depth);
}

}  // namespace

DyadicTable::DyadicTable(int d, int depth)
    : d_(d), depth_(depth), values_(table_size(d, depth), 0.0) {}

DyadicTable::DyadicTable(int d, int depth, std::vector<double> values)
    : d_(d), depth_(depth), values_(std::move(values)) {
  if (values_.size() != table_size(d, depth)) {
    throw std::invalid_argument("dyadic table: value count does not match 2^(d*depth)");
  }
}

DyadicTable DyadicTable::constant(int d, double value) {
  return DyadicTable(d, 0, std::vector<double>{value});
}

double DyadicTable::cell_volume() const { return std::ldexp(1.0, -d_ * depth_); }

std::size_t DyadicTable::cell_of(std::span<const double> s) const {
  std::size_t cell = 0;
  for (int i = 0; i < d_; ++i) {
    cell = (cell << depth_) | static_cast<std::size_t>(axis_cell(s[i], depth_));
  }
  return cell;
}

void DyadicTable::midpoint(std::size_t cell, std::span<double> out) const {
  const double h = std::ldexp(1.0, -depth_);
  const std::size_t mask = (std::size_t{1} << depth_) - 1;
  for (int i = d_ - 1; i >= 0; --i) {
    out[i] = (static_cast<double>(cell & mask) + 0.5) * h;
    cell >>= depth_;
  }
}

DyadicTable DyadicTable::refined(int depth) const {
  if (depth < depth_) throw std::invalid_argument("dyadic table: cannot refine to a coarser depth");
  if (depth == depth_) return *this;
  DyadicTable out(d_, depth);
  const int shift = depth - depth_;
  const std::size_t fine_mask = (std::size_t{1} << depth) - 1;
  for (std::size_t cell = 0; cell < out.size(); ++cell) {
    std::size_t coarse = 0;
    for (int pos = 0; pos < d_; ++pos) {
      const std::size_t k = (cell >> (pos * depth)) & fine_mask;
      coarse |= (k >> shift) << (pos * depth_);
    }
    out.values_[cell] = values_[coarse];
  }
  return out;
}

EdgeFunction::EdgeFunction() : EdgeFunction(constant(1, 0.0)) {}

EdgeFunction::EdgeFunction(int d, Evaluator eval, std::optional<DyadicTable> table)
    : d_(d), eval_(std::move(eval)), table_(std::move(table)) {
  if (d < 1) throw std::invalid_argument("edge function: d must be >= 1");
  if (table_ && table_->d() != d) throw std::invalid_argument("edge function: table dimension mismatch");
}

EdgeFunction EdgeFunction::from_table(DyadicTable table) {
  const int d = table.d();
  auto shared = std::make_shared<const DyadicTable>(table);
  return EdgeFunction(
      d, [shared](std::span<const double> s) { return shared->value_at(s); }, std::move(table));
}

EdgeFunction EdgeFunction::constant(int d, double value) {
  return from_table(DyadicTable::constant(d, value));
}

const DyadicTable& EdgeFunction::table() const {
  if (!table_) throw std::logic_error("edge function has no dyadic representation");
  return *table_;
}

DyadicTable EdgeFunction::table_at(int depth) const {
  const DyadicTable& t = table();
  if (depth < t.depth()) {
    throw std::invalid_argument("edge function: representation is finer than requested depth");
  }
  return t.refined(depth);
}

int common_depth(const DyadicTable& a, const DyadicTable& b) {
  if (a.d() != b.d()) throw std::invalid_argument("dyadic tables have different dimensions");
  return std::max(a.depth(), b.depth());
}

}  // namespace sqrtpen
