#include "sqrtpen/dataset.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace sqrtpen {

void Dataset::push_back(std::span<const double> s, double t, double y) {
  if (s.size() != static_cast<std::size_t>(d_)) {
    throw std::invalid_argument(fmt::format("dataset: sample has {} coordinates, expected {}", s.size(), d_));
  }
  for (double x : s) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(fmt::format("dataset: s coordinate {} outside [0,1]", x));
  }
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument(fmt::format("dataset: t = {} outside [0,1]", t));
  if (!std::isfinite(y)) throw std::invalid_argument("dataset: y must be finite");
  s_.insert(s_.end(), s.begin(), s.end());
  t_.push_back(t);
  y_.push_back(y);
}

void Dataset::reserve(std::size_t n) {
  s_.reserve(n * static_cast<std::size_t>(d_));
  t_.reserve(n);
  y_.reserve(n);
}

}  // namespace sqrtpen
