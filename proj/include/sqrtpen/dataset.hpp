#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sqrtpen {

/// Generation metadata persisted next to a dataset.
struct DatasetMeta {
  std::string model_kind;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;  // p, kappa, h, noise_bound, ...
};

/// Samples (S_i, T_i, Y_i), S in [0,1]^d, T in [0,1], Y bounded; stored flat.
class Dataset {
 public:
  explicit Dataset(int d) : d_(d) {}

  int d() const { return d_; }
  std::size_t size() const { return t_.size(); }
  bool empty() const { return t_.empty(); }

  std::span<const double> s(std::size_t i) const {
    return std::span<const double>(s_).subspan(i * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_));
  }
  double t(std::size_t i) const { return t_[i]; }
  double y(std::size_t i) const { return y_[i]; }

  /// Appends a sample after checking s and t lie in the unit cube and y is finite.
  void push_back(std::span<const double> s, double t, double y);
  void reserve(std::size_t n);

  DatasetMeta& meta() { return meta_; }
  const DatasetMeta& meta() const { return meta_; }

 private:
  int d_;
  std::vector<double> s_;
  std::vector<double> t_;
  std::vector<double> y_;
  DatasetMeta meta_;
};

}  // namespace sqrtpen
