#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace vpdisp {

// Pairwise (cascade) summation. The association order depends only on the
// length of the input, so results are reproducible regardless of threading.
double pairwise_sum(std::span<const double> values);

inline double pairwise_sum(const Eigen::ArrayXd& values) {
  return pairwise_sum(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

inline double pairwise_sum(const std::vector<double>& values) {
  return pairwise_sum(std::span<const double>(values));
}

/// Running sum with Neumaier compensation, for prefix sums that must be sequential.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace vpdisp
