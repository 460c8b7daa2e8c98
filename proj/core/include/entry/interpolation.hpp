#pragma once

#include <span>
#include <vector>

namespace entry {

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes) over a
/// strictly increasing abscissa. Preserves monotonicity of the data between nodes
/// and reproduces node values exactly.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] double derivative(double x) const;

  [[nodiscard]] double front() const { return x_.front(); }
  [[nodiscard]] double back() const { return x_.back(); }
  [[nodiscard]] bool empty() const { return x_.empty(); }

  /// Index i such that x_[i] <= x <= x_[i+1]; x must be inside [front, back].
  [[nodiscard]] std::size_t segment(double x) const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

}  // namespace entry
