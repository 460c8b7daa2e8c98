#include "entry/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace entry {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw std::invalid_argument("MonotoneCubic: need at least two matching nodes");
  }
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = x_[i + 1] - x_[i];
    if (!(h > 0.0)) throw std::invalid_argument("MonotoneCubic: abscissa not increasing");
    delta[i] = (y_[i + 1] - y_[i]) / h;
  }
  m_.assign(n, 0.0);
  // three-point one-sided end slopes; fall back to the secant with two nodes
  if (n > 2) {
    const double h0 = x_[1] - x_[0];
    const double h1 = x_[2] - x_[1];
    m_.front() = ((2.0 * h0 + h1) * delta[0] - h0 * delta[1]) / (h0 + h1);
    const double hn = x_[n - 1] - x_[n - 2];
    const double hm = x_[n - 2] - x_[n - 3];
    m_.back() = ((2.0 * hn + hm) * delta[n - 2] - hn * delta[n - 3]) / (hn + hm);
  } else {
    m_.front() = m_.back() = delta.front();
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      m_[i] = 0.0;
      continue;
    }
    // parabolic slope, clipped to the Fritsch-Carlson box (Hyman filter)
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    const double m = (h1 * delta[i - 1] + h0 * delta[i]) / (h0 + h1);
    const double cap = 3.0 * std::min(std::abs(delta[i - 1]), std::abs(delta[i]));
    m_[i] = std::copysign(std::min(std::abs(m), cap), m);
  }
  // endpoint slopes must not break monotonicity of the end intervals
  auto fix_end = [](double& m, double d, double d_next) {
    if (m * d <= 0.0) m = 0.0;
    else if (d * d_next <= 0.0 && std::abs(m) > 3.0 * std::abs(d)) m = 3.0 * d;
  };
  if (n > 2) {
    fix_end(m_.front(), delta.front(), delta[1]);
    fix_end(m_.back(), delta.back(), delta[n - 3]);
  }
}

std::size_t MonotoneCubic::segment(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double d00 = (6.0 * t2 - 6.0 * t) / h;
  const double d10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double d01 = (-6.0 * t2 + 6.0 * t) / h;
  const double d11 = 3.0 * t2 - 2.0 * t;
  return d00 * y_[i] + d10 * m_[i] + d01 * y_[i + 1] + d11 * m_[i + 1];
}

}  // namespace entry
