#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "common.hpp"

namespace refless {

// Interpolant through values at first-kind Chebyshev points of [lo, hi],
// evaluated with the barycentric formula. The points never touch the
// endpoints, which is what lets edge-singular densities be sampled.
class Chebyshev {
 public:
  Chebyshev() = default;
  Chebyshev(double lo, double hi, std::vector<double> values) : lo_(lo), hi_(hi), v_(std::move(values)) {
    const int n = static_cast<int>(v_.size());
    x_.resize(n);
    w_.resize(n);
    for (int k = 0; k < n; ++k) {
      const double t = (2.0 * k + 1.0) * pi / (2.0 * n);
      x_[k] = std::cos(t);
      w_[k] = ((k % 2) ? -1.0 : 1.0) * std::sin(t);
    }
  }

  static std::vector<double> nodes(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * std::cos((2.0 * k + 1.0) * pi / (2.0 * n));
    return out;
  }

  double operator()(double x) const {
    if (v_.empty()) return 0.0;
    const double s = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < v_.size(); ++k) {
      const double d = s - x_[k];
      if (d == 0.0) return v_[k];
      const double c = w_[k] / d;
      num += c * v_[k];
      den += c;
    }
    return num / den;
  }

  // Chebyshev coefficients; used to decide when sampling is fine enough.
  std::vector<double> coefficients() const {
    const int n = static_cast<int>(v_.size());
    std::vector<double> c(n, 0.0);
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += v_[k] * std::cos(j * (2.0 * k + 1.0) * pi / (2.0 * n));
      c[j] = (j == 0 ? 1.0 : 2.0) * s / n;
    }
    return c;
  }

  const std::vector<double>& values() const { return v_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_ = 0.0, hi_ = 1.0;
  std::vector<double> v_, x_, w_;
};

// Doubles the sample count until the trailing Chebyshev coefficients fall
// below tol relative to the largest one.
inline Chebyshev chebyshev_adaptive(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12,
                                    int n0 = 16, int nmax = 1024) {
  Chebyshev best;
  for (int n = n0; n <= nmax; n *= 2) {
    std::vector<double> vals;
    vals.reserve(n);
    for (double x : Chebyshev::nodes(lo, hi, n)) vals.push_back(f(x));
    best = Chebyshev(lo, hi, std::move(vals));
    auto c = best.coefficients();
    double big = 0.0;
    for (double v : c) big = std::max(big, std::abs(v));
    double tail = 0.0;
    for (int j = n - 4; j < n; ++j) tail = std::max(tail, std::abs(c[j]));
    if (tail <= tol * std::max(big, 1e-300)) break;
  }
  return best;
}

}  // namespace refless
