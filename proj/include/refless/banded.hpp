#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"

namespace refless {

// Square complex band matrix with kl sub- and ku super-diagonals, solved by
// Gaussian elimination with partial pivoting. Row interchanges widen the
// upper band to kl + ku, which the storage reserves up front.
class BandMatrix {
 public:
  BandMatrix(long n, int kl, int ku) : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1), data_(n * width_, 0.0) {}

  long size() const { return n_; }
  bool in_band(long i, long j) const { return j - i <= ku_ && i - j <= kl_; }
  cplx& at(long i, long j) { return data_[i * width_ + (j - i + kl_)]; }
  cplx get(long i, long j) const { return in_band(i, j) ? data_[i * width_ + (j - i + kl_)] : cplx{}; }
  void add(long i, long j, cplx v) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) return;
    if (!in_band(i, j)) throw InvalidInput("entry outside the band");
    at(i, j) += v;
  }

  // Solves A x = rhs; A is consumed.
  std::vector<cplx> solve(std::vector<cplx> rhs) {
    const int ku2 = kl_ + ku_;
    auto el = [&](long i, long j) -> cplx& { return data_[i * width_ + (j - i + kl_)]; };
    for (long c = 0; c < n_; ++c) {
      const long last = std::min(n_ - 1, c + kl_);
      long p = c;
      for (long r = c + 1; r <= last; ++r)
        if (std::abs(el(r, c)) > std::abs(el(p, c))) p = r;
      if (el(p, c) == cplx{}) throw IllConditioned("singular band matrix");
      const long jmax = std::min(n_ - 1, c + ku2);
      if (p != c) {
        for (long j = c; j <= jmax; ++j) std::swap(el(c, j), el(p, j));
        std::swap(rhs[c], rhs[p]);
      }
      const cplx piv = el(c, c);
      for (long r = c + 1; r <= last; ++r) {
        const cplx f = el(r, c) / piv;
        if (f == cplx{}) continue;
        el(r, c) = 0.0;
        for (long j = c + 1; j <= jmax; ++j) el(r, j) -= f * el(c, j);
        rhs[r] -= f * rhs[c];
      }
    }
    std::vector<cplx> x(n_);
    for (long i = n_ - 1; i >= 0; --i) {
      cplx s = rhs[i];
      const long jmax = std::min(n_ - 1, i + ku2);
      for (long j = i + 1; j <= jmax; ++j) s -= el(i, j) * x[j];
      x[i] = s / el(i, i);
    }
    return x;
  }

 private:
  long n_;
  int kl_, ku_;
  long width_;
  std::vector<cplx> data_;
};

}  // namespace refless
