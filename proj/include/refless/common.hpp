#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace refless {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr cplx I{0.0, 1.0};

// Every failure the library can raise. Callers that only care about
// "something went wrong" catch Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PoleError : Error {
  using Error::Error;
};
struct IllConditioned : Error {
  using Error::Error;
};
struct InvalidInput : Error {
  using Error::Error;
};
struct DegenerateSet : Error {
  using Error::Error;
};
struct ConventionFault : Error {
  using Error::Error;
};
struct NumericalFault : Error {
  using Error::Error;
};

// Minimum distance a point must keep from atoms and AC piece closures
// before an evaluation is attempted on the real line or the circle.
inline constexpr double off_support_tol = 1e-8;

// Square root with Im >= 0. On the positive real axis the result is real and
// positive, which is the limit from the upper half-plane.
inline cplx sqrt_upper(cplx w) {
  cplx s = std::sqrt(w);
  if (s.imag() < 0.0) s = -s;
  return s;
}

inline double wrap_angle(double t) {
  double r = std::fmod(t, 2.0 * pi);
  if (r < 0.0) r += 2.0 * pi;
  return r;
}

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace refless
