#pragma once

#include <cmath>
#include <limits>

#include "ddw/errors.hpp"

namespace ddw {

/// Bisection for an increasing predicate-like function: returns the smallest x in
/// [lo, hi] (to bracket resolution) with f(x) >= 0. Requires f(lo) < 0 <= f(hi).
template <class F>
double bisect_increasing(F&& f, double lo, double hi, int max_iter = 200) {
  for (int k = 0; k < max_iter; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Same as bisect_increasing but bisects in log(x); lo, hi > 0.
template <class F>
double bisect_increasing_log(F&& f, double lo, double hi, int max_iter = 200) {
  double a = std::log(lo);
  double b = std::log(hi);
  for (int k = 0; k < max_iter; ++k) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (f(std::exp(mid)) >= 0.0) {
      b = mid;
    } else {
      a = mid;
    }
  }
  return std::exp(b);
}

/// Expands hi geometrically until f(hi) >= 0. Throws NumericError when the bracket
/// cannot be closed below `limit`.
template <class F>
double expand_upper(F&& f, double hi, double factor, double limit) {
  while (f(hi) < 0.0) {
    hi *= factor;
    if (!(hi < limit)) throw NumericError("expand_upper: no sign change below limit");
  }
  return hi;
}

}  // namespace ddw
