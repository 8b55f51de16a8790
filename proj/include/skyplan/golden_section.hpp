#pragma once

#include <cmath>
#include <utility>

namespace skyplan {

template <class T>
struct ScalarMinimum {
  T x;
  double value;
};

/// Golden-section minimization of a unimodal function on [lo, hi]. The
/// endpoints are evaluated too, so monotone functions return the exact
/// boundary minimizer.
template <class F>
ScalarMinimum<double> golden_section_minimize(F&& f, double lo, double hi, double rel_tol = 1e-12,
                                              int max_iter = 200) {
  if (!(hi > lo)) return {lo, f(lo)};
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > rel_tol * (std::abs(a) + std::abs(b)) + 1e-300; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  ScalarMinimum<double> best{fc <= fd ? c : d, fc <= fd ? fc : fd};
  const double flo = f(lo), fhi = f(hi);
  if (flo <= best.value) best = {lo, flo};
  if (fhi < best.value) best = {hi, fhi};
  return best;
}

/// Largest x in [lo, hi] with pred(x) true, assuming pred(lo) holds and pred
/// is monotone (true then false).
template <class P>
double bisect_last_true(P&& pred, double lo, double hi, int iters = 200) {
  if (pred(hi)) return hi;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (pred(mid) ? lo : hi) = mid;
  }
  return lo;
}

/// Smallest x in [lo, hi] with pred(x) true, assuming pred(hi) holds and pred
/// is monotone (false then true).
template <class P>
double bisect_first_true(P&& pred, double lo, double hi, int iters = 200) {
  if (pred(lo)) return lo;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace skyplan
