#include "mm1game/numeric.hpp"

#include <algorithm>

#include "mm1game/errors.hpp"

namespace mm1game::numeric {

Maximum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                double tol, int max_iterations) {
  if (hi < lo) std::swap(lo, hi);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iterations && (hi - lo) > tol; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  // Report the best point seen among the final bracket's ends and probes.
  Maximum best{d, fd};
  for (double x : {c, lo, hi}) {
    const double v = f(x);
    if (v > best.value || (v == best.value && x > best.x)) best = {x, v};
  }
  return best;
}

Maximum bracket_and_refine(const std::function<double(double)>& f, double lo, double hi,
                           std::size_t points, double tol) {
  if (hi < lo) std::swap(lo, hi);
  points = std::max<std::size_t>(points, 3);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  std::size_t best_k = 0;
  double best_v = -INFINITY;
  for (std::size_t k = 0; k < points; ++k) {
    const double x = k + 1 == points ? hi : lo + step * static_cast<double>(k);
    const double v = f(x);
    if (v >= best_v) {
      best_v = v;
      best_k = k;
    }
  }
  const double left = lo + step * static_cast<double>(best_k == 0 ? 0 : best_k - 1);
  const double right = best_k + 1 >= points ? hi : lo + step * static_cast<double>(best_k + 1);
  const double grid_x = best_k + 1 == points ? hi : lo + step * static_cast<double>(best_k);
  Maximum refined = golden_section_maximize(f, left, right, tol);
  if (refined.value >= best_v) return refined;
  return {grid_x, best_v};
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol,
              int max_iterations) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw InvalidArgument("bisection interval does not bracket a root");
  }
  for (int it = 0; it < max_iterations && (hi - lo) > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mm1game::numeric
