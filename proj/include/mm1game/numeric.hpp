#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace mm1game::numeric {

struct Maximum {
  double x;
  double value;
};

/// Golden-section search for the maximum of f on [lo, hi]; f is assumed unimodal there.
Maximum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                double tol = 1e-10, int max_iterations = 400);

/// Scans `points` evenly spaced samples of [lo, hi] (endpoints included), then refines
/// around the best sample with golden-section search. Ties keep the larger x.
Maximum bracket_and_refine(const std::function<double(double)>& f, double lo, double hi,
                           std::size_t points = 1000, double tol = 1e-10);

/// Root of a continuous f with f(lo) and f(hi) of opposite sign.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14,
              int max_iterations = 400);

}  // namespace mm1game::numeric
