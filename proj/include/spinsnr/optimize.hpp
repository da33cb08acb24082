#pragma once

// Small derivative-free scalar/vector optimizers and a bracketed root finder.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "spinsnr/errors.hpp"

namespace spinsnr {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Golden-section search for the maximum of a unimodal f on [a, b].
/// Stops once the bracket is narrower than `tol`.
template <class F>
ScalarOptimum golden_section_maximize(F&& f, double a, double b, double tol = 1e-12,
                                      int max_iter = 400) {
  if (a > b) std::swap(a, b);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  for (; it < max_iter && (b - a) > tol; ++it) {
    if (fc >= fd) {
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
  return fc >= fd ? ScalarOptimum{c, fc, it} : ScalarOptimum{d, fd, it};
}

/// Bisection for a root of f on [a, b]; f(a) and f(b) must not share a sign.
template <class F>
double bisect_root(F&& f, double a, double b, double tol = 1e-15, int max_iter = 200) {
  double fa = f(a);
  const double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw NumericalError("bisect_root: root is not bracketed");
  for (int i = 0; i < max_iter && std::abs(b - a) > tol; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

template <std::size_t N>
struct SimplexOptimum {
  std::array<double, N> x{};
  double value = 0.0;
  int evaluations = 0;
};

/// Nelder-Mead maximization with standard coefficients (1, 2, 1/2, 1/2).
/// Terminates when the simplex diameter falls below `xtol` or after `max_evals`.
template <std::size_t N, class F>
SimplexOptimum<N> nelder_mead_maximize(F&& f, const std::array<double, N>& x0, double initial_step,
                                       double xtol = 1e-10, int max_evals = 4000) {
  using Point = std::array<double, N>;
  std::array<Point, N + 1> pts;
  std::array<double, N + 1> val;
  int evals = 0;
  const auto eval = [&](const Point& x) {
    ++evals;
    return f(x);
  };
  pts[0] = x0;
  for (std::size_t i = 0; i < N; ++i) {
    pts[i + 1] = x0;
    pts[i + 1][i] += initial_step;
  }
  for (std::size_t i = 0; i <= N; ++i) val[i] = eval(pts[i]);

  std::array<std::size_t, N + 1> order;
  const auto combine = [](const Point& a, const Point& b, double t) {
    Point r;
    for (std::size_t k = 0; k < N; ++k) r[k] = a[k] + t * (b[k] - a[k]);
    return r;
  };

  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return val[i] > val[j]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[N - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < N; ++k) d2 += (pts[i][k] - pts[best][k]) * (pts[i][k] - pts[best][k]);
      diameter = std::max(diameter, std::sqrt(d2));
    }
    if (diameter <= xtol) break;

    Point centroid{};
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < N; ++k) centroid[k] += pts[i][k] / static_cast<double>(N);
    }

    const Point reflected = combine(centroid, pts[worst], -1.0);
    const double fr = eval(reflected);
    if (fr > val[best]) {
      const Point expanded = combine(centroid, pts[worst], -2.0);
      const double fe = eval(expanded);
      if (fe > fr) {
        pts[worst] = expanded;
        val[worst] = fe;
      } else {
        pts[worst] = reflected;
        val[worst] = fr;
      }
      continue;
    }
    if (fr > val[second_worst]) {
      pts[worst] = reflected;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr > val[worst];
    const Point contracted = combine(centroid, outside ? reflected : pts[worst], 0.5);
    const double fc = eval(contracted);
    if (fc > (outside ? fr : val[worst])) {
      pts[worst] = contracted;
      val[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == best) continue;
      pts[i] = combine(pts[best], pts[i], 0.5);
      val[i] = eval(pts[i]);
    }
  }
  const auto it = std::max_element(val.begin(), val.end());
  const auto idx = static_cast<std::size_t>(std::distance(val.begin(), it));
  return {pts[idx], val[idx], evals};
}

} // namespace spinsnr
