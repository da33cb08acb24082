#pragma once

// The Ernst solution: the best single-bang cycle, its flip angle, and the
// numerical checks that it maximizes Q over the whole half-disk.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "spinsnr/bloch.hpp"
#include "spinsnr/errors.hpp"
#include "spinsnr/optimize.hpp"
#include "spinsnr/parallel.hpp"
#include "spinsnr/qsurface.hpp"
#include "spinsnr/synthesis.hpp"

namespace spinsnr {

struct ErnstSolution {
  BlochState m;
  BlochState s;
  double q = 0.0;
  double flip = 0.0;  ///< rotate(s, flip) == m; equals theta_s - theta_m
};

/// Closed form:
///   z_m  = 1 / (1 + e^gamma)
///   y_m  = e^Gamma / (1 + e^gamma) * sqrt((e^{2 gamma} - 1) / (e^{2 Gamma} - 1))
///   cos(flip) = (e^-gamma + e^-Gamma) / (1 + e^{-Gamma - gamma})
/// y_m is evaluated as sqrt(tanh(gamma/2) / (1 - e^{-2 Gamma})), which is the
/// same number without overflow for large rates.
inline ErnstSolution ernst_solution(const RelaxationPair& p) {
  const double G = p.gamma_t2;
  const double g = p.gamma_t1;
  ErnstSolution e;
  e.m.z = 1.0 / (1.0 + std::exp(g));
  e.m.y = std::sqrt(std::tanh(0.5 * g) / -std::expm1(-2.0 * G));
  e.s = relax(e.m, 1.0, p);
  e.q = e.m.y;
  e.flip = std::acos((std::exp(-g) + std::exp(-G)) / (1.0 + std::exp(-G - g)));
  return e;
}

/// Maximizes y along the Ernst ellipsoid in the z parameterization:
/// golden-section on z, then the first-order condition d(residual)/dz = 0 at
/// fixed y (equivalent to dy/dz = 0 on the curve) is solved by bisection
/// using central differences of the residual.
inline ErnstSolution maximize_on_ellipsoid(const RelaxationPair& p) {
  const double z_lo = ernst_curve_z_min(p);
  const auto y_of = [&](double z) { return ernst_curve_y(z, p); };
  const auto coarse = golden_section_maximize(y_of, z_lo, 1.0, 1e-12);

  const double h = 1e-4;
  const double y_ref = coarse.value;
  const auto foc = [&](double z) {
    return (ernst_ellipsoid_residual({y_ref, z + h}, p) - ernst_ellipsoid_residual({y_ref, z - h}, p)) /
           (2.0 * h);
  };
  double half = 1e-6;
  double a = coarse.x - half;
  double b = coarse.x + half;
  while ((foc(a) > 0.0) == (foc(b) > 0.0)) {
    half *= 2.0;
    if (half > 1.0) throw NumericalError("maximize_on_ellipsoid: failed to bracket the optimum");
    a = std::max(z_lo, coarse.x - half);
    b = std::min(1.0, coarse.x + half);
  }
  const double z_star = bisect_root(foc, a, b, 1e-15);

  ErnstSolution e;
  e.m = {y_of(z_star), z_star};
  e.s = relax(e.m, 1.0, p);
  e.q = e.m.y;
  e.flip = e.s.theta() - e.m.theta();
  return e;
}

struct GlobalMaximum {
  BlochState m;
  double q = 0.0;
  ControlStructure structure = ControlStructure::B;
  double coarse_q = 0.0;  ///< best lattice value before refinement
};

namespace detail {

// Q extended by a penalty outside the open half-disk.
inline double q_or_penalty(const std::array<double, 2>& x, const RelaxationPair& p) {
  const BlochState m{x[0], x[1]};
  if (!(m.y >= 0.0) || !(m.radius_squared() < 1.0)) return -1.0 - m.radius_squared();
  return q_value(m, p).q;
}

} // namespace detail

/// Global maximum of Q over the open half-disk. A coarse_n^2 lattice scan
/// seeds Nelder-Mead (restarted until it stops improving) from the best five
/// cells. Q has a kink along the Ernst ellipsoid, where simplex steps stall;
/// a final 1-D golden-section along that boundary is accepted only if it
/// improves on the simplex result.
inline GlobalMaximum maximize_q_global(const RelaxationPair& p, int coarse_n = 512) {
  if (coarse_n < 64) throw DomainError("maximize_q_global: coarse_n must be at least 64");
  const auto grid = q_grid(p, coarse_n, coarse_n);

  std::vector<std::size_t> idx(grid.samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const std::size_t n_starts = std::min<std::size_t>(5, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_starts), idx.end(),
                    [&](auto a, auto b) { return grid.samples[a].q > grid.samples[b].q; });

  const auto f = [&](const std::array<double, 2>& x) { return detail::q_or_penalty(x, p); };
  const double cell = 2.0 / coarse_n;

  std::vector<SimplexOptimum<2>> results(n_starts);
  parallel_for(n_starts, [&](std::size_t k) {
    const auto& start = grid.samples[idx[k]].m;
    SimplexOptimum<2> best{{start.y, start.z}, f({start.y, start.z}), 0};
    double step = cell;
    for (int restart = 0; restart < 60 && step >= 1e-10; ++restart) {
      const auto r = nelder_mead_maximize<2>(f, best.x, step, 1e-12, 4000);
      if (r.value > best.value) {
        const double moved = std::hypot(r.x[0] - best.x[0], r.x[1] - best.x[1]);
        step = std::clamp(4.0 * moved, 1e-10, cell);
        best = r;
      } else {
        step *= 0.25;
      }
    }
    results[k] = best;
  });

  const auto best_it = std::max_element(results.begin(), results.end(),
                                        [](const auto& a, const auto& b) { return a.value < b.value; });
  GlobalMaximum out;
  out.m = {best_it->x[0], best_it->x[1]};
  out.q = best_it->value;
  out.coarse_q = grid.samples[idx[0]].q;

  // Polish along the Ernst boundary near the simplex optimum.
  const double z_lo = ernst_curve_z_min(p);
  const double z_c = std::clamp(out.m.z, z_lo, 1.0);
  const double lo = std::max(z_lo, z_c - 4.0 * cell);
  const double hi = std::min(1.0 - 1e-12, z_c + 4.0 * cell);
  const auto along = [&](double z) {
    const BlochState m{ernst_curve_y(z, p), z};
    return f({m.y, m.z});
  };
  const auto ridge = golden_section_maximize(along, lo, hi, 1e-12);
  // A simplex optimum tagged B sits inside the classification band around the
  // curve, where Q = y can exceed the on-curve value by ~eps; the ridge wins.
  if (ridge.value >= out.q || classify(out.m, p) == ControlStructure::B) {
    out.m = {ernst_curve_y(ridge.x, p), ridge.x};
    out.q = ridge.value;
  }
  out.structure = classify(out.m, p);
  return out;
}

struct PhaseCell {
  double gamma = 0.0;
  double Gamma = 0.0;
  double q_ernst = std::numeric_limits<double>::quiet_NaN();
  SynthesisRegime regime = SynthesisRegime::C;
  bool physical = false;
};

struct PhaseDiagram {
  int n_gamma = 0;
  int n_Gamma = 0;
  std::vector<PhaseCell> cells;  ///< row-major, Gamma outer, gamma inner
  std::vector<std::array<double, 2>> boundary_bc;    ///< (gamma, 3 gamma / 2)
  std::vector<std::array<double, 2>> boundary_ab;    ///< (gamma, Gamma_ab(gamma))
  std::vector<std::array<double, 2>> physical_line;  ///< (gamma, gamma / 2)
};

inline double lattice_point(double lo, double hi, int k, int n) {
  return n == 1 ? lo : std::lerp(lo, hi, static_cast<double>(k) / static_cast<double>(n - 1));
}

/// Ernst Q over a (gamma, Gamma) lattice with endpoints included. Cells with
/// 2 Gamma < gamma are flagged non-physical and carry NaN.
inline PhaseDiagram q_max_surface(std::array<double, 2> gamma_range, std::array<double, 2> Gamma_range,
                                  int n_gamma, int n_Gamma) {
  if (n_gamma < 1 || n_Gamma < 1) throw DomainError("q_max_surface: counts must be positive");
  if (!(gamma_range[0] > 0.0 && gamma_range[1] >= gamma_range[0] && Gamma_range[0] > 0.0 &&
        Gamma_range[1] >= Gamma_range[0])) {
    throw DomainError("q_max_surface: ranges must be positive and ordered");
  }
  PhaseDiagram d;
  d.n_gamma = n_gamma;
  d.n_Gamma = n_Gamma;
  d.cells.resize(static_cast<std::size_t>(n_gamma) * static_cast<std::size_t>(n_Gamma));
  parallel_for(d.cells.size(), [&](std::size_t k) {
    const int j = static_cast<int>(k / static_cast<std::size_t>(n_gamma));
    const int i = static_cast<int>(k % static_cast<std::size_t>(n_gamma));
    PhaseCell c;
    c.gamma = lattice_point(gamma_range[0], gamma_range[1], i, n_gamma);
    c.Gamma = lattice_point(Gamma_range[0], Gamma_range[1], j, n_Gamma);
    const RelaxationPair p{c.Gamma, c.gamma};
    c.physical = p.physical();
    c.regime = regime(p);
    if (c.physical) c.q_ernst = ernst_solution(p).q;
    d.cells[k] = c;
  });
  for (int i = 0; i < n_gamma; ++i) {
    const double g = lattice_point(gamma_range[0], gamma_range[1], i, n_gamma);
    const auto b = regime_boundaries(g);
    d.boundary_bc.push_back({g, b.gamma_bc});
    d.boundary_ab.push_back({g, b.gamma_ab});
    d.physical_line.push_back({g, 0.5 * g});
  }
  return d;
}

} // namespace spinsnr
