#pragma once

// Numerical cross-checks for the closed forms: cycle-map fixed points, the
// delta-pulse flip-angle sweep, event-stopped RK4 travel times, and full
// finite-amplitude simulation of each optimal structure.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "spinsnr/bloch.hpp"
#include "spinsnr/errors.hpp"
#include "spinsnr/optimize.hpp"
#include "spinsnr/qsurface.hpp"
#include "spinsnr/synthesis.hpp"
#include "spinsnr/trajectory.hpp"

namespace spinsnr {

/// Ideal instantaneous rotation by `flip` (rotate() convention).
struct DeltaPulse {
  double flip = 0.0;
};

/// Constant rotation rate; positive amplitude tips +z toward +y (u = -amplitude).
struct ConstantPulse {
  double amplitude = 0.0;
  double duration = 0.0;
};

/// Feedback u = -gamma (1 - z0) / y holding z at the magic plane.
struct MagicFeedback {
  double duration = 0.0;
};

/// u = 0.
struct FreeEvolution {
  double duration = 0.0;
};

using ShapedSegment = std::variant<ConstantPulse, MagicFeedback, FreeEvolution>;

struct ShapedPulse {
  std::vector<ShapedSegment> segments;

  double duration() const {
    double t = 0.0;
    for (const auto& s : segments) std::visit([&](const auto& seg) { t += seg.duration; }, s);
    return t;
  }
};

using PulsePolicy = std::variant<DeltaPulse, ShapedPulse>;

namespace detail {

inline double magic_feedback(const BlochState& s, const RelaxationPair& p) {
  const auto plane = magic_plane(p);
  if (!plane.z0) throw DomainError("magic-plane feedback requires Gamma > gamma");
  if (!(s.y > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return -p.gamma_t1 * (1.0 - *plane.z0) / s.y;
}

/// Keeps the relative change of y^2 per step near 5% where the feedback
/// u ~ 1/y becomes singular.
inline auto magic_step_limit(const RelaxationPair& p) {
  const double z0 = magic_plane(p).z0.value();
  const double rate = p.gamma_t1 * (1.0 - z0) * std::abs(z0);
  return [rate](const BlochState& s) { return 0.05 * s.y * s.y / rate; };
}

} // namespace detail

/// Control period of the cycle applied to S, returning the post-control state.
inline BlochState apply_policy(const PulsePolicy& policy, BlochState s, const RelaxationPair& p,
                               double step = kDefaultStep) {
  if (const auto* d = std::get_if<DeltaPulse>(&policy)) return rotate(s, d->flip);
  for (const auto& seg : std::get<ShapedPulse>(policy).segments) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, ConstantPulse>) {
            const double u = -v.amplitude;
            const double h = v.amplitude != 0.0 ? std::min(step, 0.02 / std::abs(v.amplitude)) : step;
            s = integrate(s, p, [u](double) { return u; }, v.duration, h);
          } else if constexpr (std::is_same_v<T, MagicFeedback>) {
            s = integrate(s, p, [&p](double, const BlochState& x) { return detail::magic_feedback(x, p); },
                          v.duration, step);
          } else {
            s = integrate(s, p, [](double) { return 0.0; }, v.duration, step);
          }
        },
        seg);
  }
  return s;
}

struct CycleFixedPoint {
  BlochState s;
  BlochState m;
  int iterations = 0;
  double residual = 0.0;
};

/// Iterates S <- relax(apply(policy, S), 1) from thermal equilibrium until
/// successive iterates differ by at most `tol`. Throws ConvergenceError
/// (carrying the last residual) after `max_iter` iterations.
inline CycleFixedPoint cycle_fixed_point(const PulsePolicy& policy, const RelaxationPair& p,
                                         double tol = 1e-13, int max_iter = 100000,
                                         double step = kDefaultStep) {
  if (!(tol > 0.0)) throw DomainError("cycle_fixed_point: tol must be positive");
  BlochState s{0.0, 1.0};
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    const BlochState m = apply_policy(policy, s, p, step);
    const BlochState next = relax(m, 1.0, p);
    residual = distance(next, s);
    s = next;
    if (residual <= tol) return {s, apply_policy(policy, s, p, step), it, residual};
  }
  throw ConvergenceError("cycle_fixed_point: no convergence within max_iter", residual);
}

struct AffineFixedPoint {
  BlochState s;
  BlochState m;
};

/// Delta-pulse steady state solved directly: S = D R S + d with
/// D = diag(e^-Gamma, e^-gamma), d = (0, 1 - e^-gamma), R = rotation by `flip`.
inline AffineFixedPoint affine_fixed_point(double flip, const RelaxationPair& p) {
  const double e2 = std::exp(-p.gamma_t2);
  const double e1 = std::exp(-p.gamma_t1);
  const double c = std::cos(flip);
  const double sn = std::sin(flip);
  // (I - D R) with R = [[c, s], [-s, c]]
  const double a11 = 1.0 - e2 * c;
  const double a12 = -e2 * sn;
  const double a21 = e1 * sn;
  const double a22 = 1.0 - e1 * c;
  const double b1 = 0.0;
  const double b2 = -std::expm1(-p.gamma_t1);
  const double det = a11 * a22 - a12 * a21;
  const BlochState s{(b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det};
  return {s, rotate(s, flip)};
}

struct FlipSweep {
  double flip = 0.0;
  double q = 0.0;
  std::vector<std::pair<double, double>> table;  ///< (flip, q) on the uniform grid
};

/// Q(flip) = y_m of the delta-pulse steady state (T_c = 0) on an n-point grid
/// over [0, pi], refined by golden-section around the best grid cell.
inline FlipSweep sweep_delta_pulse(const RelaxationPair& p, int n = 1000) {
  if (n < 100) throw DomainError("sweep_delta_pulse: need at least 100 grid points");
  const auto q_of = [&](double flip) { return affine_fixed_point(flip, p).m.y; };
  FlipSweep out;
  out.table.reserve(static_cast<std::size_t>(n));
  std::size_t best = 0;
  for (int k = 0; k < n; ++k) {
    const double flip = std::numbers::pi * k / (n - 1);
    out.table.emplace_back(flip, q_of(flip));
    if (out.table.back().second > out.table[best].second) best = out.table.size() - 1;
  }
  const double lo = out.table[best == 0 ? 0 : best - 1].first;
  const double hi = out.table[std::min(best + 1, out.table.size() - 1)].first;
  const auto refined = golden_section_maximize(q_of, lo, hi, 1e-13);
  out.flip = refined.x;
  out.q = refined.value;
  return out;
}

/// Free flow on the z axis from z1 up to z2, stopped on z = z2.
inline double time_vertical_rk4(double z1, double z2, const RelaxationPair& p, double step = kDefaultStep) {
  if (!(z1 <= z2) || !(z2 < 1.0)) throw DomainError("time_vertical_rk4: need z1 <= z2 < 1");
  const auto hit = integrate_until({0.0, z1}, p, [](double) { return 0.0; },
                                   [z2](const BlochState& s) { return z2 - s.z; }, step, 1e4);
  if (!hit.hit) throw IntegrationError("time_vertical_rk4: event not reached");
  return hit.time;
}

/// Stopping floor for the magic-plane feedback, which is singular at y = 0.
inline constexpr double kMagicFloor = 1e-8;

/// Feedback-held flow on the magic plane from y1 down to y2. Below
/// kMagicFloor the analytic remainder is added.
inline double time_magic_rk4(double y1, double y2, const RelaxationPair& p, double step = kDefaultStep) {
  const auto plane = magic_plane(p);
  if (!plane.present) throw DomainError("time_magic_rk4: magic plane absent");
  if (!(y1 >= y2) || !(y2 >= 0.0)) throw DomainError("time_magic_rk4: need y1 >= y2 >= 0");
  const double stop = std::max(y2, kMagicFloor);
  if (y1 <= stop) return time_magic(y1, y2, p);
  const auto hit = integrate_until(
      {y1, *plane.z0}, p, [&p](double, const BlochState& s) { return detail::magic_feedback(s, p); },
      [stop](const BlochState& s) { return s.y - stop; }, step, 1e4, detail::magic_step_limit(p));
  if (!hit.hit) throw IntegrationError("time_magic_rk4: event not reached");
  return hit.time + (y2 < stop ? time_magic(std::max(hit.state.y, y2), y2, p) : 0.0);
}

struct StructureSimulation {
  ControlStructure structure = ControlStructure::B;
  double t_control = 0.0;       ///< realized duration, bangs included
  double terminal_error = 0.0;  ///< |final state - M|
  BlochState final_state;
};

/// Realizes the optimal trajectory of M with finite-amplitude bangs (rate
/// `bang_amplitude`, each retargeted from the current state) and feedback
/// singular arcs, integrated with RK4 from S = relax(M, 1). Arcs stop on the
/// target radius; the magic leg towards y = 0 stops at kMagicFloor.
inline StructureSimulation simulate_structure(const BlochState& m, const RelaxationPair& p,
                                              double bang_amplitude, double step = 1e-5) {
  if (!(bang_amplitude > 0.0)) throw DomainError("simulate_structure: bang amplitude must be positive");
  const Trajectory tr = optimal_trajectory(m, p);
  BlochState s = tr.s;
  double t = 0.0;
  const double bang_step = std::min(step, 0.02 / bang_amplitude);
  for (const auto& seg : tr.segments) {
    switch (seg.kind) {
    case SegmentKind::Detection: break;
    case SegmentKind::Bang: {
      const double phi = bang_angle(s, seg.to);
      const double duration = std::abs(phi) / bang_amplitude;
      const double u = phi >= 0.0 ? -bang_amplitude : bang_amplitude;
      s = integrate(s, p, [u](double) { return u; }, duration, bang_step);
      t += duration;
      break;
    }
    case SegmentKind::AxisArc: {
      const double target = std::abs(seg.to.z);
      const bool grow = target > std::abs(seg.from.z);
      const auto hit = integrate_until(
          s, p, [](double) { return 0.0; },
          [target, grow](const BlochState& x) { return grow ? target - x.radius() : x.radius() - target; },
          step, 2.0 * seg.duration + 1.0);
      if (!hit.hit) throw IntegrationError("simulate_structure: axis arc did not reach its target");
      s = hit.state;
      t += hit.time;
      break;
    }
    case SegmentKind::MagicArc: {
      const auto feedback = [&p](double, const BlochState& x) { return detail::magic_feedback(x, p); };
      if (seg.to.y > 0.0) {
        const double target = seg.to.radius();
        const auto hit = integrate_until(
            s, p, feedback, [target](const BlochState& x) { return x.radius() - target; }, step,
            2.0 * seg.duration + 1.0, detail::magic_step_limit(p));
        if (!hit.hit) throw IntegrationError("simulate_structure: magic arc did not reach its target");
        s = hit.state;
        t += hit.time;
      } else {
        const auto hit = integrate_until(
            s, p, feedback, [](const BlochState& x) { return x.y - kMagicFloor; }, step,
            2.0 * seg.duration + 1.0, detail::magic_step_limit(p));
        if (!hit.hit) throw IntegrationError("simulate_structure: magic arc did not reach y = 0");
        s = hit.state;
        t += hit.time + time_magic(std::max(0.0, s.y), 0.0, p);
      }
      break;
    }
    }
  }
  return {tr.structure, t, distance(s, m), s};
}

/// Uniform sample of the half-disk {y > y_min, r < r_max}.
template <class Rng>
BlochState random_half_disk_point(Rng& rng, double r_max = 0.97, double y_min = 1e-3) {
  std::uniform_real_distribution<double> uy(0.0, 1.0);
  std::uniform_real_distribution<double> uz(-1.0, 1.0);
  for (;;) {
    const BlochState m{uy(rng), uz(rng)};
    if (m.y > y_min && m.radius() < r_max) return m;
  }
}

struct SurfaceDeviation {
  double max_deviation = 0.0;
  BlochState worst;
  ControlStructure worst_structure = ControlStructure::B;
  int samples = 0;
};

/// Worst |Q_analytic - Q_simulated| over random M points, where Q_simulated
/// uses the realized control duration of simulate_structure. `q_perturbation`
/// is added to the analytic value (negative-control hook).
inline SurfaceDeviation verify_q_surface(const RelaxationPair& p, int n_samples, double bang_amplitude,
                                         unsigned long long seed = 1, double step = 1e-4,
                                         double q_perturbation = 0.0) {
  if (n_samples < 1) throw DomainError("verify_q_surface: need at least one sample");
  std::mt19937_64 rng(seed);
  std::vector<BlochState> points;
  points.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) points.push_back(random_half_disk_point(rng));
  std::vector<double> dev(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const auto analytic = q_value(points[i], p);
    const auto sim = simulate_structure(points[i], p, bang_amplitude, step);
    dev[i] = std::abs(analytic.q + q_perturbation - points[i].y / std::sqrt(1.0 + sim.t_control));
  });
  SurfaceDeviation out;
  out.samples = n_samples;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    if (dev[i] >= out.max_deviation) {
      out.max_deviation = dev[i];
      out.worst = points[i];
      out.worst_structure = classify(points[i], p);
    }
  }
  return out;
}

/// Largest |Q(M + delta n) - Q(M - delta n)| over samples of the three
/// structure boundaries, n the unit normal. Samples whose offsets leave the
/// open half-disk are skipped.
inline double max_boundary_jump(const RelaxationPair& p, int n_per_curve = 200, double delta = 1e-6) {
  const auto curves = boundary_curves(p, n_per_curve);
  const double e2 = std::exp(-2.0 * p.gamma_t2);
  const double e1 = std::exp(-p.gamma_t1);
  double worst = 0.0;
  const auto probe = [&](const BlochState& m, double ny, double nz) {
    const double len = std::hypot(ny, nz);
    if (!(len > 0.0)) return;
    const BlochState plus{m.y + delta * ny / len, m.z + delta * nz / len};
    const BlochState minus{m.y - delta * ny / len, m.z - delta * nz / len};
    for (const auto& x : {plus, minus}) {
      if (!(x.y > 0.0) || !(x.radius() < 1.0 - 1e-9)) return;
    }
    worst = std::max(worst, std::abs(q_value(plus, p).q - q_value(minus, p).q));
  };
  for (const auto& m : curves.ernst) {
    const double a = (m.z - 1.0) * e1 + 1.0;
    probe(m, 2.0 * m.y * (e2 - 1.0), 2.0 * a * e1 - 2.0 * m.z);
  }
  for (const auto& m : curves.magic_circle) probe(m, m.y, m.z);
  for (const auto& m : curves.relaxed_circle) {
    const double a = (m.z - 1.0) * e1 + 1.0;
    probe(m, 2.0 * m.y * e2, 2.0 * a * e1);
  }
  return worst;
}

} // namespace spinsnr
