#pragma once

// Normalized Bloch dynamics of a single-control spin-1/2 ensemble in the
// (y, z) plane, time measured in units of the detection duration:
//
//   dy/dt = -Gamma*y - u*z
//   dz/dt =  gamma*(1 - z) + u*y
//
// Free evolution (u = 0) has a closed form; everything else goes through a
// fixed-step RK4 integrator, optionally stopped on an event function.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <type_traits>
#include <utility>

#include "spinsnr/errors.hpp"

namespace spinsnr {

/// Slack for disk-membership checks on y^2 + z^2.
inline constexpr double kBallEpsilon = 1e-12;

/// Default fixed RK4 step in normalized time.
inline constexpr double kDefaultStep = 1e-4;

/// Dimensionless relaxation rates: gamma_t2 = 2 pi Td/T2 (Gamma), gamma_t1 = 2 pi Td/T1 (gamma).
struct RelaxationPair {
  double gamma_t2 = 1.0;
  double gamma_t1 = 1.0;

  bool physical() const noexcept { return 2.0 * gamma_t2 >= gamma_t1; }

  /// Validated construction. Throws DomainError for non-positive rates and
  /// PhysicalityError when 2*Gamma < gamma unless `allow_unphysical`.
  static RelaxationPair make(double gamma_t2, double gamma_t1, bool allow_unphysical = false) {
    if (!(gamma_t2 > 0.0) || !(gamma_t1 > 0.0) || !std::isfinite(gamma_t2) ||
        !std::isfinite(gamma_t1)) {
      throw DomainError("relaxation rates must be positive and finite");
    }
    RelaxationPair p{gamma_t2, gamma_t1};
    if (!allow_unphysical && !p.physical()) {
      throw PhysicalityError("unphysical relaxation pair: 2*Gamma < gamma (T2 > 2*T1); Gamma=" +
                             std::to_string(gamma_t2) + " gamma=" + std::to_string(gamma_t1));
    }
    return p;
  }

  friend bool operator==(const RelaxationPair&, const RelaxationPair&) = default;
};

/// Point of the (y, z) plane. Polar view: y = r cos(theta), z = r sin(theta).
struct BlochState {
  double y = 0.0;
  double z = 1.0;

  double radius() const noexcept { return std::hypot(y, z); }
  double radius_squared() const noexcept { return y * y + z * z; }
  double theta() const noexcept { return std::atan2(z, y); }

  static BlochState from_polar(double r, double theta) noexcept {
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  friend bool operator==(const BlochState&, const BlochState&) = default;
};

inline double distance(const BlochState& a, const BlochState& b) noexcept {
  return std::hypot(a.y - b.y, a.z - b.z);
}

inline bool in_closed_disk(const BlochState& s, double slack = kBallEpsilon) noexcept {
  return s.radius_squared() <= 1.0 + slack;
}

inline bool finite(const BlochState& s) noexcept { return std::isfinite(s.y) && std::isfinite(s.z); }

/// Physical timing of a repeated experiment: T = N * (Td + Tc*Td), Tc normalized.
struct ExperimentTiming {
  double t_detect = 1.0;
  double t_total = 1.0;
  long long n_cycles = 1;

  /// Number of whole cycles that fit in `t_total` given a normalized control time.
  static ExperimentTiming make(double t_detect, double t_total, double t_control_normalized = 0.0) {
    if (!(t_detect > 0.0) || !(t_total > 0.0) || !(t_control_normalized >= 0.0)) {
      throw DomainError("experiment timing requires positive durations");
    }
    const double block = t_detect * (1.0 + t_control_normalized);
    const auto n = static_cast<long long>(std::llround(t_total / block));
    return {t_detect, t_total, n < 1 ? 1 : n};
  }
};

/// Gamma = 2 pi Td/T2, gamma = 2 pi Td/T1.
inline RelaxationPair normalize_params(double t1, double t2, double t_detect,
                                       bool allow_unphysical = false) {
  if (!(t1 > 0.0) || !(t2 > 0.0) || !(t_detect > 0.0)) {
    throw DomainError("T1, T2 and Td must be positive");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return RelaxationPair::make(two_pi * t_detect / t2, two_pi * t_detect / t1, allow_unphysical);
}

/// Free relaxation for a normalized duration tau >= 0 (exact).
inline BlochState relax(const BlochState& s, double tau, const RelaxationPair& p) {
  if (!(tau >= 0.0)) throw DomainError("relax: tau must be non-negative");
  return {s.y * std::exp(-p.gamma_t2 * tau), 1.0 + (s.z - 1.0) * std::exp(-p.gamma_t1 * tau)};
}

/// Backward free relaxation. Throws RangeError if the preimage leaves the closed disk.
inline BlochState relax_inverse(const BlochState& s, double tau, const RelaxationPair& p) {
  if (!(tau >= 0.0)) throw DomainError("relax_inverse: tau must be non-negative");
  const BlochState pre{s.y * std::exp(p.gamma_t2 * tau),
                       1.0 + (s.z - 1.0) * std::exp(p.gamma_t1 * tau)};
  if (!in_closed_disk(pre)) throw RangeError("relax_inverse: preimage lies outside the unit disk");
  return pre;
}

/// Instantaneous rotation. Positive phi tips +z toward +y; this is the flow of
/// the control term with u = -phi/duration, i.e. phi = -integral(u dt).
inline BlochState rotate(const BlochState& s, double phi) noexcept {
  const double c = std::cos(phi);
  const double sn = std::sin(phi);
  return {s.y * c + s.z * sn, -s.y * sn + s.z * c};
}

/// Right-hand side of the normalized Bloch equation.
inline BlochState bloch_rhs(const BlochState& s, double u, const RelaxationPair& p) noexcept {
  return {-p.gamma_t2 * s.y - u * s.z, p.gamma_t1 * (1.0 - s.z) + u * s.y};
}

namespace detail {

// Controls may be u(t) or u(t, state) (feedback).
template <class Control>
double eval_control(Control& u, double t, const BlochState& s) {
  if constexpr (std::is_invocable_r_v<double, Control&, double, const BlochState&>) {
    return u(t, s);
  } else {
    static_assert(std::is_invocable_r_v<double, Control&, double>,
                  "control must be callable as u(t) or u(t, state)");
    return u(t);
  }
}

template <class Control>
BlochState rk4_step(const BlochState& s, double t, double h, Control& u, const RelaxationPair& p) {
  const auto add = [](const BlochState& a, const BlochState& k, double w) {
    return BlochState{a.y + w * k.y, a.z + w * k.z};
  };
  const BlochState k1 = bloch_rhs(s, eval_control(u, t, s), p);
  const BlochState s2 = add(s, k1, 0.5 * h);
  const BlochState k2 = bloch_rhs(s2, eval_control(u, t + 0.5 * h, s2), p);
  const BlochState s3 = add(s, k2, 0.5 * h);
  const BlochState k3 = bloch_rhs(s3, eval_control(u, t + 0.5 * h, s3), p);
  const BlochState s4 = add(s, k3, h);
  const BlochState k4 = bloch_rhs(s4, eval_control(u, t + h, s4), p);
  return {s.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
          s.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
}

inline void check_inside(const BlochState& s) {
  if (!finite(s) || !in_closed_disk(s)) {
    throw IntegrationError("integration left the unit disk (y=" + std::to_string(s.y) +
                           ", z=" + std::to_string(s.z) + ")");
  }
}

} // namespace detail

/// Fixed-step RK4 over [0, duration]. The step is shrunk so that an integer
/// number of steps lands exactly on `duration`.
template <class Control>
BlochState integrate(BlochState s, const RelaxationPair& p, Control&& control, double duration,
                     double step = kDefaultStep) {
  if (!(duration >= 0.0)) throw DomainError("integrate: duration must be non-negative");
  if (!(step > 0.0)) throw DomainError("integrate: step must be positive");
  if (duration == 0.0) return s;
  const auto n = std::max(1LL, static_cast<long long>(std::ceil(duration / step - 1e-9)));
  const double h = duration / static_cast<double>(n);
  for (long long i = 0; i < n; ++i) {
    s = detail::rk4_step(s, static_cast<double>(i) * h, h, control, p);
    detail::check_inside(s);
  }
  return s;
}

struct EventHit {
  BlochState state;
  double time = 0.0;
  bool hit = false;
};

/// Default step cap for integrate_until: none.
struct NoStepLimit {
  double operator()(const BlochState&) const noexcept { return std::numeric_limits<double>::infinity(); }
};

/// RK4 from `s` until the event function `g` (positive at the start) reaches
/// zero. A step that would overshoot the event (g < -event_tol) or produce a
/// non-finite state is retried with half the step, so the event is located to
/// event_tol in g. `limit(state)` caps the step near singular feedback laws.
/// Stops unconditionally at `t_max`.
template <class Control, class Event, class Limit = NoStepLimit>
EventHit integrate_until(BlochState s, const RelaxationPair& p, Control&& control, Event&& g,
                         double step = kDefaultStep, double t_max = 1e3, Limit&& limit = Limit{},
                         double event_tol = 1e-13) {
  if (!(step > 0.0)) throw DomainError("integrate_until: step must be positive");
  constexpr double kMinStep = 1e-15;
  double t = 0.0;
  double h = step;
  if (g(s) <= event_tol) return {s, 0.0, true};
  while (t < t_max) {
    const double hh = std::min({h, t_max - t, limit(s)});
    const BlochState trial = detail::rk4_step(s, t, hh, control, p);
    const double gt = finite(trial) ? g(trial) : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(gt) || gt < -event_tol) {
      if (hh < kMinStep) return {s, t, true};
      h = 0.5 * hh;
      continue;
    }
    s = trial;
    t += hh;
    detail::check_inside(s);
    if (gt <= event_tol) return {s, t, true};
  }
  return {s, t, false};
}

/// dr/dt under any control (the control only changes theta).
inline double radial_speed(const BlochState& s, const RelaxationPair& p) {
  const double r = s.radius();
  if (!(r > 0.0)) throw DomainError("radial_speed undefined at the origin");
  const double c = s.y / r;
  const double sn = s.z / r;
  return -p.gamma_t2 * r * c * c + p.gamma_t1 * sn - p.gamma_t1 * r * sn * sn;
}

/// Angular derivative of the radial speed at fixed r:
/// (|y| / r) * (2 Gamma z + gamma - 2 gamma z).
inline double radial_speed_dtheta(const BlochState& s, const RelaxationPair& p) {
  const double r = s.radius();
  if (!(r > 0.0)) throw DomainError("radial_speed_dtheta undefined at the origin");
  return std::sqrt(s.y * s.y) / r *
         (2.0 * p.gamma_t2 * s.z + p.gamma_t1 - 2.0 * p.gamma_t1 * s.z);
}

/// Total SNR of the experiment, R = sqrt(T / Td) * q.
inline double total_snr(double q, const ExperimentTiming& timing) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("total_snr: q must lie in [0, 1)");
  if (!(timing.t_detect > 0.0) || !(timing.t_total > 0.0)) {
    throw DomainError("total_snr: invalid timing");
  }
  return std::sqrt(timing.t_total / timing.t_detect) * q;
}

} // namespace spinsnr
