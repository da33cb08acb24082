#pragma once

// Steady-state synthesis: which time-optimal pulse structure brings the
// steady state S = relax(M, 1) back to the measurement point M, the geometric
// curves separating those structures, and the three qualitative regimes of
// the synthesis in (gamma, Gamma) space.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spinsnr/bloch.hpp"
#include "spinsnr/errors.hpp"
#include "spinsnr/optimize.hpp"

namespace spinsnr {

/// Tie tolerance on |r_s - r_m| for the single-bang structure.
inline constexpr double kClassEpsilon = 1e-10;

/// B: one bang. BSvPosB / BSvNegB: bang, arc on the z axis (z > 0 growing /
/// z0 < z < 0 shrinking), bang. BShB: bang, magic-plane arc, bang.
/// BShSvNegB: bang, magic-plane arc down to y = 0, z-axis arc, bang.
enum class ControlStructure { B, BSvPosB, BSvNegB, BShB, BShSvNegB };

inline constexpr std::string_view to_string(ControlStructure c) noexcept {
  switch (c) {
  case ControlStructure::B: return "B";
  case ControlStructure::BSvPosB: return "BSvPosB";
  case ControlStructure::BSvNegB: return "BSvNegB";
  case ControlStructure::BShB: return "BShB";
  case ControlStructure::BShSvNegB: return "BShSvNegB";
  }
  return "?";
}

inline ControlStructure parse_control_structure(std::string_view s) {
  for (auto c : {ControlStructure::B, ControlStructure::BSvPosB, ControlStructure::BSvNegB,
                 ControlStructure::BShB, ControlStructure::BShSvNegB}) {
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown control structure: " + std::string(s));
}

enum class SynthesisRegime { A, B, C };

inline constexpr std::string_view to_string(SynthesisRegime r) noexcept {
  switch (r) {
  case SynthesisRegime::A: return "A";
  case SynthesisRegime::B: return "B";
  case SynthesisRegime::C: return "C";
  }
  return "?";
}

/// Horizontal line z = z0 = -gamma / (2 (Gamma - gamma)) of fastest radial
/// shrinkage. z0 is only defined for Gamma > gamma; the line meets the open
/// unit ball iff Gamma > 3 gamma / 2.
struct MagicPlane {
  std::optional<double> z0;
  bool present = false;

  double abs_z0() const { return std::abs(z0.value()); }
};

inline MagicPlane magic_plane(const RelaxationPair& p) {
  if (!(p.gamma_t2 > p.gamma_t1)) return {};
  const double z0 = -p.gamma_t1 / (2.0 * (p.gamma_t2 - p.gamma_t1));
  return {z0, p.gamma_t2 > 1.5 * p.gamma_t1};
}

/// r_s^2 - r_m^2 with S = relax(M, 1). Zero on the Ernst ellipsoid.
inline double ernst_ellipsoid_residual(const BlochState& m, const RelaxationPair& p) {
  const double a = (m.z - 1.0) * std::exp(-p.gamma_t1) + 1.0;
  return m.y * m.y * std::exp(-2.0 * p.gamma_t2) + a * a - m.z * m.z - m.y * m.y;
}

/// Gamma y^2 + gamma z^2 - gamma z = -r * dr/dt. Zero on the set where the
/// radius is stationary, positive where it shrinks.
inline double zero_radial_speed_residual(const BlochState& s, const RelaxationPair& p) noexcept {
  return p.gamma_t2 * s.y * s.y + p.gamma_t1 * s.z * s.z - p.gamma_t1 * s.z;
}

/// Radii and magic plane entering the classification of one M point.
struct SynthesisGeometry {
  BlochState m;
  BlochState s;
  double r_m = 0.0;
  double r_s = 0.0;
  MagicPlane plane;
  ControlStructure structure = ControlStructure::B;
};

inline void require_half_disk(const BlochState& m) {
  if (!std::isfinite(m.y) || !std::isfinite(m.z) || m.y < 0.0 || !(m.radius_squared() < 1.0)) {
    throw DomainError("M point must lie in the open unit half-disk with y >= 0");
  }
}

/// Full classification record of an M point (y_m >= 0, r_m < 1).
inline SynthesisGeometry synthesis_geometry(const BlochState& m, const RelaxationPair& p) {
  require_half_disk(m);
  SynthesisGeometry g;
  g.m = m;
  g.s = relax(m, 1.0, p);
  g.r_m = m.radius();
  g.r_s = g.s.radius();
  g.plane = magic_plane(p);
  if (std::abs(g.r_s - g.r_m) <= kClassEpsilon) {
    g.structure = ControlStructure::B;
  } else if (g.r_s < g.r_m) {
    g.structure = ControlStructure::BSvPosB;
  } else if (!g.plane.present) {
    g.structure = ControlStructure::BSvNegB;
  } else {
    const double a = g.plane.abs_z0();
    if (g.r_s > a && a > g.r_m) {
      g.structure = ControlStructure::BShSvNegB;
    } else if (g.r_m >= a) {
      g.structure = ControlStructure::BShB;
    } else {
      g.structure = ControlStructure::BSvNegB;
    }
  }
  return g;
}

inline ControlStructure classify(const BlochState& m, const RelaxationPair& p) {
  return synthesis_geometry(m, p).structure;
}

/// (Gamma_ab, Gamma_bc): the A|B and B|C regime thresholds at fixed gamma.
struct RegimeBoundaries {
  double gamma_ab = 0.0;
  double gamma_bc = 0.0;
};

/// Gamma_ab = (gamma/2)(1 - 3 e^gamma)/(1 - e^gamma), evaluated as
/// 3 gamma/2 + gamma/(e^gamma - 1) to stay accurate for small gamma.
inline RegimeBoundaries regime_boundaries(double gamma) {
  if (!(gamma > 0.0)) throw DomainError("regime_boundaries: gamma must be positive");
  const double bc = 1.5 * gamma;
  return {bc + gamma / std::expm1(gamma), bc};
}

inline SynthesisRegime regime(const RelaxationPair& p) {
  const auto b = regime_boundaries(p.gamma_t1);
  if (p.gamma_t2 <= b.gamma_bc) return SynthesisRegime::C;
  if (p.gamma_t2 >= b.gamma_ab) return SynthesisRegime::A;
  return SynthesisRegime::B;
}

/// Lowest z of the Ernst ellipsoid: -tanh(gamma/2), reached at y = 0.
inline double ernst_curve_z_min(const RelaxationPair& p) { return -std::tanh(0.5 * p.gamma_t1); }

/// y >= 0 on the Ernst ellipsoid at height z, by bisection of the residual
/// (monotone decreasing in y) on [0, sqrt(1 - z^2)].
inline double ernst_curve_y(double z, const RelaxationPair& p, double tol = 1e-15) {
  if (z < ernst_curve_z_min(p) || z > 1.0) {
    throw DomainError("ernst_curve_y: z outside the range of the Ernst ellipsoid");
  }
  const auto f = [&](double y) { return ernst_ellipsoid_residual({y, z}, p); };
  const double y_max = std::sqrt(std::max(0.0, 1.0 - z * z));
  if (f(0.0) <= 0.0) return 0.0;
  if (f(y_max) >= 0.0) return y_max;
  return bisect_root(f, 0.0, y_max, tol);
}

struct BoundaryCurves {
  std::vector<BlochState> ernst;            ///< r_s = r_m
  std::vector<BlochState> magic_circle;     ///< r_m = |z0|
  std::vector<BlochState> relaxed_circle;   ///< r_s = |z0|
};

/// Samples of the three structure boundaries in M space (y >= 0). The two
/// circle curves are empty when the magic plane misses the unit ball; preimages
/// leaving the disk are dropped from the last one.
inline BoundaryCurves boundary_curves(const RelaxationPair& p, int n) {
  if (n < 2) throw DomainError("boundary_curves: need at least two samples");
  BoundaryCurves out;
  const double z_lo = ernst_curve_z_min(p);
  out.ernst.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double z = std::lerp(z_lo, 1.0, static_cast<double>(k) / static_cast<double>(n - 1));
    out.ernst.push_back({ernst_curve_y(z, p), z});
  }
  const auto plane = magic_plane(p);
  if (!plane.present) return out;
  const double a = plane.abs_z0();
  for (int k = 0; k < n; ++k) {
    const double th = -std::numbers::pi / 2 + std::numbers::pi * static_cast<double>(k) / (n - 1);
    const BlochState on_circle = BlochState::from_polar(a, th);
    out.magic_circle.push_back({std::max(0.0, on_circle.y), on_circle.z});
    try {
      BlochState pre = relax_inverse({std::max(0.0, on_circle.y), on_circle.z}, 1.0, p);
      out.relaxed_circle.push_back(pre);
    } catch (const RangeError&) {
    }
  }
  return out;
}

} // namespace spinsnr
