#pragma once

// Explicit optimal cycle for one M point: S -> (bang, arcs, bang) -> M -> detection -> S.

#include <cmath>
#include <numbers>
#include <string_view>
#include <vector>

#include "spinsnr/bloch.hpp"
#include "spinsnr/qsurface.hpp"
#include "spinsnr/synthesis.hpp"

namespace spinsnr {

enum class SegmentKind { Bang, MagicArc, AxisArc, Detection };

inline constexpr std::string_view to_string(SegmentKind k) noexcept {
  switch (k) {
  case SegmentKind::Bang: return "bang";
  case SegmentKind::MagicArc: return "magic_arc";
  case SegmentKind::AxisArc: return "axis_arc";
  case SegmentKind::Detection: return "detection";
  }
  return "?";
}

struct Segment {
  SegmentKind kind = SegmentKind::Bang;
  BlochState from;
  BlochState to;
  double duration = 0.0;  ///< normalized time; 0 for bangs
  double angle = 0.0;     ///< rotate() angle for bangs, 0 otherwise
};

struct Trajectory {
  ControlStructure structure = ControlStructure::B;
  BlochState s;
  BlochState m;
  std::vector<Segment> segments;

  double t_control() const {
    double t = 0.0;
    for (const auto& seg : segments) {
      if (seg.kind != SegmentKind::Detection) t += seg.duration;
    }
    return t;
  }
};

/// Angle phi in (-pi, pi] such that rotate(from, phi) points along `to`.
inline double bang_angle(const BlochState& from, const BlochState& to) {
  double phi = from.theta() - to.theta();
  while (phi > std::numbers::pi) phi -= 2.0 * std::numbers::pi;
  while (phi <= -std::numbers::pi) phi += 2.0 * std::numbers::pi;
  return phi;
}

inline Trajectory optimal_trajectory(const BlochState& m, const RelaxationPair& p) {
  const auto g = synthesis_geometry(m, p);
  Trajectory tr{g.structure, g.s, m, {}};
  const auto bang = [&](const BlochState& a, const BlochState& b) {
    tr.segments.push_back({SegmentKind::Bang, a, b, 0.0, bang_angle(a, b)});
  };
  const auto axis = [&](double z1, double z2) {
    tr.segments.push_back({SegmentKind::AxisArc, {0.0, z1}, {0.0, z2}, time_vertical(z1, z2, p), 0.0});
  };
  const auto magic = [&](double y1, double y2, double z0) {
    tr.segments.push_back({SegmentKind::MagicArc, {y1, z0}, {y2, z0}, time_magic(y1, y2, p), 0.0});
  };

  switch (g.structure) {
  case ControlStructure::B:
    bang(g.s, m);
    break;
  case ControlStructure::BSvPosB:
    bang(g.s, {0.0, g.r_s});
    axis(g.r_s, g.r_m);
    bang({0.0, g.r_m}, m);
    break;
  case ControlStructure::BSvNegB:
    bang(g.s, {0.0, -g.r_s});
    axis(-g.r_s, -g.r_m);
    bang({0.0, -g.r_m}, m);
    break;
  case ControlStructure::BShB: {
    const double z0 = *g.plane.z0;
    const double y1 = std::sqrt(g.r_s * g.r_s - z0 * z0);
    const double y2 = std::sqrt(std::max(0.0, g.r_m * g.r_m - z0 * z0));
    bang(g.s, {y1, z0});
    magic(y1, y2, z0);
    bang({y2, z0}, m);
    break;
  }
  case ControlStructure::BShSvNegB: {
    const double z0 = *g.plane.z0;
    const double y1 = std::sqrt(g.r_s * g.r_s - z0 * z0);
    bang(g.s, {y1, z0});
    magic(y1, 0.0, z0);
    axis(z0, -g.r_m);
    bang({0.0, -g.r_m}, m);
    break;
  }
  }
  tr.segments.push_back({SegmentKind::Detection, m, g.s, 1.0, 0.0});
  return tr;
}

struct PolylinePoint {
  BlochState state;
  int segment = 0;
  SegmentKind kind = SegmentKind::Bang;
};

/// Exact points along each segment: circular arcs for bangs, the held
/// magic-plane and axis flows, and free relaxation for detection.
inline std::vector<PolylinePoint> trajectory_polyline(const Trajectory& tr, const RelaxationPair& p,
                                                      int points_per_segment = 32) {
  std::vector<PolylinePoint> out;
  const int n = std::max(2, points_per_segment);
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    const auto& seg = tr.segments[k];
    for (int i = 0; i < n; ++i) {
      const double f = static_cast<double>(i) / (n - 1);
      BlochState pt;
      switch (seg.kind) {
      case SegmentKind::Bang: pt = rotate(seg.from, f * seg.angle); break;
      case SegmentKind::Detection: pt = relax(seg.from, f * seg.duration, p); break;
      case SegmentKind::AxisArc: {
        const double z = 1.0 + (seg.from.z - 1.0) * std::exp(-p.gamma_t1 * f * seg.duration);
        pt = {0.0, z};
        break;
      }
      case SegmentKind::MagicArc: {
        const double w_inf = magic_plane_w_inf(p);
        const double w = w_inf + (seg.from.y * seg.from.y - w_inf) *
                                     std::exp(-2.0 * p.gamma_t2 * f * seg.duration);
        pt = {std::sqrt(std::max(0.0, w)), seg.from.z};
        break;
      }
      }
      out.push_back({pt, static_cast<int>(k), seg.kind});
    }
  }
  return out;
}

} // namespace spinsnr
