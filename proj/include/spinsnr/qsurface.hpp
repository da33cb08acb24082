#pragma once

// Figure of merit Q(M) = y_m / sqrt(1 + T_c(M)) for unbounded control.
// Bangs are instantaneous, so T_c is the time spent on the singular arcs:
// free relaxation on the z axis (u = 0) and the feedback-held magic plane
// (u = -gamma (1 - z0) / y). T_c is composed segment by segment.

#include <cmath>
#include <cstddef>
#include <vector>

#include "spinsnr/bloch.hpp"
#include "spinsnr/errors.hpp"
#include "spinsnr/parallel.hpp"
#include "spinsnr/synthesis.hpp"

namespace spinsnr {

/// Time to move from z1 up to z2 along y = 0 with u = 0: (1/gamma) ln((1 - z1)/(1 - z2)).
inline double time_vertical(double z1, double z2, const RelaxationPair& p) {
  if (!(z2 < 1.0) || !(z1 <= z2)) {
    throw DomainError("time_vertical: need z1 <= z2 < 1 along the free z-axis flow");
  }
  if (z1 == z2) return 0.0;
  return std::log((1.0 - z1) / (1.0 - z2)) / p.gamma_t1;
}

/// Fixed point of w = y^2 on the magic plane, gamma (1 - z0) z0 / Gamma (< 0).
inline double magic_plane_w_inf(const RelaxationPair& p) {
  const auto plane = magic_plane(p);
  if (!plane.present) throw DomainError("magic plane does not intersect the unit ball");
  const double z0 = *plane.z0;
  return p.gamma_t1 * (1.0 - z0) * z0 / p.gamma_t2;
}

/// Time to move from y1 down to y2 on the magic plane. With w = y^2 the
/// held dynamics are dw/dt = -2 Gamma (w - w_inf), so
/// T = (1/(2 Gamma)) ln((y1^2 - w_inf)/(y2^2 - w_inf)), finite at y2 = 0.
inline double time_magic(double y1, double y2, const RelaxationPair& p) {
  const double w_inf = magic_plane_w_inf(p);
  if (!(y2 >= 0.0) || !(y1 >= y2)) throw DomainError("time_magic: need y1 >= y2 >= 0");
  if (y1 == y2) return 0.0;
  return std::log((y1 * y1 - w_inf) / (y2 * y2 - w_inf)) / (2.0 * p.gamma_t2);
}

struct ControlTime {
  ControlStructure structure = ControlStructure::B;
  double t_control = 0.0;
};

inline ControlTime control_time(const SynthesisGeometry& g, const RelaxationPair& p) {
  const double rs = g.r_s;
  const double rm = g.r_m;
  switch (g.structure) {
  case ControlStructure::B: return {g.structure, 0.0};
  case ControlStructure::BSvPosB: return {g.structure, time_vertical(rs, rm, p)};
  case ControlStructure::BSvNegB: return {g.structure, time_vertical(-rs, -rm, p)};
  case ControlStructure::BShB: {
    const double z0 = *g.plane.z0;
    const double y1 = std::sqrt(rs * rs - z0 * z0);
    const double y2 = std::sqrt(std::max(0.0, rm * rm - z0 * z0));
    return {g.structure, time_magic(y1, y2, p)};
  }
  case ControlStructure::BShSvNegB: {
    const double z0 = *g.plane.z0;
    const double y1 = std::sqrt(rs * rs - z0 * z0);
    return {g.structure, time_magic(y1, 0.0, p) + time_vertical(z0, -rm, p)};
  }
  }
  return {g.structure, 0.0};
}

inline ControlTime control_time(const BlochState& m, const RelaxationPair& p) {
  return control_time(synthesis_geometry(m, p), p);
}

struct QSample {
  BlochState m;
  ControlStructure structure = ControlStructure::B;
  double t_control = 0.0;
  double q = 0.0;
};

inline QSample q_value(const BlochState& m, const RelaxationPair& p) {
  const auto ct = control_time(m, p);
  return {m, ct.structure, ct.t_control, m.y / std::sqrt(1.0 + ct.t_control)};
}

struct QGrid {
  RelaxationPair params;
  int n_y = 0;
  int n_z = 0;
  std::vector<QSample> samples;
};

/// Lattice coordinates: cell centres of an n_y x n_z grid on (0,1) x (-1,1).
inline double grid_y(int i, int n_y) { return (i + 0.5) / n_y; }
inline double grid_z(int j, int n_z) { return -1.0 + 2.0 * (j + 0.5) / n_z; }

/// Q over the lattice, row-major with z as the row index (outer loop) and y
/// as the column; points outside the open disk are omitted.
inline QGrid q_grid(const RelaxationPair& p, int n_y, int n_z) {
  if (n_y < 2 || n_z < 2) throw DomainError("q_grid: resolution must be at least 2 x 2");
  const std::size_t total = static_cast<std::size_t>(n_y) * static_cast<std::size_t>(n_z);
  std::vector<QSample> all(total);
  std::vector<char> inside(total, 0);
  parallel_for(total, [&](std::size_t k) {
    const int j = static_cast<int>(k / static_cast<std::size_t>(n_y));
    const int i = static_cast<int>(k % static_cast<std::size_t>(n_y));
    const BlochState m{grid_y(i, n_y), grid_z(j, n_z)};
    if (m.radius_squared() < 1.0) {
      all[k] = q_value(m, p);
      inside[k] = 1;
    }
  });
  QGrid grid{p, n_y, n_z, {}};
  grid.samples.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    if (inside[k]) grid.samples.push_back(all[k]);
  }
  return grid;
}

/// One closed-form expression per structure, written directly in terms of
/// (y_m, z_m). Used to cross-check the composed T_c.
namespace sheets {

inline double relaxed_radius_squared(const BlochState& m, const RelaxationPair& p) {
  const double a = (m.z - 1.0) * std::exp(-p.gamma_t1) + 1.0;
  return m.y * m.y * std::exp(-2.0 * p.gamma_t2) + a * a;
}

inline double q_axis_shrink(const BlochState& m, const RelaxationPair& p) {
  const double rb = std::sqrt(relaxed_radius_squared(m, p));
  return m.y / std::sqrt(1.0 + std::log((1.0 + rb) / (1.0 + m.radius())) / p.gamma_t1);
}

inline double q_axis_grow(const BlochState& m, const RelaxationPair& p) {
  const double rb = std::sqrt(relaxed_radius_squared(m, p));
  return m.y / std::sqrt(1.0 + std::log((1.0 - rb) / (1.0 - m.radius())) / p.gamma_t1);
}

inline double q_magic(const BlochState& m, const RelaxationPair& p) {
  const double G = p.gamma_t2;
  const double g = p.gamma_t1;
  const double num = 4.0 * relaxed_radius_squared(m, p) * G * (G - g) + g * g;
  const double den = 4.0 * m.radius_squared() * G * (G - g) + g * g;
  return m.y / std::sqrt(1.0 + std::log(num / den) / (2.0 * G));
}

/// Control time of the magic-then-axis structure with the magic-plane leg
/// written as (1/(2 Gamma)) ln((4 r_s^2 Gamma (Gamma - gamma) + gamma^2) / gamma^2).
/// It exceeds the segment-composed time by -magic_axis_offset(p).
inline double t_magic_axis_without_offset(const BlochState& m, const RelaxationPair& p) {
  const double G = p.gamma_t2;
  const double g = p.gamma_t1;
  const double rs2 = relaxed_radius_squared(m, p);
  const double magic = std::log((4.0 * rs2 * G * (G - g) + g * g) / (g * g)) / (2.0 * G);
  const double axis = std::log(((2.0 * G - g) / (2.0 * (G - g))) / (1.0 + m.radius())) / g;
  return magic + axis;
}

inline double q_magic_axis_without_offset(const BlochState& m, const RelaxationPair& p) {
  return m.y / std::sqrt(1.0 + t_magic_axis_without_offset(m, p));
}

/// (1/(2 Gamma)) ln((Gamma - gamma)/(2 Gamma - gamma)): composed minus uncorrected time.
inline double magic_axis_offset(const RelaxationPair& p) {
  const double G = p.gamma_t2;
  const double g = p.gamma_t1;
  return std::log((G - g) / (2.0 * G - g)) / (2.0 * G);
}

/// Magic-plane travel time with the y^2 coefficient 4 (Gamma - gamma)^2
/// (no factor Gamma). Differs from time_magic unless Gamma = 1.
inline double time_magic_without_gamma_factor(double y1, double y2, const RelaxationPair& p) {
  const double G = p.gamma_t2;
  const double g = p.gamma_t1;
  const auto term = [&](double y) {
    return 4.0 * (G - g) * (G - g) * y * y + g * g * (2.0 * G - g);
  };
  return std::log(term(y1) / term(y2)) / (2.0 * G);
}

} // namespace sheets

} // namespace spinsnr
