#pragma once

// CSV / JSON serialization of grids, phase diagrams and reports.
// CSV numbers use 17 significant digits so every value round-trips exactly.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "json.hpp"
#include "spinsnr/bloch.hpp"
#include "spinsnr/ernst.hpp"
#include "spinsnr/qsurface.hpp"
#include "spinsnr/synthesis.hpp"
#include "spinsnr/trajectory.hpp"

namespace spinsnr::io {

using nlohmann::json;

inline constexpr const char* kSchemaTag = "# spin-snr-synth v1";

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json to_json(const BlochState& s) { return json::array({s.y, s.z}); }

inline json to_json(const RelaxationPair& p) {
  return {{"Gamma", p.gamma_t2}, {"gamma", p.gamma_t1}};
}

inline json polyline_json(const std::vector<BlochState>& pts) {
  json a = json::array();
  for (const auto& s : pts) a.push_back(to_json(s));
  return a;
}

inline json magic_plane_json(const RelaxationPair& p) {
  const auto plane = magic_plane(p);
  json j{{"present", plane.present}};
  j["z0"] = plane.z0 ? json(*plane.z0) : json(nullptr);
  return j;
}

inline json boundary_curves_json(const BoundaryCurves& c) {
  return {{"ernst_ellipsoid", polyline_json(c.ernst)},
          {"magic_circle", polyline_json(c.magic_circle)},
          {"relaxed_circle", polyline_json(c.relaxed_circle)}};
}

/// Comment line, header `y,z,structure,t_control,q`, then row-major samples.
inline void write_qgrid_csv(std::ostream& os, const QGrid& grid) {
  os << kSchemaTag << " qsurface Gamma=" << format_number(grid.params.gamma_t2)
     << " gamma=" << format_number(grid.params.gamma_t1) << " n_y=" << grid.n_y
     << " n_z=" << grid.n_z << '\n';
  os << "y,z,structure,t_control,q\n";
  for (const auto& s : grid.samples) {
    os << format_number(s.m.y) << ',' << format_number(s.m.z) << ',' << to_string(s.structure) << ','
       << format_number(s.t_control) << ',' << format_number(s.q) << '\n';
  }
}

inline json qgrid_sidecar_json(const QGrid& grid, const BoundaryCurves& curves) {
  return {{"schema", "spin-snr-synth v1"},
          {"kind", "qsurface"},
          {"params", to_json(grid.params)},
          {"resolution", {{"n_y", grid.n_y}, {"n_z", grid.n_z}}},
          {"regime", std::string(to_string(regime(grid.params)))},
          {"magic_plane", magic_plane_json(grid.params)},
          {"boundary_curves", boundary_curves_json(curves)}};
}

inline json qgrid_json(const QGrid& grid, const BoundaryCurves& curves) {
  json j = qgrid_sidecar_json(grid, curves);
  json rows = json::array();
  for (const auto& s : grid.samples) {
    rows.push_back({{"y", s.m.y},
                    {"z", s.m.z},
                    {"structure", std::string(to_string(s.structure))},
                    {"t_control", s.t_control},
                    {"q", s.q}});
  }
  j["samples"] = std::move(rows);
  return j;
}

/// Header `gamma,Gamma,q_ernst,regime,physical`; masked cells write nan.
inline void write_phase_diagram_csv(std::ostream& os, const PhaseDiagram& d) {
  os << kSchemaTag << " phase-diagram n_gamma=" << d.n_gamma << " n_Gamma=" << d.n_Gamma << '\n';
  os << "gamma,Gamma,q_ernst,regime,physical\n";
  for (const auto& c : d.cells) {
    os << format_number(c.gamma) << ',' << format_number(c.Gamma) << ','
       << (c.physical ? format_number(c.q_ernst) : std::string("nan")) << ',' << to_string(c.regime)
       << ',' << (c.physical ? 1 : 0) << '\n';
  }
}

inline json phase_boundaries_json(const PhaseDiagram& d) {
  const auto pairs = [](const std::vector<std::array<double, 2>>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back({x[0], x[1]});
    return a;
  };
  return {{"schema", "spin-snr-synth v1"},
          {"kind", "phase-diagram"},
          {"columns", {"gamma", "Gamma"}},
          {"gamma_bc", pairs(d.boundary_bc)},
          {"gamma_ab", pairs(d.boundary_ab)},
          {"physical_limit", pairs(d.physical_line)}};
}

inline json phase_diagram_json(const PhaseDiagram& d) {
  json j = phase_boundaries_json(d);
  json cells = json::array();
  for (const auto& c : d.cells) {
    cells.push_back({{"gamma", c.gamma},
                     {"Gamma", c.Gamma},
                     {"q_ernst", c.physical ? json(c.q_ernst) : json(nullptr)},
                     {"regime", std::string(to_string(c.regime))},
                     {"physical", c.physical}});
  }
  j["cells"] = std::move(cells);
  return j;
}

inline double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

inline json ernst_json(const RelaxationPair& p, const ErnstSolution& e) {
  return {{"params", to_json(p)},
          {"m", to_json(e.m)},
          {"s", to_json(e.s)},
          {"flip_rad", e.flip},
          {"q", e.q},
          {"regime", std::string(to_string(regime(p)))}};
}

inline void write_ernst_text(std::ostream& os, const RelaxationPair& p, const ErnstSolution& e) {
  os << "Gamma      " << format_number(p.gamma_t2) << '\n'
     << "gamma      " << format_number(p.gamma_t1) << '\n'
     << "regime     " << to_string(regime(p)) << '\n'
     << "M          (" << format_number(e.m.y) << ", " << format_number(e.m.z) << ")\n"
     << "S          (" << format_number(e.s.y) << ", " << format_number(e.s.z) << ")\n"
     << "flip       " << format_number(e.flip) << " rad (" << format_number(degrees(e.flip))
     << " deg)\n"
     << "Q          " << format_number(e.q) << '\n';
}

inline json trajectory_json(const Trajectory& tr, const RelaxationPair& p, int points_per_segment = 32) {
  json segs = json::array();
  for (const auto& seg : tr.segments) {
    segs.push_back({{"kind", std::string(to_string(seg.kind))},
                    {"from", to_json(seg.from)},
                    {"to", to_json(seg.to)},
                    {"duration", seg.duration},
                    {"angle_rad", seg.angle}});
  }
  json poly = json::array();
  for (const auto& pt : trajectory_polyline(tr, p, points_per_segment)) {
    poly.push_back({pt.state.y, pt.state.z, pt.segment});
  }
  return {{"segments", std::move(segs)}, {"polyline", std::move(poly)}};
}

inline json classify_json(const RelaxationPair& p, const BlochState& m) {
  const auto g = synthesis_geometry(m, p);
  const auto ct = control_time(g, p);
  const auto tr = optimal_trajectory(m, p);
  json j{{"params", to_json(p)},
         {"m", to_json(m)},
         {"s", to_json(g.s)},
         {"structure", std::string(to_string(g.structure))},
         {"r_m", g.r_m},
         {"r_s", g.r_s},
         {"magic_plane", magic_plane_json(p)},
         {"t_control", ct.t_control},
         {"q", m.y / std::sqrt(1.0 + ct.t_control)}};
  j["trajectory"] = trajectory_json(tr, p);
  return j;
}

inline void write_classify_text(std::ostream& os, const RelaxationPair& p, const BlochState& m) {
  const auto g = synthesis_geometry(m, p);
  const auto ct = control_time(g, p);
  const auto tr = optimal_trajectory(m, p);
  os << "structure  " << to_string(g.structure) << '\n'
     << "M          (" << format_number(m.y) << ", " << format_number(m.z) << ")\n"
     << "S          (" << format_number(g.s.y) << ", " << format_number(g.s.z) << ")\n"
     << "r_m        " << format_number(g.r_m) << '\n'
     << "r_s        " << format_number(g.r_s) << '\n'
     << "z0         " << (g.plane.z0 ? format_number(*g.plane.z0) : std::string("n/a"))
     << (g.plane.present ? "" : " (magic plane outside the ball)") << '\n'
     << "T_c        " << format_number(ct.t_control) << '\n'
     << "Q          " << format_number(m.y / std::sqrt(1.0 + ct.t_control)) << '\n'
     << "segments\n";
  for (const auto& seg : tr.segments) {
    os << "  " << to_string(seg.kind) << "  (" << format_number(seg.from.y) << ", "
       << format_number(seg.from.z) << ") -> (" << format_number(seg.to.y) << ", "
       << format_number(seg.to.z) << ")";
    if (seg.kind == SegmentKind::Bang) {
      os << "  angle " << format_number(seg.angle) << " rad (" << format_number(degrees(seg.angle))
         << " deg)";
    } else {
      os << "  duration " << format_number(seg.duration);
    }
    os << '\n';
  }
}

/// Polyline CSV: `y,z,segment,kind`.
inline void write_trajectory_csv(std::ostream& os, const RelaxationPair& p, const BlochState& m,
                                 int points_per_segment = 32) {
  const auto tr = optimal_trajectory(m, p);
  os << kSchemaTag << " trajectory structure=" << to_string(tr.structure) << '\n';
  os << "y,z,segment,kind\n";
  for (const auto& pt : trajectory_polyline(tr, p, points_per_segment)) {
    os << format_number(pt.state.y) << ',' << format_number(pt.state.z) << ',' << pt.segment << ','
       << to_string(pt.kind) << '\n';
  }
}

} // namespace spinsnr::io
