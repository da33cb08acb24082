#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>

#include "spinsnr/io.hpp"
#include "test_util.hpp"

using namespace spinsnr;
using spinsnr::testing::kRegimeB;
using spinsnr::testing::kSeed;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

} // namespace

TEST(Format, SeventeenDigitsRoundTrip) {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(u(rng)));
    EXPECT_EQ(std::strtod(io::format_number(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(io::format_number(0.1), "0.10000000000000001");
}

TEST(QGridCsv, SchemaAndRows) {
  const auto grid = q_grid(kRegimeB, 16, 16);
  std::ostringstream os;
  io::write_qgrid_csv(os, grid);
  const auto lines = lines_of(os.str());
  ASSERT_EQ(lines.size(), grid.samples.size() + 2);
  EXPECT_EQ(lines[0].rfind("# spin-snr-synth v1", 0), 0u);
  EXPECT_EQ(lines[1], "y,z,structure,t_control,q");
  // Every numeric field parses back to the sample value.
  for (std::size_t k = 0; k < grid.samples.size(); ++k) {
    std::istringstream row(lines[k + 2]);
    std::string f[5];
    for (auto& x : f) std::getline(row, x, ',');
    const auto& s = grid.samples[k];
    EXPECT_EQ(std::strtod(f[0].c_str(), nullptr), s.m.y);
    EXPECT_EQ(std::strtod(f[1].c_str(), nullptr), s.m.z);
    EXPECT_EQ(f[2], to_string(s.structure));
    EXPECT_EQ(std::strtod(f[3].c_str(), nullptr), s.t_control);
    EXPECT_EQ(std::strtod(f[4].c_str(), nullptr), s.q);
  }
}

TEST(QGridJson, SidecarContents) {
  const auto grid = q_grid(kRegimeB, 8, 8);
  const auto j = io::qgrid_sidecar_json(grid, boundary_curves(kRegimeB, 20));
  EXPECT_EQ(j["kind"], "qsurface");
  EXPECT_EQ(j["params"]["Gamma"], 1.8);
  EXPECT_EQ(j["regime"], "B");
  EXPECT_EQ(j["magic_plane"]["z0"], -0.625);
  EXPECT_EQ(j["boundary_curves"]["ernst_ellipsoid"].size(), 20u);
  EXPECT_EQ(j["boundary_curves"]["magic_circle"].size(), 20u);
  const auto full = io::qgrid_json(grid, boundary_curves(kRegimeB, 20));
  EXPECT_EQ(full["samples"].size(), grid.samples.size());
  // Doubles survive a JSON text round trip.
  const auto back = nlohmann::json::parse(full.dump());
  EXPECT_EQ(back["samples"][3]["q"].get<double>(), grid.samples[3].q);
}

TEST(PhaseCsv, MaskedCellsWriteNan) {
  const auto d = q_max_surface({0.5, 2.0}, {0.5, 1.0}, 2, 2);
  std::ostringstream os;
  io::write_phase_diagram_csv(os, d);
  const auto lines = lines_of(os.str());
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[1], "gamma,Gamma,q_ernst,regime,physical");
  EXPECT_NE(lines[3].find(",nan,"), std::string::npos);  // gamma 2, Gamma 0.5
  EXPECT_EQ(lines[3].back(), '0');
  const auto j = io::phase_boundaries_json(d);
  EXPECT_EQ(j["gamma_ab"].size(), 2u);
  EXPECT_EQ(j["physical_limit"][1][1], 1.0);
}

TEST(Reports, ErnstJsonAndText) {
  const auto e = ernst_solution(kRegimeB);
  const auto j = io::ernst_json(kRegimeB, e);
  EXPECT_EQ(j["flip_rad"].get<double>(), e.flip);
  EXPECT_EQ(j["regime"], "B");
  std::ostringstream os;
  io::write_ernst_text(os, kRegimeB, e);
  EXPECT_NE(os.str().find("deg"), std::string::npos);
  EXPECT_NE(os.str().find("0.68927398042465"), std::string::npos);
}

TEST(Reports, ClassifyJson) {
  const auto j = io::classify_json(kRegimeB, {0.3, 0.1});
  EXPECT_EQ(j["structure"], "BShSvNegB");
  EXPECT_EQ(j["trajectory"]["segments"].size(), 5u);
  EXPECT_EQ(j["trajectory"]["segments"][1]["kind"], "magic_arc");
  EXPECT_NEAR(j["q"].get<double>(), 0.26957266210746071, 1e-12);
}

TEST(Reports, TrajectoryCsv) {
  std::ostringstream os;
  io::write_trajectory_csv(os, kRegimeB, {0.6, 0.3}, 10);
  const auto lines = lines_of(os.str());
  ASSERT_EQ(lines.size(), 2u + 4u * 10u);
  EXPECT_EQ(lines[1], "y,z,segment,kind");
  EXPECT_NE(lines.back().find("detection"), std::string::npos);
}
