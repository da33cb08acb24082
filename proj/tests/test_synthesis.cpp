#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spinsnr/synthesis.hpp"
#include "test_util.hpp"

using namespace spinsnr;
using spinsnr::testing::kRegimeA;
using spinsnr::testing::kRegimeB;
using spinsnr::testing::kRegimeC;
using spinsnr::testing::kSeed;

TEST(MagicPlane, Location) {
  const auto b = magic_plane(kRegimeB);
  ASSERT_TRUE(b.z0.has_value());
  EXPECT_TRUE(b.present);
  EXPECT_NEAR(*b.z0, -0.625, 1e-15);

  const auto c = magic_plane(kRegimeC);  // Gamma < 3 gamma / 2: plane below the ball
  ASSERT_TRUE(c.z0.has_value());
  EXPECT_FALSE(c.present);
  EXPECT_LT(*c.z0, -1.0);

  EXPECT_FALSE(magic_plane({1.0, 1.0}).z0.has_value());
  EXPECT_FALSE(magic_plane({0.8, 1.0}).present);
}

TEST(MagicPlane, FastestShrinkAtFixedRadius) {
  // On each circle r > |z0| the radial speed is most negative at z = z0.
  const double z0 = *magic_plane(kRegimeB).z0;
  for (double r : {0.65, 0.8, 0.95}) {
    double best = 1e9, best_z = 0.0;
    for (int k = 1; k < 20000; ++k) {
      const double th = -std::numbers::pi / 2 + std::numbers::pi * k / 20000.0;
      const auto s = BlochState::from_polar(r, th);
      const double v = radial_speed(s, kRegimeB);
      if (v < best) {
        best = v;
        best_z = s.z;
      }
    }
    EXPECT_NEAR(best_z, z0, 2e-3);
  }
}

TEST(ErnstResidual, FrozenValueAndSign) {
  EXPECT_NEAR(ernst_ellipsoid_residual({0.95, 0.0}, kRegimeB), -0.4782639395975904, 1e-12);
  EXPECT_GT(ernst_ellipsoid_residual({0.3, 0.1}, kRegimeB), 0.0);
  EXPECT_NEAR(ernst_ellipsoid_residual({0.6892739804246588, 0.2689414213699951}, kRegimeB), 0.0, 1e-15);
}

TEST(ErnstResidual, MatchesRadiiDifference) {
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 2000; ++i) {
    const auto m = spinsnr::testing::random_half_disk(rng);
    const auto s = relax(m, 1.0, kRegimeB);
    EXPECT_NEAR(ernst_ellipsoid_residual(m, kRegimeB), s.radius_squared() - m.radius_squared(), 1e-14);
  }
}

TEST(ZeroRadialSpeed, ResidualSign) {
  std::mt19937_64 rng(kSeed + 1);
  for (int i = 0; i < 2000; ++i) {
    const auto s = spinsnr::testing::random_disk(rng);
    if (s.radius() < 1e-3) continue;
    const double v = radial_speed(s, kRegimeB);
    EXPECT_NEAR(-s.radius() * v, zero_radial_speed_residual(s, kRegimeB), 1e-14);
  }
}

TEST(Classify, FrozenPoints) {
  EXPECT_EQ(classify({0.95, 0.0}, kRegimeB), ControlStructure::BSvPosB);
  EXPECT_EQ(classify({0.6, 0.3}, kRegimeB), ControlStructure::BShB);
  EXPECT_EQ(classify({0.3, 0.1}, kRegimeB), ControlStructure::BShSvNegB);
  EXPECT_EQ(classify({0.2, -0.3}, kRegimeB), ControlStructure::BSvNegB);
  EXPECT_EQ(classify({0.6892739804246588, 0.2689414213699951}, kRegimeB), ControlStructure::B);
  EXPECT_EQ(classify({0.5, 0.2}, kRegimeC), ControlStructure::BSvNegB);
  EXPECT_EQ(classify({0.4, 0.5}, kRegimeA), ControlStructure::BShB);
  EXPECT_EQ(classify({0.1, -0.9}, kRegimeA), ControlStructure::BSvPosB);
}

TEST(Classify, GeometryRecord) {
  const auto g = synthesis_geometry({0.95, 0.0}, kRegimeB);
  EXPECT_NEAR(g.r_s, 0.65133406206217219, 1e-14);
  EXPECT_NEAR(g.r_m, 0.95, 1e-15);
  EXPECT_NEAR(synthesis_geometry({0.6, 0.3}, kRegimeB).r_s, 0.74907917553950616, 1e-14);
  EXPECT_NEAR(synthesis_geometry({0.3, 0.1}, kRegimeB).r_s, 0.67074415415515657, 1e-14);
}

TEST(Classify, RejectsPointsOffTheHalfDisk) {
  EXPECT_THROW(classify({-0.1, 0.0}, kRegimeB), DomainError);
  EXPECT_THROW(classify({0.8, 0.8}, kRegimeB), DomainError);
  EXPECT_THROW(classify({0.0, 1.0}, kRegimeB), DomainError);
  EXPECT_THROW(classify({NAN, 0.0}, kRegimeB), DomainError);
}

TEST(Classify, NoMagicStructuresWithoutPlane) {
  std::mt19937_64 rng(kSeed + 2);
  for (int i = 0; i < 5000; ++i) {
    const auto st = classify(spinsnr::testing::random_half_disk(rng), kRegimeC);
    EXPECT_NE(st, ControlStructure::BShB);
    EXPECT_NE(st, ControlStructure::BShSvNegB);
  }
}

TEST(Classify, StructureNames) {
  for (auto c : {ControlStructure::B, ControlStructure::BSvPosB, ControlStructure::BSvNegB,
                 ControlStructure::BShB, ControlStructure::BShSvNegB}) {
    EXPECT_EQ(parse_control_structure(to_string(c)), c);
  }
  EXPECT_THROW(parse_control_structure("BBB"), std::invalid_argument);
}

TEST(Regime, Boundaries) {
  const auto b = regime_boundaries(1.0);
  EXPECT_DOUBLE_EQ(b.gamma_bc, 1.5);
  EXPECT_NEAR(b.gamma_ab, 2.0819767068693264, 1e-14);
  EXPECT_NEAR(regime_boundaries(0.5).gamma_ab, 1.5207470412683991, 1e-14);
  EXPECT_NEAR(regime_boundaries(1.5).gamma_ab, 2.6808253751833024, 1e-14);
  // Small-gamma limit of Gamma_ab is 1.
  EXPECT_NEAR(regime_boundaries(1e-9).gamma_ab, 1.0, 1e-8);
  EXPECT_THROW(regime_boundaries(0.0), DomainError);
}

TEST(Regime, ExampleSets) {
  EXPECT_EQ(regime(kRegimeA), SynthesisRegime::A);
  EXPECT_EQ(regime(kRegimeB), SynthesisRegime::B);
  EXPECT_EQ(regime(kRegimeC), SynthesisRegime::C);
}

TEST(Regime, BoundariesNeverCross) {
  for (int k = 1; k <= 10000; ++k) {
    const double g = 1e-3 * k;
    const auto b = regime_boundaries(g);
    EXPECT_GT(b.gamma_ab, b.gamma_bc);
  }
}

TEST(ErnstCurve, PointsLieOnTheEllipsoid) {
  for (const auto& p : {kRegimeA, kRegimeB, kRegimeC}) {
    const double lo = ernst_curve_z_min(p);
    EXPECT_NEAR(ernst_curve_y(lo, p), 0.0, 1e-7);
    for (int k = 0; k <= 200; ++k) {
      const double z = lo + (1.0 - lo) * k / 200.0;
      const double y = ernst_curve_y(z, p);
      EXPECT_NEAR(ernst_ellipsoid_residual({y, z}, p), 0.0, 1e-14);
    }
    EXPECT_THROW(ernst_curve_y(lo - 0.01, p), DomainError);
  }
}

TEST(BoundaryCurves, LieOnTheirLoci) {
  const auto c = boundary_curves(kRegimeB, 300);
  const double a = 0.625;
  EXPECT_EQ(c.ernst.size(), 300u);
  EXPECT_EQ(c.magic_circle.size(), 300u);
  EXPECT_FALSE(c.relaxed_circle.empty());
  for (const auto& m : c.ernst) {
    EXPECT_NEAR(relax(m, 1.0, kRegimeB).radius(), m.radius(), 1e-12);
  }
  for (const auto& m : c.magic_circle) EXPECT_NEAR(m.radius(), a, 1e-12);
  for (const auto& m : c.relaxed_circle) {
    EXPECT_GE(m.y, 0.0);
    EXPECT_LE(m.radius(), 1.0 + 1e-12);
    EXPECT_NEAR(relax(m, 1.0, kRegimeB).radius(), a, 1e-12);
  }
  const auto cc = boundary_curves(kRegimeC, 50);
  EXPECT_TRUE(cc.magic_circle.empty());
  EXPECT_TRUE(cc.relaxed_circle.empty());
}
