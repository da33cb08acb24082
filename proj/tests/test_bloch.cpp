#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spinsnr/bloch.hpp"
#include "test_util.hpp"

using namespace spinsnr;
using spinsnr::testing::kRegimeB;
using spinsnr::testing::kSeed;

TEST(RelaxationPair, ValidatesInput) {
  EXPECT_NO_THROW(RelaxationPair::make(1.8, 1.0));
  EXPECT_NO_THROW(RelaxationPair::make(0.5, 1.0));  // 2 Gamma == gamma is allowed
  EXPECT_THROW(RelaxationPair::make(0.4, 1.0), PhysicalityError);
  EXPECT_NO_THROW(RelaxationPair::make(0.4, 1.0, true));
  EXPECT_THROW(RelaxationPair::make(0.0, 1.0), DomainError);
  EXPECT_THROW(RelaxationPair::make(1.0, -1.0), DomainError);
  EXPECT_THROW(RelaxationPair::make(NAN, 1.0), DomainError);
}

TEST(RelaxationPair, PhysicalUnitsNormalize) {
  const double two_pi = 2.0 * std::numbers::pi;
  const auto p = normalize_params(two_pi, two_pi / 1.8, 1.0);
  EXPECT_NEAR(p.gamma_t2, 1.8, 1e-15);
  EXPECT_NEAR(p.gamma_t1, 1.0, 1e-15);
  EXPECT_THROW(normalize_params(1.0, 3.0, 1.0), PhysicalityError);  // T2 > 2 T1
  EXPECT_THROW(normalize_params(1.0, 1.0, 0.0), DomainError);
}

TEST(Relax, FrozenValue) {
  const auto s = relax({0.6, 0.3}, 1.0, kRegimeB);
  EXPECT_NEAR(s.y, 0.0991793329329519, 1e-12);
  EXPECT_NEAR(s.z, 0.7424843911799904, 1e-12);
  EXPECT_THROW(relax({0.6, 0.3}, -0.1, kRegimeB), DomainError);
}

TEST(Relax, EquilibriumIsFixed) {
  const auto s = relax({0.0, 1.0}, 3.7, kRegimeB);
  EXPECT_EQ(s.y, 0.0);
  EXPECT_EQ(s.z, 1.0);
}

TEST(Relax, SemigroupProperty) {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> ut(0.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const auto s = spinsnr::testing::random_disk(rng);
    const double a = ut(rng), b = ut(rng);
    EXPECT_LE(distance(relax(relax(s, a, kRegimeB), b, kRegimeB), relax(s, a + b, kRegimeB)), 1e-14);
  }
}

TEST(Relax, StaysInsideDisk) {
  std::mt19937_64 rng(kSeed + 1);
  std::uniform_real_distribution<double> ut(0.0, 5.0);
  for (int i = 0; i < 2000; ++i) {
    const RelaxationPair p{0.5 + 3.0 * ut(rng) / 5.0, 0.1 + ut(rng) / 5.0};
    if (!p.physical()) continue;
    const auto s = relax(spinsnr::testing::random_disk(rng, 1.0), ut(rng), p);
    EXPECT_LE(s.radius(), 1.0 + 1e-14);
  }
}

TEST(Relax, InverseRoundTrip) {
  std::mt19937_64 rng(kSeed + 2);
  std::uniform_real_distribution<double> ut(0.0, 2.0);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto s = spinsnr::testing::random_disk(rng);
    const double t = ut(rng);
    const auto fwd = relax(s, t, kRegimeB);
    EXPECT_LE(distance(relax_inverse(fwd, t, kRegimeB), s), 1e-12);
    ++checked;
  }
  EXPECT_EQ(checked, 2000);
  EXPECT_THROW(relax_inverse({0.9, 0.0}, 1.0, kRegimeB), RangeError);
}

TEST(Rotate, AdditivityAndNorm) {
  std::mt19937_64 rng(kSeed + 3);
  std::uniform_real_distribution<double> ua(-2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  for (int i = 0; i < 2000; ++i) {
    const auto s = spinsnr::testing::random_disk(rng);
    const double a = ua(rng), b = ua(rng);
    EXPECT_LE(distance(rotate(rotate(s, a), b), rotate(s, a + b)), 1e-14);
    EXPECT_NEAR(rotate(s, a).radius(), s.radius(), 1e-15);
    EXPECT_LE(distance(rotate(rotate(s, a), -a), s), 1e-15);
  }
}

TEST(Rotate, PositiveAngleTipsZTowardY) {
  const auto s = rotate({0.0, 1.0}, std::numbers::pi / 2);
  EXPECT_NEAR(s.y, 1.0, 1e-15);
  EXPECT_NEAR(s.z, 0.0, 1e-15);
}

TEST(Integrate, FreeEvolutionMatchesRelax) {
  std::mt19937_64 rng(kSeed + 4);
  for (int i = 0; i < 200; ++i) {
    const auto s = spinsnr::testing::random_disk(rng);
    const auto num = integrate(s, kRegimeB, [](double) { return 0.0; }, 1.3, 1e-3);
    EXPECT_LE(distance(num, relax(s, 1.3, kRegimeB)), 1e-12);
  }
}

TEST(Integrate, StrongPulseApproachesRotation) {
  // A short bang of amplitude A over phi/A is rotate(s, phi) up to O(1/A).
  const BlochState s{0.2, 0.7};
  const double phi = 1.1;
  double prev = 1.0;
  for (double A : {1e2, 1e3, 1e4}) {
    const auto num = integrate(s, kRegimeB, [A](double) { return -A; }, phi / A, 1e-2 / A);
    const double err = distance(num, rotate(s, phi));
    EXPECT_LT(err, 2.0 / A);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Integrate, FourthOrderConvergence) {
  const BlochState s{0.3, -0.4};
  const auto u = [](double t) { return std::sin(3.0 * t); };
  const auto ref = integrate(s, kRegimeB, u, 2.0, 1e-4);
  const double e1 = distance(integrate(s, kRegimeB, u, 2.0, 0.1), ref);
  const double e2 = distance(integrate(s, kRegimeB, u, 2.0, 0.05), ref);
  const double order = std::log2(e1 / e2);
  EXPECT_GT(order, 3.7);
  EXPECT_LT(order, 4.3);
}

TEST(Integrate, RejectsBadArguments) {
  EXPECT_THROW(integrate(BlochState{}, kRegimeB, [](double) { return 0.0; }, -1.0), DomainError);
  EXPECT_THROW(integrate(BlochState{}, kRegimeB, [](double) { return 0.0; }, 1.0, 0.0), DomainError);
}

TEST(IntegrateUntil, LocatesEvent) {
  // Free longitudinal recovery from z = -0.5 crosses z = 0.5 at ln(3)/gamma.
  const auto hit = integrate_until(
      BlochState{0.0, -0.5}, kRegimeB, [](double) { return 0.0; },
      [](const BlochState& s) { return 0.5 - s.z; }, 1e-3);
  ASSERT_TRUE(hit.hit);
  EXPECT_NEAR(hit.time, 1.0986122886681098, 1e-10);
  EXPECT_NEAR(hit.state.z, 0.5, 1e-12);
}

TEST(IntegrateUntil, StopsAtTMax) {
  const auto hit = integrate_until(
      BlochState{0.0, 0.0}, kRegimeB, [](double) { return 0.0; },
      [](const BlochState& s) { return 2.0 - s.z; }, 1e-2, 0.5);
  EXPECT_FALSE(hit.hit);
  EXPECT_NEAR(hit.time, 0.5, 1e-12);
}

TEST(RadialSpeed, MatchesFiniteDifference) {
  std::mt19937_64 rng(kSeed + 5);
  for (int i = 0; i < 1000; ++i) {
    const auto s = spinsnr::testing::random_disk(rng);
    if (s.radius() < 0.05) continue;
    const double h = 1e-6;
    const double fd = (relax(s, h, kRegimeB).radius() - relax_inverse(s, h, kRegimeB).radius()) / (2 * h);
    EXPECT_NEAR(radial_speed(s, kRegimeB), fd, 1e-7);
  }
  EXPECT_THROW(radial_speed({0.0, 0.0}, kRegimeB), DomainError);
}

TEST(RadialSpeed, ThetaDerivative) {
  EXPECT_NEAR(radial_speed_dtheta({0.5, 0.5}, kRegimeB), 1.2727922061357855, 1e-12);
  // Finite difference in theta at fixed r.
  std::mt19937_64 rng(kSeed + 6);
  for (int i = 0; i < 1000; ++i) {
    const auto s = spinsnr::testing::random_half_disk(rng);
    if (s.radius() < 0.05 || s.y < 1e-3) continue;
    const double h = 1e-6;
    const double fd = (radial_speed(rotate(s, -h), kRegimeB) - radial_speed(rotate(s, h), kRegimeB)) / (2 * h);
    EXPECT_NEAR(radial_speed_dtheta(s, kRegimeB), fd, 1e-6);
  }
}

TEST(Timing, TotalSnrScaling) {
  const auto t = ExperimentTiming::make(1.0, 100.0, 0.0);
  EXPECT_EQ(t.n_cycles, 100);
  EXPECT_NEAR(total_snr(0.5, t), 5.0, 1e-15);
  EXPECT_THROW(total_snr(1.2, t), DomainError);
  EXPECT_THROW(ExperimentTiming::make(0.0, 1.0), DomainError);
}
