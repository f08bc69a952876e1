#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nvsense/physics.hpp"
#include "nvsense/rng.hpp"
#include "oracles.hpp"

using namespace nvsense;

TEST(ShellIntegral, CenterLimit) {
  EXPECT_NEAR(shell_inverse_r6_integral(0.0, 14.0), 4.0 * std::numbers::pi / std::pow(14.0, 4), 1e-18);
  EXPECT_NEAR(shell_inverse_r6_integral(0.0, 14.0), 3.2712e-4, 1e-8);
}

TEST(ShellIntegral, OffCenterMatchesMonteCarlo) {
  const double mc = oracle::mc_shell_integral(5.0, 14.0, 1'000'000, 1);
  const double exact = shell_inverse_r6_integral(5.0, 14.0);
  EXPECT_NEAR(exact / mc, 1.0, 0.01);
  // frozen after the Monte Carlo comparison above
  EXPECT_NEAR(exact, 6.366e-4, 1e-7);
}

TEST(ShellIntegral, RandomGeometriesMatchMonteCarlo) {
  RngStream rng(7, StreamTag::test_oracle, 0);
  for (int i = 0; i < 20; ++i) {
    const double rs = 3.0 + 30.0 * rng.uniform01();
    const double a = 0.8 * rs * rng.uniform01();
    const double mc = oracle::mc_shell_integral(a, rs, 400'000, 100 + i);
    EXPECT_NEAR(shell_inverse_r6_integral(a, rs) / mc, 1.0, 0.01) << "a=" << a << " rs=" << rs;
  }
}

TEST(ShellIntegral, DivergesNearShell) {
  EXPECT_GT(shell_inverse_r6_integral(13.9, 14.0), 1e3 * shell_inverse_r6_integral(0.0, 14.0));
}

TEST(ShellIntegral, SeriesBranchIsContinuous) {
  const double rs = 12.5;
  const double below = shell_inverse_r6_integral(rs * (1e-3 - 1e-12), rs);
  const double above = shell_inverse_r6_integral(rs * (1e-3 + 1e-12), rs);
  EXPECT_LT(std::abs(below - above) / above, 1e-9);
}

TEST(ShellIntegral, RejectsNvOnOrOutsideShell) {
  EXPECT_THROW(shell_inverse_r6_integral(14.0, 14.0), DomainError);
  EXPECT_THROW(shell_inverse_r6_integral(15.0, 14.0), DomainError);
  EXPECT_THROW(shell_inverse_r6_integral(-1.0, 14.0), DomainError);
  EXPECT_THROW(shell_inverse_r6_integral(0.0, 0.0), DomainError);
}

TEST(MsqField, ZeroDensityAndLinearity) {
  const PhysicalConstants c;
  EXPECT_EQ(msq_transverse_field(0.0, 2.0, 14.0, c), 0.0);
  const double b1 = msq_transverse_field(0.07, 2.0, 14.0, c);
  EXPECT_DOUBLE_EQ(msq_transverse_field(0.14, 2.0, 14.0, c), 2.0 * b1);
}

TEST(MsqField, DiscreteSpinOracle) {
  const PhysicalConstants c;
  for (double a : {0.0, 5.0}) {
    const double rs = 14.0;
    const double expected = msq_transverse_field(0.1, a, rs, c);
    const double got = oracle::discrete_spin_msq(0.1, a, rs, c.dipolar_prefactor, 200, 11);
    EXPECT_NEAR(got / expected, 1.0, 0.03) << "a=" << a;
  }
  EXPECT_NEAR(msq_transverse_field(0.1, 0.0, 14.0, c), c.dipolar_prefactor * 0.1 * 3.2712e-4,
              c.dipolar_prefactor * 0.1 * 1e-8);
}

TEST(Constants, PrefactorFromFundamentalConstants) {
  // (mu0/4pi)^2 (hbar gamma_e)^2 * 63/4 * 2/3 in T^2 nm^6
  const double m = 1.00000000055e-7 * 1.054571817e-34 * 1.76085963023e11;
  EXPECT_NEAR(PhysicalConstants{}.dipolar_prefactor, m * m * 10.5 * 1e54, 1e-12 * m * m * 10.5 * 1e54);
  EXPECT_NO_THROW(PhysicalConstants{}.validate());
  PhysicalConstants broken;
  broken.spin_gd = 2.5;
  EXPECT_THROW(broken.validate(), ValidationError);
}

TEST(FluctuationRate, Examples) {
  const SpinBathParams bath{1e8, 3e9, 0.0};
  EXPECT_EQ(fluctuation_rate(0.0, bath), 1e8);
  EXPECT_NEAR(fluctuation_rate(0.09, bath), 1.0e9, 1e-3);
  for (double n : {0.01, 0.1, 0.37})
    EXPECT_NEAR(fluctuation_rate(4 * n, bath) - 1e8, 2 * (fluctuation_rate(n, bath) - 1e8), 1e-4);
}

TEST(LorentzianPsd, Examples) {
  EXPECT_EQ(lorentzian_psd(0.0, 1e10), 0.0);
  EXPECT_DOUBLE_EQ(lorentzian_psd(1e10, 1e10), 1.0 / 2e10);
  EXPECT_NEAR(lorentzian_psd(1e9, 1.80327e10), 3.066e-12, 1e-15);
}

TEST(LorentzianPsd, BoundedByHalfInverseOmega) {
  RngStream rng(3, StreamTag::test_oracle, 0);
  for (int i = 0; i < 1000; ++i) {
    const double omega = std::exp(20.0 + 5.0 * rng.uniform01());
    const double rate = std::exp(10.0 + 20.0 * rng.uniform01());
    EXPECT_LE(lorentzian_psd(rate, omega), 0.5 / omega * (1 + 1e-15));
  }
}

TEST(RelaxationRate, BulkOnlyWithoutSpins) {
  SensorConfig s;
  s.gd_density = 0.0;
  s.defect_density = 0.0;
  const auto r = relaxation_rate(s, PhysicsModel{});
  EXPECT_EQ(r.gamma_total, 1.0 / s.t1_bulk);
}

TEST(RelaxationRate, DetachedLimitDropsGdTerm) {
  SensorConfig s;
  s.gd_density = 0.0;
  const auto r = relaxation_rate(s, PhysicsModel{});
  EXPECT_EQ(r.gamma_gd, 0.0);
  EXPECT_EQ(r.gamma_total, r.gamma_bulk + r.gamma_surface);
}

TEST(RelaxationRate, GdShortensT1AtDefaults) {
  SensorConfig with_gd;
  SensorConfig without = with_gd;
  without.gd_density = 0.0;
  const double ratio = relaxation_rate(with_gd, PhysicsModel{}).t1() / relaxation_rate(without, PhysicsModel{}).t1();
  EXPECT_LT(ratio, 1.0);
  // calibration artifact for the frozen default constants
  EXPECT_NEAR(ratio, 0.56000, 1e-5);
}

TEST(RelaxationRate, AdditiveForRandomConfigs) {
  RngStream rng(5, StreamTag::test_oracle, 0);
  const PhysicsModel m;
  for (int i = 0; i < 500; ++i) {
    const auto s = oracle::random_sensor(rng);
    const auto r = relaxation_rate(s, m);
    EXPECT_EQ(r.gamma_total, r.gamma_bulk + r.gamma_surface + r.gamma_gd);
  }
}

TEST(RelaxationRate, GdTermStrictlyIncreasingInDensity) {
  const PhysicsModel m;
  ASSERT_LT(fluctuation_rate(0.3, m.gd_bath), m.constants.omega0);
  SensorConfig s;
  double prev = -1.0;
  for (int i = 0; i < 100; ++i) {
    s.gd_density = 0.3 * i / 99.0;
    const double g = relaxation_rate(s, m).gamma_gd;
    EXPECT_GT(g, prev) << "n=" << s.gd_density;
    prev = g;
  }
}

TEST(RelaxationRate, DecaysWithStandoff) {
  const PhysicsModel m;
  SensorConfig s;
  double prev = relaxation_rate(s, m).gamma_gd;
  for (double l = 1.6; l < 5.0; l += 0.1) {
    s.gd_standoff = l;
    const double g = relaxation_rate(s, m).gamma_gd;
    EXPECT_LT(g, prev);
    prev = g;
  }
}

TEST(RelaxationRate, RejectsInvalidSensor) {
  SensorConfig s;
  s.nv_offset = s.radius();
  EXPECT_THROW(relaxation_rate(s, PhysicsModel{}), ValidationError);
  s = SensorConfig{};
  s.diameter = -1;
  EXPECT_THROW(relaxation_rate(s, PhysicsModel{}), ValidationError);
}

TEST(Gradient, LinearCoefficientWithoutDensityDependentRate) {
  PhysicsModel m;
  m.gd_bath.rate_density_coeff = 0.0;
  SensorConfig s;
  const auto& c = m.constants;
  const double expected = c.gamma_e * c.gamma_e * c.dipolar_prefactor *
                          shell_inverse_r6_integral(0.0, s.gd_shell_radius()) *
                          lorentzian_psd(m.gd_bath.intrinsic_rate, c.omega0);
  EXPECT_NEAR(dgamma_dn(s, m), expected, 1e-12 * expected);
}

TEST(Gradient, MatchesCentralDifferenceAtDefaults) {
  const PhysicsModel m;
  SensorConfig s;
  const double fd = oracle::central_difference_dgamma(s, m, 1e-5);
  EXPECT_NEAR(dgamma_dn(s, m) / fd, 1.0, 1e-6);
}

TEST(Gradient, MatchesCentralDifferenceOnRandomConfigs) {
  RngStream rng(17, StreamTag::test_oracle, 0);
  const PhysicsModel m;
  for (int i = 0; i < 50; ++i) {
    auto s = oracle::random_sensor(rng);
    s.gd_density = 0.02 + 0.28 * rng.uniform01();
    const double fd = oracle::central_difference_dgamma(s, m, 1e-5 * s.gd_density);
    EXPECT_NEAR(dgamma_dn(s, m) / fd, 1.0, 1e-6) << "case " << i;
  }
}

TEST(Gradient, LargerForSmallerDiameter) {
  const PhysicsModel m;
  SensorConfig small;
  small.diameter = 15;
  SensorConfig large;
  large.diameter = 30;
  EXPECT_GT(dgamma_dn(small, m), dgamma_dn(large, m));
}
