#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "tdem/modes.hpp"
#include "tdem/units.hpp"

using namespace tdem;

namespace {

TargetSpec aluminum(double a = 0.05) { return {a, MaterialSpec::from_resistivity(2.8e-8, 1.0)}; }
TargetSpec steel(double a = 0.05) { return {a, MaterialSpec::from_resistivity(8.9e-8, 200.0)}; }

}  // namespace

TEST(Diffusivity, Aluminum) {
  EXPECT_NEAR(diffusivity(aluminum().material), 2.228e-2, 5e-6);
  // rho / mu0 directly
  EXPECT_DOUBLE_EQ(diffusivity(aluminum().material), 2.8e-8 / kMu0);
}

TEST(Diffusivity, Ground) {
  EXPECT_NEAR(diffusivity(MaterialSpec::from_resistivity(10.0, 1.0)), 7.96e6, 5e3);
}

TEST(Diffusivity, Steel) {
  EXPECT_NEAR(diffusivity(steel().material), 3.54e-4, 5e-7);
}

TEST(Diffusivity, InsulatorIsInfinite) {
  EXPECT_TRUE(is_infinite_diffusivity(diffusivity(MaterialSpec::insulator())));
}

TEST(Diffusivity, DecreasesWithConductivityAndPermeability) {
  double prev = INFINITY;
  for (double s : {1e3, 1e5, 1e7, 1e8}) {
    const double d = diffusivity({s, 1.0});
    EXPECT_LT(d, prev);
    prev = d;
  }
  prev = INFINITY;
  for (double mu : {1.0, 2.0, 50.0, 200.0}) {
    const double d = diffusivity({1e7, mu});
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(MaterialSpec, Validation) {
  EXPECT_THROW((MaterialSpec{0.0, 1.0}).validate_target(), std::invalid_argument);
  EXPECT_THROW((MaterialSpec{1e7, 0.5}).validate_target(), std::invalid_argument);
  EXPECT_NO_THROW((MaterialSpec{0.0, 1.0}).validate_background());
  EXPECT_THROW((MaterialSpec{-1.0, 1.0}).validate_background(), std::invalid_argument);
  EXPECT_THROW(MaterialSpec::from_resistivity(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW((TargetSpec{0.0, aluminum().material}).validate(), std::invalid_argument);
  EXPECT_THROW((TargetSpec{-1.0, aluminum().material}).validate(), std::invalid_argument);
  EnvironmentSpec env;
  env.sensor_standoff = 0.0;
  EXPECT_THROW(env.validate(), std::invalid_argument);
}

TEST(CharacteristicTimes, AluminumAndSteel) {
  const EnvironmentSpec env;
  EXPECT_NEAR(characteristic_times(aluminum(), env, 0.0).tau_c, 0.112, 5e-4);
  EXPECT_NEAR(characteristic_times(steel(), env, 0.0).tau_c, 7.06, 5e-3);
}

TEST(CharacteristicTimes, ZeroStandoffLimit) {
  EnvironmentSpec env{MaterialSpec::from_resistivity(10.0, 1.0), 1e-300};
  EXPECT_EQ(characteristic_times(aluminum(), env, 0.0).tau_b, 0.0);
}

TEST(CharacteristicTimes, TransientDefaultsAndCollapse) {
  EnvironmentSpec env{MaterialSpec::from_resistivity(10.0, 1.0), 10.0};
  const TimeMarkers tm = characteristic_times(aluminum(), env, 1e-6, 2e-3);
  EXPECT_NEAR(tm.tau_b, 100.0 / 7.9577e6, 1e-9);
  EXPECT_EQ(tm.tau_tr, tm.tau_b);
  EXPECT_EQ(tm.t_tr(), 2e-3 + tm.tau_b);
  const TimeMarkers collapsed = characteristic_times(aluminum(), env, 1e-6, 2e-3, true);
  EXPECT_EQ(collapsed.t_tr(), 2e-3);
}

TEST(RegimeValidation, Examples) {
  TimeMarkers tm;
  tm.tau_b = 1e-8;
  tm.tau_c = 0.1;
  EXPECT_TRUE(validate_regime(tm, 0.01).pass());

  tm.tau_b = 0.0;
  tm.tau_r = 0.05;
  const RegimeValidation v = validate_regime(tm, 0.01);
  EXPECT_FALSE(v.pass());
  EXPECT_DOUBLE_EQ(v.checks[1].ratio, 0.5);
  EXPECT_NE(v.describe().find("tau_r/tau_c"), std::string::npos);

  EnvironmentSpec ground{MaterialSpec::from_resistivity(10.0, 1.0), 10.0};
  EXPECT_TRUE(validate_regime(characteristic_times(aluminum(), ground, 0.0)).pass());

  EXPECT_THROW(validate_regime(tm, 1.0), std::invalid_argument);
  EXPECT_THROW(validate_regime(tm, 0.0), std::invalid_argument);
}

TEST(ScaleSystem, RoundTrip) {
  const ScaleSystem s = ScaleSystem::for_target(aluminum(), 3.7);
  for (double v : {1e-9, 0.3, 17.0, 4.2e5}) {
    EXPECT_NEAR(s.to_physical_length(s.to_dimensionless_length(v)), v, 1e-12 * v);
    EXPECT_NEAR(s.to_physical_time(s.to_dimensionless_time(v)), v, 1e-12 * v);
    EXPECT_NEAR(s.to_physical_field(s.to_dimensionless_field(v)), v, 1e-12 * v);
  }
  EXPECT_THROW(ScaleSystem(0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ScaleSystem(1.0, -1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ScaleSystem(1.0, 1.0, INFINITY), std::invalid_argument);
}

TEST(ScaleSystem, ScalingInvariance) {
  // (a, sigma) -> (s a, sigma): dimensionless wavenumbers are untouched and tau_c grows by s^2.
  for (double mu : {1.0, 200.0}) {
    TargetSpec base{0.05, MaterialSpec::from_resistivity(2.8e-8, mu)};
    const auto ref = find_decay_rates(base, 1.0, 2, 6);
    const double tc = characteristic_times(base, {}, 0.0).tau_c;
    for (double s : {0.01, 3.0, 250.0}) {
      TargetSpec scaled = base;
      scaled.radius *= s;
      const auto got = find_decay_rates(scaled, 1.0, 2, 6);
      const double tcs = characteristic_times(scaled, {}, 0.0).tau_c;
      EXPECT_NEAR(tcs / tc, s * s, 1e-12 * s * s);
      for (std::size_t i = 0; i < ref.size(); ++i) {
        EXPECT_EQ(got[i].x, ref[i].x);
        EXPECT_EQ(got[i].norm, ref[i].norm);
        EXPECT_NEAR(got[i].decay_rate * tcs, ref[i].decay_rate * tc, 1e-13 * ref[i].decay_rate * tc);
      }
    }
  }
}
