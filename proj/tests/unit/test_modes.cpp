#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "tdem/errors.hpp"
#include "tdem/modes.hpp"

using namespace tdem;
using std::numbers::pi;

namespace {

TargetSpec sphere(double mu_r, double a = 0.05) { return {a, MaterialSpec::from_resistivity(2.8e-8, mu_r)}; }

double integrate01(const std::function<double(double)>& f) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 10, 1e-13);
}

}  // namespace

TEST(Eigencondition, NonmagneticDipoleZeros) {
  for (int n = 1; n <= 8; ++n) EXPECT_NEAR(eigencondition(1, n * pi, 1.0), 0.0, 1e-14);
}

TEST(Eigencondition, Rejects) {
  EXPECT_THROW(find_decay_rates(sphere(1.0), 1.0, 0, 3), std::invalid_argument);
  EXPECT_THROW(find_decay_rates(sphere(1.0), 1.0, 1, 0), std::invalid_argument);
  RootSearchOptions tight;
  tight.x_max = 10.0;
  EXPECT_THROW(find_decay_rates(sphere(1.0), 1.0, 1, 20, tight), NumericalError);
}

TEST(FindDecayRates, NonmagneticRoots) {
  const auto modes = find_decay_rates(sphere(1.0), 1.0, 1, 5);
  for (int n = 1; n <= 5; ++n) EXPECT_NEAR(modes[n - 1].x, n * pi, 1e-10 * n * pi);
}

TEST(FindDecayRates, QuadrupoleMatchesJ1Zero) {
  EXPECT_NEAR(find_decay_rates(sphere(1.0), 1.0, 2, 1)[0].x, 4.493409457909064, 1e-10);
}

TEST(FindDecayRates, LargeContrastApproachesJ1Zeros) {
  const auto modes = find_decay_rates(sphere(1.0), 1e-6, 1, 2);  // mu_c / mu_b = 1e6
  EXPECT_NEAR(modes[0].x, 4.493409457909064, 1e-4);
  EXPECT_NEAR(modes[1].x, 7.725251836937707, 1e-4);
}

TEST(FindDecayRates, AluminumFundamental) {
  const TargetSpec t = sphere(1.0);
  const auto modes = find_decay_rates(t, 1.0, 1, 2);
  const double d = diffusivity(t.material);
  EXPECT_NEAR(modes[0].decay_rate, pi * pi * d / (0.05 * 0.05), 1e-9);
  EXPECT_NEAR(modes[0].decay_rate, 87.97, 1e-2);
  EXPECT_NEAR(modes[1].decay_rate / modes[0].decay_rate, 4.0, 1e-12);
}

TEST(FindDecayRates, AgreesWithRadialOracle) {
  for (double mu : {1.0, 10.0, 200.0}) {
    for (int l = 1; l <= 3; ++l) {
      const auto modes = find_decay_rates(sphere(mu), 1.0, l, 10);
      const auto fd = radial_fd_oracle(sphere(mu), 1.0, l, 2000);
      for (int n = 0; n < 10; ++n) {
        EXPECT_NEAR(modes[n].decay_rate, fd[n], 5e-3 * fd[n]) << "mu=" << mu << " l=" << l << " n=" << n + 1;
      }
    }
  }
}

TEST(FindDecayRates, SpectrumShape) {
  for (double mu : {1.0, 200.0}) {
    const auto modes = find_decay_rates(sphere(mu), 1.0, 2, 400);
    for (std::size_t i = 1; i < modes.size(); ++i) {
      EXPECT_GT(modes[i].x, modes[i - 1].x);
      EXPECT_GT(modes[i].decay_rate, 0.0);
    }
    EXPECT_NEAR(modes[399].x - modes[398].x, pi, 1e-3);
    const double tc = 0.05 * 0.05 / diffusivity(sphere(mu).material);
    EXPECT_GT(modes[0].decay_rate * tc, 0.1);
    EXPECT_LT(modes[0].decay_rate * tc, 100.0);
  }
}

TEST(RadialOracle, ConvergesAtSecondOrder) {
  const TargetSpec t = sphere(1.0);
  const double exact = pi * pi * diffusivity(t.material) / (0.05 * 0.05);
  const auto fd2000 = radial_fd_oracle(t, 1.0, 1, 2000);
  const auto fd1000 = radial_fd_oracle(t, 1.0, 1, 1000);
  EXPECT_NEAR(fd2000[0], exact, 1e-3 * exact);
  const double ratio = std::abs(fd1000[0] - exact) / std::abs(fd2000[0] - exact);
  EXPECT_NEAR(ratio, 4.0, 0.3);
  for (std::size_t i = 1; i < fd2000.size(); ++i) EXPECT_GE(fd2000[i], fd2000[i - 1]);
  EXPECT_THROW(radial_fd_oracle(t, 1.0, 1, 10), std::invalid_argument);
}

TEST(RadialProfile, OriginAndContinuity) {
  for (double mu : {1.0, 200.0}) {
    for (const Mode& m : find_decay_rates(sphere(mu), 1.0, 3, 4)) {
      EXPECT_EQ(radial_profile(m, 0.0), 0.0);
      const double in = radial_profile(m, 1.0 - 1e-15);
      const double out = radial_profile(m, 1.0 + 1e-15);
      EXPECT_NEAR(in, out, 1e-12 * std::max(1.0, std::abs(in)));
      EXPECT_NEAR(radial_profile(m, 2.0), radial_profile(m, 1.0) * std::pow(2.0, -4), 1e-14);
    }
  }
}

TEST(RadialProfile, GramMatrixIsIdentity) {
  for (double mu : {1.0, 200.0}) {
    for (int l = 1; l <= 3; ++l) {
      const auto modes = find_decay_rates(sphere(mu), 1.0, l, 8);
      for (std::size_t i = 0; i < modes.size(); ++i) {
        for (std::size_t j = i; j < modes.size(); ++j) {
          const double g = integrate01([&](double r) {
            return radial_profile(modes[i], r) * radial_profile(modes[j], r) * r * r;
          });
          EXPECT_NEAR(g, i == j ? 1.0 : 0.0, 1e-6) << "mu=" << mu << " l=" << l << " i=" << i << " j=" << j;
        }
      }
    }
  }
}

TEST(NormalizeMode, IdempotentAndMatchesQuadrature) {
  const auto modes = find_decay_rates(sphere(1.0), 1.0, 1, 3);
  for (const Mode& m : modes) {
    EXPECT_NEAR(normalize_mode(m).norm, m.norm, 1e-12 * m.norm);
    EXPECT_NEAR(normalize_mode(normalize_mode(m)).norm, m.norm, 1e-12 * m.norm);
    const double q = integrate01([&](double r) { return std::pow(spherical_bessel_j(1, m.x * r) * r, 2); });
    EXPECT_NEAR(m.norm * m.norm * q, 1.0, 1e-10);
    // for x = n pi the closed form reduces to j_0(x)^2 / 2 ... = 1 / (2 x^2)
    EXPECT_NEAR(q, 0.5 / (m.x * m.x), 1e-12);
  }
}

TEST(NormalizeMode, ConductivityScaling) {
  TargetSpec t = sphere(1.0);
  const double s1 = mode_field_scale(t);
  t.material.conductivity *= 4.0;
  EXPECT_NEAR(mode_field_scale(t), 0.5 * s1, 1e-15 * s1);
}

TEST(ModeLibrary, SortedAndComplete) {
  const ModeLibrary lib = build_mode_library(sphere(200.0), 1.0, 3, 20);
  EXPECT_EQ(lib.modes.size(), 60u);
  for (std::size_t i = 1; i < lib.modes.size(); ++i) {
    EXPECT_LE(lib.modes[i - 1].decay_rate, lib.modes[i].decay_rate);
  }
  EXPECT_DOUBLE_EQ(lib.mu_ratio(), 200.0);
  EXPECT_DOUBLE_EQ(lib.max_decay_rate(), lib.modes.back().decay_rate);
}
