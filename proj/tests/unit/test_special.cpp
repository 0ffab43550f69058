#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <gtest/gtest.h>

#include "tdem/special.hpp"

using namespace tdem;
using std::numbers::pi;

namespace {

cplx y_reference(int l, int m, double theta, double phi) {
  // std::sph_legendre carries the Condon-Shortley phase for m >= 0
  const int am = std::abs(m);
  const cplx y = std::sph_legendre(l, am, theta) * std::exp(cplx(0.0, am * phi));
  if (m >= 0) return y;
  return (am % 2 ? -1.0 : 1.0) * std::conj(y);
}

}  // namespace

TEST(SphericalBessel, SimpleValues) {
  EXPECT_NEAR(spherical_bessel_j(0, 1.3), std::sin(1.3) / 1.3, 1e-15);
  EXPECT_NEAR(spherical_bessel_j(0, pi), 0.0, 1e-15);
  EXPECT_EQ(spherical_bessel_j(1, 0.0), 0.0);
  EXPECT_EQ(spherical_bessel_j(0, 0.0), 1.0);
}

TEST(SphericalBessel, FirstZeroOfJ1) {
  // bracket on our implementation, then cross-check with the library function
  auto f = [](double x) { return spherical_bessel_j(1, x); };
  boost::math::tools::eps_tolerance<double> tol(50);
  const auto [lo, hi] = boost::math::tools::bisect(f, 4.0, 5.0, tol);
  const double root = 0.5 * (lo + hi);
  EXPECT_NEAR(root, 4.4934094579, 1e-9);
  EXPECT_NEAR(std::sph_bessel(1, root), 0.0, 1e-14);
}

TEST(SphericalBessel, MatchesLibraryOracle) {
  for (int l = 0; l <= kMaxHarmonicDegree; ++l) {
    for (double x = 1e-4; x < 2e3; x *= 1.07) {
      const double ref = std::sph_bessel(l, x);
      EXPECT_NEAR(spherical_bessel_j(l, x), ref, 1e-13 + 1e-11 * std::abs(ref)) << "l=" << l << " x=" << x;
    }
  }
}

TEST(SphericalBessel, RecurrenceResidual) {
  for (int l = 1; l <= kMaxHarmonicDegree - 1; ++l) {
    for (double x = 0.05; x < 300.0; x *= 1.11) {
      const double r = spherical_bessel_j(l - 1, x) + spherical_bessel_j(l + 1, x) -
                       (2.0 * l + 1.0) * spherical_bessel_j(l, x) / x;
      EXPECT_LE(std::abs(r), 1e-10) << "l=" << l << " x=" << x;
    }
  }
}

TEST(SphericalHarmonic, Normalization) {
  EXPECT_NEAR(std::abs(spherical_harmonic({0, 0}, {0.7, 1.1}) - 1.0 / std::sqrt(4.0 * pi)), 0.0, 1e-15);
  EXPECT_NEAR(spherical_harmonic({1, 0}, {0.0, 0.0}).real(), std::sqrt(3.0 / (4.0 * pi)), 1e-15);
}

TEST(SphericalHarmonic, MatchesLibraryLegendre) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> th(0.0, pi), ph(0.0, 2.0 * pi);
  for (int trial = 0; trial < 40; ++trial) {
    const SurfacePoint p{th(rng), ph(rng)};
    for (int l = 0; l <= 10; ++l) {
      for (int m = -l; m <= l; ++m) {
        EXPECT_LT(std::abs(spherical_harmonic({l, m}, p) - y_reference(l, m, p.theta, p.phi)), 1e-12);
      }
    }
  }
}

TEST(SphericalHarmonic, QuadratureNorm) {
  const SphereQuadrature q(8);
  cplx s = 0.0;
  for (const auto& n : q.nodes) s += n.weight * std::norm(spherical_harmonic({2, 1}, n.p));
  EXPECT_NEAR(s.real(), 1.0, 1e-10);
}

TEST(SphericalHarmonic, AdditionTheorem) {
  for (double th : {0.0, 0.3, 1.2, pi / 2, 2.9, pi}) {
    for (int l = 0; l <= 10; ++l) {
      double s = 0.0;
      for (int m = -l; m <= l; ++m) s += std::norm(spherical_harmonic({l, m}, {th, 0.77}));
      EXPECT_NEAR(s, (2.0 * l + 1.0) / (4.0 * pi), 1e-10);
    }
  }
}

TEST(SphericalHarmonic, GradientMatchesFiniteDifference) {
  const double h = 1e-6;
  for (int l = 1; l <= 6; ++l) {
    for (int m = -l; m <= l; ++m) {
      const SurfacePoint p{1.1, 0.4};
      const cplx dth = (spherical_harmonic({l, m}, {p.theta + h, p.phi}) -
                        spherical_harmonic({l, m}, {p.theta - h, p.phi})) / (2.0 * h);
      const cplx dph = (spherical_harmonic({l, m}, {p.theta, p.phi + h}) -
                        spherical_harmonic({l, m}, {p.theta, p.phi - h})) / (2.0 * h);
      const LocalFrame f = LocalFrame::at(p);
      const CVec3 ref = f.theta_hat.cast<cplx>() * dth + f.phi_hat.cast<cplx>() * (dph / std::sin(p.theta));
      EXPECT_LT((angular_gradient({l, m}, p) - ref).norm(), 1e-8);
    }
  }
}

TEST(VectorHarmonic, Tangential) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> th(0.0, pi), ph(0.0, 2.0 * pi);
  for (int trial = 0; trial < 50; ++trial) {
    const SurfacePoint p{th(rng), ph(rng)};
    const Vec3 r = LocalFrame::at(p).r_hat;
    for (int l = 1; l <= 8; ++l) {
      for (int m = -l; m <= l; ++m) EXPECT_LT(std::abs(r.cast<cplx>().dot(vector_spherical_harmonic({l, m}, p))), 1e-14);
    }
  }
}

TEST(VectorHarmonic, X10ClosedForm) {
  // -i/sqrt(2) r-hat x (r grad Y_10) with r grad Y_10 = -sqrt(3/4pi) sin(theta) theta-hat
  for (double th : {0.2, 1.0, 2.5}) {
    const SurfacePoint p{th, 0.3};
    const CVec3 ref = LocalFrame::at(p).phi_hat.cast<cplx>() * cplx(0.0, std::sqrt(3.0 / (8.0 * pi)) * std::sin(th));
    EXPECT_LT((vector_spherical_harmonic({1, 0}, p) - ref).norm(), 1e-15);
  }
}

TEST(VectorHarmonic, Orthonormality) {
  const SphereQuadrature q(40);
  const int lmax = 8;
  std::vector<HarmonicIndex> idx;
  for (int l = 1; l <= lmax; ++l) {
    for (int m = -l; m <= l; ++m) idx.push_back({l, m});
  }
  std::vector<std::vector<CVec3>> samples(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (const auto& n : q.nodes) samples[i].push_back(vector_spherical_harmonic(idx[i], n.p));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i; j < idx.size(); ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < q.nodes.size(); ++k) s += q.nodes[k].weight * samples[i][k].dot(samples[j][k]);
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(Erfc, Values) {
  EXPECT_EQ(tdem::erfc(0.0), 1.0);
  EXPECT_EQ(tdem::erfc(27.0), 0.0);
  EXPECT_GT(tdem::erfc(26.0), 0.0);
  EXPECT_NEAR(tdem::erfc(-1.0), 2.0 - tdem::erfc(1.0), 1e-15);
  EXPECT_EQ(tdem::erfc(INFINITY), 0.0);
  auto integrand = [](double t) { return std::exp(-t * t); };
  const double tail = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 1.0, INFINITY, 15, 1e-14);
  EXPECT_NEAR(tdem::erfc(1.0), 2.0 / std::sqrt(pi) * tail, 1e-14);
  EXPECT_NEAR(tdem::erfc(1.0), 0.157299207050285, 1e-14);
}

TEST(Quadrature, GaussLegendreExactness) {
  const GaussLegendre g(10);
  for (int k = 0; k <= 19; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], k);
    EXPECT_NEAR(s, k % 2 ? 0.0 : 2.0 / (k + 1.0), 1e-14);
  }
  EXPECT_THROW(GaussLegendre(0), std::invalid_argument);
}

TEST(Coordinates, RoundTrip) {
  const Vec3 x(0.3, -1.2, 0.7);
  const SphericalCoords s = SphericalCoords::from_cartesian(x);
  const Vec3 back = LocalFrame::at(s.angles).r_hat * s.r;
  EXPECT_LT((back - x).norm(), 1e-15);
  EXPECT_TRUE(s.angles.valid());
}
