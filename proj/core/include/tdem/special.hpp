#pragma once

// Spherical Bessel functions, scalar and vector spherical harmonics, erfc,
// and the quadrature rules used to integrate over the unit sphere.

#include <complex>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace tdem {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

/// Hard cap on harmonic degree.
inline constexpr int kMaxHarmonicDegree = 12;

struct HarmonicIndex {
  int l = 0;
  int m = 0;

  bool valid() const { return l >= 0 && m >= -l && m <= l; }
  friend bool operator==(const HarmonicIndex&, const HarmonicIndex&) = default;
};

struct SurfacePoint {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, 2 pi)

  bool valid() const;
  static SurfacePoint from_direction(const Vec3& x);
};

/// Spherical coordinates of a Cartesian point.
struct SphericalCoords {
  double r = 0.0;
  SurfacePoint angles;
  static SphericalCoords from_cartesian(const Vec3& x);
};

/// Orthonormal basis vectors r-hat, theta-hat, phi-hat in Cartesian components.
struct LocalFrame {
  Vec3 r_hat, theta_hat, phi_hat;
  static LocalFrame at(const SurfacePoint& p);
};

/// j_l(x) for x >= 0. Power series at small x, upward recurrence for x >= l
/// and normalized downward (Miller) recurrence in between.
double spherical_bessel_j(int l, double x);

/// Orthonormal Y_lm with the Condon-Shortley phase.
cplx spherical_harmonic(HarmonicIndex idx, const SurfacePoint& p);

/// Y_lm together with the pieces needed for gradients:
/// d Y / d theta and (m / sin theta) Y, both finite at the poles.
struct HarmonicSample {
  cplx value;
  cplx d_theta;
  cplx m_over_sin;
};
HarmonicSample spherical_harmonic_sample(HarmonicIndex idx, const SurfacePoint& p);

/// Angular gradient r grad Y_lm = theta-hat dY/dtheta + phi-hat (i m / sin theta) Y, Cartesian.
CVec3 angular_gradient(HarmonicIndex idx, const SurfacePoint& p);

/// X_lm = -i [l(l+1)]^{-1/2} x cross grad Y_lm in Cartesian components. Requires l >= 1.
CVec3 vector_spherical_harmonic(HarmonicIndex idx, const SurfacePoint& p);

/// Complementary error function.
double erfc(double x);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
  explicit GaussLegendre(int n);
};

/// Product rule on the unit sphere: Gauss-Legendre in cos(theta), uniform in phi.
/// Exact for band-limited functions up to degree `degree`.
struct SphereQuadrature {
  struct Node {
    SurfacePoint p;
    double weight;
  };
  std::vector<Node> nodes;
  explicit SphereQuadrature(int degree);
};

}  // namespace tdem
