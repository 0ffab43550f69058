#include "tdem/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tdem {

namespace {

constexpr double kPi = std::numbers::pi;

double bessel_series(int l, double x) {
  // x^l / (2l+1)!! * sum_k (-x^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
  double prefactor = 1.0;
  for (int k = 1; k <= l; ++k) prefactor *= x / (2.0 * k + 1.0);
  const double half_x2 = 0.5 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -half_x2 / (k * (2.0 * l + 2.0 * k + 1.0));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return prefactor * sum;
}

double bessel_j0(double x) { return std::sin(x) / x; }
double bessel_j1(double x) { return (std::sin(x) / x - std::cos(x)) / x; }

double bessel_upward(int l, double x) {
  double jm = bessel_j0(x);
  if (l == 0) return jm;
  double j = bessel_j1(x);
  for (int k = 1; k < l; ++k) {
    const double jp = (2.0 * k + 1.0) / x * j - jm;
    jm = j;
    j = jp;
  }
  return j;
}

double bessel_downward(int l, double x) {
  const int start = l + 16 + static_cast<int>(std::sqrt(40.0 * (l + x)));
  double jp = 0.0;
  double j = 1e-30;
  double jl = 0.0;
  double j1 = 0.0;
  for (int k = start; k >= 1; --k) {
    const double jm = (2.0 * k + 1.0) / x * j - jp;
    jp = j;
    j = jm;
    if (std::abs(j) > 1e200) {
      jp *= 1e-200;
      j *= 1e-200;
      jl *= 1e-200;
      j1 *= 1e-200;
    }
    if (k - 1 == l) jl = j;
    if (k - 1 == 1) j1 = j;
  }
  const double j0 = j;
  if (l == 0) jl = j0;
  // Normalize against whichever of j0, j1 is better conditioned at this x.
  const double e0 = bessel_j0(x);
  const double e1 = bessel_j1(x);
  return std::abs(e0) >= std::abs(e1) ? jl * (e0 / j0) : jl * (e1 / j1);
}

// Normalized associated Legendre P-bar_l^m(x) for fixed m >= 0 and l = m..lmax,
// seeded with `seed` = P-bar_m^m (or P-bar_m^m / sin theta for the divided variant).
void legendre_column(int m, int lmax, double x, double seed, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(lmax + 2), 0.0);
  if (m > lmax + 1) return;
  out[m] = seed;
  if (m + 1 <= lmax + 1) out[m + 1] = x * std::sqrt(2.0 * m + 3.0) * seed;
  for (int l = m + 2; l <= lmax + 1; ++l) {
    const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
    const double b = std::sqrt((static_cast<double>(l - 1) * (l - 1) - static_cast<double>(m) * m) /
                               (4.0 * (l - 1) * (l - 1) - 1.0));
    out[l] = a * (x * out[l - 1] - b * out[l - 2]);
  }
}

double pmm_seed(int m, double s, bool divide_by_sin) {
  double v = 1.0 / std::sqrt(4.0 * kPi);
  for (int k = 1; k <= m; ++k) {
    v *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k));
    if (!(divide_by_sin && k == 1)) v *= s;
  }
  return v;
}

// P-bar_l^m(cos theta) for m >= 0, zero when m > l.
double legendre_bar(int l, int m, double x, double s) {
  if (m > l || m < 0) return 0.0;
  std::vector<double> col;
  legendre_column(m, l, x, pmm_seed(m, s, false), col);
  return col[l];
}

// P-bar_l^m(cos theta) / sin theta for m >= 1.
double legendre_bar_over_sin(int l, int m, double x, double s) {
  if (m > l || m < 1) return 0.0;
  std::vector<double> col;
  legendre_column(m, l, x, pmm_seed(m, s, true), col);
  return col[l];
}

HarmonicSample sample_nonnegative(int l, int m, const SurfacePoint& p) {
  const double x = std::cos(p.theta);
  const double s = std::sin(p.theta);
  const cplx phase = std::polar(1.0, m * p.phi);
  const double value = legendre_bar(l, m, x, s);
  // d/dtheta P-bar_l^m = 1/2 [ sqrt((l-m)(l+m+1)) P-bar^{m+1} - sqrt((l+m)(l-m+1)) P-bar^{m-1} ]
  const double up = std::sqrt(static_cast<double>(l - m) * (l + m + 1)) * legendre_bar(l, m + 1, x, s);
  double down = 0.0;
  if (m >= 1) {
    down = std::sqrt(static_cast<double>(l + m) * (l - m + 1)) * legendre_bar(l, m - 1, x, s);
  } else if (l >= 1) {
    down = -std::sqrt(static_cast<double>(l) * (l + 1)) * legendre_bar(l, 1, x, s);
  }
  const double d_theta = 0.5 * (up - down);
  const double m_over_sin = m == 0 ? 0.0 : m * legendre_bar_over_sin(l, m, x, s);
  return {value * phase, d_theta * phase, m_over_sin * phase};
}

}  // namespace

bool SurfacePoint::valid() const {
  return theta >= 0.0 && theta <= kPi && phi >= 0.0 && phi < 2.0 * kPi;
}

SurfacePoint SurfacePoint::from_direction(const Vec3& x) {
  const double r = x.norm();
  if (r == 0.0) return {0.0, 0.0};
  const double theta = std::acos(std::clamp(x.z() / r, -1.0, 1.0));
  double phi = std::atan2(x.y(), x.x());
  if (phi < 0.0) phi += 2.0 * kPi;
  if (phi >= 2.0 * kPi) phi = 0.0;
  return {theta, phi};
}

SphericalCoords SphericalCoords::from_cartesian(const Vec3& x) {
  return {x.norm(), SurfacePoint::from_direction(x)};
}

LocalFrame LocalFrame::at(const SurfacePoint& p) {
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  const double sp = std::sin(p.phi), cp = std::cos(p.phi);
  return {Vec3(st * cp, st * sp, ct), Vec3(ct * cp, ct * sp, -st), Vec3(-sp, cp, 0.0)};
}

double spherical_bessel_j(int l, double x) {
  if (l < 0) throw std::invalid_argument("spherical_bessel_j: l must be >= 0");
  if (x < 0.0 || std::isnan(x)) throw std::invalid_argument("spherical_bessel_j: x must be >= 0");
  if (x == 0.0) return l == 0 ? 1.0 : 0.0;
  if (x < std::max(0.5 * l, 1.0)) return bessel_series(l, x);
  if (x >= l) return bessel_upward(l, x);
  return bessel_downward(l, x);
}

HarmonicSample spherical_harmonic_sample(HarmonicIndex idx, const SurfacePoint& p) {
  if (!idx.valid()) throw std::invalid_argument("spherical harmonic: require |m| <= l");
  if (idx.l > kMaxHarmonicDegree) throw std::invalid_argument("spherical harmonic: degree above cap");
  if (idx.m >= 0) return sample_nonnegative(idx.l, idx.m, p);
  // Y_{l,-m} = (-1)^m conj(Y_lm)
  const int mp = -idx.m;
  const HarmonicSample s = sample_nonnegative(idx.l, mp, p);
  const double sign = (mp % 2 == 0) ? 1.0 : -1.0;
  return {sign * std::conj(s.value), sign * std::conj(s.d_theta), -sign * std::conj(s.m_over_sin)};
}

cplx spherical_harmonic(HarmonicIndex idx, const SurfacePoint& p) {
  return spherical_harmonic_sample(idx, p).value;
}

CVec3 angular_gradient(HarmonicIndex idx, const SurfacePoint& p) {
  const HarmonicSample s = spherical_harmonic_sample(idx, p);
  const LocalFrame f = LocalFrame::at(p);
  const cplx i(0.0, 1.0);
  return f.theta_hat.cast<cplx>() * s.d_theta + f.phi_hat.cast<cplx>() * (i * s.m_over_sin);
}

CVec3 vector_spherical_harmonic(HarmonicIndex idx, const SurfacePoint& p) {
  if (idx.l < 1) throw std::invalid_argument("vector spherical harmonic requires l >= 1");
  const HarmonicSample s = spherical_harmonic_sample(idx, p);
  const LocalFrame f = LocalFrame::at(p);
  const double inv = 1.0 / std::sqrt(static_cast<double>(idx.l) * (idx.l + 1));
  const cplx i(0.0, 1.0);
  // X = [ -(m/sin) Y theta-hat - i dY/dtheta phi-hat ] / sqrt(l(l+1))
  return (f.theta_hat.cast<cplx>() * (-s.m_over_sin) + f.phi_hat.cast<cplx>() * (-i * s.d_theta)) * inv;
}

// flush the denormal tail: erfc(27) is ~5e-319
double erfc(double x) { return x >= 27.0 ? 0.0 : std::erfc(x); }

GaussLegendre::GaussLegendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be >= 1");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

SphereQuadrature::SphereQuadrature(int degree) {
  if (degree < 0) throw std::invalid_argument("sphere quadrature degree must be >= 0");
  const int n_theta = degree / 2 + 1;
  const int n_phi = degree + 1;
  const GaussLegendre gl(n_theta);
  nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  for (int i = 0; i < n_theta; ++i) {
    const double theta = std::acos(gl.nodes[i]);
    for (int j = 0; j < n_phi; ++j) {
      nodes.push_back({{theta, 2.0 * kPi * j / n_phi}, gl.weights[i] * 2.0 * kPi / n_phi});
    }
  }
}

}  // namespace tdem
