#include "tdem/early_time.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tdem {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

double sqrt_ll1(int l) { return std::sqrt(static_cast<double>(l) * (l + 1)); }

void require_positive_dt(double dt, const char* where) {
  if (!(dt > 0.0)) throw std::invalid_argument(std::string(where) + ": requires t > t_tr");
}

// H of a straight current segment a -> b at x, per unit current.
Vec3 segment_field(const Vec3& a, const Vec3& b, const Vec3& x) {
  const Vec3 ra = a - x, rb = b - x;
  const double na = ra.norm(), nb = rb.norm();
  const double denom = na * nb * (na * nb + ra.dot(rb));
  if (denom <= 0.0) return Vec3::Zero();
  return ra.cross(rb) * ((na + nb) / (4.0 * kPi * denom));
}

// d P_l / d mu
double legendre_derivative(int l, double mu) {
  double p0 = 1.0, p1 = mu, d0 = 0.0, d1 = 1.0;
  if (l == 0) return 0.0;
  for (int k = 1; k < l; ++k) {
    const double p2 = ((2.0 * k + 1.0) * mu * p1 - k * p0) / (k + 1.0);
    const double d2 = d0 + (2.0 * k + 1.0) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return d1;
}

// Delta A and Delta B of one exterior multipole with potential coefficient c (A/m).
void add_multipole(HarmonicIndex idx, cplx c, double a, double mu_b, const Vec3& x, CVec3& dA, CVec3& dB) {
  const SphericalCoords sc = SphericalCoords::from_cartesian(x);
  const int l = idx.l;
  const double q = a / sc.r;
  const double ql1 = std::pow(q, l + 1);
  const HarmonicSample y = spherical_harmonic_sample(idx, sc.angles);
  const LocalFrame f = LocalFrame::at(sc.angles);
  const CVec3 grad_omega = f.theta_hat.cast<cplx>() * y.d_theta + f.phi_hat.cast<cplx>() * (kI * y.m_over_sin);
  dB += mu_b * c * ql1 * q * (f.r_hat.cast<cplx>() * ((l + 1.0) * y.value) - grad_omega);
  dA += -kI * mu_b * a * c * std::sqrt((l + 1.0) / l) * ql1 * vector_spherical_harmonic(idx, sc.angles);
}

}  // namespace

HarmonicSeries::HarmonicSeries(int max_l) : max_l_(max_l) {
  if (max_l < 0 || max_l > kMaxHarmonicDegree) throw std::invalid_argument("harmonic degree out of range");
  c_.assign(static_cast<std::size_t>((max_l + 1) * (max_l + 1)), cplx(0.0));
}

void PotentialExpansion::validate() const {
  for (const HarmonicSeries* s : {&interior, &growing, &decaying}) {
    if (s->max_l() != max_l()) throw std::invalid_argument("potential expansion: inconsistent degrees");
    for (const cplx& v : s->data()) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw std::invalid_argument("potential expansion: non-finite coefficient");
      }
    }
    if ((*s)(0, 0) != 0.0) throw std::invalid_argument("potential expansion: l = 0 content");
  }
}

CVec3 SurfaceCurrentSpectrum::at(const SurfacePoint& p) const {
  CVec3 out = CVec3::Zero();
  for (int l = 1; l <= k.max_l(); ++l) {
    for (int m = -l; m <= l; ++m) {
      if (k(l, m) != 0.0) out += k(l, m) * vector_spherical_harmonic({l, m}, p);
    }
  }
  return out;
}

bool EarlyTimeContext::in_regime(double dt) const {
  return dt > 0.0 && markers.t_tr() + dt <= markers.t0 + regime_fraction * markers.tau_c;
}

std::string EarlyTimeContext::regime_flag(double dt) const {
  if (!(dt > 0.0)) return "before_transient";
  return in_regime(dt) ? "ok" : "beyond_early";
}

PotentialExpansion uniform_illumination(const Vec3& h_field, int max_l) {
  PotentialExpansion p(max_l);
  const double h = h_field.norm();
  if (h == 0.0) return p;
  // -H . x = -|H| r (d . r-hat) = -|H| r (4 pi / 3) sum_m Y_1m(r-hat) conj(Y_1m(d))
  const SurfacePoint d = SurfacePoint::from_direction(h_field);
  for (int m = -1; m <= 1; ++m) {
    p.growing(1, m) = -h * (4.0 * kPi / 3.0) * std::conj(spherical_harmonic({1, m}, d));
  }
  return p;
}

PotentialExpansion illumination_coefficients(const Loop& tx, double current, const TargetSpec& target,
                                              int max_l) {
  tx.validate();
  tx.require_exterior(target.radius);
  const double a = target.radius;
  PotentialExpansion p(max_l);
  if (tx.kind == Loop::Kind::circular_coaxial) {
    const double r_loop = std::hypot(tx.radius, tx.height);
    const double mu = tx.height / r_loop;
    for (int l = 1; l <= max_l; ++l) {
      // On-axis field I rho^2 / (2 (rho^2 + (h - z)^2)^{3/2}) expanded in z / r_loop.
      p.growing(l, 0) = -tx.orientation * current * (1.0 - mu * mu) / (2.0 * l * a) *
                        legendre_derivative(l, mu) * std::pow(a / r_loop, l) *
                        std::sqrt(4.0 * kPi / (2.0 * l + 1.0));
    }
    return p;
  }
  // H_r on an interior sphere of radius a/2; the loop is outside, so aliasing from
  // degrees above the rule falls off like (r_p / r_min)^degree.
  const double r_p = 0.5 * a;
  const SphereQuadrature quad(2 * max_l + 48);
  const auto& v = tx.vertices;
  std::vector<std::pair<SurfacePoint, double>> samples;
  samples.reserve(quad.nodes.size());
  for (const auto& node : quad.nodes) {
    const LocalFrame f = LocalFrame::at(node.p);
    const Vec3 x = f.r_hat * r_p;
    Vec3 h = Vec3::Zero();
    for (std::size_t i = 0; i < v.size(); ++i) h += segment_field(v[i], v[(i + 1) % v.size()], x);
    samples.emplace_back(node.p, current * h.dot(f.r_hat) * node.weight);
  }
  for (int l = 1; l <= max_l; ++l) {
    const double scale = -std::pow(a / r_p, l - 1) / l;
    for (int m = -l; m <= l; ++m) {
      cplx s = 0.0;
      for (const auto& [pt, w] : samples) s += w * std::conj(spherical_harmonic({l, m}, pt));
      p.growing(l, m) = scale * s;
    }
  }
  return p;
}

PotentialExpansion static_sphere_response(const PotentialExpansion& illumination, double mu_ratio) {
  PotentialExpansion out(illumination.max_l());
  for (int l = 1; l <= out.max_l(); ++l) {
    const double transmit = (2.0 * l + 1.0) / (l + 1.0 + l * mu_ratio);
    for (int m = -l; m <= l; ++m) {
      const cplx g = illumination.growing(l, m);
      const cplx b_in = g * transmit;
      out.interior(l, m) = b_in;
      out.growing(l, m) = g;
      out.decaying(l, m) = b_in * closed_form::c_init(l, mu_ratio);
    }
  }
  return out;
}

BoundaryData interior_normal_field(const PotentialExpansion& frozen) {
  BoundaryData h(frozen.max_l());
  for (int l = 1; l <= h.max_l(); ++l) {
    for (int m = -l; m <= l; ++m) h(l, m) = -static_cast<double>(l) * frozen.interior(l, m);
  }
  return h;
}

PotentialExpansion neumann_solve(const BoundaryData& h_normal, double mu_ratio) {
  if (h_normal(0, 0) != 0.0) throw std::invalid_argument("neumann_solve: l = 0 data has no exterior solution");
  PotentialExpansion out(h_normal.max_l());
  for (int l = 1; l <= out.max_l(); ++l) {
    for (int m = -l; m <= l; ++m) out.decaying(l, m) = mu_ratio * h_normal(l, m) / (l + 1.0);
  }
  return out;
}

SurfaceCurrentSpectrum surface_current(const PotentialExpansion& phi0, const PotentialExpansion& frozen) {
  if (phi0.max_l() != frozen.max_l()) throw std::invalid_argument("surface_current: degree mismatch");
  SurfaceCurrentSpectrum k{HarmonicSeries(frozen.max_l())};
  for (int l = 1; l <= frozen.max_l(); ++l) {
    for (int m = -l; m <= l; ++m) {
      k.k(l, m) = kI * sqrt_ll1(l) * (frozen.interior(l, m) - phi0.decaying(l, m));
    }
  }
  return k;
}

cplx interior_E_profile(cplx k, const MaterialSpec& m, double z, double dt) {
  require_positive_dt(dt, "interior_E_profile");
  if (z > 0.0) throw std::invalid_argument("interior_E_profile: depth must be <= 0");
  const double s = 4.0 * diffusivity(m) * dt;
  const double g = std::exp(-z * z / s) / std::sqrt(kPi * s);
  return 2.0 * k / m.conductivity * g;
}

cplx interior_A_correction(cplx k, const MaterialSpec& m, double z, double dt) {
  require_positive_dt(dt, "interior_A_correction");
  if (z > 0.0) throw std::invalid_argument("interior_A_correction: depth must be <= 0");
  const double s = 4.0 * diffusivity(m) * dt;
  const double az = std::abs(z);
  const double kernel = std::sqrt(s / kPi) * std::exp(-z * z / s) - az * erfc(az / std::sqrt(s));
  return -m.permeability() * k * kernel;
}

BoundaryData delta_B_normal(const SurfaceCurrentSpectrum& k, const TargetSpec& target, double dt) {
  require_positive_dt(dt, "delta_B_normal");
  const double t_scaled = diffusivity(target.material) * dt / (target.radius * target.radius);
  const double pref = -2.0 * target.material.permeability() * std::sqrt(t_scaled / kPi);
  BoundaryData b(k.k.max_l());
  for (int l = 1; l <= b.max_l(); ++l) {
    for (int m = -l; m <= l; ++m) b(l, m) = pref * kI * sqrt_ll1(l) * k.k(l, m);
  }
  return b;
}

PotentialExpansion delta_Phi(const BoundaryData& b_normal, double background_mu_r, double dt) {
  PotentialExpansion out = neumann_solve(b_normal, 1.0 / (kMu0 * background_mu_r));
  out.dt = dt;
  return out;
}

EarlyTimeField external_fields(const EarlyTimeContext& ctx, const PotentialExpansion& dphi, const Vec3& x) {
  if (!(x.norm() > ctx.target.radius)) throw std::invalid_argument("external_fields: point must lie outside");
  if (!ctx.in_regime(dphi.dt)) throw std::domain_error("external_fields: time outside the early-time window");
  EarlyTimeField out{x, dphi.dt, CVec3::Zero(), CVec3::Zero(), CVec3::Zero()};
  const double mu_b = kMu0 * ctx.background_mu_r;
  for (int l = 1; l <= dphi.max_l(); ++l) {
    for (int m = -l; m <= l; ++m) {
      const cplx c = dphi.decaying(l, m);
      if (c != 0.0) add_multipole({l, m}, c, ctx.target.radius, mu_b, x, out.dA, out.dB);
    }
  }
  out.dE = -out.dA / (2.0 * dphi.dt);
  return out;
}

double early_voltage_amplitude(const EarlyTimeContext& ctx, const PotentialExpansion& dphi, const Loop& rx) {
  rx.validate();
  rx.require_exterior(ctx.target.radius);
  require_positive_dt(dphi.dt, "early_voltage_amplitude");
  const double a = ctx.target.radius;
  const double mu_b = kMu0 * ctx.background_mu_r;
  cplx flux_a = 0.0;  // loop integral of Delta A
  if (rx.kind == Loop::Kind::circular_coaxial) {
    const double r_loop = std::hypot(rx.radius, rx.height);
    const SurfacePoint at{std::atan2(rx.radius, rx.height), 0.0};
    for (int l = 1; l <= dphi.max_l(); ++l) {
      const cplx c = dphi.decaying(l, 0);
      if (c == 0.0) continue;
      const cplx x_phi = -kI * spherical_harmonic_sample({l, 0}, at).d_theta / sqrt_ll1(l);
      const cplx a_phi = -kI * mu_b * a * c * std::sqrt((l + 1.0) / l) * std::pow(a / r_loop, l + 1) * x_phi;
      flux_a += static_cast<double>(rx.orientation) * 2.0 * kPi * rx.radius * a_phi;
    }
  } else {
    flux_a = loop_integral(rx, [&](const Vec3& x) {
      CVec3 dA = CVec3::Zero(), dB = CVec3::Zero();
      for (int l = 1; l <= dphi.max_l(); ++l) {
        for (int m = -l; m <= l; ++m) {
          const cplx c = dphi.decaying(l, m);
          if (c != 0.0) add_multipole({l, m}, c, a, mu_b, x, dA, dB);
        }
      }
      return dA;
    });
  }
  // V = -N_R d/dt (flux) with flux proportional to sqrt(dt)
  return -rx.windings * flux_a.real() / (2.0 * std::sqrt(dphi.dt));
}

TimeSeries early_voltage(const EarlyTimeContext& ctx, const PotentialExpansion& dphi, const Loop& rx,
                         const std::vector<double>& gates) {
  const double amp = early_voltage_amplitude(ctx, dphi, rx);
  TimeSeries ts;
  ts.t = gates;
  ts.value.resize(gates.size());
  ts.quality.resize(gates.size());
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const double dt = gates[i] - ctx.markers.t_tr();
    ts.quality[i] = ctx.regime_flag(dt);
    ts.value[i] = dt > 0.0 ? amp / std::sqrt(dt) : 0.0;
  }
  ts.validate();
  return ts;
}

PotentialExpansion EarlyTimeSolution::dphi_at(double dt) const {
  require_positive_dt(dt, "dphi_at");
  PotentialExpansion out = dphi_ref;
  const double s = std::sqrt(dt / ref_dt);
  for (int l = 1; l <= out.max_l(); ++l) {
    for (int m = -l; m <= l; ++m) out.decaying(l, m) *= s;
  }
  out.dt = dt;
  return out;
}

EarlyTimeSolution solve_early_time(const EarlyTimeContext& ctx, const PotentialExpansion& illumination) {
  illumination.validate();
  EarlyTimeSolution sol;
  sol.illumination = illumination;
  sol.frozen = static_sphere_response(illumination, ctx.mu_ratio());
  sol.phi0 = neumann_solve(interior_normal_field(sol.frozen), ctx.mu_ratio());
  sol.current = surface_current(sol.phi0, sol.frozen);
  sol.ref_dt = ctx.markers.tau_c > 0.0 ? ctx.markers.tau_c : 1.0;
  sol.dphi_ref = delta_Phi(delta_B_normal(sol.current, ctx.target, sol.ref_dt), ctx.background_mu_r, sol.ref_dt);
  return sol;
}

namespace closed_form {

double c_init(int l, double mu_ratio) { return (1.0 - mu_ratio) * l / (2.0 * l + 1.0); }

double c0(int l, double mu_ratio) { return -l * mu_ratio / (l + 1.0); }

cplx k_coefficient(int l, double mu_ratio) {
  return kI * (1.0 + l * mu_ratio / (l + 1.0)) * sqrt_ll1(l);
}

double phi(int l, double mu_ratio, double a, double d, double dt) {
  return mu_ratio * l / a * (1.0 + l * mu_ratio / (l + 1.0)) * std::sqrt(4.0 * d * dt / kPi);
}

EarlyTimeField fields(HarmonicIndex idx, cplx b_in, const TargetSpec& target, double background_mu_r,
                      const Vec3& x, double dt) {
  const int l = idx.l;
  const double a = target.radius;
  const double mu_ratio = target.material.relative_permeability / background_mu_r;
  const double mu_b = kMu0 * background_mu_r;
  const cplx c = phi(l, mu_ratio, a, diffusivity(target.material), dt) * b_in;
  const SphericalCoords sc = SphericalCoords::from_cartesian(x);
  const double q = a / sc.r;
  const LocalFrame f = LocalFrame::at(sc.angles);
  const CVec3 xlm = vector_spherical_harmonic(idx, sc.angles);
  const cplx y = spherical_harmonic(idx, sc.angles);
  // curl of a (a/r)^{l+1} X_lm
  const CVec3 rhat = f.r_hat.cast<cplx>();
  // Eigen conjugates cross() on complex vectors, so expand it
  const CVec3 rhat_cross_x(rhat(1) * xlm(2) - rhat(2) * xlm(1), rhat(2) * xlm(0) - rhat(0) * xlm(2),
                           rhat(0) * xlm(1) - rhat(1) * xlm(0));
  const CVec3 curl = std::pow(q, l + 2) * (rhat * (kI * sqrt_ll1(l) * y) - static_cast<double>(l) * rhat_cross_x);
  const cplx pref = -kI * mu_b * std::sqrt((l + 1.0) / l) * c;
  EarlyTimeField out;
  out.point = x;
  out.dt = dt;
  out.dA = pref * a * std::pow(q, l + 1) * xlm;
  out.dB = pref * curl;
  out.dE = -out.dA / (2.0 * dt);
  return out;
}

}  // namespace closed_form

}  // namespace tdem
