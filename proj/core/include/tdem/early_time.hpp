#pragma once

// Early-time response of a conducting sphere after the transmitter shuts off.
//
// Step 1: the interior field is frozen at its static pre-quench value; the exterior
//   potential is rebuilt from the normal-B condition and the tangential jump leaves a
//   surface current K on r = a.
// Step 2: K relaxes into the conductor by one-dimensional diffusion in the depth z <= 0.
// Step 3: the resulting normal-B correction on r = a drives an exterior decaying
//   potential, so every multipole of A and B grows like sqrt(t - t_tr) and E diverges
//   like (t - t_tr)^{-1/2}.
//
// Potentials are expanded as Phi = a * sum coef * (radial factor) * Y_lm with
// coefficients in A/m, so coefficients carry the unit of H. Surface currents are
// coefficients of X_lm in A/m. Evaluated fields are complex; the physical field is the
// real part of the sum over (l, m).

#include <string>
#include <vector>

#include "tdem/excitation.hpp"
#include "tdem/special.hpp"
#include "tdem/units.hpp"

namespace tdem {

/// Coefficients indexed by (l, m) for 0 <= l <= max_l, stored at l*l + l + m.
class HarmonicSeries {
 public:
  HarmonicSeries() = default;
  explicit HarmonicSeries(int max_l);

  int max_l() const { return max_l_; }
  static std::size_t index(int l, int m) { return static_cast<std::size_t>(l * l + l + m); }
  cplx& operator()(int l, int m) { return c_.at(index(l, m)); }
  cplx operator()(int l, int m) const { return c_.at(index(l, m)); }
  const std::vector<cplx>& data() const { return c_; }

 private:
  int max_l_ = 0;
  std::vector<cplx> c_ = std::vector<cplx>(1);
};

struct PotentialExpansion {
  HarmonicSeries interior;  // (r/a)^l inside the sphere
  HarmonicSeries growing;   // (r/a)^l outside
  HarmonicSeries decaying;  // (a/r)^{l+1} outside
  double dt = 0.0;          // t - t_tr the expansion refers to, s; zero for static data

  explicit PotentialExpansion(int max_l = 1) : interior(max_l), growing(max_l), decaying(max_l) {}
  int max_l() const { return interior.max_l(); }
  /// Throws std::invalid_argument for non-finite entries or any l = 0 content.
  void validate() const;
};

/// Scalar data on r = a expanded in Y_lm (normal field components).
using BoundaryData = HarmonicSeries;

struct SurfaceCurrentSpectrum {
  HarmonicSeries k;  // coefficient of X_lm, A/m
  /// Surface current vector at a point of r = a, Cartesian, A/m.
  CVec3 at(const SurfacePoint& p) const;
};

/// Everything Step 3 needs besides the spectra.
struct EarlyTimeContext {
  TargetSpec target;
  double background_mu_r = 1.0;
  TimeMarkers markers;
  double regime_fraction = 0.05;  // early window ends at t0 + fraction * tau_c

  double mu_ratio() const { return target.material.relative_permeability / background_mu_r; }
  double diffusivity() const { return tdem::diffusivity(target.material); }
  /// True when t_tr < t <= t0 + fraction * tau_c, with t = t_tr + dt.
  bool in_regime(double dt) const;
  /// Per-gate flag: "ok", "before_transient" or "beyond_early".
  std::string regime_flag(double dt) const;
};

struct EarlyTimeField {
  Vec3 point;
  double dt = 0.0;  // t - t_tr, s
  CVec3 dA;         // T m
  CVec3 dB;         // T
  CVec3 dE;         // V/m
};

/// Static potential of a uniform field H (A/m): only l = 1 growing terms.
PotentialExpansion uniform_illumination(const Vec3& h_field, int max_l);

/// Static potential of the transmitter loop carrying `current` (N_T i_0, A), expanded
/// about the sphere center up to max_l. Coaxial circles use the closed-form axis
/// expansion; polygons project the Biot-Savart radial field onto an interior sphere.
PotentialExpansion illumination_coefficients(const Loop& tx, double current, const TargetSpec& target,
                                              int max_l);

/// Pre-quench static response to the growing illumination terms.
PotentialExpansion static_sphere_response(const PotentialExpansion& illumination, double mu_ratio);

/// n-hat . H on r = a from the interior expansion.
BoundaryData interior_normal_field(const PotentialExpansion& frozen);

/// Exterior decaying potential with -dPhi/dr = mu_ratio * h at r = a. Rejects l = 0 data.
PotentialExpansion neumann_solve(const BoundaryData& h_normal, double mu_ratio);

/// K = -n-hat x (grad Phi0 + H_c) on r = a, H_c from the frozen interior expansion.
SurfaceCurrentSpectrum surface_current(const PotentialExpansion& phi0, const PotentialExpansion& frozen);

/// Tangential E at depth z <= 0 for a surface-current component K (A/m): (2K/sigma) G(z, dt).
cplx interior_E_profile(cplx k, const MaterialSpec& m, double z, double dt);

/// Tangential A correction at depth z <= 0, with -d/dt of it equal to interior_E_profile.
cplx interior_A_correction(cplx k, const MaterialSpec& m, double z, double dt);

/// n-hat . Delta B on r = a, T, at time offset dt.
BoundaryData delta_B_normal(const SurfaceCurrentSpectrum& k, const TargetSpec& target, double dt);

/// Exterior correction potential driven by the normal-B data.
PotentialExpansion delta_Phi(const BoundaryData& b_normal, double background_mu_r, double dt);

/// Delta A, Delta B, Delta E at an exterior point. Throws std::invalid_argument for
/// r <= a and std::domain_error outside the early-time regime window.
EarlyTimeField external_fields(const EarlyTimeContext& ctx, const PotentialExpansion& dphi, const Vec3& x);

/// c such that V(t) = c (t - t_tr)^{-1/2} for the receiver.
double early_voltage_amplitude(const EarlyTimeContext& ctx, const PotentialExpansion& dphi, const Loop& rx);

/// Early-time receiver voltage at the gates. Gates outside the regime keep their value
/// where it is defined and are flagged in `quality`.
TimeSeries early_voltage(const EarlyTimeContext& ctx, const PotentialExpansion& dphi, const Loop& rx,
                         const std::vector<double>& gates);

/// Steps 1-3 bundled for one illumination.
struct EarlyTimeSolution {
  PotentialExpansion illumination;
  PotentialExpansion frozen;
  PotentialExpansion phi0;
  SurfaceCurrentSpectrum current;
  /// Delta Phi at dt = ref_dt; every other time scales by sqrt(dt / ref_dt).
  PotentialExpansion dphi_ref;
  double ref_dt = 1.0;

  PotentialExpansion dphi_at(double dt) const;
};

EarlyTimeSolution solve_early_time(const EarlyTimeContext& ctx, const PotentialExpansion& illumination);

/// Closed forms for a homogeneous sphere, per unit interior amplitude. Signs follow
/// E = -dA/dt, so the exterior correction reduces the frozen multipole.
namespace closed_form {
double c_init(int l, double mu_ratio);
double c0(int l, double mu_ratio);
/// Coefficient of X_lm in K.
cplx k_coefficient(int l, double mu_ratio);
/// phi_l for a sphere of radius a and diffusivity d at time offset dt (dimensionless).
/// The Delta Phi coefficient of (a/r)^{l+1} Y_lm is +phi_l times the interior amplitude.
double phi(int l, double mu_ratio, double a, double d, double dt);
/// Per-multipole exterior fields for interior amplitude `b_in` (A/m), evaluated from
/// the explicit curl of (a/r)^{l+1} X_lm.
EarlyTimeField fields(HarmonicIndex idx, cplx b_in, const TargetSpec& target, double background_mu_r,
                      const Vec3& x, double dt);
}  // namespace closed_form

}  // namespace tdem
