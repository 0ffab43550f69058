#pragma once

// Physical parameters, SI conventions and time-regime bookkeeping.

#include <limits>
#include <string>
#include <vector>

namespace tdem {

/// Vacuum permeability, H/m (CODATA 2018).
inline constexpr double kMu0 = 1.25663706212e-6;

struct MaterialSpec {
  double conductivity = 0.0;          // S/m
  double relative_permeability = 1.0;

  static MaterialSpec from_resistivity(double resistivity_ohm_m, double mu_r);
  /// Perfect insulator (zero conductivity).
  static MaterialSpec insulator(double mu_r = 1.0) { return {0.0, mu_r}; }

  double permeability() const { return kMu0 * relative_permeability; }

  /// Throws std::invalid_argument unless conductivity > 0 and mu_r >= 1.
  void validate_target() const;
  /// Throws std::invalid_argument unless conductivity >= 0 and mu_r >= 1.
  void validate_background() const;
};

struct TargetSpec {
  double radius = 0.0;  // m
  MaterialSpec material;

  void validate() const;
  /// Characteristic length L_c. Equal to the radius for a sphere.
  double length_scale() const { return radius; }
};

struct EnvironmentSpec {
  MaterialSpec background = MaterialSpec::insulator();
  double sensor_standoff = 1.0;  // m

  void validate() const;
  /// mu_c / mu_b for a target embedded in this background.
  double mu_ratio(const TargetSpec& target) const {
    return target.material.relative_permeability / background.relative_permeability;
  }
};

/// Magnetic diffusivity D = 1/(mu0 mu_r sigma), m^2/s.
///
/// A perfect insulator has no finite diffusivity; the function returns
/// +infinity for zero conductivity, which callers test with is_infinite_diffusivity().
double diffusivity(const MaterialSpec& m);

inline bool is_infinite_diffusivity(double d) { return d == std::numeric_limits<double>::infinity(); }

struct TimeMarkers {
  double t0 = 0.0;      // end of the transmitter ramp, s
  double tau_r = 0.0;   // ramp-off duration, s
  double tau_tr = 0.0;  // scattering transient, s
  double tau_c = 0.0;   // target diffusion time a^2/D_c, s
  double tau_b = 0.0;   // background propagation time R^2/D_b, s

  /// End of the scattering transient. Early-time formulas are written in t - t_tr.
  double t_tr() const { return t0 + tau_tr; }
};

/// Builds the time markers. tau_tr defaults to tau_b; with `collapse_transient`
/// it is set to zero so that t_tr coincides with t0.
TimeMarkers characteristic_times(const TargetSpec& target, const EnvironmentSpec& env, double tau_r,
                                 double t0 = 0.0, bool collapse_transient = false);

struct RegimeRatio {
  std::string name;  // "tau_b/tau_c" or "tau_r/tau_c"
  double ratio = 0.0;
  bool pass = false;
};

struct RegimeValidation {
  double threshold = 1e-2;
  std::vector<RegimeRatio> checks;
  bool pass() const;
  std::string describe() const;
};

inline constexpr double kDefaultRegimeThreshold = 1e-2;

/// Report-only check of tau_b << tau_c and tau_r << tau_c. Threshold must lie in (0,1).
RegimeValidation validate_regime(const TimeMarkers& tm, double threshold = kDefaultRegimeThreshold);

/// Nondimensionalization by (a, a^2/D_c, H0).
class ScaleSystem {
 public:
  ScaleSystem(double length_scale, double time_scale, double field_scale);
  static ScaleSystem for_target(const TargetSpec& target, double field_scale);

  double length_scale() const { return length_; }
  double time_scale() const { return time_; }
  double field_scale() const { return field_; }

  double to_dimensionless_length(double m) const { return m / length_; }
  double to_physical_length(double x) const { return x * length_; }
  double to_dimensionless_time(double s) const { return s / time_; }
  double to_physical_time(double x) const { return x * time_; }
  double to_dimensionless_field(double h) const { return h / field_; }
  double to_physical_field(double x) const { return x * field_; }

 private:
  double length_;
  double time_;
  double field_;
};

}  // namespace tdem
