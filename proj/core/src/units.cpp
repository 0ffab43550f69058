#include "tdem/units.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tdem {

MaterialSpec MaterialSpec::from_resistivity(double resistivity_ohm_m, double mu_r) {
  if (!(resistivity_ohm_m > 0.0)) {
    throw std::invalid_argument("resistivity must be positive");
  }
  return {1.0 / resistivity_ohm_m, mu_r};
}

void MaterialSpec::validate_target() const {
  if (!(conductivity > 0.0) || !std::isfinite(conductivity)) {
    throw std::invalid_argument("target conductivity must be positive and finite");
  }
  if (!(relative_permeability >= 1.0) || !std::isfinite(relative_permeability)) {
    throw std::invalid_argument("relative permeability must be >= 1");
  }
}

void MaterialSpec::validate_background() const {
  if (!(conductivity >= 0.0) || !std::isfinite(conductivity)) {
    throw std::invalid_argument("background conductivity must be non-negative and finite");
  }
  if (!(relative_permeability >= 1.0) || !std::isfinite(relative_permeability)) {
    throw std::invalid_argument("relative permeability must be >= 1");
  }
}

void TargetSpec::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("target radius must be positive");
  }
  material.validate_target();
}

void EnvironmentSpec::validate() const {
  if (!(sensor_standoff > 0.0) || !std::isfinite(sensor_standoff)) {
    throw std::invalid_argument("sensor standoff must be positive");
  }
  background.validate_background();
}

double diffusivity(const MaterialSpec& m) {
  if (m.conductivity == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 1.0 / (kMu0 * m.relative_permeability * m.conductivity);
}

TimeMarkers characteristic_times(const TargetSpec& target, const EnvironmentSpec& env, double tau_r,
                                 double t0, bool collapse_transient) {
  TimeMarkers tm;
  tm.t0 = t0;
  tm.tau_r = tau_r;
  const double dc = diffusivity(target.material);
  tm.tau_c = target.length_scale() * target.length_scale() / dc;
  const double db = diffusivity(env.background);
  // An insulating background propagates instantaneously in the quasi-static limit.
  tm.tau_b = is_infinite_diffusivity(db) ? 0.0 : env.sensor_standoff * env.sensor_standoff / db;
  tm.tau_tr = collapse_transient ? 0.0 : tm.tau_b;
  return tm;
}

bool RegimeValidation::pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::string RegimeValidation::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    if (i) os << "; ";
    os << checks[i].name << " = " << checks[i].ratio;
    if (!checks[i].pass) os << " exceeds " << threshold;
  }
  return os.str();
}

RegimeValidation validate_regime(const TimeMarkers& tm, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("regime threshold must lie in (0,1)");
  }
  if (!(tm.tau_c > 0.0)) {
    throw std::invalid_argument("tau_c must be positive");
  }
  RegimeValidation v;
  v.threshold = threshold;
  const double rb = tm.tau_b / tm.tau_c;
  const double rr = tm.tau_r / tm.tau_c;
  v.checks.push_back({"tau_b/tau_c", rb, rb <= threshold});
  v.checks.push_back({"tau_r/tau_c", rr, rr <= threshold});
  return v;
}

ScaleSystem::ScaleSystem(double length_scale, double time_scale, double field_scale)
    : length_(length_scale), time_(time_scale), field_(field_scale) {
  if (!(length_ > 0.0) || !(time_ > 0.0) || !(field_ > 0.0) || !std::isfinite(length_) ||
      !std::isfinite(time_) || !std::isfinite(field_)) {
    throw std::invalid_argument("scale system requires strictly positive finite scales");
  }
}

ScaleSystem ScaleSystem::for_target(const TargetSpec& target, double field_scale) {
  const double a = target.length_scale();
  return ScaleSystem(a, a * a / diffusivity(target.material), field_scale);
}

}  // namespace tdem
