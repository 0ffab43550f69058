#include "tdem/composite.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>

#include "tdem/errors.hpp"

namespace tdem {

namespace {

const double kSqrt10 = std::sqrt(10.0);

double tau_c(const ModeLibrary& lib) {
  return lib.target.radius * lib.target.radius / diffusivity(lib.target.material);
}

double mode_sum_at(const ExcitationCoefficients& coeffs, double t) {
  double v = 0.0;
  for (const auto& term : coeffs.terms) v += term.voltage * std::exp(-term.decay_rate * (t - coeffs.t0));
  return v;
}

struct RateGroup {
  double rate = 0.0;
  double voltage = 0.0;
};

std::vector<RateGroup> coupled_groups(const ExcitationCoefficients& coeffs) {
  std::vector<std::pair<double, double>> rv;
  for (const auto& t : coeffs.terms) rv.emplace_back(t.decay_rate, t.voltage);
  std::sort(rv.begin(), rv.end());
  std::vector<RateGroup> groups;
  double vmax = 0.0;
  for (const auto& [r, v] : rv) {
    if (!groups.empty() && std::abs(r - groups.back().rate) <= 1e-12 * r) {
      groups.back().voltage += v;
    } else {
      groups.push_back({r, v});
    }
    vmax = std::max(vmax, std::abs(v));
  }
  std::erase_if(groups, [&](const RateGroup& g) { return std::abs(g.voltage) <= 1e-14 * vmax; });
  return groups;
}

}  // namespace

std::string RegimeReport::regime_at(double t) const {
  if (t < blend_lo) return "early";
  if (t <= blend_hi) return "blend";
  if (t < late_start) return "intermediate";
  return "late";
}

RegimeReport regime_boundaries(const ModeLibrary& lib, const ExcitationCoefficients& coeffs,
                               const RegimeOptions& opts, std::optional<double> early_amplitude, double t_tr) {
  if (lib.modes.empty() || coeffs.terms.empty()) throw NumericalError("regime_boundaries: empty mode library");
  if (!(opts.tol > 0.0 && opts.tol < 1.0)) throw std::invalid_argument("regime_boundaries: tol must lie in (0,1)");
  RegimeReport rep;
  rep.t0 = coeffs.t0;
  rep.t_tr = std::isnan(t_tr) ? coeffs.t0 : t_tr;
  rep.early_amplitude = early_amplitude;
  const double tc = tau_c(lib);

  const auto groups = coupled_groups(coeffs);
  if (groups.empty()) throw NumericalError("regime_boundaries: no mode couples to the receiver");
  rep.late_rate = groups.front().rate;
  rep.late_start = coeffs.t0;
  if (groups.size() >= 2) {
    const double ratio = std::abs(groups[1].voltage / groups[0].voltage);
    const double s = std::log(ratio / opts.tol) / (groups[1].rate - groups[0].rate);
    rep.late_start = coeffs.t0 + std::max(0.0, s);
  }

  // Scan up to half a decade past the cap so the blend window can sit below it.
  const double cap = opts.early_fraction * tc;
  const double scan_end = cap * kSqrt10;
  double valid_from = scan_end;
  double agree_end = 0.0;
  bool disagree_at_start = false;
  {
    const double lo = 1e-8 * tc;
    const int n = std::max(opts.scan_points, 2);
    bool found_valid = false;
    for (int i = 0; i < n; ++i) {
      const double s = lo * std::pow(scan_end / lo, static_cast<double>(i) / (n - 1));
      const double t = coeffs.t0 + s;
      const double v = mode_sum_at(coeffs, t);
      if (!found_valid) {
        // Leave most of the tolerance for the comparison itself.
        if (truncation_estimate(lib, coeffs, t) > 0.1 * opts.tol * std::abs(v)) continue;
        found_valid = true;
        valid_from = s;
        if (!early_amplitude) break;
      }
      const double dt = t - rep.t_tr;
      if (dt <= 0.0) continue;
      const double ve = *early_amplitude / std::sqrt(dt);
      if (std::abs(v - ve) > opts.tol * std::abs(v)) {
        disagree_at_start = agree_end == 0.0;
        break;
      }
      agree_end = s;
    }
    if (found_valid && early_amplitude && !disagree_at_start && agree_end == 0.0) agree_end = valid_from;
  }
  double early = cap;
  if (early_amplitude) {
    if (disagree_at_start || agree_end == 0.0) {
      // The power law never matches the converged sum: hand over as soon as the sum is valid.
      early = valid_from / kSqrt10;
    } else if (agree_end >= valid_from * 10.0) {
      early = std::min(agree_end / kSqrt10, cap);
    } else {
      early = std::min(std::sqrt(valid_from * agree_end), cap);
    }
  } else {
    early = std::min(cap, std::max(valid_from * kSqrt10, 1e-8 * tc));
  }
  rep.mode_sum_valid_from = coeffs.t0 + valid_from;
  // The blend window has to close before the single-mode tail takes over.
  const double late_offset = rep.late_start - coeffs.t0;
  if (late_offset > 0.0) early = std::min(early, late_offset / 10.0);
  early = std::max(early, rep.t_tr - coeffs.t0);
  rep.early_end = coeffs.t0 + early;
  rep.blend_lo = coeffs.t0 + early / kSqrt10;
  rep.blend_hi = coeffs.t0 + early * kSqrt10;
  // a lone rate group is a pure exponential from t0 on
  if (groups.size() >= 2 && rep.late_start <= rep.early_end) rep.late_start = rep.blend_hi;

  const double v_end = mode_sum_at(coeffs, rep.early_end);
  std::map<std::size_t, double> per_mode;
  for (const auto& term : coeffs.terms) {
    per_mode[term.mode_index] += term.voltage * std::exp(-term.decay_rate * early);
  }
  for (const auto& [idx, v] : per_mode) {
    if (std::abs(v) >= opts.tol * std::abs(v_end)) rep.intermediate_modes.push_back(idx);
  }
  return rep;
}

CompositeSeries compose_response(const TimeSeries& mode_sum, const TimeSeries& early, const RegimeReport& report,
                                 double tol) {
  mode_sum.validate();
  early.validate();
  if (mode_sum.t != early.t) throw std::invalid_argument("compose_response: inputs must share gates");
  const std::size_t n = mode_sum.size();
  auto early_ok = [&](std::size_t i) { return early.quality.empty() || early.quality[i] == "ok"; };
  auto mode_ok = [&](std::size_t i) {
    return mode_sum.truncation_bound.empty() || mode_sum.truncation_bound[i] <= tol * std::abs(mode_sum.value[i]);
  };
  bool overlap = false;
  for (std::size_t i = 0; i < n && !overlap; ++i) overlap = early_ok(i) && mode_ok(i);
  if (!overlap) throw NumericalError("compose_response: early-time and mode-sum supports do not overlap");

  CompositeSeries out;
  out.series.t = mode_sum.t;
  out.series.value.resize(n);
  out.series.quality.resize(n);
  out.series.truncation_bound = mode_sum.truncation_bound;
  out.regime.resize(n);
  const double l_lo = std::log(report.blend_lo - report.t0);
  const double l_hi = std::log(report.blend_hi - report.t0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = mode_sum.t[i];
    double w = 0.0;  // mode-sum weight
    if (t >= report.blend_hi) {
      w = 1.0;
    } else if (t > report.blend_lo) {
      w = std::clamp((std::log(t - report.t0) - l_lo) / (l_hi - l_lo), 0.0, 1.0);
    }
    out.series.value[i] = (1.0 - w) * early.value[i] + w * mode_sum.value[i];
    out.regime[i] = report.regime_at(t);
    std::string q = "ok";
    if (w < 1.0 && !early_ok(i)) q = early.quality[i];
    if (w > 0.0 && !mode_ok(i)) q = "truncated";
    if (out.regime[i] == "blend" && mode_sum.value[i] != 0.0) {
      const double mismatch = std::abs(mode_sum.value[i] - early.value[i]) / std::abs(mode_sum.value[i]);
      out.blend_mismatch = std::max(out.blend_mismatch, mismatch);
      if (mismatch > tol && q == "ok") q = "blend_mismatch";
    }
    out.series.quality[i] = q;
  }
  out.series.validate();
  return out;
}

CrosscheckResult crosscheck_amplitude(const ModeLibrary& lib, const ExcitationCoefficients& coeffs, double c_early,
                                      const CrosscheckOptions& opts) {
  if (opts.gates < 8) throw std::invalid_argument("crosscheck_amplitude: need at least 8 gates");
  if (c_early == 0.0) throw std::invalid_argument("crosscheck_amplitude: zero early-time amplitude");
  const double tc = tau_c(lib);
  const std::vector<double> s = log_gates(opts.window_lo * tc, opts.window_hi * tc, opts.gates);
  Eigen::MatrixXd a(opts.gates, 2);
  Eigen::VectorXd y(opts.gates);
  for (int i = 0; i < opts.gates; ++i) {
    const double rt = std::sqrt(s[i]);
    a(i, 0) = 1.0;
    a(i, 1) = rt;
    y(i) = mode_sum_at(coeffs, coeffs.t0 + s[i]) * rt;
  }
  const Eigen::Vector2d p = a.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd r = y - a * p;
  CrosscheckResult res;
  res.c_mode = p(0);
  res.slope = p(1);
  res.c_early = c_early;
  res.relative_residual = std::sqrt(r.squaredNorm() / opts.gates) / std::abs(p(0));
  res.conclusive = res.relative_residual <= opts.residual_threshold;
  res.deviation = std::abs(res.c_mode - c_early) / std::abs(c_early);
  return res;
}

void Scenario::validate() const {
  target.validate();
  environment.validate();
  pulse.validate();
  transmitter.validate();
  receiver.validate();
  transmitter.require_exterior(target.radius);
  receiver.require_exterior(target.radius);
  if (model.max_l < 1 || model.max_l > kMaxHarmonicDegree) throw std::invalid_argument("model.max_l out of range");
  if (model.max_n < 1) throw std::invalid_argument("model.max_n must be >= 1");
  if (!(model.tolerance > 0.0 && model.tolerance < 1.0)) throw std::invalid_argument("model.tolerance out of range");
  if (!(model.early_fraction > 0.0 && model.early_fraction < 1.0)) {
    throw std::invalid_argument("model.early_fraction out of range");
  }
}

TimeMarkers Scenario::markers() const {
  return characteristic_times(target, environment, pulse.ramp_duration(), pulse.t0, model.collapse_transient);
}

Simulation simulate(const Scenario& sc, const std::vector<double>& gates) {
  sc.validate();
  const ModeLibrary lib = build_mode_library(sc.target, sc.environment.background.relative_permeability,
                                             sc.model.max_l, sc.model.max_n);
  return simulate(sc, lib, gates);
}

Simulation simulate(const Scenario& sc, const ModeLibrary& lib, const std::vector<double>& gates) {
  sc.validate();
  if (gates.empty()) throw DataError("simulate: no gates");
  for (double t : gates) {
    if (!(t > sc.pulse.t0)) throw DataError("simulate: every gate must be later than the pulse end t0");
  }
  Simulation sim;
  sim.markers = sc.markers();
  sim.regime_check = validate_regime(sim.markers, sc.model.regime_threshold);
  sim.library = lib;
  sim.coefficients = compute_excitation(lib, sc.pulse, sc.transmitter, sc.receiver);
  sim.mode_sum = synthesize_voltage(lib, sim.coefficients, gates);

  EarlyTimeContext ctx{sc.target, sc.environment.background.relative_permeability, sim.markers,
                       sc.model.early_fraction};
  const PotentialExpansion ill =
      illumination_coefficients(sc.transmitter, sc.pulse.on_current(), sc.target, lib.max_l);
  sim.early = solve_early_time(ctx, ill);
  sim.early_amplitude = early_voltage_amplitude(ctx, sim.early.dphi_ref, sc.receiver);
  sim.early_series = early_voltage(ctx, sim.early.dphi_ref, sc.receiver, gates);

  RegimeOptions ro;
  ro.tol = sc.model.tolerance;
  ro.early_fraction = sc.model.early_fraction;
  sim.report = regime_boundaries(lib, sim.coefficients, ro, sim.early_amplitude, sim.markers.t_tr());
  sim.composite = compose_response(sim.mode_sum, sim.early_series, sim.report, sc.model.tolerance);
  return sim;
}

}  // namespace tdem
