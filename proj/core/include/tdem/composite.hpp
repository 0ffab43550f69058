#pragma once

// Three-regime receiver response: the early-time power law, the truncated mode sum
// and the single-mode tail, plus the amplitude cross-check between the two models.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tdem/early_time.hpp"
#include "tdem/excitation.hpp"
#include "tdem/modes.hpp"

namespace tdem {

struct RegimeOptions {
  double tol = 1e-2;             // relative agreement / dominance tolerance
  double early_fraction = 0.05;  // upper cap on the early window, units of tau_c
  int scan_points = 400;         // log-spaced scan for the early-end search
};

struct RegimeReport {
  double t0 = 0.0;
  double t_tr = 0.0;
  double early_end = 0.0;   // s, absolute
  double late_start = 0.0;  // s, absolute
  double blend_lo = 0.0;    // one-decade window centered (in log t - t0) on early_end
  double blend_hi = 0.0;
  double mode_sum_valid_from = 0.0;  // s, first time the truncation bound is within tol
  std::optional<double> early_amplitude;  // V s^{1/2}
  std::vector<std::size_t> intermediate_modes;  // library indices significant at early_end
  double late_rate = 0.0;   // lambda_1 of the first coupled rate group, 1/s

  std::string regime_at(double t) const;
};

/// Late start from the two slowest coupled rate groups (equal rates merged); early end
/// from the scan of mode sum against the power law when `early_amplitude` is given (the
/// blend window is placed inside the agreement range when it fits),
/// otherwise t0 + early_fraction * tau_c.
RegimeReport regime_boundaries(const ModeLibrary& lib, const ExcitationCoefficients& coeffs,
                               const RegimeOptions& opts = {}, std::optional<double> early_amplitude = {},
                               double t_tr = std::numeric_limits<double>::quiet_NaN());

struct CompositeSeries {
  TimeSeries series;                // quality column included
  std::vector<std::string> regime;  // early | blend | intermediate | late
  double blend_mismatch = 0.0;      // max |V_mode - V_early| / |V_mode| inside the blend window
};

/// Splice the early-time series and the mode sum on identical gates with log-linear
/// weights across the blend window. Throws NumericalError when the valid supports of
/// the two inputs do not overlap.
CompositeSeries compose_response(const TimeSeries& mode_sum, const TimeSeries& early, const RegimeReport& report,
                                 double tol = 1e-2);

struct CrosscheckOptions {
  double window_lo = 1e-5;  // units of tau_c after t0
  double window_hi = 1e-3;
  int gates = 64;
  double residual_threshold = 1e-2;  // relative RMS of the amplitude fit
};

struct CrosscheckResult {
  double deviation = 0.0;  // |c_mode - c_early| / |c_early|
  double c_mode = 0.0;
  double c_early = 0.0;
  double slope = 0.0;      // fitted d(V sqrt(t)) / d sqrt(t)
  double relative_residual = 0.0;
  bool conclusive = false;
};

/// Fits V(t) sqrt(t - t0) = c + c1 sqrt(t - t0) to the mode sum over the window and
/// compares the intercept with the early-time amplitude.
CrosscheckResult crosscheck_amplitude(const ModeLibrary& lib, const ExcitationCoefficients& coeffs, double c_early,
                                      const CrosscheckOptions& opts = {});

struct ModelOptions {
  int max_l = 1;
  int max_n = 500;
  double regime_threshold = kDefaultRegimeThreshold;  // tau_b/tau_c and tau_r/tau_c guard
  double tolerance = 1e-2;                            // regime and blend tolerance
  double early_fraction = 0.05;                       // early window cap, units of tau_c
  bool collapse_transient = false;                    // t_tr = t0
};

/// One forward-modeling scenario: target, environment, transmitter pulse and loops.
struct Scenario {
  TargetSpec target;
  EnvironmentSpec environment;
  PulseWaveform pulse;
  Loop transmitter;
  Loop receiver;
  ModelOptions model;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
  TimeMarkers markers() const;
};

struct Simulation {
  TimeMarkers markers;
  RegimeValidation regime_check;
  ModeLibrary library;
  ExcitationCoefficients coefficients;
  EarlyTimeSolution early;
  double early_amplitude = 0.0;  // V s^{1/2}
  RegimeReport report;
  TimeSeries mode_sum;
  TimeSeries early_series;
  CompositeSeries composite;
};

/// Full forward run at the given gates (all later than the pulse end t0).
Simulation simulate(const Scenario& sc, const std::vector<double>& gates);

/// Same, reusing an existing mode library built for sc.target.
Simulation simulate(const Scenario& sc, const ModeLibrary& lib, const std::vector<double>& gates);

}  // namespace tdem
