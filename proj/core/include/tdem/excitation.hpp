#pragma once

// Transmitter pulse history, coil coupling, and the receiver voltage as a mode sum:
//   A_n = mu0 I_n  (loop integral over the transmitter of conj(a_n) . dl)
//   V_n = lambda_n N_R A_n (loop integral over the receiver of a_n . dl)
//   V(t) = sum_n V_n exp(-lambda_n (t - t0))
// Receiver voltage is positive for decreasing secondary flux through the oriented loop.

#include <functional>
#include <string>
#include <vector>

#include "tdem/modes.hpp"
#include "tdem/special.hpp"

namespace tdem {

struct PulseWaveform {
  enum class Ramp { step_off, linear, table };

  double base_current = 1.0;  // A, per winding
  int windings = 1;           // N_T
  Ramp ramp = Ramp::step_off;
  double ramp_time = 0.0;     // tau_r for Ramp::linear, s
  /// (t, i) samples for Ramp::table, t ascending, last sample at t0 with i = 0.
  /// The current before the first sample is held at the first value.
  std::vector<std::pair<double, double>> table;
  double t0 = 0.0;

  static PulseWaveform step_off(double current, int windings = 1, double t0 = 0.0);
  static PulseWaveform linear_ramp(double current, double tau_r, int windings = 1, double t0 = 0.0);

  void validate() const;
  /// Effective current N_T i(t), A.
  double current_at(double t) const;
  /// Steady on-time current N_T i_0 driving the static pre-quench field.
  double on_current() const;
  /// Ramp duration tau_r (zero for step-off).
  double ramp_duration() const;
};

struct Loop {
  enum class Kind { circular_coaxial, polygonal };

  Kind kind = Kind::circular_coaxial;
  double radius = 0.0;  // circular: loop radius, m
  double height = 0.0;  // circular: axial offset of the loop plane from the sphere center, m
  int orientation = 1;  // circular: +1 counter-clockwise seen from +z
  std::vector<Vec3> vertices;  // polygonal, closed implicitly
  int windings = 1;

  static Loop circular(double radius, double height, int windings = 1, int orientation = 1);
  static Loop polygon(std::vector<Vec3> vertices, int windings = 1);

  void validate() const;
  Loop reversed() const;
  /// Closest approach of the curve to the sphere center, m.
  double min_distance_to_origin() const;
  /// Throws std::invalid_argument if the curve enters the sphere of this radius.
  void require_exterior(double radius) const;
};

struct ModeTerm {
  std::size_t mode_index = 0;  // into ModeLibrary::modes
  int m = 0;
  double decay_rate = 0.0;     // 1/s
  double pulse_integral = 0.0; // I_n, A s
  cplx amplitude;              // A_n
  double voltage = 0.0;        // Re V_n, V. Conjugate +-m pairs make the sum real.
};

struct ExcitationCoefficients {
  std::vector<ModeTerm> terms;
  double t0 = 0.0;
};

struct TimeSeries {
  std::vector<double> t;      // s, strictly increasing
  std::vector<double> value;  // V
  std::vector<double> truncation_bound;  // optional per-gate bound on omitted modes
  std::vector<std::string> quality;      // optional per-gate flags ("ok" when empty)
  std::string manifest_ref;

  std::size_t size() const { return t.size(); }
  void validate() const;
};

/// Line integral of a complex vector field along the oriented loop. Polygons use
/// Gauss-Legendre of the given order on sub-segments no longer than half their distance
/// to the origin; circles use the periodic trapezoid rule with 4*order azimuth nodes.
cplx loop_integral(const Loop& loop, const std::function<CVec3(const Vec3&)>& field, int order = 16);

/// I_n = integral_{-inf}^{t0} I(t') exp(-lambda (t0 - t')) dt'.
double pulse_history_integral(const PulseWaveform& p, double lambda);

/// Exterior mode field a_n(x) in SI units (mu0 sigma normalization), Cartesian.
CVec3 mode_field(const Mode& mode, const TargetSpec& target, const Vec3& x);

/// Loop integral of a_n . dl (winding count not included). Closed form for circular
/// coaxial loops; Gauss-Legendre (order 16 per sub-segment) for polygons.
cplx coil_line_integral(const Mode& mode, const TargetSpec& target, const Loop& loop);

/// Same integral by direct quadrature of mode_field along the curve; circular loops are
/// parameterized in the azimuth. Used to check the closed form.
cplx coil_line_integral_quadrature(const Mode& mode, const TargetSpec& target, const Loop& loop,
                                   int order = 64);

/// A_n = mu0 I_n conj(coil_line_integral(tx)).
cplx excitation_amplitude(const Mode& mode, const TargetSpec& target, const PulseWaveform& p,
                          const Loop& tx);

/// V_n = lambda_n N_R A_n coil_line_integral(rx).
cplx voltage_coefficient(const Mode& mode, const TargetSpec& target, cplx amplitude, const Loop& rx);

/// Excitation of every library mode. Coaxial geometries only couple m = 0; polygons
/// couple every m in [-l, l].
ExcitationCoefficients compute_excitation(const ModeLibrary& lib, const PulseWaveform& p, const Loop& tx,
                                          const Loop& rx);

/// V(t) = sum_n V_n exp(-lambda_n (t - t0)) with a per-gate truncation bound.
TimeSeries synthesize_voltage(const ModeLibrary& lib, const ExcitationCoefficients& coeffs,
                              const std::vector<double>& gates);

/// Upper bound on the omitted tail at time t. Per degree l the omitted coefficients are
/// bounded by the largest |V_n| among the last quarter of retained overtones and the
/// omitted wavenumbers grow at least as fast as the smallest retained spacing.
double truncation_estimate(const ModeLibrary& lib, const ExcitationCoefficients& coeffs, double t);

/// Log-spaced gates: count points from t_min to t_max inclusive.
std::vector<double> log_gates(double t_min, double t_max, int count);

}  // namespace tdem
