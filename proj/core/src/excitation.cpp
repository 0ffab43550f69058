#include "tdem/excitation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "tdem/errors.hpp"

namespace tdem {

namespace {

constexpr double kPi = std::numbers::pi;

// int_0^d exp(-lambda s) ds
double exp_moment0(double lambda, double d) {
  if (lambda * d < 1e-8) return d * (1.0 - 0.5 * lambda * d);
  return -std::expm1(-lambda * d) / lambda;
}

// int_0^d s exp(-lambda s) ds
double exp_moment1(double lambda, double d) {
  const double z = lambda * d;
  if (z < 0.5) {
    // d^2 sum_k (-z)^k / (k! (k+2))
    double term = 1.0, sum = 0.5;
    for (int k = 1; k < 30; ++k) {
      term *= -z / k;
      sum += term / (k + 2.0);
    }
    return d * d * sum;
  }
  return (1.0 - std::exp(-z) * (1.0 + z)) / (lambda * lambda);
}

double segment_distance_to_origin(const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len2 = d.squaredNorm();
  double s = len2 > 0.0 ? -a.dot(d) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (a + s * d).norm();
}

}  // namespace

PulseWaveform PulseWaveform::step_off(double current, int windings, double t0) {
  PulseWaveform p;
  p.base_current = current;
  p.windings = windings;
  p.ramp = Ramp::step_off;
  p.t0 = t0;
  return p;
}

PulseWaveform PulseWaveform::linear_ramp(double current, double tau_r, int windings, double t0) {
  PulseWaveform p = step_off(current, windings, t0);
  p.ramp = Ramp::linear;
  p.ramp_time = tau_r;
  return p;
}

void PulseWaveform::validate() const {
  if (!std::isfinite(base_current)) throw std::invalid_argument("pulse current must be finite");
  if (windings < 1) throw std::invalid_argument("pulse windings must be >= 1");
  if (ramp == Ramp::linear && !(ramp_time >= 0.0)) {
    throw std::invalid_argument("ramp time must be >= 0");
  }
  if (ramp == Ramp::table) {
    if (table.size() < 2) throw std::invalid_argument("pulse table needs at least two samples");
    for (std::size_t i = 1; i < table.size(); ++i) {
      if (!(table[i].first > table[i - 1].first)) {
        throw std::invalid_argument("pulse table times must be strictly increasing");
      }
    }
    for (const auto& [t, i] : table) {
      if (!std::isfinite(t) || !std::isfinite(i)) throw std::invalid_argument("pulse table must be finite");
    }
    if (table.back().first != t0) throw std::invalid_argument("pulse table must end at t0");
  }
}

double PulseWaveform::on_current() const {
  if (ramp == Ramp::table) return windings * table.front().second;
  return windings * base_current;
}

double PulseWaveform::ramp_duration() const {
  switch (ramp) {
    case Ramp::step_off: return 0.0;
    case Ramp::linear: return ramp_time;
    case Ramp::table: return t0 - table.front().first;
  }
  return 0.0;
}

double PulseWaveform::current_at(double t) const {
  if (t > t0) return 0.0;
  switch (ramp) {
    case Ramp::step_off:
      return windings * base_current;
    case Ramp::linear:
      if (ramp_time <= 0.0 || t <= t0 - ramp_time) return windings * base_current;
      return windings * base_current * (t0 - t) / ramp_time;
    case Ramp::table: {
      if (t <= table.front().first) return windings * table.front().second;
      auto it = std::upper_bound(table.begin(), table.end(), t,
                                 [](double v, const auto& s) { return v < s.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double w = (t - lo.first) / (hi.first - lo.first);
      return windings * (lo.second + w * (hi.second - lo.second));
    }
  }
  return 0.0;
}

void Loop::validate() const {
  if (windings < 1) throw std::invalid_argument("loop windings must be >= 1");
  if (kind == Kind::circular_coaxial) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("loop radius must be positive");
    if (!std::isfinite(height)) throw std::invalid_argument("loop height must be finite");
    if (orientation != 1 && orientation != -1) throw std::invalid_argument("loop orientation must be +1 or -1");
  } else {
    if (vertices.size() < 3) throw std::invalid_argument("polygonal loop needs at least 3 vertices");
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (!vertices[i].allFinite()) throw std::invalid_argument("polygon vertices must be finite");
      if ((vertices[(i + 1) % vertices.size()] - vertices[i]).norm() == 0.0) {
        throw std::invalid_argument("polygon has a zero-length edge");
      }
    }
  }
}

Loop Loop::circular(double radius, double height, int windings, int orientation) {
  Loop l;
  l.kind = Kind::circular_coaxial;
  l.radius = radius;
  l.height = height;
  l.windings = windings;
  l.orientation = orientation;
  return l;
}

Loop Loop::polygon(std::vector<Vec3> vertices, int windings) {
  Loop l;
  l.kind = Kind::polygonal;
  l.vertices = std::move(vertices);
  l.windings = windings;
  return l;
}

Loop Loop::reversed() const {
  Loop l = *this;
  if (kind == Kind::circular_coaxial) {
    l.orientation = -orientation;
  } else {
    std::reverse(l.vertices.begin(), l.vertices.end());
  }
  return l;
}

double Loop::min_distance_to_origin() const {
  if (kind == Kind::circular_coaxial) return std::hypot(radius, height);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    d = std::min(d, segment_distance_to_origin(vertices[i], vertices[(i + 1) % vertices.size()]));
  }
  return d;
}

void Loop::require_exterior(double sphere_radius) const {
  if (!(min_distance_to_origin() > sphere_radius)) {
    throw std::invalid_argument("loop intersects the target sphere");
  }
}

void TimeSeries::validate() const {
  if (value.size() != t.size()) throw DataError("time series: t and value sizes differ");
  if (!truncation_bound.empty() && truncation_bound.size() != t.size()) {
    throw DataError("time series: truncation bound size differs");
  }
  if (!quality.empty() && quality.size() != t.size()) throw DataError("time series: quality size differs");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(value[i])) throw DataError("time series: non-finite entry");
    if (i > 0 && !(t[i] > t[i - 1])) throw DataError("time series: gates must be strictly increasing");
  }
}

cplx loop_integral(const Loop& loop, const std::function<CVec3(const Vec3&)>& field, int order) {
  if (order < 1) throw std::invalid_argument("loop_integral: order must be >= 1");
  cplx total = 0.0;
  if (loop.kind == Loop::Kind::circular_coaxial) {
    const int n = 4 * order;
    const double dphi = 2.0 * kPi / n;
    for (int k = 0; k < n; ++k) {
      const double phi = k * dphi;
      const Vec3 x(loop.radius * std::cos(phi), loop.radius * std::sin(phi), loop.height);
      const Vec3 dl = Vec3(-std::sin(phi), std::cos(phi), 0.0) * (loop.orientation * loop.radius * dphi);
      total += dl.cast<cplx>().dot(field(x));
    }
    return total;
  }
  const GaussLegendre gl(order);
  const auto& v = loop.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec3& a = v[i];
    const Vec3& b = v[(i + 1) % v.size()];
    const double dist = std::max(segment_distance_to_origin(a, b), 1e-300);
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / (0.5 * dist))));
    for (int p = 0; p < pieces; ++p) {
      const Vec3 pa = a + (b - a) * (static_cast<double>(p) / pieces);
      const Vec3 tangent = (b - a) / pieces;
      for (int q = 0; q < order; ++q) {
        const Vec3 x = pa + tangent * (0.5 * (gl.nodes[q] + 1.0));
        // Eigen's dot() conjugates its left operand, so keep the field on the right.
        total += 0.5 * gl.weights[q] * tangent.cast<cplx>().dot(field(x));
      }
    }
  }
  return total;
}

double pulse_history_integral(const PulseWaveform& p, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("pulse_history_integral: lambda must be > 0");
  const double amp = p.windings * p.base_current;
  switch (p.ramp) {
    case PulseWaveform::Ramp::step_off:
      return amp / lambda;
    case PulseWaveform::Ramp::linear: {
      const double tau = p.ramp_time;
      if (tau <= 0.0) return amp / lambda;
      // I0 (1 - exp(-lambda tau)) / (tau lambda^2), via the moment integrals for stability.
      return amp * (exp_moment1(lambda, tau) / tau + std::exp(-lambda * tau) / lambda);
    }
    case PulseWaveform::Ramp::table: {
      double total = 0.0;
      const auto& tab = p.table;
      for (std::size_t j = 0; j + 1 < tab.size(); ++j) {
        const double u_near = p.t0 - tab[j + 1].first;
        const double d = tab[j + 1].first - tab[j].first;
        const double i_near = tab[j + 1].second;
        const double i_far = tab[j].second;
        total += std::exp(-lambda * u_near) *
                 (i_near * exp_moment0(lambda, d) + (i_far - i_near) * exp_moment1(lambda, d) / d);
      }
      const double u_first = p.t0 - tab.front().first;
      total += tab.front().second * std::exp(-lambda * u_first) / lambda;
      return p.windings * total;
    }
  }
  return 0.0;
}

CVec3 mode_field(const Mode& mode, const TargetSpec& target, const Vec3& x) {
  const SphericalCoords sc = SphericalCoords::from_cartesian(x);
  const double f = mode_field_scale(target) * radial_profile(mode, sc.r / target.radius);
  return vector_spherical_harmonic(mode.idx, sc.angles) * f;
}

cplx coil_line_integral(const Mode& mode, const TargetSpec& target, const Loop& loop) {
  loop.require_exterior(target.radius);
  if (loop.kind == Loop::Kind::polygonal) {
    return loop_integral(loop, [&](const Vec3& x) { return mode_field(mode, target, x); }, 16);
  }
  if (mode.idx.m != 0) return 0.0;
  const int l = mode.l();
  const double r_loop = std::hypot(loop.radius, loop.height);
  const SurfacePoint at{std::atan2(loop.radius, loop.height), 0.0};
  const double f = mode_field_scale(target) * radial_profile(mode, r_loop / target.radius);
  // X_l0 . phi-hat = -i dY_l0/dtheta / sqrt(l(l+1))
  const cplx x_phi = cplx(0.0, -1.0) * spherical_harmonic_sample({l, 0}, at).d_theta /
                     std::sqrt(static_cast<double>(l) * (l + 1));
  return static_cast<double>(loop.orientation) * 2.0 * kPi * loop.radius * f * x_phi;
}

cplx coil_line_integral_quadrature(const Mode& mode, const TargetSpec& target, const Loop& loop, int order) {
  loop.require_exterior(target.radius);
  return loop_integral(loop, [&](const Vec3& x) { return mode_field(mode, target, x); }, order);
}

cplx excitation_amplitude(const Mode& mode, const TargetSpec& target, const PulseWaveform& p, const Loop& tx) {
  const double in = pulse_history_integral(p, mode.decay_rate);
  if (in == 0.0) return 0.0;
  return kMu0 * in * std::conj(coil_line_integral(mode, target, tx));
}

cplx voltage_coefficient(const Mode& mode, const TargetSpec& target, cplx amplitude, const Loop& rx) {
  return mode.decay_rate * static_cast<double>(rx.windings) * amplitude * coil_line_integral(mode, target, rx);
}

ExcitationCoefficients compute_excitation(const ModeLibrary& lib, const PulseWaveform& p, const Loop& tx,
                                          const Loop& rx) {
  p.validate();
  tx.validate();
  rx.validate();
  tx.require_exterior(lib.target.radius);
  rx.require_exterior(lib.target.radius);
  const bool axial = tx.kind == Loop::Kind::circular_coaxial || rx.kind == Loop::Kind::circular_coaxial;
  ExcitationCoefficients out;
  out.t0 = p.t0;
  for (std::size_t i = 0; i < lib.modes.size(); ++i) {
    const Mode& base = lib.modes[i];
    const double in = pulse_history_integral(p, base.decay_rate);
    const int l = base.l();
    for (int m = axial ? 0 : -l; m <= (axial ? 0 : l); ++m) {
      const Mode mode = base.with_m(m);
      ModeTerm term;
      term.mode_index = i;
      term.m = m;
      term.decay_rate = mode.decay_rate;
      term.pulse_integral = in;
      term.amplitude = kMu0 * in * std::conj(coil_line_integral(mode, lib.target, tx));
      term.voltage = voltage_coefficient(mode, lib.target, term.amplitude, rx).real();
      out.terms.push_back(term);
    }
  }
  return out;
}

double truncation_estimate(const ModeLibrary& lib, const ExcitationCoefficients& coeffs, double t) {
  if (!(t > coeffs.t0)) throw std::invalid_argument("truncation_estimate: t must exceed t0");
  // Sum the m-components of each (l, n) and collect per-degree sequences.
  std::map<int, std::map<int, std::pair<double, double>>> sectors;  // l -> n -> (x, V)
  for (const auto& term : coeffs.terms) {
    const Mode& mode = lib.modes[term.mode_index];
    auto& slot = sectors[mode.l()][mode.overtone];
    slot.first = mode.x;
    slot.second += term.voltage;
  }
  const double c = diffusivity(lib.target.material) * (t - coeffs.t0) / (lib.target.radius * lib.target.radius);
  double bound = 0.0;
  for (const auto& [l, seq] : sectors) {
    const int n_max = seq.rbegin()->first;
    const int n_from = std::max(1, (3 * n_max) / 4);
    double v_ref = 0.0;
    double spacing = std::numeric_limits<double>::infinity();
    double prev_x = -1.0;
    for (const auto& [n, xv] : seq) {
      if (n < n_from) {
        prev_x = xv.first;
        continue;
      }
      v_ref = std::max(v_ref, std::abs(xv.second));
      if (prev_x >= 0.0) spacing = std::min(spacing, xv.first - prev_x);
      prev_x = xv.first;
    }
    if (!std::isfinite(spacing)) spacing = 0.5 * kPi;
    const double x_last = seq.rbegin()->second.first;
    const double sc = std::sqrt(c);
    // sum_{k>=1} exp(-c (x_N + k dx)^2) <= (1/dx) int_{x_N}^inf exp(-c y^2) dy
    bound += v_ref / spacing * 0.5 * std::sqrt(kPi) / sc * std::erfc(x_last * sc);
  }
  return bound;
}

TimeSeries synthesize_voltage(const ModeLibrary& lib, const ExcitationCoefficients& coeffs,
                              const std::vector<double>& gates) {
  if (lib.modes.empty() || coeffs.terms.empty()) {
    throw NumericalError("synthesize_voltage: empty mode library");
  }
  TimeSeries ts;
  ts.t = gates;
  ts.value.resize(gates.size());
  ts.truncation_bound.resize(gates.size());
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const double dt = gates[g] - coeffs.t0;
    if (!(dt > 0.0)) throw std::invalid_argument("synthesize_voltage: gates must be later than t0");
    double v = 0.0;
    for (const auto& term : coeffs.terms) v += term.voltage * std::exp(-term.decay_rate * dt);
    ts.value[g] = v;
    ts.truncation_bound[g] = truncation_estimate(lib, coeffs, gates[g]);
  }
  ts.validate();
  return ts;
}

std::vector<double> log_gates(double t_min, double t_max, int count) {
  if (!(t_min > 0.0) || !(t_max > t_min) || count < 2) {
    throw DataError("gate spec must satisfy 0 < t_min < t_max and count >= 2");
  }
  std::vector<double> g(count);
  const double lmin = std::log(t_min), lmax = std::log(t_max);
  for (int i = 0; i < count; ++i) g[i] = std::exp(lmin + (lmax - lmin) * i / (count - 1));
  g.front() = t_min;
  g.back() = t_max;
  return g;
}

}  // namespace tdem
