#include "tdem/modes.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "tdem/errors.hpp"

namespace tdem {

namespace {

double bisect(auto&& f, double lo, double hi) {
  double flo = f(lo);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Zeros of j_l are simple and spaced by more than pi for l >= 1, so a pi/2 scan
// sees each sign change exactly once.
std::vector<double> bessel_zeros(int l, int count, double x_max) {
  std::vector<double> zeros;
  zeros.reserve(count);
  const double step = 0.5 * std::numbers::pi;
  double x = 1e-3;
  double fx = spherical_bessel_j(l, x);
  while (static_cast<int>(zeros.size()) < count) {
    const double xn = x + step;
    if (xn > x_max) {
      throw NumericalError("mode search: bracket exhaustion beyond x_max = " + std::to_string(x_max) +
                           " for l = " + std::to_string(l));
    }
    const double fn = spherical_bessel_j(l, xn);
    if ((fx < 0.0) != (fn < 0.0)) {
      zeros.push_back(bisect([l](double t) { return spherical_bessel_j(l, t); }, x, xn));
    }
    x = xn;
    fx = fn;
  }
  return zeros;
}

}  // namespace

double ModeLibrary::max_decay_rate() const {
  double m = 0.0;
  for (const auto& mode : modes) m = std::max(m, mode.decay_rate);
  return m;
}

double eigencondition(int l, double x, double mu_ratio) {
  if (l < 1) throw std::invalid_argument("eigencondition: l must be >= 1");
  if (!(x > 0.0)) throw std::invalid_argument("eigencondition: x must be > 0");
  return x * spherical_bessel_j(l - 1, x) - l * (1.0 - mu_ratio) * spherical_bessel_j(l, x);
}

std::vector<Mode> find_decay_rates(const TargetSpec& target, double background_mu_r, int l, int count,
                                   const RootSearchOptions& opts) {
  target.validate();
  if (l < 1) throw std::invalid_argument("find_decay_rates: l must be >= 1");
  if (count < 1) throw std::invalid_argument("find_decay_rates: count must be >= 1");
  const double mu_ratio = target.material.relative_permeability / background_mu_r;
  const double dc = diffusivity(target.material);
  const double a = target.radius;

  const std::vector<double> zeros = bessel_zeros(l, count, opts.x_max);
  auto residual = [l, mu_ratio](double x) { return eigencondition(l, x, mu_ratio); };

  std::vector<Mode> modes;
  modes.reserve(count);
  double lo = 0.0;
  for (int n = 1; n <= count; ++n) {
    const double hi = zeros[n - 1];
    // Open interval: the residual is +-infinity-like only through j_l's sign, never zero at the ends.
    const double eps = 1e-12 * std::max(1.0, hi);
    const double x = bisect(residual, lo + eps, hi - eps);
    Mode mode;
    mode.idx = {l, 0};
    mode.overtone = n;
    mode.x = x;
    mode.decay_rate = dc * x * x / (a * a);
    mode.mu_ratio = mu_ratio;
    modes.push_back(normalize_mode(mode));
    lo = hi;
  }
  return modes;
}

double radial_profile(const Mode& mode, double rho) {
  if (rho < 0.0) throw std::invalid_argument("radial_profile: rho must be >= 0");
  if (rho <= 1.0) return mode.norm * spherical_bessel_j(mode.l(), mode.x * rho);
  return mode.norm * spherical_bessel_j(mode.l(), mode.x) * std::pow(rho, -(mode.l() + 1));
}

double mode_field_scale(const TargetSpec& target) {
  const double a = target.radius;
  return 1.0 / std::sqrt(kMu0 * target.material.conductivity * a * a * a);
}

Mode normalize_mode(const Mode& mode) {
  const int l = mode.l();
  const double x = mode.x;
  const double jl = spherical_bessel_j(l, x);
  const double integral = 0.5 * (jl * jl - spherical_bessel_j(l - 1, x) * spherical_bessel_j(l + 1, x));
  if (!(integral > 0.0)) throw NumericalError("normalize_mode: non-positive norm integral");
  Mode out = mode;
  out.norm = 1.0 / std::sqrt(integral);
  return out;
}

std::vector<double> radial_fd_oracle(const TargetSpec& target, double background_mu_r, int l,
                                     int grid_points) {
  target.validate();
  if (grid_points < 100) throw std::invalid_argument("radial_fd_oracle: grid_points must be >= 100");
  if (l < 1) throw std::invalid_argument("radial_fd_oracle: l must be >= 1");
  const double mu_ratio = target.material.relative_permeability / background_mu_r;
  const int n = grid_points;
  const double h = 1.0 / n;
  const double ll = static_cast<double>(l) * (l + 1);

  // Unknowns u_1..u_N at rho_i = i h, u_0 = 0. The last row uses the ghost point
  // u_{N+1} = u_{N-1} - 2 h l mu u_N and is halved, which makes the system
  // K u = x^2 M u symmetric with M = diag(1, ..., 1, 1/2).
  Eigen::VectorXd diag(n), sub(n - 1);
  for (int i = 1; i <= n; ++i) {
    const double rho = i * h;
    diag(i - 1) = 2.0 / (h * h) + ll / (rho * rho);
  }
  for (int i = 0; i < n - 1; ++i) sub(i) = -1.0 / (h * h);
  diag(n - 1) = 0.5 * diag(n - 1) + l * mu_ratio / h;
  // Symmetric scaling by M^{-1/2}: only the last row/column changes.
  const double s = std::sqrt(2.0);
  diag(n - 1) *= 2.0;
  sub(n - 2) *= s;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("radial_fd_oracle: tridiagonal eigensolver did not converge");
  }
  const double scale = diffusivity(target.material) / (target.radius * target.radius);
  std::vector<double> rates(n);
  for (int i = 0; i < n; ++i) rates[i] = solver.eigenvalues()(i) * scale;
  std::sort(rates.begin(), rates.end());
  return rates;
}

ModeLibrary build_mode_library(const TargetSpec& target, double background_mu_r, int max_l, int max_n,
                               const RootSearchOptions& opts) {
  target.validate();
  if (max_l < 1 || max_l > kMaxHarmonicDegree) {
    throw std::invalid_argument("build_mode_library: max_l must lie in [1, 12]");
  }
  if (max_n < 1) throw std::invalid_argument("build_mode_library: max_n must be >= 1");

  std::vector<std::future<std::vector<Mode>>> sectors;
  for (int l = 1; l <= max_l; ++l) {
    sectors.push_back(std::async(std::launch::async, [&, l] {
      return find_decay_rates(target, background_mu_r, l, max_n, opts);
    }));
  }
  ModeLibrary lib;
  lib.target = target;
  lib.background_mu_r = background_mu_r;
  lib.max_l = max_l;
  lib.max_n = max_n;
  for (auto& f : sectors) {
    auto part = f.get();
    lib.modes.insert(lib.modes.end(), part.begin(), part.end());
  }
  std::stable_sort(lib.modes.begin(), lib.modes.end(), [](const Mode& a, const Mode& b) {
    if (a.decay_rate != b.decay_rate) return a.decay_rate < b.decay_rate;
    if (a.l() != b.l()) return a.l() < b.l();
    return a.overtone < b.overtone;
  });
  return lib;
}

}  // namespace tdem
