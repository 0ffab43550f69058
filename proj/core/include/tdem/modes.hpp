#pragma once

// Decay-rate spectrum and radial profiles of the toroidal-electric eddy-current
// modes a = f(r) X_lm of a uniform sphere in an insulating background.
//
// Dimensionless conventions: rho = r/a, x = k a. Inside the sphere
// f(rho) = N j_l(x rho); outside f(rho) = N j_l(x) rho^{-(l+1)}. N is fixed by
//   int_0^1 N^2 j_l(x rho)^2 rho^2 d rho = 1,
// which in SI reads int mu0 sigma |a|^2 dV = 1 once the profile is multiplied by
// mode_field_scale().

#include <vector>

#include "tdem/special.hpp"
#include "tdem/units.hpp"

namespace tdem {

struct Mode {
  HarmonicIndex idx;       // m is a representative; the spectrum is m-degenerate
  int overtone = 1;        // n >= 1
  double x = 0.0;          // dimensionless wavenumber k a
  double decay_rate = 0.0; // lambda, 1/s
  double norm = 0.0;       // N, dimensionless
  double mu_ratio = 1.0;   // mu_c / mu_b

  int l() const { return idx.l; }
  Mode with_m(int m) const {
    Mode copy = *this;
    copy.idx.m = m;
    return copy;
  }
};

struct ModeLibrary {
  TargetSpec target;
  double background_mu_r = 1.0;
  std::vector<Mode> modes;  // lambda ascending, ties by l then n
  int max_l = 0;
  int max_n = 0;

  double mu_ratio() const { return target.material.relative_permeability / background_mu_r; }
  double max_decay_rate() const;
};

/// x j_{l-1}(x) - l (1 - mu_ratio) j_l(x). Zeros are the eigen-wavenumbers for degree l.
double eigencondition(int l, double x, double mu_ratio);

struct RootSearchOptions {
  double x_max = 1e5;  // bracketing stops here with a NumericalError
};

/// First `count` decay modes of degree l, normalized. Roots are bracketed between
/// consecutive zeros of j_l (exactly one eigenvalue per interval) and bisected to
/// machine precision.
std::vector<Mode> find_decay_rates(const TargetSpec& target, double background_mu_r, int l, int count,
                                   const RootSearchOptions& opts = {});

/// Dimensionless radial profile f(rho), continued as rho^{-(l+1)} outside the sphere.
double radial_profile(const Mode& mode, double rho);

/// SI factor converting f(rho) into the mu0*sigma-normalized mode amplitude: 1/sqrt(mu0 sigma a^3).
double mode_field_scale(const TargetSpec& target);

/// Recomputes N from the closed-form integral
/// int_0^1 j_l(x rho)^2 rho^2 d rho = [j_l(x)^2 - j_{l-1}(x) j_{l+1}(x)] / 2.
Mode normalize_mode(const Mode& mode);

/// Independent brute-force check of the eigencondition: second-order finite differences
/// for u = rho f on a uniform grid, Robin row u'(1) + l mu_ratio u(1) = 0 from the exterior
/// match, solved as a symmetric tridiagonal eigenproblem. Returns ascending lambda (1/s).
std::vector<double> radial_fd_oracle(const TargetSpec& target, double background_mu_r, int l,
                                     int grid_points);

/// All modes with l in [1, max_l], n in [1, max_n]. Sectors are solved concurrently.
ModeLibrary build_mode_library(const TargetSpec& target, double background_mu_r, int max_l, int max_n,
                               const RootSearchOptions& opts = {});

}  // namespace tdem
