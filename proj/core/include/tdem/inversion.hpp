#pragma once

// Decay-curve fitting and library classification.
//
// Model: V(t) = baseline + c (t - t0)^p + sum_j V_j exp(-lambda_j (t - t0)).
// Amplitudes enter linearly and are eliminated by weighted least squares at every
// rate iterate (variable projection); the rates are optimized in log lambda.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tdem/composite.hpp"
#include "tdem/excitation.hpp"

namespace tdem {

struct ExponentialTerm {
  double amplitude = 0.0;  // V
  double rate = 0.0;       // 1/s
};

struct DecayModel {
  double t0 = 0.0;
  bool use_baseline = false;
  double baseline = 0.0;        // V
  bool use_power_law = false;
  double power_amplitude = 0.0; // V s^{1/2} for the fixed exponent
  double exponent = -0.5;
  std::vector<ExponentialTerm> terms;  // rates strictly increasing

  static constexpr int kDefaultMaxTerms = 5;
  void validate(int max_terms = kDefaultMaxTerms) const;
  double evaluate(double t) const;
};

struct FitResult {
  DecayModel model;
  double misfit = 0.0;         // weighted RMS
  bool converged = false;
  bool high_covariance = false;
  Eigen::MatrixXd covariance;  // over (linear amplitudes..., log rates...)
  std::vector<double> rate_relative_sd;
  int iterations = 0;
  int starts = 0;
  std::string message;
};

struct PowerLawFit {
  double amplitude = 0.0;
  double exponent = 0.0;
  double residual = 0.0;  // RMS of log V
};

/// Deterministic generator: uniform doubles from the top 53 bits of mt19937_64 and
/// Box-Muller normals, so streams agree across standard libraries.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// y_i (1 + sigma_rel * n_i) with standard normal n_i.
TimeSeries add_relative_noise(const TimeSeries& data, double sigma_rel, std::uint64_t seed);

/// Least-squares line through (log(t - t0), log V) over the gates in [t_lo, t_hi].
PowerLawFit fit_power_law(const TimeSeries& data, double t_lo, double t_hi, double t0 = 0.0);

struct FitOptions {
  double t0 = 0.0;
  double sigma_rel = 1e-2;   // per-gate weight 1/(sigma_rel |V|)
  bool power_law = false;    // include c (t - t0)^{-1/2}
  bool baseline = false;
  int restarts = 8;          // log-uniform starts over the data's time span
  int max_iterations = 300;
  std::uint64_t seed = 1;
  double covariance_threshold = 0.5;  // relative sd flagged as high
};

/// Variable-projection fit with k exponentials. `init`, when it carries k rates, is
/// tried before the random starts.
FitResult fit_exponentials(const TimeSeries& data, int k, const FitOptions& opts = {},
                           const DecayModel* init = nullptr);

struct LibraryEntry {
  std::string name;
  Scenario scenario;
};

struct RankedCandidate {
  std::string name;
  double misfit = 0.0;
  double gain = 1.0;
  bool valid = true;
  std::string message;
};

struct Classification {
  std::vector<RankedCandidate> ranked;  // ascending misfit, invalid entries last
  double margin = 0.0;        // misfit gap between the best two valid candidates
  double margin_ratio = 0.0;  // second / first
};

struct ClassifyOptions {
  double sigma_rel = 1e-2;
  bool gain_nuisance = false;  // fit a free positive scale per candidate
};

/// Forward-models every entry at the data gates and ranks by weighted RMS misfit.
Classification classify_library(const TimeSeries& data, const std::vector<LibraryEntry>& library,
                                const ClassifyOptions& opts = {});

/// Weighted RMS of (data - gain * model) with weights 1/(sigma_rel |data|).
double weighted_misfit(const std::vector<double>& data, const std::vector<double>& model, double sigma_rel,
                       double gain = 1.0);

}  // namespace tdem
