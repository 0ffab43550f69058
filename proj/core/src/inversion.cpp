#include "tdem/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "tdem/errors.hpp"

namespace tdem {

namespace {

// Weighted separable least squares at fixed log-rates.
class Projection {
 public:
  Projection(const TimeSeries& data, const FitOptions& opts) : opts_(opts), n_(static_cast<int>(data.size())) {
    s_.resize(n_);
    y_.resize(n_);
    w_.resize(n_);
    double ymax = 0.0;
    for (int i = 0; i < n_; ++i) ymax = std::max(ymax, std::abs(data.value[i]));
    for (int i = 0; i < n_; ++i) {
      s_(i) = data.t[i] - opts.t0;
      y_(i) = data.value[i];
      w_(i) = 1.0 / (opts.sigma_rel * std::max(std::abs(data.value[i]), 1e-12 * ymax));
    }
  }

  int fixed_columns() const { return (opts_.baseline ? 1 : 0) + (opts_.power_law ? 1 : 0); }
  int n() const { return n_; }
  const Eigen::VectorXd& s() const { return s_; }

  Eigen::MatrixXd basis(const Eigen::VectorXd& theta) const {
    const int f = fixed_columns();
    Eigen::MatrixXd phi(n_, f + theta.size());
    int c = 0;
    if (opts_.baseline) phi.col(c++).setOnes();
    if (opts_.power_law) phi.col(c++) = s_.array().pow(-0.5);
    for (int j = 0; j < theta.size(); ++j) phi.col(c++) = (-std::exp(theta(j)) * s_.array()).exp();
    return phi;
  }

  Eigen::VectorXd amplitudes(const Eigen::MatrixXd& phi) const {
    const Eigen::MatrixXd wa = w_.asDiagonal() * phi;
    return wa.colPivHouseholderQr().solve(w_.cwiseProduct(y_));
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& theta, Eigen::VectorXd* amps = nullptr) const {
    const Eigen::MatrixXd phi = basis(theta);
    const Eigen::VectorXd a = amplitudes(phi);
    if (amps) *amps = a;
    return w_.cwiseProduct(y_ - phi * a);
  }

  // Jacobian of the weighted residual over (amplitudes, log rates).
  Eigen::MatrixXd full_jacobian(const Eigen::VectorXd& theta, const Eigen::VectorXd& amps) const {
    const int f = fixed_columns();
    const int k = static_cast<int>(theta.size());
    const Eigen::MatrixXd phi = basis(theta);
    Eigen::MatrixXd j(n_, f + 2 * k);
    j.leftCols(f + k) = -(w_.asDiagonal() * phi);
    for (int q = 0; q < k; ++q) {
      const double lam = std::exp(theta(q));
      j.col(f + k + q) = w_.cwiseProduct(amps(f + q) * lam * s_.cwiseProduct(phi.col(f + q)));
    }
    return j;
  }

 private:
  FitOptions opts_;
  int n_;
  Eigen::VectorXd s_, y_, w_;
};

struct LocalFit {
  Eigen::VectorXd theta;
  Eigen::VectorXd amps;
  double cost = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  std::string message;
};

LocalFit levenberg_marquardt(const Projection& proj, Eigen::VectorXd theta, double lo, double hi, int max_iter) {
  const int k = static_cast<int>(theta.size());
  auto clamp_sort = [&](Eigen::VectorXd& v) {
    for (int i = 0; i < k; ++i) v(i) = std::clamp(v(i), lo, hi);
    std::sort(v.data(), v.data() + k);
  };
  clamp_sort(theta);
  LocalFit out;
  Eigen::VectorXd r = proj.residual(theta, &out.amps);
  double cost = r.squaredNorm();
  double mu = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    Eigen::MatrixXd jac(r.size(), k);
    for (int q = 0; q < k; ++q) {
      const double h = 1e-6 * std::max(1.0, std::abs(theta(q)));
      Eigen::VectorXd tp = theta, tm = theta;
      tp(q) += h;
      tm(q) -= h;
      jac.col(q) = (proj.residual(tp) - proj.residual(tm)) / (2.0 * h);
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    bool accepted = false;
    while (mu < 1e12) {
      Eigen::MatrixXd lhs = jtj;
      for (int q = 0; q < k; ++q) lhs(q, q) += mu * std::max(jtj(q, q), 1e-30);
      Eigen::VectorXd step = lhs.ldlt().solve(-g);
      Eigen::VectorXd trial = theta + step;
      clamp_sort(trial);
      Eigen::VectorXd amps;
      const Eigen::VectorXd rt = proj.residual(trial, &amps);
      const double ct = rt.squaredNorm();
      if (std::isfinite(ct) && ct < cost) {
        const double change = cost - ct;
        const double step_norm = (trial - theta).cwiseAbs().maxCoeff();
        theta = trial;
        r = rt;
        out.amps = amps;
        cost = ct;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        if (step_norm < 1e-10 || change <= 1e-15 * cost + 1e-300) out.converged = true;
        break;
      }
      mu *= 4.0;
    }
    // No decrease at any damping: a stationary point to working precision.
    if (!accepted) out.converged = true;
    if (out.converged) break;
  }
  out.theta = theta;
  out.cost = cost;
  if (!out.converged) out.message = "iteration limit reached";
  for (int q = 0; q < k && out.converged; ++q) {
    if (theta(q) <= lo || theta(q) >= hi) {
      out.converged = false;
      out.message = "rate pinned at a bound";
    }
    if (q > 0 && theta(q) - theta(q - 1) < 1e-8) {
      out.converged = false;
      out.message = "rates merged";
    }
  }
  return out;
}

}  // namespace

void DecayModel::validate(int max_terms) const {
  if (static_cast<int>(terms.size()) > max_terms) throw std::invalid_argument("decay model: too many terms");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!(terms[i].rate > 0.0)) throw std::invalid_argument("decay model: rates must be positive");
    if (i > 0 && !(terms[i].rate > terms[i - 1].rate)) {
      throw std::invalid_argument("decay model: rates must be strictly increasing");
    }
  }
}

double DecayModel::evaluate(double t) const {
  const double s = t - t0;
  double v = use_baseline ? baseline : 0.0;
  if (use_power_law) v += power_amplitude * std::pow(s, exponent);
  for (const auto& term : terms) v += term.amplitude * std::exp(-term.rate * s);
  return v;
}

double PortableRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double PortableRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  spare_ = rad * std::sin(ang);
  has_spare_ = true;
  return rad * std::cos(ang);
}

TimeSeries add_relative_noise(const TimeSeries& data, double sigma_rel, std::uint64_t seed) {
  PortableRng rng(seed);
  TimeSeries out = data;
  for (double& v : out.value) v *= 1.0 + sigma_rel * rng.normal();
  return out;
}

PowerLawFit fit_power_law(const TimeSeries& data, double t_lo, double t_hi, double t0) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = data.t[i];
    if (t < t_lo || t > t_hi) continue;
    if (!(data.value[i] > 0.0)) throw DataError("fit_power_law: non-positive value in the fit window");
    if (!(t > t0)) throw DataError("fit_power_law: gate not later than t0");
    x.push_back(std::log(t - t0));
    y.push_back(std::log(data.value[i]));
  }
  if (x.size() < 8) throw DataError("fit_power_law: need at least 8 gates in the window");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.amplitude = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (intercept + fit.exponent * x[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

FitResult fit_exponentials(const TimeSeries& data, int k, const FitOptions& opts, const DecayModel* init) {
  data.validate();
  if (k < 1 || k > DecayModel::kDefaultMaxTerms) throw std::invalid_argument("fit_exponentials: k out of range");
  if (!(opts.sigma_rel > 0.0)) throw std::invalid_argument("fit_exponentials: sigma_rel must be positive");
  const Projection proj(data, opts);
  const int p = proj.fixed_columns() + k;
  if (proj.n() < p + k + 1) throw DataError("fit_exponentials: too few gates for the model");
  const double s_min = proj.s().minCoeff();
  const double s_max = proj.s().maxCoeff();
  if (!(s_min > 0.0)) throw DataError("fit_exponentials: gates must be later than t0");
  if (k >= 2 && s_max / s_min < 100.0) throw DataError("fit_exponentials: gates must span two decades for k >= 2");

  const double lo = std::log(1e-2 / s_max);
  const double hi = std::log(1e2 / s_min);
  std::vector<Eigen::VectorXd> starts;
  if (init && static_cast<int>(init->terms.size()) == k) {
    Eigen::VectorXd th(k);
    for (int j = 0; j < k; ++j) th(j) = std::log(init->terms[j].rate);
    starts.push_back(th);
  }
  PortableRng rng(opts.seed);
  const double a = std::log(1.0 / s_max), b = std::log(1.0 / s_min);
  for (int sidx = 0; sidx < opts.restarts; ++sidx) {
    Eigen::VectorXd th(k);
    for (int j = 0; j < k; ++j) th(j) = a + (b - a) * rng.uniform();
    starts.push_back(th);
  }

  LocalFit best, best_any;
  for (const auto& th : starts) {
    LocalFit lf = levenberg_marquardt(proj, th, lo, hi, opts.max_iterations);
    if (lf.cost < best_any.cost) best_any = lf;
    if (lf.converged && lf.cost < best.cost) best = lf;
  }
  FitResult res;
  res.starts = static_cast<int>(starts.size());
  res.converged = best.converged;
  const LocalFit& chosen = best.converged ? best : best_any;
  res.iterations = chosen.iterations;
  res.message = best.converged ? "converged" : "no start converged: " + best_any.message;

  DecayModel& m = res.model;
  m.t0 = opts.t0;
  m.use_baseline = opts.baseline;
  m.use_power_law = opts.power_law;
  int c = 0;
  if (opts.baseline) m.baseline = chosen.amps(c++);
  if (opts.power_law) m.power_amplitude = chosen.amps(c++);
  for (int j = 0; j < k; ++j) m.terms.push_back({chosen.amps(c + j), std::exp(chosen.theta(j))});
  res.misfit = std::sqrt(chosen.cost / proj.n());

  const Eigen::MatrixXd jac = proj.full_jacobian(chosen.theta, chosen.amps);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  const int dof = proj.n() - (p + k);
  const double scale = std::max(1.0, chosen.cost / std::max(dof, 1));
  if (!lu.isInvertible() || lu.rcond() < 1e-15) {
    res.high_covariance = true;
    res.covariance = Eigen::MatrixXd::Constant(p + k, p + k, std::numeric_limits<double>::infinity());
    res.rate_relative_sd.assign(k, std::numeric_limits<double>::infinity());
  } else {
    res.covariance = lu.inverse() * scale;
    for (int j = 0; j < k; ++j) {
      const double sd = std::sqrt(std::max(res.covariance(p + j, p + j), 0.0));
      res.rate_relative_sd.push_back(sd);
      const double amp = chosen.amps(proj.fixed_columns() + j);
      const double asd = std::sqrt(std::max(res.covariance(proj.fixed_columns() + j, proj.fixed_columns() + j), 0.0));
      if (sd > opts.covariance_threshold || asd > opts.covariance_threshold * std::abs(amp)) {
        res.high_covariance = true;
      }
    }
  }
  return res;
}

double weighted_misfit(const std::vector<double>& data, const std::vector<double>& model, double sigma_rel,
                       double gain) {
  if (data.size() != model.size() || data.empty()) throw std::invalid_argument("weighted_misfit: size mismatch");
  double ymax = 0.0;
  for (double v : data) ymax = std::max(ymax, std::abs(v));
  double ss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = 1.0 / (sigma_rel * std::max(std::abs(data[i]), 1e-12 * ymax));
    const double e = w * (data[i] - gain * model[i]);
    ss += e * e;
  }
  return std::sqrt(ss / static_cast<double>(data.size()));
}

Classification classify_library(const TimeSeries& data, const std::vector<LibraryEntry>& library,
                                const ClassifyOptions& opts) {
  data.validate();
  if (library.empty()) throw std::invalid_argument("classify_library: empty library");
  std::vector<std::future<RankedCandidate>> jobs;
  for (const auto& entry : library) {
    jobs.push_back(std::async(std::launch::async, [&data, &entry, &opts] {
      RankedCandidate rc;
      rc.name = entry.name;
      try {
        const Simulation sim = simulate(entry.scenario, data.t);
        const auto& v = sim.composite.series.value;
        if (opts.gain_nuisance) {
          double num = 0.0, den = 0.0;
          for (std::size_t i = 0; i < v.size(); ++i) {
            const double w2 = 1.0 / (data.value[i] * data.value[i] + 1e-300);
            num += w2 * data.value[i] * v[i];
            den += w2 * v[i] * v[i];
          }
          rc.gain = den > 0.0 ? num / den : 1.0;
        }
        rc.misfit = weighted_misfit(data.value, v, opts.sigma_rel, rc.gain);
      } catch (const std::exception& e) {
        rc.valid = false;
        rc.misfit = std::numeric_limits<double>::infinity();
        rc.message = e.what();
      }
      return rc;
    }));
  }
  Classification out;
  for (auto& j : jobs) out.ranked.push_back(j.get());
  std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const RankedCandidate& x, const RankedCandidate& y) {
    if (x.valid != y.valid) return x.valid;
    return x.misfit < y.misfit;
  });
  if (!out.ranked.front().valid) throw DataError("classify_library: no candidate is valid for the data gates");
  if (out.ranked.size() >= 2 && out.ranked[1].valid) {
    out.margin = out.ranked[1].misfit - out.ranked[0].misfit;
    out.margin_ratio = out.ranked[0].misfit > 0.0 ? out.ranked[1].misfit / out.ranked[0].misfit
                                                  : std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace tdem
