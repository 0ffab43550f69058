// tdem: forward modeling, early-time analysis and decay-curve inversion for a
// conducting sphere. Exit codes: 0 ok, 2 config, 3 data, 4 numerical.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tdem/composite.hpp"
#include "tdem/early_time.hpp"
#include "tdem/errors.hpp"
#include "tdem/inversion.hpp"
#include "tdem/io.hpp"

namespace fs = std::filesystem;
using namespace tdem;

namespace {

struct Common {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::string gates;
  std::optional<int> max_l;
  std::optional<int> max_n;
};

Config load(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config", "required");
  Config cfg = load_config(c.config);
  if (c.max_l) {
    if (*c.max_l < 1 || *c.max_l > kMaxHarmonicDegree) throw ConfigError("model.max_l", "out of range");
    cfg.scenario.model.max_l = *c.max_l;
  }
  if (c.max_n) {
    if (*c.max_n < 1) throw ConfigError("model.max_n", "must be >= 1");
    cfg.scenario.model.max_n = *c.max_n;
  }
  return cfg;
}

// Gate grid: --gates, else the config's gates, else 50 per decade over [1e-5, 10] tau_c.
std::vector<double> gates_for(const Common& c, const Config& cfg) {
  if (!c.gates.empty()) return parse_gate_spec(c.gates).gates();
  if (cfg.gates) return cfg.gates->gates();
  const TimeMarkers tm = cfg.scenario.markers();
  std::vector<double> g = log_gates(1e-5 * tm.tau_c, 10.0 * tm.tau_c, 301);
  for (double& t : g) t += tm.t0;
  return g;
}

void finish(RunManifest& m, const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  for (const auto& [name, content] : files) {
    atomic_write(dir / name, content);
    m.outputs.emplace_back(name, sha256_hex(content));
  }
  m.finished_utc = utc_timestamp();
  atomic_write(dir / "manifest.json", manifest_json(m));
}

RunManifest start(const std::string& command, const Common& c, const std::string& hash) {
  RunManifest m;
  m.command = command;
  m.seed = c.seed;
  m.config_hash = hash;
  m.started_utc = utc_timestamp();
  if (!c.config.empty()) m.inputs.emplace_back("config", file_sha256(c.config));
  return m;
}

int cmd_modes(const Common& c) {
  Config cfg = load(c);
  RunManifest m = start("modes", c, config_hash(cfg));
  const Scenario& s = cfg.scenario;
  const ModeLibrary lib =
      build_mode_library(s.target, s.environment.background.relative_permeability, s.model.max_l, s.model.max_n);
  finish(m, c.out, {{"modes.json", mode_library_json(lib)}});
  std::cout << lib.modes.size() << " modes, lambda_1 = " << format_number(lib.modes.front().decay_rate)
            << " 1/s\n";
  return 0;
}

int cmd_simulate(const Common& c, double noise) {
  Config cfg = load(c);
  RunManifest m = start("simulate", c, config_hash(cfg));
  const std::vector<double> gates = gates_for(c, cfg);
  Simulation sim = simulate(cfg.scenario, gates);
  TimeSeries out = sim.composite.series;
  if (noise > 0.0) out = add_relative_noise(out, noise, c.seed);
  if (!sim.regime_check.pass()) std::cerr << "warning: regime check failed: " << sim.regime_check.describe() << "\n";
  finish(m, c.out, {{"simulate.csv", timeseries_csv(out, &sim.composite.regime)}});
  std::cout << "tau_c = " << format_number(sim.markers.tau_c) << " s, early end = "
            << format_number(sim.report.early_end) << " s, late start = " << format_number(sim.report.late_start)
            << " s, blend mismatch = " << format_number(sim.composite.blend_mismatch) << "\n";
  return 0;
}

int cmd_early(const Common& c) {
  Config cfg = load(c);
  const std::string hash = config_hash(cfg);
  RunManifest m = start("early", c, hash);
  const Scenario& s = cfg.scenario;
  s.validate();
  const TimeMarkers tm = s.markers();
  const EarlyTimeContext ctx{s.target, s.environment.background.relative_permeability, tm, s.model.early_fraction};
  const PotentialExpansion ill = illumination_coefficients(s.transmitter, s.pulse.on_current(), s.target, s.model.max_l);
  const EarlyTimeSolution sol = solve_early_time(ctx, ill);

  EarlyReport rep;
  rep.config_hash = hash;
  rep.markers = tm;
  rep.regime = validate_regime(tm, s.model.regime_threshold);
  rep.window_lo = tm.t_tr();
  rep.window_hi = tm.t0 + s.model.early_fraction * tm.tau_c;
  rep.voltage_amplitude = early_voltage_amplitude(ctx, sol.dphi_ref, s.receiver);
  const double mu = ctx.mu_ratio();
  const double d = ctx.diffusivity();
  for (int l = 1; l <= s.model.max_l; ++l) {
    for (int mm = -l; mm <= l; ++mm) {
      if (sol.frozen.interior(l, mm) == 0.0) continue;
      PotentialExpansion single(s.model.max_l);
      single.decaying(l, mm) = sol.dphi_ref.decaying(l, mm);
      single.dt = sol.dphi_ref.dt;
      EarlyReportEntry e;
      e.l = l;
      e.m = mm;
      e.c_init = closed_form::c_init(l, mu);
      e.c0 = closed_form::c0(l, mu);
      e.k = sol.current.k(l, mm);
      e.phi_prefactor = closed_form::phi(l, mu, s.target.radius, d, 1.0);
      e.voltage_amplitude = early_voltage_amplitude(ctx, single, s.receiver);
      rep.entries.push_back(e);
    }
  }

  std::vector<double> gates = gates_for(c, cfg);
  std::string fields = "r,theta,phi,t_s,dA,dB,dE\n";
  const double a = s.target.radius;
  for (double t : gates) {
    const double dt = t - tm.t_tr();
    if (!ctx.in_regime(dt)) continue;
    const PotentialExpansion dphi = sol.dphi_at(dt);
    for (double rf : {1.25, 1.5, 2.0, 4.0}) {
      for (double th : {0.0, std::numbers::pi / 4, std::numbers::pi / 2}) {
        const double r = rf * a;
        const Vec3 x(r * std::sin(th), 0.0, r * std::cos(th));
        const EarlyTimeField f = external_fields(ctx, dphi, x);
        fields += format_number(r) + "," + format_number(th) + ",0," + format_number(t) + "," +
                  format_number(f.dA.real().norm()) + "," + format_number(f.dB.real().norm()) + "," +
                  format_number(f.dE.real().norm()) + "\n";
      }
    }
  }
  const TimeSeries v = early_voltage(ctx, sol.dphi_ref, s.receiver, gates);
  finish(m, c.out, {{"early.json", early_report_json(rep)}, {"fields.csv", fields}, {"early.csv", timeseries_csv(v)}});
  std::cout << "early-time amplitude = " << format_number(rep.voltage_amplitude) << " V s^1/2\n";
  return 0;
}

int cmd_fit(const Common& c, const std::string& data_path, int terms, bool power_law, double sigma,
            std::optional<double> t0) {
  if (data_path.empty()) throw DataError("--data is required");
  std::string hash;
  FitOptions opts;
  if (!c.config.empty()) {
    const Config cfg = load(c);
    hash = config_hash(cfg);
    opts.t0 = cfg.scenario.pulse.t0;
  }
  if (t0) opts.t0 = *t0;
  opts.sigma_rel = sigma;
  opts.power_law = power_law;
  opts.seed = c.seed;
  RunManifest m = start("fit", c, hash);
  const TimeSeries data = read_timeseries_csv(data_path);
  const std::string digest = file_sha256(data_path);
  m.inputs.emplace_back("data", digest);
  const FitResult fit = fit_exponentials(data, terms, opts);
  finish(m, c.out, {{"fit.json", fit_report_json(fit, c.seed, digest, hash)}});
  std::cout << (fit.converged ? "converged" : "NOT converged") << ", misfit = " << format_number(fit.misfit)
            << (fit.high_covariance ? " (high covariance)" : "") << "\n";
  return fit.converged ? 0 : 4;
}

int cmd_classify(const Common& c, const std::string& data_path, const std::string& library_path, double sigma,
                 bool gain) {
  if (data_path.empty()) throw DataError("--data is required");
  if (library_path.empty()) throw ConfigError("--library", "required");
  RunManifest m = start("classify", c, "");
  const TimeSeries data = read_timeseries_csv(data_path);
  const std::string digest = file_sha256(data_path);
  const std::string lib_digest = file_sha256(library_path);
  m.inputs.emplace_back("data", digest);
  m.inputs.emplace_back("library", lib_digest);
  const std::vector<LibraryEntry> lib = load_library(library_path);
  const Classification cls = classify_library(data, lib, {sigma, gain});
  finish(m, c.out, {{"classify.json", classification_report_json(cls, c.seed, digest, lib_digest)}});
  std::cout << "best: " << cls.ranked.front().name << " (misfit " << format_number(cls.ranked.front().misfit) << ")\n";
  return 0;
}

void add_common(CLI::App* app, Common& c, bool needs_config, bool gates) {
  auto* opt = app->add_option("--config", c.config, "configuration JSON");
  if (needs_config) opt->required();
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "random seed recorded in outputs");
  if (gates) app->add_option("--gates", c.gates, "tmin,tmax,count in seconds (log-spaced)");
  app->add_option("--max-l", c.max_l, "highest harmonic degree");
  app->add_option("--max-n", c.max_n, "overtones per degree");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient EM response of a conducting sphere"};
  app.require_subcommand(1);
  Common common;
  double noise = 0.0;
  std::string data, library;
  int terms = 2;
  bool power_law = false, gain = false;
  double sigma = 1e-2;
  std::optional<double> t0;

  auto* modes = app.add_subcommand("modes", "decay-rate spectrum to modes.json");
  add_common(modes, common, true, false);
  auto* sim = app.add_subcommand("simulate", "three-regime receiver voltage to simulate.csv");
  add_common(sim, common, true, true);
  sim->add_option("--noise", noise, "relative Gaussian noise added with --seed");
  auto* early = app.add_subcommand("early", "early-time report and field scan");
  add_common(early, common, true, true);
  auto* fit = app.add_subcommand("fit", "multi-exponential fit of a decay curve");
  add_common(fit, common, false, false);
  fit->add_option("--data", data, "CSV with t_s,value columns")->required();
  fit->add_option("--terms", terms, "number of exponentials");
  fit->add_flag("--power-law", power_law, "include a t^-1/2 term");
  fit->add_option("--sigma", sigma, "relative noise level for weights");
  fit->add_option("--t0", t0, "pulse end time, s");
  auto* cls = app.add_subcommand("classify", "rank library entries by misfit");
  add_common(cls, common, false, false);
  cls->add_option("--data", data, "CSV with t_s,value columns")->required();
  cls->add_option("--library", library, "library JSON")->required();
  cls->add_option("--sigma", sigma, "relative noise level for weights");
  cls->add_flag("--gain", gain, "fit a free gain per candidate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*modes) return cmd_modes(common);
    if (*sim) return cmd_simulate(common, noise);
    if (*early) return cmd_early(common);
    if (*fit) return cmd_fit(common, data, terms, power_law, sigma, t0);
    if (*cls) return cmd_classify(common, data, library, sigma, gain);
  } catch (const tdem::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
