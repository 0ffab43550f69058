#pragma once

// Configuration files, CSV time series, mode-library and report JSON, run manifests.
// Numbers are written as shortest round-trip decimals with '.' separators regardless
// of locale. Files are replaced atomically (temp file + rename).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdem/composite.hpp"
#include "tdem/early_time.hpp"
#include "tdem/inversion.hpp"
#include "tdem/modes.hpp"

namespace tdem {

inline constexpr const char* kToolVersion = "0.3.0";

struct GateSpec {
  double t_min = 0.0;  // s
  double t_max = 0.0;  // s
  int count = 0;
  std::vector<double> gates() const;
};

struct Config {
  Scenario scenario;
  std::optional<GateSpec> gates;
};

/// Parses a configuration document. Errors are ConfigError naming the schema path,
/// e.g. `target.radius_m`.
Config parse_config(std::string_view json_text);
Config load_config(const std::filesystem::path& path);
/// Canonical JSON; parse_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const Config& config);
/// SHA-256 of the canonical serialization.
std::string config_hash(const Config& config);

/// "tmin,tmax,count" from the command line.
GateSpec parse_gate_spec(const std::string& text);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

/// 17 significant digits, the fixed width used in CSV output.
std::string format_csv_number(double v);

/// CSV with header `t_s,value[,regime],quality`.
std::string timeseries_csv(const TimeSeries& ts, const std::vector<std::string>* regime = nullptr);
/// Reads `t_s` and `value` columns (others ignored). Malformed rows raise DataError
/// naming the line number.
TimeSeries parse_timeseries_csv(std::string_view text, const std::string& origin = "data");
TimeSeries read_timeseries_csv(const std::filesystem::path& path);

std::string mode_library_json(const ModeLibrary& lib);
ModeLibrary parse_mode_library(std::string_view json_text);

/// Library file: {"entries": [{"name": ..., "config": {...}} or {"name": ..., "config_path": ...}]}.
/// Relative config paths resolve against the library file's directory.
std::vector<LibraryEntry> load_library(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;   // name, sha256
  std::vector<std::pair<std::string, std::string>> outputs;  // name, sha256
  std::string started_utc;
  std::string finished_utc;
};
std::string manifest_json(const RunManifest& m);
std::string utc_timestamp();

struct EarlyReportEntry {
  int l = 0;
  int m = 0;
  double c_init = 0.0;
  double c0 = 0.0;
  cplx k;                       // X_lm coefficient of K, A/m
  double phi_prefactor = 0.0;   // phi_l / sqrt(t - t_tr), s^{-1/2}
  double voltage_amplitude = 0.0;  // V s^{1/2}
};

struct EarlyReport {
  std::string config_hash;
  TimeMarkers markers;
  RegimeValidation regime;
  double window_lo = 0.0;  // s, absolute
  double window_hi = 0.0;
  double voltage_amplitude = 0.0;
  std::vector<EarlyReportEntry> entries;
};
std::string early_report_json(const EarlyReport& r);

std::string fit_report_json(const FitResult& fit, std::uint64_t seed, const std::string& data_sha256,
                            const std::string& config_hash);
std::string classification_report_json(const Classification& c, std::uint64_t seed, const std::string& data_sha256,
                                       const std::string& library_sha256);

}  // namespace tdem
