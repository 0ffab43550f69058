#include "tdem/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "json.hpp"
#include "tdem/errors.hpp"

namespace tdem {

namespace {

using json = nlohmann::ordered_json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json& member(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(path, key), "missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
  return d;
}

double number_or(const json& obj, const std::string& path, const std::string& key, double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return number(obj.at(key), join(path, key));
}

int integer_or(const json& obj, const std::string& path, const std::string& key, int fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

bool bool_or(const json& obj, const std::string& path, const std::string& key, bool fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return v.get<bool>();
}

MaterialSpec parse_material(const json& obj, const std::string& path, bool target) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  MaterialSpec m;
  m.relative_permeability = number_or(obj, path, "mu_r", 1.0);
  if (!(m.relative_permeability >= 1.0)) throw ConfigError(join(path, "mu_r"), "must be >= 1");
  const bool has_rho = obj.contains("resistivity_ohm_m");
  const bool has_sigma = obj.contains("conductivity_s_per_m");
  if (has_rho && has_sigma) throw ConfigError(path, "give resistivity_ohm_m or conductivity_s_per_m, not both");
  if (has_sigma) {
    m.conductivity = number(obj.at("conductivity_s_per_m"), join(path, "conductivity_s_per_m"));
    if (target ? !(m.conductivity > 0.0) : !(m.conductivity >= 0.0)) {
      throw ConfigError(join(path, "conductivity_s_per_m"), target ? "must be > 0" : "must be >= 0");
    }
  } else if (has_rho && !obj.at("resistivity_ohm_m").is_null()) {
    const double rho = number(obj.at("resistivity_ohm_m"), join(path, "resistivity_ohm_m"));
    if (!(rho > 0.0)) throw ConfigError(join(path, "resistivity_ohm_m"), "must be > 0");
    m.conductivity = 1.0 / rho;
  } else if (target) {
    throw ConfigError(join(path, "resistivity_ohm_m"), "missing");
  }
  return m;
}

Loop parse_loop(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  const std::string shape = obj.value("shape", std::string("circular"));
  const int windings = integer_or(obj, path, "windings", 1);
  if (windings < 1) throw ConfigError(join(path, "windings"), "must be >= 1");
  if (shape == "circular") {
    const double radius = number(member(obj, path, "radius_m"), join(path, "radius_m"));
    if (!(radius > 0.0)) throw ConfigError(join(path, "radius_m"), "must be > 0");
    const double height = number(member(obj, path, "height_m"), join(path, "height_m"));
    const int orientation = integer_or(obj, path, "orientation", 1);
    if (orientation != 1 && orientation != -1) throw ConfigError(join(path, "orientation"), "must be +1 or -1");
    return Loop::circular(radius, height, windings, orientation);
  }
  if (shape == "polygon") {
    const json& vs = member(obj, path, "vertices_m");
    const std::string vpath = join(path, "vertices_m");
    if (!vs.is_array() || vs.size() < 3) throw ConfigError(vpath, "expected at least 3 vertices");
    std::vector<Vec3> vertices;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::string ipath = vpath + "[" + std::to_string(i) + "]";
      if (!vs[i].is_array() || vs[i].size() != 3) throw ConfigError(ipath, "expected [x, y, z]");
      vertices.emplace_back(number(vs[i][0], ipath), number(vs[i][1], ipath), number(vs[i][2], ipath));
    }
    Loop l = Loop::polygon(std::move(vertices), windings);
    try {
      l.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(vpath, e.what());
    }
    return l;
  }
  throw ConfigError(join(path, "shape"), "expected \"circular\" or \"polygon\"");
}

PulseWaveform parse_pulse(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  PulseWaveform p;
  p.base_current = number_or(obj, path, "current_a", 1.0);
  p.windings = integer_or(obj, path, "windings", 1);
  if (p.windings < 1) throw ConfigError(join(path, "windings"), "must be >= 1");
  p.t0 = number_or(obj, path, "t0_s", 0.0);
  const std::string ramp = obj.value("ramp", std::string("step_off"));
  if (ramp == "step_off") {
    p.ramp = PulseWaveform::Ramp::step_off;
  } else if (ramp == "linear") {
    p.ramp = PulseWaveform::Ramp::linear;
    p.ramp_time = number(member(obj, path, "ramp_time_s"), join(path, "ramp_time_s"));
    if (!(p.ramp_time >= 0.0)) throw ConfigError(join(path, "ramp_time_s"), "must be >= 0");
  } else if (ramp == "table") {
    p.ramp = PulseWaveform::Ramp::table;
    const json& tab = member(obj, path, "table");
    const std::string tpath = join(path, "table");
    if (!tab.is_array()) throw ConfigError(tpath, "expected [[t, i], ...]");
    for (std::size_t i = 0; i < tab.size(); ++i) {
      const std::string ipath = tpath + "[" + std::to_string(i) + "]";
      if (!tab[i].is_array() || tab[i].size() != 2) throw ConfigError(ipath, "expected [t, i]");
      p.table.emplace_back(number(tab[i][0], ipath), number(tab[i][1], ipath));
    }
  } else {
    throw ConfigError(join(path, "ramp"), "expected \"step_off\", \"linear\" or \"table\"");
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return p;
}

json material_json(const MaterialSpec& m) {
  return json{{"conductivity_s_per_m", m.conductivity}, {"mu_r", m.relative_permeability}};
}

json loop_json(const Loop& l) {
  json j;
  if (l.kind == Loop::Kind::circular_coaxial) {
    j["shape"] = "circular";
    j["radius_m"] = l.radius;
    j["height_m"] = l.height;
    j["orientation"] = l.orientation;
  } else {
    j["shape"] = "polygon";
    json vs = json::array();
    for (const auto& v : l.vertices) vs.push_back({v.x(), v.y(), v.z()});
    j["vertices_m"] = vs;
  }
  j["windings"] = l.windings;
  return j;
}

json config_json(const Config& c) {
  const Scenario& s = c.scenario;
  json j;
  j["target"] = material_json(s.target.material);
  j["target"]["radius_m"] = s.target.radius;
  j["background"] = material_json(s.environment.background);
  j["standoff_m"] = s.environment.sensor_standoff;
  json p;
  p["current_a"] = s.pulse.base_current;
  p["windings"] = s.pulse.windings;
  p["t0_s"] = s.pulse.t0;
  switch (s.pulse.ramp) {
    case PulseWaveform::Ramp::step_off:
      p["ramp"] = "step_off";
      break;
    case PulseWaveform::Ramp::linear:
      p["ramp"] = "linear";
      p["ramp_time_s"] = s.pulse.ramp_time;
      break;
    case PulseWaveform::Ramp::table: {
      p["ramp"] = "table";
      json tab = json::array();
      for (const auto& [t, i] : s.pulse.table) tab.push_back({t, i});
      p["table"] = tab;
      break;
    }
  }
  j["pulse"] = p;
  j["loops"] = {{"transmitter", loop_json(s.transmitter)}, {"receiver", loop_json(s.receiver)}};
  j["model"] = {{"max_l", s.model.max_l},
                {"max_n", s.model.max_n},
                {"regime_threshold", s.model.regime_threshold},
                {"tolerance", s.model.tolerance},
                {"early_fraction", s.model.early_fraction},
                {"collapse_transient", s.model.collapse_transient}};
  if (c.gates) {
    j["gates"] = {{"t_min_s", c.gates->t_min}, {"t_max_s", c.gates->t_max}, {"count", c.gates->count}};
  }
  return j;
}

json parse_json_text(std::string_view text, const std::string& what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(what, std::string("invalid JSON: ") + e.what());
  }
}

Config config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected an object");
  Config c;
  Scenario& s = c.scenario;
  const json& t = member(j, "", "target");
  s.target.radius = number(member(t, "target", "radius_m"), "target.radius_m");
  if (!(s.target.radius > 0.0)) throw ConfigError("target.radius_m", "must be > 0");
  s.target.material = parse_material(t, "target", true);
  if (j.contains("background")) s.environment.background = parse_material(j.at("background"), "background", false);
  s.environment.sensor_standoff = number_or(j, "", "standoff_m", 1.0);
  if (!(s.environment.sensor_standoff > 0.0)) throw ConfigError("standoff_m", "must be > 0");
  s.pulse = parse_pulse(member(j, "", "pulse"), "pulse");
  const json& loops = member(j, "", "loops");
  s.transmitter = parse_loop(member(loops, "loops", "transmitter"), "loops.transmitter");
  s.receiver = parse_loop(member(loops, "loops", "receiver"), "loops.receiver");
  for (const auto& [name, loop] : {std::pair{"loops.transmitter", &s.transmitter}, {"loops.receiver", &s.receiver}}) {
    if (!(loop->min_distance_to_origin() > s.target.radius)) throw ConfigError(name, "loop intersects the target");
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    if (!m.is_object()) throw ConfigError("model", "expected an object");
    s.model.max_l = integer_or(m, "model", "max_l", s.model.max_l);
    if (s.model.max_l < 1 || s.model.max_l > kMaxHarmonicDegree) {
      throw ConfigError("model.max_l", "must lie in [1, " + std::to_string(kMaxHarmonicDegree) + "]");
    }
    s.model.max_n = integer_or(m, "model", "max_n", s.model.max_n);
    if (s.model.max_n < 1) throw ConfigError("model.max_n", "must be >= 1");
    s.model.regime_threshold = number_or(m, "model", "regime_threshold", s.model.regime_threshold);
    if (!(s.model.regime_threshold > 0.0 && s.model.regime_threshold < 1.0)) {
      throw ConfigError("model.regime_threshold", "must lie in (0, 1)");
    }
    s.model.tolerance = number_or(m, "model", "tolerance", s.model.tolerance);
    if (!(s.model.tolerance > 0.0 && s.model.tolerance < 1.0)) throw ConfigError("model.tolerance", "must lie in (0, 1)");
    s.model.early_fraction = number_or(m, "model", "early_fraction", s.model.early_fraction);
    if (!(s.model.early_fraction > 0.0 && s.model.early_fraction < 1.0)) {
      throw ConfigError("model.early_fraction", "must lie in (0, 1)");
    }
    s.model.collapse_transient = bool_or(m, "model", "collapse_transient", false);
  }
  if (j.contains("gates")) {
    const json& g = j.at("gates");
    GateSpec gs;
    gs.t_min = number(member(g, "gates", "t_min_s"), "gates.t_min_s");
    gs.t_max = number(member(g, "gates", "t_max_s"), "gates.t_max_s");
    gs.count = integer_or(g, "gates", "count", 0);
    if (!(gs.t_min > 0.0)) throw ConfigError("gates.t_min_s", "must be > 0");
    if (!(gs.t_max > gs.t_min)) throw ConfigError("gates.t_max_s", "must exceed t_min_s");
    if (gs.count < 2) throw ConfigError("gates.count", "must be >= 2");
    c.gates = gs;
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config", e.what());
  }
  return c;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

double parse_double(std::string_view field, bool& ok) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  ok = res.ec == std::errc() && res.ptr == field.data() + field.size() && !field.empty();
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace

std::vector<double> GateSpec::gates() const { return log_gates(t_min, t_max, count); }

Config parse_config(std::string_view json_text) { return config_from_json(parse_json_text(json_text, "config")); }

Config load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError("config", e.what());
  }
  return parse_config(text);
}

std::string serialize_config(const Config& config) { return dump(config_json(config)); }

std::string config_hash(const Config& config) { return sha256_hex(serialize_config(config)); }

GateSpec parse_gate_spec(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw DataError("--gates expects tmin,tmax,count");
  bool ok0 = false, ok1 = false, ok2 = false;
  GateSpec g;
  g.t_min = parse_double(parts[0], ok0);
  g.t_max = parse_double(parts[1], ok1);
  const double count = parse_double(parts[2], ok2);
  if (!ok0 || !ok1 || !ok2 || count != std::floor(count)) throw DataError("--gates expects tmin,tmax,count");
  g.count = static_cast<int>(count);
  if (!(g.t_min > 0.0) || !(g.t_max > g.t_min) || g.count < 2) {
    throw DataError("--gates requires 0 < tmin < tmax and count >= 2");
  }
  return g;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_csv_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string timeseries_csv(const TimeSeries& ts, const std::vector<std::string>* regime) {
  ts.validate();
  if (regime && regime->size() != ts.size()) throw std::invalid_argument("timeseries_csv: regime size mismatch");
  std::string out = regime ? "t_s,value,regime,quality\n" : "t_s,value,quality\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out += format_csv_number(ts.t[i]);
    out += ',';
    out += format_csv_number(ts.value[i]);
    if (regime) {
      out += ',';
      out += (*regime)[i];
    }
    out += ',';
    out += ts.quality.empty() ? "ok" : ts.quality[i];
    out += '\n';
  }
  return out;
}

TimeSeries parse_timeseries_csv(std::string_view text, const std::string& origin) {
  TimeSeries ts;
  int t_col = -1, v_col = -1, q_col = -1;
  std::size_t ncols = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto fields = split(line, ',');
    if (!header_seen) {
      header_seen = true;
      ncols = fields.size();
      for (std::size_t c = 0; c < fields.size(); ++c) {
        const std::string name = trim(fields[c]);
        if (name == "t_s") t_col = static_cast<int>(c);
        if (name == "value") v_col = static_cast<int>(c);
        if (name == "quality") q_col = static_cast<int>(c);
      }
      if (t_col < 0 || v_col < 0) {
        throw DataError(origin + ":" + std::to_string(line_no) + ": header needs t_s and value columns");
      }
      continue;
    }
    const std::string where = origin + ":" + std::to_string(line_no);
    if (fields.size() != ncols) throw DataError(where + ": expected " + std::to_string(ncols) + " fields");
    bool ok_t = false, ok_v = false;
    const double t = parse_double(fields[t_col], ok_t);
    const double v = parse_double(fields[v_col], ok_v);
    if (!ok_t || !ok_v || !std::isfinite(t) || !std::isfinite(v)) throw DataError(where + ": malformed number");
    if (!ts.t.empty() && !(t > ts.t.back())) throw DataError(where + ": times must be strictly increasing");
    ts.t.push_back(t);
    ts.value.push_back(v);
    if (q_col >= 0) ts.quality.push_back(trim(fields[q_col]));
    if (end == text.size()) break;
  }
  if (!header_seen) throw DataError(origin + ": empty file");
  if (ts.t.empty()) throw DataError(origin + ": no data rows");
  return ts;
}

TimeSeries read_timeseries_csv(const std::filesystem::path& path) {
  return parse_timeseries_csv(read_file(path), path.filename().string());
}

std::string mode_library_json(const ModeLibrary& lib) {
  json j;
  j["format"] = "tdem-mode-library";
  j["version"] = 1;
  j["target"] = material_json(lib.target.material);
  j["target"]["radius_m"] = lib.target.radius;
  j["background_mu_r"] = lib.background_mu_r;
  j["max_l"] = lib.max_l;
  j["max_n"] = lib.max_n;
  j["mode_count"] = lib.modes.size();
  json modes = json::array();
  for (const auto& m : lib.modes) {
    // m is degenerate for the sphere: one entry per (l, n), written with m = 0
    modes.push_back({{"l", m.l()}, {"m", 0}, {"n", m.overtone}, {"x", m.x}, {"lambda_per_s", m.decay_rate}, {"norm", m.norm}});
  }
  j["modes"] = modes;
  return dump(j);
}

ModeLibrary parse_mode_library(std::string_view json_text) {
  const json j = parse_json_text(json_text, "library");
  try {
    if (j.at("format") != "tdem-mode-library") throw DataError("not a mode library file");
    ModeLibrary lib;
    lib.target.radius = j.at("target").at("radius_m").get<double>();
    lib.target.material.conductivity = j.at("target").at("conductivity_s_per_m").get<double>();
    lib.target.material.relative_permeability = j.at("target").at("mu_r").get<double>();
    lib.background_mu_r = j.at("background_mu_r").get<double>();
    lib.max_l = j.at("max_l").get<int>();
    lib.max_n = j.at("max_n").get<int>();
    for (const auto& m : j.at("modes")) {
      Mode mode;
      mode.idx = {m.at("l").get<int>(), 0};
      mode.overtone = m.at("n").get<int>();
      mode.x = m.at("x").get<double>();
      mode.decay_rate = m.at("lambda_per_s").get<double>();
      mode.norm = m.at("norm").get<double>();
      mode.mu_ratio = lib.mu_ratio();
      lib.modes.push_back(mode);
    }
    lib.target.validate();
    return lib;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed mode library: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed mode library: ") + e.what());
  }
}

std::vector<LibraryEntry> load_library(const std::filesystem::path& path) {
  const json j = parse_json_text(read_file(path), "library");
  if (!j.is_object() || !j.contains("entries") || !j.at("entries").is_array()) {
    throw ConfigError("entries", "library file needs an entries array");
  }
  std::vector<LibraryEntry> out;
  const auto& entries = j.at("entries");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string epath = "entries[" + std::to_string(i) + "]";
    const json& e = entries[i];
    if (!e.is_object() || !e.contains("name") || !e.at("name").is_string()) throw ConfigError(epath + ".name", "missing");
    LibraryEntry le;
    le.name = e.at("name").get<std::string>();
    try {
      if (e.contains("config")) {
        le.scenario = config_from_json(e.at("config")).scenario;
      } else if (e.contains("config_path")) {
        std::filesystem::path p = e.at("config_path").get<std::string>();
        if (p.is_relative()) p = path.parent_path() / p;
        le.scenario = load_config(p).scenario;
      } else {
        throw ConfigError(epath, "needs config or config_path");
      }
    } catch (const ConfigError& err) {
      if (err.path().rfind("entries", 0) == 0) throw;
      throw ConfigError(epath + ".config." + err.path(), err.what());
    }
    out.push_back(std::move(le));
  }
  if (out.empty()) throw ConfigError("entries", "library is empty");
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest_json(const RunManifest& m) {
  json j;
  j["tool"] = "tdem";
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  json in = json::object(), out = json::object();
  for (const auto& [k, v] : m.inputs) in[k] = v;
  for (const auto& [k, v] : m.outputs) out[k] = v;
  j["inputs"] = in;
  j["outputs"] = out;
  j["started_utc"] = m.started_utc;
  j["finished_utc"] = m.finished_utc;
  return dump(j);
}

std::string early_report_json(const EarlyReport& r) {
  json j;
  j["config_hash"] = r.config_hash;
  j["markers"] = {{"t0_s", r.markers.t0},         {"tau_r_s", r.markers.tau_r}, {"tau_tr_s", r.markers.tau_tr},
                  {"tau_c_s", r.markers.tau_c},   {"tau_b_s", r.markers.tau_b}, {"t_tr_s", r.markers.t_tr()}};
  json checks = json::array();
  for (const auto& c : r.regime.checks) checks.push_back({{"name", c.name}, {"ratio", c.ratio}, {"pass", c.pass}});
  j["regime"] = {{"threshold", r.regime.threshold}, {"pass", r.regime.pass()}, {"checks", checks}};
  j["window_s"] = {r.window_lo, r.window_hi};
  j["voltage_amplitude_v_sqrt_s"] = r.voltage_amplitude;
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"l", e.l},
                       {"m", e.m},
                       {"c_init", e.c_init},
                       {"c_0", e.c0},
                       {"k_a_per_m", complex_json(e.k)},
                       {"phi_prefactor_per_sqrt_s", e.phi_prefactor},
                       {"voltage_amplitude_v_sqrt_s", e.voltage_amplitude}});
  }
  j["harmonics"] = entries;
  return dump(j);
}

std::string fit_report_json(const FitResult& fit, std::uint64_t seed, const std::string& data_sha256,
                            const std::string& config_hash) {
  json j;
  j["command"] = "fit";
  j["seed"] = seed;
  j["data_sha256"] = data_sha256;
  j["config_hash"] = config_hash;
  j["converged"] = fit.converged;
  j["high_covariance"] = fit.high_covariance;
  j["message"] = fit.message;
  j["misfit"] = fit.misfit;
  json model;
  model["t0_s"] = fit.model.t0;
  if (fit.model.use_baseline) model["baseline_v"] = fit.model.baseline;
  if (fit.model.use_power_law) {
    model["power_amplitude_v_sqrt_s"] = fit.model.power_amplitude;
    model["exponent"] = fit.model.exponent;
  }
  json terms = json::array();
  for (std::size_t i = 0; i < fit.model.terms.size(); ++i) {
    json t = {{"amplitude_v", fit.model.terms[i].amplitude}, {"rate_per_s", fit.model.terms[i].rate}};
    if (i < fit.rate_relative_sd.size() && std::isfinite(fit.rate_relative_sd[i])) {
      t["rate_relative_sd"] = fit.rate_relative_sd[i];
    } else {
      t["rate_relative_sd"] = nullptr;
    }
    terms.push_back(t);
  }
  model["terms"] = terms;
  j["model"] = model;
  j["iterations"] = fit.iterations;
  j["starts"] = fit.starts;
  return dump(j);
}

std::string classification_report_json(const Classification& c, std::uint64_t seed, const std::string& data_sha256,
                                       const std::string& library_sha256) {
  json j;
  j["command"] = "classify";
  j["seed"] = seed;
  j["data_sha256"] = data_sha256;
  j["library_sha256"] = library_sha256;
  json ranked = json::array();
  for (const auto& r : c.ranked) {
    json e = {{"name", r.name}, {"valid", r.valid}};
    if (r.valid) {
      e["misfit"] = r.misfit;
      e["gain"] = r.gain;
    } else {
      e["message"] = r.message;
    }
    ranked.push_back(e);
  }
  j["ranked"] = ranked;
  j["margin"] = c.margin;
  if (std::isfinite(c.margin_ratio)) {
    j["margin_ratio"] = c.margin_ratio;
  } else {
    j["margin_ratio"] = nullptr;
  }
  return dump(j);
}

}  // namespace tdem
