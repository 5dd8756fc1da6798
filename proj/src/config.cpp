// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#include "paragate/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace paragate {

namespace schema {

void require_object(const Json& v, const std::string& path) {
  if (!v.is_object()) Error::invalid(path + ": expected an object");
}

void allow_keys(const Json& obj, const std::string& path,
                const std::vector<std::string>& keys) {
  require_object(obj, path);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      Error::invalid(path + ": unknown key \"" + it.key() + "\"");
  }
}

bool has(const Json& obj, const char* key) { return obj.contains(key); }

namespace {
const Json& field(const Json& obj, const std::string& path, const char* key) {
  require_object(obj, path);
  auto it = obj.find(key);
  if (it == obj.end()) Error::invalid(path + "." + key + ": missing required field");
  return *it;
}
}  // namespace

double number(const Json& obj, const std::string& path, const char* key) {
  const Json& v = field(obj, path, key);
  if (!v.is_number()) Error::invalid(path + "." + key + ": expected a number");
  return v.get<double>();
}

double number_or(const Json& obj, const std::string& path, const char* key,
                 double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return number(obj, path, key);
}

long integer(const Json& obj, const std::string& path, const char* key) {
  const Json& v = field(obj, path, key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    Error::invalid(path + "." + key + ": expected an integer");
  return v.get<long>();
}

long integer_or(const Json& obj, const std::string& path, const char* key, long fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return integer(obj, path, key);
}

bool flag_or(const Json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const Json& v = field(obj, path, key);
  if (!v.is_boolean()) Error::invalid(path + "." + key + ": expected true or false");
  return v.get<bool>();
}

std::string text(const Json& obj, const std::string& path, const char* key) {
  const Json& v = field(obj, path, key);
  if (!v.is_string()) Error::invalid(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::string text_or(const Json& obj, const std::string& path, const char* key,
                    const std::string& fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return text(obj, path, key);
}

std::vector<double> number_list(const Json& obj, const std::string& path, const char* key) {
  const Json& v = field(obj, path, key);
  if (!v.is_array()) Error::invalid(path + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      Error::invalid(path + "." + key + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<long> integer_list(const Json& obj, const std::string& path, const char* key) {
  const Json& v = field(obj, path, key);
  if (!v.is_array()) Error::invalid(path + "." + key + ": expected an array of integers");
  std::vector<long> out;
  out.reserve(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer() && !v[i].is_number_unsigned())
      Error::invalid(path + "." + key + "[" + std::to_string(i) + "]: expected an integer");
    out.push_back(v[i].get<long>());
  }
  return out;
}

}  // namespace schema

namespace {

using schema::allow_keys;
using schema::flag_or;
using schema::integer_or;
using schema::number;
using schema::number_or;
using schema::require_object;
using schema::text;

QubitSpec parse_qubit(const Json& j, const std::string& path) {
  allow_keys(j, path,
             {"freq_GHz", "anharm_MHz", "qb_bus_coupling_MHz", "T1_us", "T2echo_us",
              "zz_kHz"});
  QubitSpec q;
  q.freq_GHz = number(j, path, "freq_GHz");
  q.anharm_MHz = number(j, path, "anharm_MHz");
  q.qb_bus_coupling_MHz = number(j, path, "qb_bus_coupling_MHz");
  q.T1_us = number(j, path, "T1_us");
  q.T2echo_us = number(j, path, "T2echo_us");
  q.zz_kHz = number_or(j, path, "zz_kHz", 0.0);
  return q;
}

DeviceSpec parse_device(const Json& j, const std::string& path) {
  allow_keys(j, path,
             {"qubits", "bus", "truncation", "flux_noise_uPhi0", "flux_slope_GHz_per_Phi0",
              "flux_f_low_Hz"});
  DeviceSpec d;
  if (!j.contains("qubits") || !j["qubits"].is_array() || j["qubits"].size() < 2)
    Error::invalid(path + ".qubits: expected an array of at least two qubits");
  for (size_t i = 0; i < j["qubits"].size(); ++i)
    d.qubits.push_back(parse_qubit(j["qubits"][i], path + ".qubits[" + std::to_string(i) + "]"));
  if (!j.contains("bus")) Error::invalid(path + ".bus: missing required field");
  allow_keys(j["bus"], path + ".bus", {"freq_GHz"});
  d.bus_freq_GHz = number(j["bus"], path + ".bus", "freq_GHz");
  d.truncation = static_cast<int>(integer_or(j, path, "truncation", 3));
  if (d.truncation < 2 || d.truncation > 6)
    Error::invalid(path + ".truncation: must be between 2 and 6");
  if (j.contains("flux_noise_uPhi0")) {
    d.flux_noise_uPhi0 = number(j, path, "flux_noise_uPhi0");
    if (*d.flux_noise_uPhi0 < 0.0)
      Error::invalid(path + ".flux_noise_uPhi0: must be non-negative");
    if (!j.contains("flux_slope_GHz_per_Phi0"))
      Error::invalid(path +
                     ".flux_slope_GHz_per_Phi0: required when flux_noise_uPhi0 is set");
    d.flux_slope_GHz_per_Phi0 = number(j, path, "flux_slope_GHz_per_Phi0");
    d.flux_f_low_Hz = number_or(j, path, "flux_f_low_Hz", 1e-4);
    if (d.flux_f_low_Hz <= 0.0) Error::invalid(path + ".flux_f_low_Hz: must be positive");
  } else if (j.contains("flux_slope_GHz_per_Phi0") || j.contains("flux_f_low_Hz")) {
    Error::invalid(path + ": flux fields require flux_noise_uPhi0");
  }
  return d;
}

DriveSpec parse_drive(const Json& j, const std::string& path) {
  allow_keys(j, path, {"tones", "duration_ns", "ramp_ns"});
  DriveSpec d;
  if (!j.contains("tones") || !j["tones"].is_array() || j["tones"].empty())
    Error::invalid(path + ".tones: expected a non-empty array");
  for (size_t i = 0; i < j["tones"].size(); ++i) {
    const std::string tpath = path + ".tones[" + std::to_string(i) + "]";
    const Json& t = j["tones"][i];
    allow_keys(t, tpath, {"target", "amplitude_MHz", "freq_MHz", "phase_rad"});
    ToneSpec tone;
    tone.target = static_cast<int>(schema::integer(t, tpath, "target"));
    if (tone.target < 1) Error::invalid(tpath + ".target: must be a computational qubit (>= 1)");
    tone.amplitude_MHz = number(t, tpath, "amplitude_MHz");
    tone.freq_MHz = number(t, tpath, "freq_MHz");
    tone.phase_rad = number_or(t, tpath, "phase_rad", 0.0);
    d.tones.push_back(tone);
  }
  d.duration_ns = number(j, path, "duration_ns");
  if (d.duration_ns <= 0.0) Error::invalid(path + ".duration_ns: must be positive");
  d.ramp_ns = number_or(j, path, "ramp_ns", 2.0);
  if (d.ramp_ns < 0.0) Error::invalid(path + ".ramp_ns: must be non-negative");
  return d;
}

Json dump_qubit(const QubitSpec& q) {
  Json j = Json::object();
  j["freq_GHz"] = q.freq_GHz;
  j["anharm_MHz"] = q.anharm_MHz;
  j["qb_bus_coupling_MHz"] = q.qb_bus_coupling_MHz;
  j["T1_us"] = q.T1_us;
  j["T2echo_us"] = q.T2echo_us;
  j["zz_kHz"] = q.zz_kHz;
  return j;
}

}  // namespace

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands = {
      "exchange", "budget", "tomography", "xeb", "cryoscope", "predistort", "project"};
  return commands;
}

DeviceParams DeviceSpec::to_device() const {
  DeviceParams dev;
  dev.truncation = truncation;
  dev.bus_freq = bus_freq_GHz * units::GHz;
  for (const QubitSpec& q : qubits) {
    QubitParams p;
    p.omega = q.freq_GHz * units::GHz;
    p.alpha = q.anharm_MHz * units::MHz;
    p.h = q.qb_bus_coupling_MHz * units::MHz;
    p.t1 = q.T1_us * units::us;
    p.t2_echo = q.T2echo_us * units::us;
    p.zz = q.zz_kHz * units::kHz;
    dev.qubits.push_back(p);
  }
  if (!dev.qubits.empty()) dev.qubits[0].zz = 0.0;
  if (flux_noise_uPhi0) {
    FluxNoiseSpec flux;
    flux.sqrt_amp_phi0 = *flux_noise_uPhi0 * 1e-6;
    flux.slope = flux_slope_GHz_per_Phi0 * units::GHz;
    flux.f_low_hz = flux_f_low_Hz;
    dev.flux_noise = flux;
  }
  dev.validate();
  return dev;
}

DriveConfig DriveSpec::to_drive() const {
  DriveConfig drive;
  for (const ToneSpec& t : tones) {
    DriveTone tone;
    tone.target = t.target;
    tone.amplitude = t.amplitude_MHz * units::MHz;
    tone.frequency = t.freq_MHz * units::MHz;
    tone.phase = t.phase_rad;
    drive.tones.push_back(tone);
  }
  drive.duration = duration_ns * units::ns;
  drive.ramp = ramp_ns * units::ns;
  drive.validate();
  return drive;
}

void ScenarioConfig::validate() const {
  const auto& commands = known_commands();
  if (std::find(commands.begin(), commands.end(), command) == commands.end()) {
    std::string all;
    for (const auto& c : commands) all += (all.empty() ? "" : ", ") + c;
    Error::invalid("config.command: unknown command \"" + command + "\" (expected one of " +
                   all + ")");
  }
  if (device) device->to_device();  // unit sanity via DeviceParams::validate
  if (drive) {
    drive->to_drive();
    if (device) {
      for (const ToneSpec& t : drive->tones)
        if (t.target >= static_cast<int>(device->qubits.size()))
          Error::invalid("config.drive: tone target " + std::to_string(t.target) +
                         " exceeds the configured qubit count");
    }
  }
}

ScenarioConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    Error::invalid(std::string("config: JSON parse failure: ") + e.what());
  }
  allow_keys(j, "config", {"command", "device", "drive", "run"});
  ScenarioConfig c;
  c.command = text(j, "config", "command");
  if (j.contains("device")) c.device = parse_device(j["device"], "config.device");
  if (j.contains("drive")) c.drive = parse_drive(j["drive"], "config.drive");
  if (j.contains("run")) {
    require_object(j["run"], "config.run");
    c.run = j["run"];
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Error::invalid("config: cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  ScenarioConfig c = parse_config(buf.str());
  // Output stem from the file name, without directory or extension.
  std::string stem = path;
  const size_t slash = stem.find_last_of("/\\");
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  const size_t dot = stem.find_last_of('.');
  if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  if (!stem.empty()) c.name = stem;
  return c;
}

std::string serialize_config(const ScenarioConfig& config) {
  Json j = Json::object();
  j["command"] = config.command;
  if (config.device) {
    const DeviceSpec& d = *config.device;
    Json jd = Json::object();
    Json qubits = Json::array();
    for (const QubitSpec& q : d.qubits) qubits.push_back(dump_qubit(q));
    jd["qubits"] = qubits;
    jd["bus"] = Json::object({{"freq_GHz", d.bus_freq_GHz}});
    jd["truncation"] = d.truncation;
    if (d.flux_noise_uPhi0) {
      jd["flux_noise_uPhi0"] = *d.flux_noise_uPhi0;
      jd["flux_slope_GHz_per_Phi0"] = d.flux_slope_GHz_per_Phi0;
      jd["flux_f_low_Hz"] = d.flux_f_low_Hz;
    }
    j["device"] = jd;
  }
  if (config.drive) {
    const DriveSpec& d = *config.drive;
    Json jd = Json::object();
    Json tones = Json::array();
    for (const ToneSpec& t : d.tones) {
      Json jt = Json::object();
      jt["target"] = t.target;
      jt["amplitude_MHz"] = t.amplitude_MHz;
      jt["freq_MHz"] = t.freq_MHz;
      jt["phase_rad"] = t.phase_rad;
      tones.push_back(jt);
    }
    jd["tones"] = tones;
    jd["duration_ns"] = d.duration_ns;
    jd["ramp_ns"] = d.ramp_ns;
    j["drive"] = jd;
  }
  j["run"] = config.run;
  return j.dump(2) + "\n";
}

}  // namespace paragate
