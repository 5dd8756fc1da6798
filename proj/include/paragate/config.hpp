// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "paragate/device.hpp"

namespace paragate {

using Json = nlohmann::ordered_json;

// Config files carry ordinary (non-angular) frequencies and human units as
// suffixed fields; values are stored exactly as written and converted to
// internal units (rad/s, seconds) only when a DeviceParams / DriveConfig is
// materialized.  That keeps parse -> serialize -> parse an identity.

struct QubitSpec {
  double freq_GHz = 0.0;
  double anharm_MHz = 0.0;
  double qb_bus_coupling_MHz = 0.0;
  double T1_us = 0.0;
  double T2echo_us = 0.0;
  double zz_kHz = 0.0;  // cross-Kerr to the common qubit; ignored for qubit 0
};

struct DeviceSpec {
  std::vector<QubitSpec> qubits;  // index 0 = flux-tunable common qubit
  double bus_freq_GHz = 0.0;
  int truncation = 3;
  std::optional<double> flux_noise_uPhi0;       // sqrt(A_Phi), micro-Phi0
  double flux_slope_GHz_per_Phi0 = 0.0;         // |d f01 / d Phi| at the bias
  double flux_f_low_Hz = 1e-4;

  DeviceParams to_device() const;
};

struct ToneSpec {
  int target = 0;
  double amplitude_MHz = 0.0;
  double freq_MHz = 0.0;
  double phase_rad = 0.0;
};

struct DriveSpec {
  std::vector<ToneSpec> tones;
  double duration_ns = 0.0;
  double ramp_ns = 2.0;

  DriveConfig to_drive() const;
};

// One batch scenario: which command to run, the device and drive it acts
// on, and the command-specific run section (validated by the command).
struct ScenarioConfig {
  std::string command;
  std::optional<DeviceSpec> device;
  std::optional<DriveSpec> drive;
  Json run = Json::object();
  // Output-file stem; set from the file name by load_config, overridable
  // with a run-section "prefix".
  std::string name = "scenario";

  void validate() const;
};

// Strict schema ingestion: unknown keys and type mismatches are rejected
// with the JSON path to the offending field.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& config);

// The commands parse_config accepts.
const std::vector<std::string>& known_commands();

// Shared helpers for validating command run sections with the same strict,
// path-reporting behavior as the top-level schema.
namespace schema {
void require_object(const Json& v, const std::string& path);
void allow_keys(const Json& obj, const std::string& path,
                const std::vector<std::string>& keys);
bool has(const Json& obj, const char* key);
double number(const Json& obj, const std::string& path, const char* key);
double number_or(const Json& obj, const std::string& path, const char* key,
                 double fallback);
long integer(const Json& obj, const std::string& path, const char* key);
long integer_or(const Json& obj, const std::string& path, const char* key, long fallback);
bool flag_or(const Json& obj, const std::string& path, const char* key, bool fallback);
std::string text(const Json& obj, const std::string& path, const char* key);
std::string text_or(const Json& obj, const std::string& path, const char* key,
                    const std::string& fallback);
std::vector<double> number_list(const Json& obj, const std::string& path, const char* key);
std::vector<long> integer_list(const Json& obj, const std::string& path, const char* key);
}  // namespace schema

}  // namespace paragate
