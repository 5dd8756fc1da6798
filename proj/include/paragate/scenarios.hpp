// paragate — pulse-level simulation of parametrically driven transmon rings
// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paragate/config.hpp"

namespace paragate {

struct RunOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";
};

struct RunOutput {
  std::string summary_text;  // one structured text record (also written to disk)
  Json summary_json;         // the same fields, machine-readable
  std::vector<std::string> files_written;
};

// Execute one scenario: dispatches on config.command, validates the
// command's run section (unknown keys rejected with their path), writes CSV
// arrays plus one text record under options.out_dir, and returns the record.
// Outputs are a pure function of (config, seed): no timestamps, no
// environment dependence, thread-count independent.
RunOutput run_scenario(const ScenarioConfig& config, const RunOptions& options);

}  // namespace paragate
