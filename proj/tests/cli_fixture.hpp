// Copyright 2026 The TinyForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "tinyforge/cli.hpp"

namespace tinyforge::testing {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// Writes inputs and a config for the stochastic provider with the mock
/// toolchain; returns the config path. `extra` is appended to the provider block.
inline std::filesystem::path write_stochastic_config(const std::filesystem::path& dir, std::uint64_t seed,
                                                     const std::string& probabilities,
                                                     const std::string& extra = "") {
  write_file(dir / "data.csv", "label,x\n0,1.0\n");
  write_file(dir / "model.keras", "weights");
  write_file(dir / "model.tflite", "TFL3");
  const auto path = dir / "tinyforge.yaml";
  write_file(path, "provider:\n"
                   "  kind: stochastic\n"
                   "  seed: " + std::to_string(seed) + "\n"
                   "  success_probability: " + probabilities + "\n"
                   "  latency_ms: [3000, 20000]\n" + extra +
                   "retry: {max_attempts: 5, timeout_s: 30}\n"
                   "workspace: runs\n"
                   "trace: traces/events.log\n"
                   "stages:\n"
                   "  dp: {dataset_locator: data.csv, dataset_description: d, model_purpose: p}\n"
                   "  mc: {model_locator: model.keras, dataset_overview: o, quantization_target: int8,\n"
                   "       representative_data_locator: data.csv}\n"
                   "  sg: {converted_model_locator: model.tflite, board_id: 'arduino:mbed_nano:nano33ble',\n"
                   "       application_description: a, peripheral_description: p}\n");
  return path;
}

}  // namespace tinyforge::testing
