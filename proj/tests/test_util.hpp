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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tinyforge/stage.hpp"

namespace tinyforge::testing {

/// Self-deleting scratch directory.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "tinyforge-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Valid inputs for each stage, with placeholder files created under `dir`.
inline StageInput dp_input(const std::filesystem::path& dir) {
  write_file(dir / "data.csv", "label,x\n0,1.0\n");
  StageInput in;
  in.stage = LifecycleStage::DataProcessing;
  in.dataset_locator = dir / "data.csv";
  in.dataset_description = "two columns";
  in.model_purpose = "binary classification";
  return in;
}

inline StageInput mc_input(const std::filesystem::path& dir, bool with_representative = true) {
  write_file(dir / "model.keras", "weights");
  write_file(dir / "rep.csv", "x\n1.0\n");
  StageInput in;
  in.stage = LifecycleStage::ModelConversion;
  in.model_locator = dir / "model.keras";
  in.dataset_overview = "one float feature";
  in.quantization_target = QuantizationTarget::Int8;
  if (with_representative) in.representative_data_locator = dir / "rep.csv";
  return in;
}

inline StageInput sg_input(const std::filesystem::path& dir, bool with_model = true) {
  write_file(dir / "model.tflite", "TFL3");
  StageInput in;
  in.stage = LifecycleStage::SketchGeneration;
  if (with_model) in.converted_model_locator = dir / "model.tflite";
  in.board_id = "arduino:mbed_nano:nano33ble";
  in.application_description = "blink on motion";
  in.peripheral_description = "IMU, LED";
  return in;
}

inline StageInput input_for(LifecycleStage stage, const std::filesystem::path& dir) {
  switch (stage) {
    case LifecycleStage::DataProcessing: return dp_input(dir);
    case LifecycleStage::ModelConversion: return mc_input(dir);
    case LifecycleStage::SketchGeneration: return sg_input(dir);
  }
  return {};
}

}  // namespace tinyforge::testing
