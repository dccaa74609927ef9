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

#include <array>
#include <compare>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace tinyforge {

/// The automated lifecycle stages, in pipeline order.
enum class LifecycleStage : int {
  DataProcessing = 0,
  ModelConversion = 1,
  SketchGeneration = 2,
};

inline constexpr std::array<LifecycleStage, 3> kAllStages = {
    LifecycleStage::DataProcessing, LifecycleStage::ModelConversion, LifecycleStage::SketchGeneration};

/// "dp", "mc", "sg". Used for CLI flags, trace records and workspace directories.
std::string_view stage_key(LifecycleStage stage);
/// "DP", "MC", "SG". Used in reports.
std::string_view stage_label(LifecycleStage stage);
/// Accepts keys, labels, and the full enumerator names (case-insensitive).
std::optional<LifecycleStage> parse_stage(std::string_view text);

enum class QuantizationTarget { Int8 };

std::string_view to_string(QuantizationTarget target);
std::optional<QuantizationTarget> parse_quantization_target(std::string_view text);

/// Named fields of StageInput. The names double as prompt placeholder slots.
enum class InputField {
  DatasetLocator,
  DatasetDescription,
  ModelPurpose,
  ModelLocator,
  DatasetOverview,
  QuantizationTarget,
  RepresentativeDataLocator,
  ConvertedModelLocator,
  BoardId,
  ApplicationDescription,
  PeripheralDescription,
};

std::string_view field_name(InputField field);
std::optional<InputField> parse_field(std::string_view name);
/// Fields a stage requires, in declaration order.
std::span<const InputField> stage_fields(LifecycleStage stage);
bool is_locator(InputField field);

struct StageInput {
  LifecycleStage stage = LifecycleStage::DataProcessing;

  // data processing
  std::optional<std::filesystem::path> dataset_locator;
  std::optional<std::string> dataset_description;
  std::optional<std::string> model_purpose;

  // model conversion
  std::optional<std::filesystem::path> model_locator;
  std::optional<std::string> dataset_overview;
  std::optional<tinyforge::QuantizationTarget> quantization_target;
  std::optional<std::filesystem::path> representative_data_locator;

  // sketch generation
  std::optional<std::filesystem::path> converted_model_locator;
  std::optional<std::string> board_id;
  std::optional<std::string> application_description;
  std::optional<std::string> peripheral_description;

  bool has(InputField field) const;
  /// Text form of a populated field; nullopt when unset.
  std::optional<std::string> value(InputField field) const;

  bool operator==(const StageInput&) const = default;
};

/// Checks that `raw` claims `stage`, carries every field that stage needs and
/// nothing else, and that every locator exists. Returns the input unchanged.
///
/// Fields listed in `deferred` may be absent; the pipeline uses this for
/// locators that an earlier stage will fill in.
StageInput validate_stage_input(LifecycleStage stage, const StageInput& raw,
                                std::span<const InputField> deferred = {});

}  // namespace tinyforge
