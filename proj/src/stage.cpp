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
#include "tinyforge/stage.hpp"

#include <algorithm>
#include <cctype>

#include "tinyforge/error.hpp"

namespace tinyforge {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

constexpr std::array<InputField, 3> kDpFields = {InputField::DatasetLocator, InputField::DatasetDescription,
                                                 InputField::ModelPurpose};
constexpr std::array<InputField, 4> kMcFields = {InputField::ModelLocator, InputField::DatasetOverview,
                                                 InputField::QuantizationTarget,
                                                 InputField::RepresentativeDataLocator};
constexpr std::array<InputField, 4> kSgFields = {InputField::ConvertedModelLocator, InputField::BoardId,
                                                 InputField::ApplicationDescription,
                                                 InputField::PeripheralDescription};
constexpr std::array<InputField, 11> kAllFields = {
    InputField::DatasetLocator,        InputField::DatasetDescription,
    InputField::ModelPurpose,          InputField::ModelLocator,
    InputField::DatasetOverview,       InputField::QuantizationTarget,
    InputField::RepresentativeDataLocator, InputField::ConvertedModelLocator,
    InputField::BoardId,               InputField::ApplicationDescription,
    InputField::PeripheralDescription};

const std::optional<std::filesystem::path>* locator_slot(const StageInput& in, InputField f) {
  switch (f) {
    case InputField::DatasetLocator: return &in.dataset_locator;
    case InputField::ModelLocator: return &in.model_locator;
    case InputField::RepresentativeDataLocator: return &in.representative_data_locator;
    case InputField::ConvertedModelLocator: return &in.converted_model_locator;
    default: return nullptr;
  }
}

const std::optional<std::string>* text_slot(const StageInput& in, InputField f) {
  switch (f) {
    case InputField::DatasetDescription: return &in.dataset_description;
    case InputField::ModelPurpose: return &in.model_purpose;
    case InputField::DatasetOverview: return &in.dataset_overview;
    case InputField::BoardId: return &in.board_id;
    case InputField::ApplicationDescription: return &in.application_description;
    case InputField::PeripheralDescription: return &in.peripheral_description;
    default: return nullptr;
  }
}

}  // namespace

std::string_view stage_key(LifecycleStage stage) {
  switch (stage) {
    case LifecycleStage::DataProcessing: return "dp";
    case LifecycleStage::ModelConversion: return "mc";
    case LifecycleStage::SketchGeneration: return "sg";
  }
  return "?";
}

std::string_view stage_label(LifecycleStage stage) {
  switch (stage) {
    case LifecycleStage::DataProcessing: return "DP";
    case LifecycleStage::ModelConversion: return "MC";
    case LifecycleStage::SketchGeneration: return "SG";
  }
  return "?";
}

std::optional<LifecycleStage> parse_stage(std::string_view text) {
  const std::string t = lower(text);
  if (t == "dp" || t == "dataprocessing" || t == "data_processing") return LifecycleStage::DataProcessing;
  if (t == "mc" || t == "modelconversion" || t == "model_conversion") return LifecycleStage::ModelConversion;
  if (t == "sg" || t == "sketchgeneration" || t == "sketch_generation") return LifecycleStage::SketchGeneration;
  return std::nullopt;
}

std::string_view to_string(QuantizationTarget target) {
  switch (target) {
    case QuantizationTarget::Int8: return "int8";
  }
  return "?";
}

std::optional<QuantizationTarget> parse_quantization_target(std::string_view text) {
  if (lower(text) == "int8") return QuantizationTarget::Int8;
  return std::nullopt;
}

std::string_view field_name(InputField field) {
  switch (field) {
    case InputField::DatasetLocator: return "dataset_locator";
    case InputField::DatasetDescription: return "dataset_description";
    case InputField::ModelPurpose: return "model_purpose";
    case InputField::ModelLocator: return "model_locator";
    case InputField::DatasetOverview: return "dataset_overview";
    case InputField::QuantizationTarget: return "quantization_target";
    case InputField::RepresentativeDataLocator: return "representative_data_locator";
    case InputField::ConvertedModelLocator: return "converted_model_locator";
    case InputField::BoardId: return "board_id";
    case InputField::ApplicationDescription: return "application_description";
    case InputField::PeripheralDescription: return "peripheral_description";
  }
  return "?";
}

std::optional<InputField> parse_field(std::string_view name) {
  for (InputField f : kAllFields) {
    if (field_name(f) == name) return f;
  }
  return std::nullopt;
}

std::span<const InputField> stage_fields(LifecycleStage stage) {
  switch (stage) {
    case LifecycleStage::DataProcessing: return kDpFields;
    case LifecycleStage::ModelConversion: return kMcFields;
    case LifecycleStage::SketchGeneration: return kSgFields;
  }
  return {};
}

bool is_locator(InputField field) {
  return field == InputField::DatasetLocator || field == InputField::ModelLocator ||
         field == InputField::RepresentativeDataLocator || field == InputField::ConvertedModelLocator;
}

bool StageInput::has(InputField field) const {
  if (field == InputField::QuantizationTarget) return quantization_target.has_value();
  if (const auto* p = locator_slot(*this, field)) return p->has_value();
  if (const auto* t = text_slot(*this, field)) return t->has_value();
  return false;
}

std::optional<std::string> StageInput::value(InputField field) const {
  if (field == InputField::QuantizationTarget) {
    if (!quantization_target) return std::nullopt;
    return std::string(to_string(*quantization_target));
  }
  if (const auto* p = locator_slot(*this, field)) {
    if (!p->has_value()) return std::nullopt;
    return (*p)->string();
  }
  if (const auto* t = text_slot(*this, field)) return *t;
  return std::nullopt;
}

StageInput validate_stage_input(LifecycleStage stage, const StageInput& raw, std::span<const InputField> deferred) {
  if (raw.stage != stage) {
    throw Error(ErrorKind::WrongStageFields, "input claims stage " + std::string(stage_key(raw.stage)) +
                                                 " but stage " + std::string(stage_key(stage)) + " was requested");
  }
  const auto required = stage_fields(stage);
  for (InputField f : kAllFields) {
    const bool belongs = std::find(required.begin(), required.end(), f) != required.end();
    if (!belongs && raw.has(f)) {
      throw Error(ErrorKind::WrongStageFields, std::string(field_name(f)) + " is not a field of stage " +
                                                   std::string(stage_key(stage)));
    }
  }
  for (InputField f : required) {
    const bool may_defer = std::find(deferred.begin(), deferred.end(), f) != deferred.end();
    if (!raw.has(f)) {
      if (may_defer) continue;
      throw Error(ErrorKind::MissingField, std::string(field_name(f)));
    }
    if (f != InputField::QuantizationTarget && !is_locator(f) && raw.value(f)->empty()) {
      throw Error(ErrorKind::MissingField, std::string(field_name(f)) + " is empty");
    }
    if (is_locator(f)) {
      const auto& path = **locator_slot(raw, f);
      std::error_code ec;
      if (path.empty() || !std::filesystem::exists(path, ec)) {
        throw Error(ErrorKind::PathNotFound, std::string(field_name(f)) + " = " + path.string());
      }
    }
  }
  return raw;
}

}  // namespace tinyforge
