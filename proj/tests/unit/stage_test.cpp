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
#include <functional>

#include <doctest.h>

#include "test_util.hpp"
#include "tinyforge/error.hpp"
#include "tinyforge/stage.hpp"

using namespace tinyforge;
using tinyforge::testing::TempDir;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::ConfigError;
}

}  // namespace

TEST_SUITE("stage") {
  TEST_CASE("stage names round trip") {
    for (auto s : kAllStages) {
      CHECK(parse_stage(stage_key(s)) == s);
      CHECK(parse_stage(stage_label(s)) == s);
    }
    CHECK(parse_stage("DataProcessing") == LifecycleStage::DataProcessing);
    CHECK(parse_stage("model_conversion") == LifecycleStage::ModelConversion);
    CHECK(parse_stage("deploy") == std::nullopt);
  }

  TEST_CASE("valid inputs pass unchanged") {
    TempDir dir;
    for (auto s : kAllStages) {
      const auto in = testing::input_for(s, dir.path());
      CHECK(validate_stage_input(s, in) == in);
    }
  }

  TEST_CASE("missing field is named") {
    TempDir dir;
    auto in = testing::dp_input(dir.path());
    in.model_purpose.reset();
    try {
      validate_stage_input(LifecycleStage::DataProcessing, in);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingField);
      CHECK(e.detail().find("model_purpose") != std::string::npos);
    }
  }

  TEST_CASE("blank text counts as missing") {
    TempDir dir;
    auto in = testing::sg_input(dir.path());
    in.board_id = "";
    CHECK(kind_of([&] { validate_stage_input(LifecycleStage::SketchGeneration, in); }) == ErrorKind::MissingField);
  }

  TEST_CASE("nonexistent locator") {
    TempDir dir;
    auto in = testing::mc_input(dir.path());
    in.model_locator = dir / "nope.keras";
    try {
      validate_stage_input(LifecycleStage::ModelConversion, in);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::PathNotFound);
      CHECK(e.detail().find("nope.keras") != std::string::npos);
    }
  }

  TEST_CASE("foreign fields and stage mismatch") {
    TempDir dir;
    auto in = testing::dp_input(dir.path());
    in.board_id = "arduino:avr:uno";
    CHECK(kind_of([&] { validate_stage_input(LifecycleStage::DataProcessing, in); }) == ErrorKind::WrongStageFields);
    const auto dp = testing::dp_input(dir.path());
    CHECK(kind_of([&] { validate_stage_input(LifecycleStage::ModelConversion, dp); }) ==
          ErrorKind::WrongStageFields);
  }

  TEST_CASE("deferred locators may be absent") {
    TempDir dir;
    const auto in = testing::mc_input(dir.path(), false);
    const InputField deferred[] = {InputField::RepresentativeDataLocator};
    CHECK_NOTHROW(validate_stage_input(LifecycleStage::ModelConversion, in, deferred));
    CHECK(kind_of([&] { validate_stage_input(LifecycleStage::ModelConversion, in); }) == ErrorKind::MissingField);
  }

  TEST_CASE("every stage field is named and parseable") {
    for (auto s : kAllStages) {
      for (auto f : stage_fields(s)) CHECK(parse_field(field_name(f)) == f);
    }
    CHECK(parse_quantization_target("INT8") == QuantizationTarget::Int8);
    CHECK(parse_quantization_target("float16") == std::nullopt);
  }
}
