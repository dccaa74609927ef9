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
#include <doctest.h>

#include <cstdlib>

#include "test_util.hpp"
#include "tinyforge/config.hpp"
#include "tinyforge/error.hpp"

using namespace tinyforge;
using tinyforge::testing::TempDir;
using tinyforge::testing::write_file;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::MissingField;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("empty config gives defaults") {
    const auto cfg = parse_config("", "/base");
    CHECK(cfg.provider.kind == ProviderKind::Scripted);
    CHECK(cfg.retry.max_attempts == 5);
    CHECK(cfg.retry.per_execution_timeout == Millis{300000});
    CHECK(cfg.workspace == "/base/runs");
    CHECK(cfg.trace == "/base/traces/events.log");
    CHECK(cfg.provider.request.model_name == "gpt-4o-2024-08-06");
    CHECK_FALSE(cfg.uses_simulated_clock());
  }

  TEST_CASE("full config") {
    TempDir dir;
    write_file(dir / "fx" / "dp.json", "[]");
    const auto cfg = parse_config(R"(
provider:
  kind: stochastic
  seed: 12
  success_probability: {dp: 0.9, sg: 0.367}
  latency_ms: [100, 200]
  fixtures: {dp: fx/dp.json}
  failure_content: {sg: "// FORCE_COMPILE_ERROR: nope"}
cost: {input_price_per_token: 0.0000025, output_price_per_token: 0.00001}
retry: {max_attempts: 3, timeout_s: 1.5}
toolchain: {adapter: arduino-cli, known_boards: [arduino:avr:uno], upload: true, port: /dev/ttyACM0}
executor: {interpreter: python3.10, env_whitelist: [LANG]}
workspace: /abs/ws
stages:
  mc: {model_locator: m.keras, dataset_overview: x, quantization_target: INT8}
)",
                                  dir.path());
    CHECK(cfg.provider.kind == ProviderKind::Stochastic);
    CHECK(cfg.uses_simulated_clock());
    CHECK(cfg.provider.seed == 12);
    CHECK(cfg.provider.success_probability.at(LifecycleStage::SketchGeneration) == doctest::Approx(0.367));
    CHECK_FALSE(cfg.provider.success_probability.contains(LifecycleStage::ModelConversion));
    CHECK(cfg.provider.min_latency == Millis{100});
    CHECK(cfg.provider.fixtures.at(LifecycleStage::DataProcessing) == dir / "fx" / "dp.json");
    CHECK(cfg.provider.failure_content.at(LifecycleStage::SketchGeneration).find("FORCE") != std::string::npos);
    REQUIRE(cfg.cost);
    CHECK(cfg.cost->input_price_per_token.pico == 2'500'000);
    CHECK(cfg.retry.max_attempts == 3);
    CHECK(cfg.retry.per_execution_timeout == Millis{1500});
    CHECK(cfg.toolchain.adapter == "arduino-cli");
    CHECK(cfg.toolchain.upload);
    CHECK(cfg.executor.env_whitelist == std::vector<std::string>{"LANG"});
    CHECK(cfg.workspace == "/abs/ws");
    const auto& mc = cfg.stages[LifecycleStage::ModelConversion];
    REQUIRE(mc);
    CHECK(mc->model_locator == dir / "m.keras");
    CHECK(mc->quantization_target == QuantizationTarget::Int8);
  }

  TEST_CASE("rejections") {
    TempDir dir;
    const auto base = dir.path();
    auto parse = [&](const std::string& text) { parse_config(text, base); };
    CHECK(kind_of([&] { parse("provider: {kind: psychic}"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { parse("retries: 3"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { parse("retry: {max_attempts: 0}"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { parse("retry: {max_attempts: many}"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { parse("provider: {success_probability: 1.5}"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { parse("provider: {fixtures: {dp: missing.json}}"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { parse("templates: {qa: x.txt}"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { parse("stages: {dp: {board_idd: x}}"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { parse("stages: {mc: {quantization_target: float16}}"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { parse("toolchain: {upload: true}"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { parse("cost: {input_price_per_token: 1}"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([&] { parse("provider: [1, 2"); }) == ErrorKind::ConfigError);
  }

  TEST_CASE("environment overrides the api key") {
    TempDir dir;
    write_file(dir / "c.yaml", "provider: {kind: live, endpoint: 'http://127.0.0.1:1/v1', api_key: from-file}\n");
    ::unsetenv(std::string(kApiKeyEnv).c_str());
    CHECK(load_config(dir / "c.yaml").provider.api_key == "from-file");
    ::setenv(std::string(kApiKeyEnv).c_str(), "from-env", 1);
    const auto cfg = load_config(dir / "c.yaml");
    ::unsetenv(std::string(kApiKeyEnv).c_str());
    CHECK(cfg.provider.api_key == "from-env");
    CHECK(cfg.source == dir / "c.yaml");
    CHECK(kind_of([&] { load_config(dir / "absent.yaml"); }) == ErrorKind::ConfigError);
  }
}
