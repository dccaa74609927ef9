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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tinyforge/llm.hpp"
#include "tinyforge/pipeline.hpp"
#include "tinyforge/stage.hpp"

namespace tinyforge {

inline constexpr std::string_view kDefaultConfigName = "tinyforge.yaml";
inline constexpr std::string_view kApiKeyEnv = "TINYFORGE_API_KEY";

enum class ProviderKind { Live, Scripted, Stochastic };

std::string_view to_string(ProviderKind kind);

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Scripted;
  RequestOptions request;

  // live
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key;
  Millis request_timeout{120000};
  int transport_tries = 3;
  Millis initial_backoff{1000};

  // scripted: one fixture file per stage
  std::map<LifecycleStage, std::filesystem::path> fixtures;

  // stochastic
  std::uint64_t seed = 0;
  std::map<LifecycleStage, double> success_probability;
  Millis min_latency{500};
  Millis max_latency{4000};
  std::map<LifecycleStage, std::string> success_content;
  std::map<LifecycleStage, std::string> failure_content;

  /// Run clocks advance only by provider-reported latency. Defaults to on for
  /// the stochastic provider, which makes its timings reproducible.
  std::optional<bool> simulated_clock;
};

struct ToolchainConfig {
  std::string adapter = "mock";  // mock | arduino-cli
  std::string binary = "arduino-cli";
  std::vector<std::string> known_boards;
  bool upload = false;
  std::string port;
};

struct ExecutorConfig {
  std::string interpreter = "python3";
  std::string script_name = "main.py";
  std::vector<std::string> env_whitelist;
};

struct Config {
  std::filesystem::path source;  // empty when built in code
  ProviderConfig provider;
  std::optional<CostModel> cost;
  RetryPolicy retry;
  std::map<LifecycleStage, std::filesystem::path> templates;
  ToolchainConfig toolchain;
  ExecutorConfig executor;
  std::filesystem::path workspace = "runs";
  std::filesystem::path trace = std::filesystem::path(kDefaultTracePath);
  PipelineInputs stages;

  bool uses_simulated_clock() const {
    return provider.simulated_clock.value_or(provider.kind == ProviderKind::Stochastic);
  }
};

/// Parses YAML; relative paths resolve against `base_dir`. Throws ConfigError
/// for syntax errors, unknown keys, bad values, and referenced files
/// (fixtures, templates) that do not exist.
Config parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir);

/// parse_config on a file, then TINYFORGE_API_KEY overrides provider.api_key.
Config load_config(const std::filesystem::path& path);

}  // namespace tinyforge
