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
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tinyforge/config.hpp"
#include "tinyforge/executor.hpp"
#include "tinyforge/llm.hpp"
#include "tinyforge/prompt.hpp"

namespace tinyforge {

/// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Provider for one stage. For the stochastic kind `seed` replaces the
/// configured seed. Throws ConfigError, PathNotFound, BadResponse.
std::unique_ptr<LLMProvider> make_provider(const ProviderConfig& config, LifecycleStage stage,
                                           std::optional<std::uint64_t> seed = std::nullopt);

std::shared_ptr<ToolchainAdapter> make_toolchain(const ToolchainConfig& config);

/// Shipped templates, overridden per stage by the configured files.
void load_templates(const Config& config, TemplateRegistry& registry);

/// Seed of run `index` (0-based) in a batch.
std::uint64_t bench_seed(std::uint64_t seed, LifecycleStage stage, std::uint64_t index);

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tinyforge
