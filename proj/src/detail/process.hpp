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
#include <string>
#include <vector>

#include "tinyforge/clock.hpp"
#include "tinyforge/executor.hpp"

namespace tinyforge::detail {

/// PATH, HOME and TMPDIR (both pointing at `home`), plus whitelisted
/// variables copied from the parent.
std::vector<std::string> scrubbed_environment(const std::filesystem::path& home,
                                              const std::vector<std::string>& whitelist);

/// Spawns argv[0] (an absolute path) in its own process group. Kills the
/// group at the timeout. stdout/stderr are captured in full.
ExecutionOutcome run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                             const std::vector<std::string>& env, Millis timeout);

}  // namespace tinyforge::detail
