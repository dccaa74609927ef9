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
#include <mutex>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "tinyforge/executor.hpp"
#include "tinyforge/llm.hpp"
#include "tinyforge/trace.hpp"

namespace tinyforge::testing {

/// Keeps events in memory.
class MemorySink final : public TraceSink {
 public:
  void append_event(const TraceEvent& event) override {
    std::lock_guard lock(mutex_);
    events.push_back(event);
  }
  std::vector<TraceEvent> events;

 private:
  std::mutex mutex_;
};

/// Interprets the generated code as a command: "ok" succeeds and leaves an
/// artifact, "fail: <msg>" fails with <msg>, "hang" times out.
class FakeExecutor final : public Executor {
 public:
  StageExecution execute(LifecycleStage, const CodeArtifact& code, const std::filesystem::path& attempt_dir,
                         const StageInput& input, Millis) override {
    {
      std::lock_guard lock(mutex_);
      inputs.push_back(input);
    }
    StageExecution r;
    std::string text = code.code;
    while (!text.empty() && (text.back() == '\n' || text.back() == ' ')) text.pop_back();
    if (text == "ok") {
      write_file(attempt_dir / "artifacts" / "out.bin", "artifact");
      r.outcome.exit_status = 0;
      r.outcome.succeeded = true;
      r.accepted = true;
      r.artifact = attempt_dir / "artifacts" / "out.bin";
    } else if (text == "hang") {
      r.error = ErrorExcerpt{"execution exceeded 1 s timeout", ExcerptOrigin::Timeout};
    } else {
      r.outcome.exit_status = 1;
      r.outcome.stderr_text = text.rfind("fail: ", 0) == 0 ? text.substr(6) : text;
      r.error = ErrorExcerpt{r.outcome.stderr_text, ExcerptOrigin::Stderr};
    }
    return r;
  }

  std::vector<StageInput> inputs;

 private:
  std::mutex mutex_;
};

/// Scripted provider from plain contents, each with fixed usage and latency.
inline ScriptedProvider scripted(const std::vector<std::string>& contents, TokenUsage usage = {100, 20},
                                 Millis latency = Millis{1500}) {
  std::vector<FixtureEntry> entries;
  for (const auto& c : contents) entries.push_back({c, usage.prompt_tokens, usage.completion_tokens, latency});
  return ScriptedProvider(std::move(entries));
}

}  // namespace tinyforge::testing
