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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tinyforge/clock.hpp"
#include "tinyforge/executor.hpp"
#include "tinyforge/llm.hpp"
#include "tinyforge/metrics.hpp"
#include "tinyforge/prompt.hpp"
#include "tinyforge/stage.hpp"
#include "tinyforge/trace.hpp"

namespace tinyforge {

struct RetryPolicy {
  /// Total LLM invocations per stage, the first one included.
  int max_attempts = 5;
  Millis per_execution_timeout{300000};

  /// Throws InvalidPolicy.
  void validate() const;
};

enum class AttemptOutcome { Success, ExecutionFailure, LLMFailure, NoCode, Timeout };

std::string_view to_string(AttemptOutcome outcome);
std::optional<AttemptOutcome> parse_attempt_outcome(std::string_view text);

struct Attempt {
  int index = 1;
  TokenUsage usage;
  Timestamp started_at;
  Timestamp ended_at;
  AttemptOutcome outcome = AttemptOutcome::Success;
  std::optional<std::string> error_excerpt;
  std::string prompt_hash;
};

struct StageResult {
  LifecycleStage stage = LifecycleStage::DataProcessing;
  std::vector<Attempt> attempts;
  StageOutcome outcome = StageOutcome::Failure;
  std::optional<std::filesystem::path> artifact_locator;
  /// First provider call to terminal outcome.
  Millis total_duration{0};
  TokenUsage usage;

  std::int64_t total_tokens() const { return usage.total(); }
};

/// Inputs for the three stages, indexed by stage.
struct PipelineInputs {
  std::array<std::optional<StageInput>, 3> by_stage;

  std::optional<StageInput>& operator[](LifecycleStage s) { return by_stage[static_cast<int>(s)]; }
  const std::optional<StageInput>& operator[](LifecycleStage s) const { return by_stage[static_cast<int>(s)]; }
};

struct PipelineRun {
  std::string run_id;
  std::vector<StageResult> stage_results;
  std::optional<LifecycleStage> halted_at;
};

/// Fills the next stage's locator from a successful result: DP artifact ->
/// MC representative_data_locator, MC artifact -> SG converted_model_locator.
/// Throws PreviousStageFailed, IncompatibleStagePair.
StageInput chain_artifact(const StageResult& prev, const StageInput& next_input);

/// Locators filled by chain_artifact, so absent from the user's pipeline inputs.
std::span<const InputField> chained_fields(LifecycleStage stage);

struct RequestOptions {
  std::string model_name = "gpt-4o-2024-08-06";
  double temperature = 0.0;
  std::optional<std::string> system_message;
};

/// Identity and location of one run. The run directory is
/// <workspace_root>/<run_id>.
struct RunContext {
  std::string run_id;
  std::filesystem::path workspace_root;
  Clock& clock;

  std::filesystem::path run_dir() const { return workspace_root / run_id; }
};

/// Time-ordered, collision-resistant run identifier.
std::string make_run_id();

/// SHA-256 hex digest.
std::string content_hash(std::string_view text);

using ProviderForStage = std::function<LLMProvider&(LifecycleStage)>;

/// Drives the gather -> prompt -> generate -> execute -> retry loop.
class Orchestrator {
 public:
  Orchestrator(const TemplateRegistry& templates, Executor& executor, TraceSink& tracer, RequestOptions request = {})
      : templates_(templates), executor_(executor), tracer_(tracer), request_(std::move(request)) {}

  /// Attempt-level failures never throw; they end up in the result. Throws
  /// only on infrastructure faults (workspace, trace sink, misconfigured
  /// toolchain or interpreter). Emits one attempt event per attempt, one
  /// stage_result event, and a review_requested event when retries run out.
  StageResult run_stage(const RunContext& run, const StageInput& input, const RetryPolicy& policy,
                        LLMProvider& provider) const;

  /// Runs DP, MC, SG in order, chaining artifacts and halting at the first
  /// failed stage. All three inputs are validated before the first LLM call.
  PipelineRun run_pipeline(const RunContext& run, const PipelineInputs& inputs, const RetryPolicy& policy,
                           const ProviderForStage& providers) const;

 private:
  const TemplateRegistry& templates_;
  Executor& executor_;
  TraceSink& tracer_;
  RequestOptions request_;
};

/// Projection used by metrics and the CLI.
RunSample to_sample(const std::string& run_id, const StageResult& result);

}  // namespace tinyforge
