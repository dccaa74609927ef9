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
#include "tinyforge/pipeline.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <random>

#include <fmt/format.h>

#include "tinyforge/error.hpp"

namespace tinyforge {

namespace fs = std::filesystem;

namespace {

constexpr std::array<InputField, 0> kNoChained{};
constexpr std::array<InputField, 1> kMcChained{InputField::RepresentativeDataLocator};
constexpr std::array<InputField, 1> kSgChained{InputField::ConvertedModelLocator};

void write_text(const fs::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::WorkspaceError, "cannot write " + p.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorKind::WorkspaceError, "cannot create " + p.string() + ": " + ec.message());
}

bool is_provider_fault(ErrorKind kind) {
  return kind == ErrorKind::ProviderUnreachable || kind == ErrorKind::RateLimited ||
         kind == ErrorKind::BadResponse || kind == ErrorKind::FixtureExhausted || kind == ErrorKind::InvalidRequest;
}

/// Locators that point into the run directory are shown to the model relative
/// to the attempt directory, which is where generated code runs. This keeps
/// prompts identical across runs.
StageInput prompt_view(StageInput input, const fs::path& run_dir, const fs::path& attempt_dir) {
  const fs::path run_abs = fs::absolute(run_dir).lexically_normal();
  const fs::path attempt_abs = fs::absolute(attempt_dir).lexically_normal();
  auto rewrite = [&](std::optional<fs::path>& slot) {
    if (!slot) return;
    const fs::path abs = fs::absolute(*slot).lexically_normal();
    const fs::path inside = abs.lexically_relative(run_abs);
    if (inside.empty() || inside.begin()->string() == "..") return;
    slot = abs.lexically_relative(attempt_abs);
  };
  rewrite(input.dataset_locator);
  rewrite(input.model_locator);
  rewrite(input.representative_data_locator);
  rewrite(input.converted_model_locator);
  return input;
}

std::optional<std::string> run_relative(const std::optional<fs::path>& p, const fs::path& run_dir) {
  if (!p) return std::nullopt;
  const fs::path rel = fs::absolute(*p).lexically_normal().lexically_relative(fs::absolute(run_dir).lexically_normal());
  if (rel.empty() || rel.begin()->string() == "..") return p->string();
  return rel.generic_string();
}

}  // namespace

void RetryPolicy::validate() const {
  if (max_attempts < 1) throw Error(ErrorKind::InvalidPolicy, "max_attempts must be >= 1");
  if (per_execution_timeout <= Millis::zero()) throw Error(ErrorKind::InvalidPolicy, "timeout must be positive");
}

std::string_view to_string(AttemptOutcome outcome) {
  switch (outcome) {
    case AttemptOutcome::Success: return "success";
    case AttemptOutcome::ExecutionFailure: return "execution_failure";
    case AttemptOutcome::LLMFailure: return "llm_failure";
    case AttemptOutcome::NoCode: return "no_code";
    case AttemptOutcome::Timeout: return "timeout";
  }
  return "?";
}

std::optional<AttemptOutcome> parse_attempt_outcome(std::string_view text) {
  for (auto o : {AttemptOutcome::Success, AttemptOutcome::ExecutionFailure, AttemptOutcome::LLMFailure,
                 AttemptOutcome::NoCode, AttemptOutcome::Timeout}) {
    if (to_string(o) == text) return o;
  }
  return std::nullopt;
}

std::span<const InputField> chained_fields(LifecycleStage stage) {
  switch (stage) {
    case LifecycleStage::DataProcessing: return kNoChained;
    case LifecycleStage::ModelConversion: return kMcChained;
    case LifecycleStage::SketchGeneration: return kSgChained;
  }
  return {};
}

StageInput chain_artifact(const StageResult& prev, const StageInput& next_input) {
  const bool dp_to_mc =
      prev.stage == LifecycleStage::DataProcessing && next_input.stage == LifecycleStage::ModelConversion;
  const bool mc_to_sg =
      prev.stage == LifecycleStage::ModelConversion && next_input.stage == LifecycleStage::SketchGeneration;
  if (!dp_to_mc && !mc_to_sg) {
    throw Error(ErrorKind::IncompatibleStagePair, std::string(stage_key(prev.stage)) + " result cannot feed " +
                                                      std::string(stage_key(next_input.stage)) + " input");
  }
  if (prev.outcome != StageOutcome::Success || !prev.artifact_locator) {
    throw Error(ErrorKind::PreviousStageFailed, std::string(stage_key(prev.stage)));
  }
  StageInput next = next_input;
  if (dp_to_mc) {
    next.representative_data_locator = *prev.artifact_locator;
  } else {
    next.converted_model_locator = *prev.artifact_locator;
  }
  return next;
}

std::string make_run_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  const auto now = wall_now();
  const auto secs = std::chrono::floor<std::chrono::seconds>(now);
  const std::time_t t = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  return fmt::format("{:04}{:02}{:02}T{:02}{:02}{:02}{:03}Z-{:08x}", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                     tm.tm_hour, tm.tm_min, tm.tm_sec, (now - secs).count(),
                     static_cast<std::uint32_t>(rng()));
}

std::string content_hash(std::string_view text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::WorkspaceError, "sha256 failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

RunSample to_sample(const std::string& run_id, const StageResult& result) {
  RunSample s;
  s.run_id = run_id;
  s.stage = result.stage;
  s.outcome = result.outcome;
  s.duration = result.total_duration;
  s.usage = result.usage;
  return s;
}

StageResult Orchestrator::run_stage(const RunContext& run, const StageInput& raw_input, const RetryPolicy& policy,
                                    LLMProvider& provider) const {
  policy.validate();
  const StageInput input = validate_stage_input(raw_input.stage, raw_input);
  const PromptTemplate tmpl = templates_.get(input.stage);
  const LifecycleStage stage = input.stage;

  const fs::path run_dir = run.run_dir();
  const fs::path stage_dir = run_dir / stage_key(stage);
  make_dirs(stage_dir);

  StageResult result;
  result.stage = stage;
  std::optional<std::string> prior_error;
  std::optional<Timestamp> first_call;

  for (int k = 1; k <= policy.max_attempts; ++k) {
    const fs::path attempt_dir = stage_dir / ("attempt_" + std::to_string(k));
    make_dirs(attempt_dir);

    const RenderedPrompt prompt = render_prompt(tmpl, prompt_view(input, run_dir, attempt_dir), prior_error, k);
    write_text(attempt_dir / "prompt.txt", prompt.text);

    LLMRequest request;
    if (request_.system_message) request.messages.push_back({Role::System, *request_.system_message});
    request.messages.push_back({Role::User, prompt.text});
    request.model_name = request_.model_name;
    request.temperature = request_.temperature;

    Attempt attempt;
    attempt.index = k;
    attempt.prompt_hash = content_hash(prompt.text);
    attempt.started_at = run.clock.now();
    if (!first_call) first_call = attempt.started_at;

    std::optional<LLMResponse> response;
    try {
      response = provider.complete(request);
    } catch (const Error& e) {
      if (!is_provider_fault(e.kind())) throw;
      attempt.outcome = AttemptOutcome::LLMFailure;
      attempt.error_excerpt = "LLM request failed: " + std::string(e.what());
    }

    if (response) {
      if (response->simulated_latency) run.clock.elapse(*response->simulated_latency);
      attempt.usage = response->usage;
      write_text(attempt_dir / "response.txt", response->content);

      std::optional<CodeArtifact> code;
      try {
        code = extract_code(*response, code_kind_for(stage));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoCode) throw;
        attempt.outcome = AttemptOutcome::NoCode;
        attempt.error_excerpt = "The response contained no usable code block (" + e.detail() +
                                "). Reply with exactly one fenced code block.";
      }
      if (code) {
        StageExecution exec = executor_.execute(stage, *code, attempt_dir, input, policy.per_execution_timeout);
        if (exec.accepted) {
          attempt.outcome = AttemptOutcome::Success;
          result.artifact_locator = exec.artifact;
        } else {
          attempt.outcome = exec.outcome.timed_out() ? AttemptOutcome::Timeout : AttemptOutcome::ExecutionFailure;
          attempt.error_excerpt = exec.error ? exec.error->text : std::string("execution failed");
        }
      }
    }
    attempt.ended_at = run.clock.now();

    TraceEvent event;
    event.run_id = run.run_id;
    event.stage = stage;
    event.attempt_index = k;
    event.kind = EventKind::Attempt;
    event.ts_start = attempt.started_at;
    event.ts_end = attempt.ended_at;
    event.prompt_tokens = attempt.usage.prompt_tokens;
    event.completion_tokens = attempt.usage.completion_tokens;
    event.outcome = to_string(attempt.outcome);
    event.error_excerpt = attempt.error_excerpt;
    if (attempt.outcome == AttemptOutcome::Success) {
      event.artifact_locator = run_relative(result.artifact_locator, run_dir);
    }
    event.prompt_hash = attempt.prompt_hash;
    tracer_.append_event(event);

    result.usage += attempt.usage;
    prior_error = attempt.error_excerpt;
    const bool done = attempt.outcome == AttemptOutcome::Success;
    result.attempts.push_back(std::move(attempt));
    if (done) break;
  }

  const Attempt& last = result.attempts.back();
  result.outcome = last.outcome == AttemptOutcome::Success ? StageOutcome::Success : StageOutcome::Failure;
  result.total_duration = std::chrono::duration_cast<Millis>(last.ended_at - *first_call);
  if (result.outcome == StageOutcome::Failure) result.artifact_locator.reset();

  TraceEvent summary;
  summary.run_id = run.run_id;
  summary.stage = stage;
  summary.attempt_index = static_cast<int>(result.attempts.size());
  summary.kind = EventKind::StageResult;
  summary.ts_start = *first_call;
  summary.ts_end = last.ended_at;
  summary.prompt_tokens = result.usage.prompt_tokens;
  summary.completion_tokens = result.usage.completion_tokens;
  summary.outcome = to_string(result.outcome);
  summary.error_excerpt = last.error_excerpt;
  summary.artifact_locator = run_relative(result.artifact_locator, run_dir);
  summary.prompt_hash = last.prompt_hash;
  tracer_.append_event(summary);

  if (result.outcome == StageOutcome::Failure) {
    TraceEvent review = summary;
    review.kind = EventKind::ReviewRequested;
    review.ts_start = review.ts_end = last.ended_at;
    review.prompt_tokens = review.completion_tokens = 0;
    review.error_excerpt = "stage " + std::string(stage_label(stage)) + " failed after " +
                           std::to_string(result.attempts.size()) + " attempts; last error: " +
                           last.error_excerpt.value_or("none");
    tracer_.append_event(review);
  }
  return result;
}

PipelineRun Orchestrator::run_pipeline(const RunContext& run, const PipelineInputs& inputs, const RetryPolicy& policy,
                                       const ProviderForStage& providers) const {
  policy.validate();
  for (LifecycleStage stage : kAllStages) {
    if (!inputs[stage]) throw Error(ErrorKind::MissingStageInput, std::string(stage_key(stage)));
    validate_stage_input(stage, *inputs[stage], chained_fields(stage));
    templates_.get(stage);
  }

  PipelineRun out;
  out.run_id = run.run_id;
  for (LifecycleStage stage : kAllStages) {
    const StageInput input =
        out.stage_results.empty() ? *inputs[stage] : chain_artifact(out.stage_results.back(), *inputs[stage]);
    out.stage_results.push_back(run_stage(run, input, policy, providers(stage)));
    if (out.stage_results.back().outcome == StageOutcome::Failure) {
      out.halted_at = stage;
      break;
    }
  }
  return out;
}

}  // namespace tinyforge
