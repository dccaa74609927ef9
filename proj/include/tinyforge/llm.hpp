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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tinyforge/clock.hpp"
#include "tinyforge/stage.hpp"

namespace tinyforge {

// ---------------------------------------------------------------------------
// Requests and responses

enum class Role { System, User };

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

struct LLMRequest {
  std::vector<ChatMessage> messages;
  std::string model_name;
  double temperature = 0.0;
};

/// Throws InvalidRequest unless there is a user message and no empty content.
void validate_request(const LLMRequest& request);

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  std::int64_t total() const { return prompt_tokens + completion_tokens; }
  TokenUsage& operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    return *this;
  }
  friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
  bool operator==(const TokenUsage&) const = default;
};

enum class UsageSource { ProviderReported, Estimated };

struct LLMResponse {
  std::string content;
  TokenUsage usage;
  UsageSource usage_source = UsageSource::ProviderReported;
  /// Latency a simulating provider wants the run clock to account for.
  std::optional<Millis> simulated_latency;
};

/// ceil(chars / 4). Fallback when a provider does not report usage.
std::int64_t estimate_tokens(std::string_view text);

/// Fills in usage by estimation when the provider reported none.
LLMResponse with_estimated_usage(const LLMRequest& request, std::string content);

// ---------------------------------------------------------------------------
// Providers

class LLMProvider {
 public:
  virtual ~LLMProvider() = default;
  virtual LLMResponse complete(const LLMRequest& request) = 0;
};

struct FixtureEntry {
  std::string content;
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> completion_tokens;
  std::optional<Millis> latency;
};

/// JSON array of {content, prompt_tokens?, completion_tokens?, latency_ms?}.
std::vector<FixtureEntry> load_fixture_file(const std::filesystem::path& path);
std::vector<FixtureEntry> parse_fixture(std::string_view json_text);

/// Replays fixture entries in order; FixtureExhausted once they run out.
class ScriptedProvider final : public LLMProvider {
 public:
  explicit ScriptedProvider(std::vector<FixtureEntry> entries) : entries_(std::move(entries)) {}

  LLMResponse complete(const LLMRequest& request) override;

  std::size_t calls() const;
  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::vector<FixtureEntry> entries_;
  std::size_t cursor_ = 0;
};

struct StochasticOptions {
  std::uint64_t seed = 0;
  double success_probability = 1.0;
  /// Content for passing and failing calls. "{call}" expands to the 1-based
  /// call index, "{seed}" to the seed.
  std::string success_content;
  std::string failure_content;
  Millis min_latency{500};
  Millis max_latency{4000};
};

/// Default passing/failing contents for a stage, executable by the
/// workspace executor with a Python interpreter or the mock toolchain.
StochasticOptions default_stochastic_contents(LifecycleStage stage);

/// Pass/fail and latency of call k are a pure function of (seed, k).
class StochasticProvider final : public LLMProvider {
 public:
  explicit StochasticProvider(StochasticOptions options) : options_(std::move(options)) {}

  LLMResponse complete(const LLMRequest& request) override;

  /// Outcome the provider will give on call `call_index` (1-based).
  bool passes(std::uint64_t call_index) const;
  std::size_t calls() const;

 private:
  StochasticOptions options_;
  mutable std::mutex mutex_;
  std::uint64_t calls_ = 0;
};

/// splitmix64 finalizer; also used to derive per-run seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

struct LiveOptions {
  std::string endpoint;  // e.g. https://api.openai.com/v1/chat/completions
  std::string api_key;
  std::chrono::milliseconds request_timeout{120000};
  int transport_tries = 3;
  std::chrono::milliseconds initial_backoff{1000};
};

/// Chat-completion client. Transport faults and 429s are retried with
/// exponential backoff; none of that counts as a lifecycle attempt.
class LiveProvider final : public LLMProvider {
 public:
  explicit LiveProvider(LiveOptions options);

  LLMResponse complete(const LLMRequest& request) override;

  /// Request body in the chat-completion wire schema.
  static std::string encode_request(const LLMRequest& request);
  /// Parses {choices:[{message:{content}}], usage:{...}}. Missing usage falls
  /// back to estimation.
  static LLMResponse decode_response(const LLMRequest& request, std::string_view body);

 private:
  LiveOptions options_;
  std::string scheme_host_port_;
  std::string path_;
};

// ---------------------------------------------------------------------------
// Code extraction

enum class CodeKind { InterpreterScript, BoardSketch };

struct CodeArtifact {
  std::string code;
  CodeKind kind = CodeKind::InterpreterScript;
  bool fenced = false;
};

CodeKind code_kind_for(LifecycleStage stage);

/// First fenced block whose tag suits `expected` (an untagged fence always
/// suits). Fence-less content is taken whole with fenced=false. Throws NoCode
/// for blank content or when fences exist but none match.
CodeArtifact extract_code(const LLMResponse& response, CodeKind expected);

// ---------------------------------------------------------------------------
// Pricing

/// Fixed-point USD in units of 1e-12 dollars. Exact for any per-token price
/// with at most 12 decimals.
struct Usd {
  std::int64_t pico = 0;

  static constexpr std::int64_t kPerDollar = 1'000'000'000'000;

  static Usd from_dollars(double dollars);
  /// Rounded half away from zero to 6 decimals, e.g. "0.007500".
  std::string to_string() const;

  Usd& operator+=(Usd o) {
    pico += o.pico;
    return *this;
  }
  friend Usd operator+(Usd a, Usd b) { return a += b; }
  auto operator<=>(const Usd&) const = default;
};

struct CostModel {
  Usd input_price_per_token;
  Usd output_price_per_token;

  /// Throws InvalidPolicy on negative prices.
  static CostModel per_token(double input_usd, double output_usd);
};

/// prompt x input price + completion x output price. Throws NegativeTokens.
Usd price(const TokenUsage& usage, const CostModel& model);

}  // namespace tinyforge
