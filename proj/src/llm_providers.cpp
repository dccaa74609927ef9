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
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tinyforge/error.hpp"
#include "tinyforge/llm.hpp"

namespace tinyforge {

using nlohmann::json;

void validate_request(const LLMRequest& request) {
  bool has_user = false;
  for (const auto& m : request.messages) {
    if (m.content.empty()) throw Error(ErrorKind::InvalidRequest, "message with empty content");
    if (m.role == Role::User) has_user = true;
  }
  if (!has_user) throw Error(ErrorKind::InvalidRequest, "request has no user message");
}

std::int64_t estimate_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

namespace {

std::int64_t estimate_prompt(const LLMRequest& request) {
  std::int64_t n = 0;
  for (const auto& m : request.messages) n += estimate_tokens(m.content);
  return n;
}

std::string expand(std::string_view pattern, std::uint64_t call, std::uint64_t seed) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern.substr(i).starts_with("{call}")) {
      out += std::to_string(call);
      i += 6;
    } else if (pattern.substr(i).starts_with("{seed}")) {
      out += std::to_string(seed);
      i += 6;
    } else {
      out.push_back(pattern[i++]);
    }
  }
  return out;
}

}  // namespace

LLMResponse with_estimated_usage(const LLMRequest& request, std::string content) {
  LLMResponse r;
  r.usage.prompt_tokens = estimate_prompt(request);
  r.usage.completion_tokens = estimate_tokens(content);
  r.usage_source = UsageSource::Estimated;
  r.content = std::move(content);
  return r;
}

// ---------------------------------------------------------------------------

std::vector<FixtureEntry> parse_fixture(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadResponse, std::string("fixture is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorKind::BadResponse, "fixture must be a JSON array");
  std::vector<FixtureEntry> entries;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    if (!e.is_object() || !e.contains("content") || !e["content"].is_string()) {
      throw Error(ErrorKind::BadResponse, "fixture entry " + std::to_string(i) + " needs a string 'content'");
    }
    FixtureEntry entry;
    entry.content = e["content"].get<std::string>();
    auto count = [&](const char* key) -> std::optional<std::int64_t> {
      if (!e.contains(key) || e[key].is_null()) return std::nullopt;
      if (!e[key].is_number_integer() || e[key].get<std::int64_t>() < 0) {
        throw Error(ErrorKind::BadResponse,
                    "fixture entry " + std::to_string(i) + ": '" + key + "' must be a non-negative integer");
      }
      return e[key].get<std::int64_t>();
    };
    entry.prompt_tokens = count("prompt_tokens");
    entry.completion_tokens = count("completion_tokens");
    if (auto ms = count("latency_ms")) entry.latency = Millis{*ms};
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<FixtureEntry> load_fixture_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::PathNotFound, "fixture " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_fixture(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

LLMResponse ScriptedProvider::complete(const LLMRequest& request) {
  validate_request(request);
  FixtureEntry entry;
  {
    std::lock_guard lock(mutex_);
    if (cursor_ >= entries_.size()) {
      throw Error(ErrorKind::FixtureExhausted, "all " + std::to_string(entries_.size()) + " entries consumed");
    }
    entry = entries_[cursor_++];
  }
  LLMResponse r;
  if (entry.prompt_tokens && entry.completion_tokens) {
    r.content = std::move(entry.content);
    r.usage = {*entry.prompt_tokens, *entry.completion_tokens};
  } else {
    r = with_estimated_usage(request, std::move(entry.content));
    if (entry.prompt_tokens) r.usage.prompt_tokens = *entry.prompt_tokens;
    if (entry.completion_tokens) r.usage.completion_tokens = *entry.completion_tokens;
  }
  r.simulated_latency = entry.latency;
  return r;
}

std::size_t ScriptedProvider::calls() const {
  std::lock_guard lock(mutex_);
  return cursor_;
}

std::size_t ScriptedProvider::remaining() const {
  std::lock_guard lock(mutex_);
  return entries_.size() - cursor_;
}

// ---------------------------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * (1.0 / 9007199254740992.0);
}

constexpr std::uint64_t kLatencyStream = 0xA5A5A5A5DEADBEEFULL;

}  // namespace

bool StochasticProvider::passes(std::uint64_t call_index) const {
  return unit_interval(mix_seed(options_.seed, call_index)) < options_.success_probability;
}

LLMResponse StochasticProvider::complete(const LLMRequest& request) {
  validate_request(request);
  std::uint64_t call;
  {
    std::lock_guard lock(mutex_);
    call = ++calls_;
  }
  const bool ok = passes(call);
  LLMResponse r =
      with_estimated_usage(request, expand(ok ? options_.success_content : options_.failure_content, call,
                                           options_.seed));
  const auto lo = options_.min_latency.count();
  const auto hi = std::max(lo, options_.max_latency.count());
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  r.simulated_latency = Millis{lo + static_cast<std::int64_t>(mix_seed(options_.seed ^ kLatencyStream, call) % span)};
  return r;
}

std::size_t StochasticProvider::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

StochasticOptions default_stochastic_contents(LifecycleStage stage) {
  StochasticOptions o;
  switch (stage) {
    case LifecycleStage::DataProcessing:
      o.success_content =
          "Here is the preprocessing script.\n\n```python\n"
          "import os\n"
          "os.makedirs(\"artifacts\", exist_ok=True)\n"
          "with open(\"artifacts/processed.csv\", \"w\") as f:\n"
          "    f.write(\"label,feature\\n0,0.0\\n\")\n"
          "```\n";
      o.failure_content =
          "```python\n"
          "import sys\n"
          "sys.stderr.write(\"KeyError: 'label' (call {call}, seed {seed})\\n\")\n"
          "sys.exit(1)\n"
          "```\n";
      break;
    case LifecycleStage::ModelConversion:
      o.success_content =
          "```python\n"
          "import os\n"
          "os.makedirs(\"artifacts\", exist_ok=True)\n"
          "with open(\"artifacts/model_int8.tflite\", \"wb\") as f:\n"
          "    f.write(b\"TFL3\" + bytes(60))\n"
          "```\n";
      o.failure_content =
          "```python\n"
          "import sys\n"
          "sys.stderr.write(\"RuntimeError: representative dataset yielded wrong shape (call {call}, seed {seed})\\n\")\n"
          "sys.exit(1)\n"
          "```\n";
      break;
    case LifecycleStage::SketchGeneration:
      o.success_content =
          "```cpp\n"
          "#include <Arduino.h>\n"
          "void setup() { Serial.begin(9600); }\n"
          "void loop() {}\n"
          "```\n";
      o.failure_content =
          "```cpp\n"
          "// FORCE_COMPILE_ERROR: sketch.ino:3:5: error: 'tflInterpreter' was not declared in this scope (call {call}, seed {seed})\n"
          "#include <Arduino.h>\n"
          "void setup() { tflInterpreter->AllocateTensors(); }\n"
          "void loop() {}\n"
          "```\n";
      break;
  }
  return o;
}

}  // namespace tinyforge
