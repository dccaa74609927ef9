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
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "tinyforge/metrics.hpp"
#include "tinyforge/trace.hpp"

namespace tinyforge::testing {

/// Target statistics in integer units.
struct StageTargets {
  LifecycleStage stage;
  std::int64_t n;
  std::int64_t successes;
  std::int64_t time_sum_ms;
  std::int64_t time_min_ms;
  std::int64_t time_max_ms;
  std::int64_t tokens_sum;
  std::int64_t tokens_min;
  std::int64_t tokens_max;
};

/// Reference runs: DP 27/30, 47.76 s [32.58-155.93], 10,832 tokens [8,560-25,086];
/// MC 30/30, 6.09 s [3.65-10.21], 689 [545-3,949]; SG 11/30, 60.55 s [7.73-87.92],
/// 13,321 [1,840-17,181].
inline std::vector<StageTargets> reference_targets() {
  return {
      {LifecycleStage::DataProcessing, 30, 27, 47'760 * 30, 32'580, 155'930, 10'832 * 30, 8'560, 25'086},
      {LifecycleStage::ModelConversion, 30, 30, 6'090 * 30, 3'650, 10'210, 689 * 30, 545, 3'949},
      {LifecycleStage::SketchGeneration, 30, 11, 60'550 * 30, 7'730, 87'920, 13'321 * 30, 1'840, 17'181},
  };
}

/// One run at each extreme, the rest spread evenly so sums come out exact.
inline std::vector<std::int64_t> spread(std::int64_t n, std::int64_t sum, std::int64_t lo, std::int64_t hi) {
  if (n < 2) throw std::invalid_argument("need at least two runs");
  std::vector<std::int64_t> v{lo, hi};
  const std::int64_t rest = sum - lo - hi;
  const std::int64_t k = n - 2;
  for (std::int64_t i = 0; i < k; ++i) v.push_back(rest / k + (i < rest % k ? 1 : 0));
  for (auto x : v) {
    if (x < lo || x > hi) throw std::invalid_argument("targets are not attainable");
  }
  return v;
}

inline std::vector<RunSample> synthesize(const StageTargets& t) {
  const auto times = spread(t.n, t.time_sum_ms, t.time_min_ms, t.time_max_ms);
  const auto tokens = spread(t.n, t.tokens_sum, t.tokens_min, t.tokens_max);
  std::vector<RunSample> out;
  for (std::int64_t i = 0; i < t.n; ++i) {
    RunSample s;
    s.run_id = fmt::format("ref-{}-{:03}", stage_key(t.stage), i + 1);
    s.stage = t.stage;
    // Failures go last so the extremes include a success.
    s.outcome = i < t.successes ? StageOutcome::Success : StageOutcome::Failure;
    s.duration = Millis{times[static_cast<std::size_t>(i)]};
    const auto total = tokens[static_cast<std::size_t>(i)];
    s.usage.prompt_tokens = total * 3 / 4;
    s.usage.completion_tokens = total - s.usage.prompt_tokens;
    out.push_back(std::move(s));
  }
  return out;
}

/// The stage_result events a trace would hold for these samples.
inline std::vector<TraceEvent> as_stage_results(const std::vector<RunSample>& samples, Timestamp origin) {
  std::vector<TraceEvent> events;
  for (const auto& s : samples) {
    TraceEvent e;
    e.run_id = s.run_id;
    e.stage = s.stage;
    e.attempt_index = 1;
    e.kind = EventKind::StageResult;
    e.ts_start = origin;
    e.ts_end = origin + s.duration;
    e.prompt_tokens = s.usage.prompt_tokens;
    e.completion_tokens = s.usage.completion_tokens;
    e.outcome = std::string(to_string(s.outcome));
    e.prompt_hash = std::string(64, '0');
    events.push_back(std::move(e));
  }
  return events;
}

}  // namespace tinyforge::testing
