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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tinyforge/clock.hpp"
#include "tinyforge/llm.hpp"
#include "tinyforge/stage.hpp"
#include "tinyforge/trace.hpp"

namespace tinyforge {

enum class StageOutcome { Success, Failure };

std::string_view to_string(StageOutcome outcome);

/// One stage run, cumulative over all of its attempts.
struct RunSample {
  std::string run_id;
  LifecycleStage stage = LifecycleStage::DataProcessing;
  StageOutcome outcome = StageOutcome::Success;
  Millis duration{0};
  TokenUsage usage;
  std::optional<Usd> total_cost;

  std::int64_t total_tokens() const { return usage.total(); }
  bool operator==(const RunSample&) const = default;
};

/// Rebuilds samples from the stage_result events of a trace.
std::vector<RunSample> samples_from_events(std::span<const TraceEvent> events);

/// Sums are kept exact; means are derived on demand.
struct StageStats {
  LifecycleStage stage = LifecycleStage::DataProcessing;
  std::int64_t n_runs = 0;
  std::int64_t successes = 0;

  std::int64_t time_sum_ms = 0;
  Millis time_min{0};
  Millis time_max{0};

  std::int64_t tokens_sum = 0;
  std::int64_t tokens_min = 0;
  std::int64_t tokens_max = 0;

  double success_rate() const { return static_cast<double>(successes) / static_cast<double>(n_runs); }
  double time_mean_s() const { return static_cast<double>(time_sum_ms) / 1000.0 / static_cast<double>(n_runs); }
  double tokens_mean() const { return static_cast<double>(tokens_sum) / static_cast<double>(n_runs); }

  bool operator==(const StageStats&) const = default;
};

/// Throws EmptySampleSet, MixedStages.
StageStats aggregate_stage_stats(std::span<const RunSample> samples);

/// Stats of the concatenated sample sets. Throws MixedStages.
StageStats merge_stats(const StageStats& a, const StageStats& b);

/// One StageStats per stage present, in stage order.
std::vector<StageStats> aggregate_by_stage(std::span<const RunSample> samples);

/// Prices every sample's token split. Throws NegativeTokens.
std::vector<RunSample> attach_costs(std::span<const RunSample> samples, const CostModel& model);

struct ScatterRow {
  LifecycleStage stage;
  std::string run_id;
  Millis duration;
  std::int64_t total_tokens;
  StageOutcome outcome;

  bool operator==(const ScatterRow&) const = default;
};

/// One row per sample, ordered by (stage, run_id).
std::vector<ScatterRow> scatter_rows(std::span<const RunSample> samples);

struct TradeoffRow {
  LifecycleStage stage;
  StageOutcome outcome;
  std::int64_t n = 0;
  std::int64_t duration_sum_ms = 0;
  Usd cost_sum;

  double mean_duration_s() const { return static_cast<double>(duration_sum_ms) / 1000.0 / static_cast<double>(n); }
};

/// Grouped by (stage, outcome), success before failure; empty groups omitted.
std::vector<TradeoffRow> tradeoff_rows(std::span<const RunSample> samples, const CostModel& model);

enum class ReportFormat { Table, Csv };

/// Throws UnknownFormat.
ReportFormat parse_report_format(std::string_view text);

inline constexpr std::string_view kStatsCsvHeader =
    "stage,n,success_rate_pct,time_mean_s,time_min_s,time_max_s,tok_mean,tok_min,tok_max";
inline constexpr std::string_view kScatterCsvHeader = "stage,run_id,duration_s,total_tokens,outcome";
inline constexpr std::string_view kTradeoffCsvHeader = "stage,outcome,mean_duration_s,mean_cost_usd,n";

std::string render_report(std::span<const StageStats> stats, ReportFormat format);
/// Convenience overload that parses the format name first.
std::string render_report(std::span<const StageStats> stats, std::string_view format);
std::string render_scatter(std::span<const ScatterRow> rows, ReportFormat format);
std::string render_tradeoff(std::span<const TradeoffRow> rows, ReportFormat format);

/// numerator/denominator rounded half away from zero to `decimals` places,
/// computed exactly.
std::string format_ratio(std::int64_t numerator, std::int64_t denominator, int decimals);
/// 1234567 -> "1,234,567"
std::string group_thousands(std::string_view digits);

}  // namespace tinyforge
