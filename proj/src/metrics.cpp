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
#include "tinyforge/metrics.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "tinyforge/error.hpp"

namespace tinyforge {

std::string_view to_string(StageOutcome outcome) {
  return outcome == StageOutcome::Success ? "success" : "failure";
}

std::vector<RunSample> samples_from_events(std::span<const TraceEvent> events) {
  std::vector<RunSample> samples;
  for (const auto& e : events) {
    if (e.kind != EventKind::StageResult) continue;
    RunSample s;
    s.run_id = e.run_id;
    s.stage = e.stage;
    s.outcome = e.outcome == "success" ? StageOutcome::Success : StageOutcome::Failure;
    s.duration = std::chrono::duration_cast<Millis>(e.ts_end - e.ts_start);
    s.usage = {e.prompt_tokens, e.completion_tokens};
    samples.push_back(std::move(s));
  }
  return samples;
}

StageStats aggregate_stage_stats(std::span<const RunSample> samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptySampleSet, "no samples to aggregate");
  StageStats st;
  st.stage = samples.front().stage;
  st.time_min = st.time_max = samples.front().duration;
  st.tokens_min = st.tokens_max = samples.front().total_tokens();
  for (const auto& s : samples) {
    if (s.stage != st.stage) {
      throw Error(ErrorKind::MixedStages, std::string(stage_key(st.stage)) + " and " + std::string(stage_key(s.stage)));
    }
    ++st.n_runs;
    if (s.outcome == StageOutcome::Success) ++st.successes;
    st.time_sum_ms += s.duration.count();
    st.time_min = std::min(st.time_min, s.duration);
    st.time_max = std::max(st.time_max, s.duration);
    const auto tokens = s.total_tokens();
    st.tokens_sum += tokens;
    st.tokens_min = std::min(st.tokens_min, tokens);
    st.tokens_max = std::max(st.tokens_max, tokens);
  }
  return st;
}

StageStats merge_stats(const StageStats& a, const StageStats& b) {
  if (a.stage != b.stage) {
    throw Error(ErrorKind::MixedStages, std::string(stage_key(a.stage)) + " and " + std::string(stage_key(b.stage)));
  }
  if (a.n_runs == 0) return b;
  if (b.n_runs == 0) return a;
  StageStats m = a;
  m.n_runs += b.n_runs;
  m.successes += b.successes;
  m.time_sum_ms += b.time_sum_ms;
  m.time_min = std::min(a.time_min, b.time_min);
  m.time_max = std::max(a.time_max, b.time_max);
  m.tokens_sum += b.tokens_sum;
  m.tokens_min = std::min(a.tokens_min, b.tokens_min);
  m.tokens_max = std::max(a.tokens_max, b.tokens_max);
  return m;
}

std::vector<StageStats> aggregate_by_stage(std::span<const RunSample> samples) {
  std::vector<StageStats> out;
  for (LifecycleStage stage : kAllStages) {
    std::vector<RunSample> group;
    std::copy_if(samples.begin(), samples.end(), std::back_inserter(group),
                 [stage](const RunSample& s) { return s.stage == stage; });
    if (!group.empty()) out.push_back(aggregate_stage_stats(group));
  }
  return out;
}

std::vector<RunSample> attach_costs(std::span<const RunSample> samples, const CostModel& model) {
  std::vector<RunSample> out(samples.begin(), samples.end());
  for (auto& s : out) s.total_cost = price(s.usage, model);
  return out;
}

std::vector<ScatterRow> scatter_rows(std::span<const RunSample> samples) {
  std::vector<ScatterRow> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back({s.stage, s.run_id, s.duration, s.total_tokens(), s.outcome});
  std::stable_sort(rows.begin(), rows.end(), [](const ScatterRow& a, const ScatterRow& b) {
    return std::tie(a.stage, a.run_id) < std::tie(b.stage, b.run_id);
  });
  return rows;
}

std::vector<TradeoffRow> tradeoff_rows(std::span<const RunSample> samples, const CostModel& model) {
  std::map<std::pair<LifecycleStage, StageOutcome>, TradeoffRow> groups;
  for (const auto& s : samples) {
    auto& row = groups[{s.stage, s.outcome}];
    row.stage = s.stage;
    row.outcome = s.outcome;
    ++row.n;
    row.duration_sum_ms += s.duration.count();
    row.cost_sum += price(s.usage, model);
  }
  std::vector<TradeoffRow> rows;
  for (auto& [key, row] : groups) rows.push_back(row);
  return rows;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "table") return ReportFormat::Table;
  if (text == "csv") return ReportFormat::Csv;
  throw Error(ErrorKind::UnknownFormat, std::string(text));
}

std::string format_ratio(std::int64_t numerator, std::int64_t denominator, int decimals) {
  if (denominator == 0) return "nan";
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  __int128 scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const bool negative = numerator < 0;
  const __int128 mag = negative ? -static_cast<__int128>(numerator) : static_cast<__int128>(numerator);
  const __int128 q = (mag * scale * 2 + denominator) / (2 * static_cast<__int128>(denominator));
  const auto whole = static_cast<std::int64_t>(q / scale);
  const auto frac = static_cast<std::int64_t>(q % scale);
  std::string out = (negative && q != 0) ? "-" : "";
  out += std::to_string(whole);
  if (decimals > 0) out += fmt::format(".{:0{}}", frac, decimals);
  return out;
}

std::string group_thousands(std::string_view digits) {
  std::string_view sign;
  if (!digits.empty() && digits.front() == '-') {
    sign = "-";
    digits.remove_prefix(1);
  }
  const auto dot = digits.find('.');
  std::string_view whole = digits.substr(0, dot);
  std::string_view rest = dot == std::string_view::npos ? std::string_view{} : digits.substr(dot);
  std::string out;
  for (std::size_t i = 0; i < whole.size(); ++i) {
    if (i > 0 && (whole.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(whole[i]);
  }
  return std::string(sign) + out + std::string(rest);
}

namespace {

std::string seconds(std::int64_t ms) { return format_ratio(ms, 1000, 2); }

}  // namespace

std::string render_report(std::span<const StageStats> stats, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Csv) {
    out += kStatsCsvHeader;
    out += '\n';
    for (const auto& s : stats) {
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", stage_label(s.stage), s.n_runs,
                         format_ratio(s.successes * 100, s.n_runs, 1), format_ratio(s.time_sum_ms, s.n_runs * 1000, 2),
                         seconds(s.time_min.count()), seconds(s.time_max.count()),
                         format_ratio(s.tokens_sum, s.n_runs, 2), s.tokens_min, s.tokens_max);
    }
    return out;
  }
  out += fmt::format("{:<5}  {:>4}  {:>8}  {:<26}  {}\n", "stage", "n", "success", "time s: mean [min-max]",
                     "tokens: mean [min-max]");
  for (const auto& s : stats) {
    const std::string time = fmt::format("{} [{}-{}]", format_ratio(s.time_sum_ms, s.n_runs * 1000, 2),
                                         seconds(s.time_min.count()), seconds(s.time_max.count()));
    const std::string tokens =
        fmt::format("{} [{}-{}]", group_thousands(format_ratio(s.tokens_sum, s.n_runs, 2)),
                    group_thousands(std::to_string(s.tokens_min)), group_thousands(std::to_string(s.tokens_max)));
    out += fmt::format("{:<5}  {:>4}  {:>7}%  {:<26}  {}\n", stage_label(s.stage), s.n_runs,
                       format_ratio(s.successes * 100, s.n_runs, 1), time, tokens);
  }
  return out;
}

std::string render_report(std::span<const StageStats> stats, std::string_view format) {
  return render_report(stats, parse_report_format(format));
}

std::string render_scatter(std::span<const ScatterRow> rows, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Csv) {
    out += kScatterCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
      out += fmt::format("{},{},{},{},{}\n", stage_label(r.stage), r.run_id, seconds(r.duration.count()),
                         r.total_tokens, to_string(r.outcome));
    }
    return out;
  }
  out += fmt::format("{:<5}  {:<32}  {:>10}  {:>12}  {}\n", "stage", "run_id", "duration_s", "tokens", "outcome");
  for (const auto& r : rows) {
    out += fmt::format("{:<5}  {:<32}  {:>10}  {:>12}  {}\n", stage_label(r.stage), r.run_id,
                       seconds(r.duration.count()), group_thousands(std::to_string(r.total_tokens)),
                       to_string(r.outcome));
  }
  return out;
}

std::string render_tradeoff(std::span<const TradeoffRow> rows, ReportFormat format) {
  std::string out;
  const std::int64_t pico_per_dollar = Usd::kPerDollar;
  if (format == ReportFormat::Csv) {
    out += kTradeoffCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
      out += fmt::format("{},{},{},{},{}\n", stage_label(r.stage), to_string(r.outcome),
                         format_ratio(r.duration_sum_ms, r.n * 1000, 2),
                         format_ratio(r.cost_sum.pico, r.n * pico_per_dollar, 6), r.n);
    }
    return out;
  }
  out += fmt::format("{:<5}  {:<8}  {:>15}  {:>13}  {:>4}\n", "stage", "outcome", "mean_duration_s", "mean_cost_usd",
                     "n");
  for (const auto& r : rows) {
    out += fmt::format("{:<5}  {:<8}  {:>15}  {:>13}  {:>4}\n", stage_label(r.stage), to_string(r.outcome),
                       format_ratio(r.duration_sum_ms, r.n * 1000, 2),
                       format_ratio(r.cost_sum.pico, r.n * pico_per_dollar, 6), r.n);
  }
  return out;
}

}  // namespace tinyforge
