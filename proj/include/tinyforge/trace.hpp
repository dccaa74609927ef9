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
#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tinyforge/clock.hpp"
#include "tinyforge/stage.hpp"

namespace tinyforge {

enum class EventKind { Attempt, StageResult, ReviewRequested };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

inline constexpr std::string_view kDefaultTracePath = "traces/events.log";

/// One line of the trace. `outcome` holds an attempt outcome for attempt
/// events ("success", "execution_failure", ...) and "success"/"failure" for
/// stage_result and review_requested. artifact_locator is relative to the
/// run directory.
struct TraceEvent {
  std::string run_id;
  LifecycleStage stage = LifecycleStage::DataProcessing;
  int attempt_index = 1;
  EventKind kind = EventKind::Attempt;
  Timestamp ts_start;
  Timestamp ts_end;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::string outcome;
  std::optional<std::string> error_excerpt;
  std::optional<std::string> artifact_locator;
  std::string prompt_hash;

  using Key = std::tuple<std::string, LifecycleStage, int, EventKind>;
  Key key() const { return {run_id, stage, attempt_index, kind}; }

  bool operator==(const TraceEvent&) const = default;
};

/// One JSON object, no trailing newline.
std::string encode_event(const TraceEvent& event);
/// Throws TraceCorrupt with the schema problem.
TraceEvent decode_event(std::string_view line);

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void append_event(const TraceEvent& event) = 0;
};

/// Line-delimited JSON file. Each append is a single write(2) of a full line
/// on an O_APPEND descriptor, so records from concurrent writers (threads or
/// processes) never interleave.
class TraceStore final : public TraceSink {
 public:
  /// Creates parent directories and the file. Throws StoreUnwritable.
  explicit TraceStore(std::filesystem::path path);
  ~TraceStore() override;
  TraceStore(const TraceStore&) = delete;
  TraceStore& operator=(const TraceStore&) = delete;

  /// Throws DuplicateEvent when (run_id, stage, attempt_index, kind) is
  /// already in the file, StoreUnwritable on I/O failure.
  void append_event(const TraceEvent& event) override;

  const std::filesystem::path& path() const { return path_; }

 private:
  void catch_up();

  std::filesystem::path path_;
  int fd_ = -1;
  std::mutex mutex_;
  std::set<TraceEvent::Key> keys_;
  std::uintmax_t scanned_ = 0;
  std::string partial_;
};

/// Every complete record in append order. A trailing partial line (a writer
/// mid-append) is ignored. Throws TraceCorrupt on any other bad line.
std::vector<TraceEvent> load_events(const std::filesystem::path& path);

/// Events of one run in append order. Throws RunNotFound.
std::vector<TraceEvent> load_run(const std::filesystem::path& path, std::string_view run_id);

struct TraceIssue {
  std::size_t line = 0;  // 1-based
  std::string message;

  bool operator==(const TraceIssue&) const = default;
};

/// Schema conformance, duplicate keys and timestamp ordering, per line. An
/// empty report means the store is valid.
std::vector<TraceIssue> verify_trace(const std::filesystem::path& path);

}  // namespace tinyforge
