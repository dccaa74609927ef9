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
#include "tinyforge/trace.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tinyforge/error.hpp"

namespace tinyforge {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

bool valid_outcome(EventKind kind, std::string_view outcome) {
  if (kind == EventKind::Attempt) {
    return outcome == "success" || outcome == "execution_failure" || outcome == "llm_failure" ||
           outcome == "no_code" || outcome == "timeout";
  }
  return outcome == "success" || outcome == "failure";
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::TraceCorrupt, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Splits into lines; `complete` is false for a trailing segment without '\n'.
struct Line {
  std::string_view text;
  bool complete;
};

std::vector<Line> split_lines(std::string_view data) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos < data.size()) {
    const auto eol = data.find('\n', pos);
    if (eol == std::string_view::npos) {
      lines.push_back({data.substr(pos), false});
      break;
    }
    lines.push_back({data.substr(pos, eol - pos), true});
    pos = eol + 1;
  }
  return lines;
}

std::string key_text(const TraceEvent::Key& key) {
  return "(" + std::get<0>(key) + ", " + std::string(stage_key(std::get<1>(key))) + ", " +
         std::to_string(std::get<2>(key)) + ", " + std::string(to_string(std::get<3>(key))) + ")";
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Attempt: return "attempt";
    case EventKind::StageResult: return "stage_result";
    case EventKind::ReviewRequested: return "review_requested";
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  if (text == "attempt") return EventKind::Attempt;
  if (text == "stage_result") return EventKind::StageResult;
  if (text == "review_requested") return EventKind::ReviewRequested;
  return std::nullopt;
}

std::string encode_event(const TraceEvent& e) {
  ordered_json j;
  j["run_id"] = e.run_id;
  j["stage"] = stage_key(e.stage);
  j["attempt_index"] = e.attempt_index;
  j["kind"] = to_string(e.kind);
  j["ts_start"] = format_rfc3339(e.ts_start);
  j["ts_end"] = format_rfc3339(e.ts_end);
  j["prompt_tokens"] = e.prompt_tokens;
  j["completion_tokens"] = e.completion_tokens;
  j["outcome"] = e.outcome;
  j["error_excerpt"] = e.error_excerpt ? ordered_json(*e.error_excerpt) : ordered_json(nullptr);
  j["artifact_locator"] = e.artifact_locator ? ordered_json(*e.artifact_locator) : ordered_json(nullptr);
  j["prompt_hash"] = e.prompt_hash;
  // Captured diagnostics are not guaranteed to be UTF-8.
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

TraceEvent decode_event(std::string_view line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::exception& ex) {
    throw Error(ErrorKind::TraceCorrupt, std::string("malformed record: ") + ex.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::TraceCorrupt, "record is not an object");

  auto require = [&](const char* key) -> const ordered_json& {
    if (!j.contains(key)) throw Error(ErrorKind::TraceCorrupt, std::string("missing field ") + key);
    return j[key];
  };
  auto str = [&](const char* key) {
    const auto& v = require(key);
    if (!v.is_string()) throw Error(ErrorKind::TraceCorrupt, std::string(key) + " must be a string");
    return v.get<std::string>();
  };
  auto opt_str = [&](const char* key) -> std::optional<std::string> {
    const auto& v = require(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) throw Error(ErrorKind::TraceCorrupt, std::string(key) + " must be a string or null");
    return v.get<std::string>();
  };
  auto count = [&](const char* key) {
    const auto& v = require(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw Error(ErrorKind::TraceCorrupt, std::string(key) + " must be a non-negative integer");
    }
    return v.get<std::int64_t>();
  };
  auto ts = [&](const char* key) {
    auto parsed = parse_rfc3339(str(key));
    if (!parsed) throw Error(ErrorKind::TraceCorrupt, std::string(key) + " is not RFC 3339 UTC with milliseconds");
    return *parsed;
  };

  TraceEvent e;
  e.run_id = str("run_id");
  if (e.run_id.empty()) throw Error(ErrorKind::TraceCorrupt, "run_id is empty");
  auto stage = parse_stage(str("stage"));
  if (!stage) throw Error(ErrorKind::TraceCorrupt, "unknown stage");
  e.stage = *stage;
  const auto attempt = count("attempt_index");
  if (attempt < 1) throw Error(ErrorKind::TraceCorrupt, "attempt_index must be >= 1");
  e.attempt_index = static_cast<int>(attempt);
  auto kind = parse_event_kind(str("kind"));
  if (!kind) throw Error(ErrorKind::TraceCorrupt, "unknown kind");
  e.kind = *kind;
  e.ts_start = ts("ts_start");
  e.ts_end = ts("ts_end");
  e.prompt_tokens = count("prompt_tokens");
  e.completion_tokens = count("completion_tokens");
  e.outcome = str("outcome");
  if (!valid_outcome(e.kind, e.outcome)) {
    throw Error(ErrorKind::TraceCorrupt, "outcome '" + e.outcome + "' is invalid for kind " +
                                             std::string(to_string(e.kind)));
  }
  e.error_excerpt = opt_str("error_excerpt");
  e.artifact_locator = opt_str("artifact_locator");
  e.prompt_hash = str("prompt_hash");
  return e;
}

// ---------------------------------------------------------------------------

TraceStore::TraceStore(fs::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path(), ec);
  fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorKind::StoreUnwritable, path_.string() + ": " + std::strerror(errno));
  std::lock_guard lock(mutex_);
  catch_up();
}

TraceStore::~TraceStore() {
  if (fd_ >= 0) ::close(fd_);
}

void TraceStore::catch_up() {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  in.seekg(static_cast<std::streamoff>(scanned_));
  std::string chunk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  scanned_ += chunk.size();
  partial_ += chunk;
  std::size_t start = 0;
  while (true) {
    const auto eol = partial_.find('\n', start);
    if (eol == std::string::npos) break;
    try {
      keys_.insert(decode_event(std::string_view(partial_).substr(start, eol - start)).key());
    } catch (const Error&) {
      // verify_trace reports bad lines; appends only care about keys
    }
    start = eol + 1;
  }
  partial_.erase(0, start);
}

void TraceStore::append_event(const TraceEvent& event) {
  if (event.ts_end < event.ts_start) throw Error(ErrorKind::TraceCorrupt, "event ends before it starts");
  const std::string line = encode_event(event) + "\n";

  std::lock_guard lock(mutex_);
  // Serializes the duplicate check and the write against other processes.
  while (::flock(fd_, LOCK_EX) != 0) {
    if (errno != EINTR) throw Error(ErrorKind::StoreUnwritable, path_.string() + ": flock: " + std::strerror(errno));
  }
  struct Unlock {
    int fd;
    ~Unlock() { ::flock(fd, LOCK_UN); }
  } unlock{fd_};
  catch_up();
  if (keys_.contains(event.key())) throw Error(ErrorKind::DuplicateEvent, key_text(event.key()));

  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorKind::StoreUnwritable, path_.string() + ": " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fdatasync(fd_) != 0 && errno != EINVAL) {
    throw Error(ErrorKind::StoreUnwritable, path_.string() + ": fdatasync: " + std::strerror(errno));
  }
  keys_.insert(event.key());
}

// ---------------------------------------------------------------------------

std::vector<TraceEvent> load_events(const fs::path& path) {
  const std::string data = read_all(path);
  std::vector<TraceEvent> events;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(data)) {
    ++line_no;
    if (!line.complete) break;  // writer mid-append
    if (line.text.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      events.push_back(decode_event(line.text));
    } catch (const Error& e) {
      throw Error(ErrorKind::TraceCorrupt, path.string() + " line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  return events;
}

std::vector<TraceEvent> load_run(const fs::path& path, std::string_view run_id) {
  std::vector<TraceEvent> events;
  for (auto& e : load_events(path)) {
    if (e.run_id == run_id) events.push_back(std::move(e));
  }
  if (events.empty()) throw Error(ErrorKind::RunNotFound, std::string(run_id));
  return events;
}

std::vector<TraceIssue> verify_trace(const fs::path& path) {
  std::vector<TraceIssue> issues;
  std::string data;
  try {
    data = read_all(path);
  } catch (const Error& e) {
    return {{0, e.detail()}};
  }
  std::map<TraceEvent::Key, std::size_t> first_seen;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(data)) {
    ++line_no;
    if (!line.complete) {
      issues.push_back({line_no, "malformed record: truncated final line"});
      continue;
    }
    TraceEvent e;
    try {
      e = decode_event(line.text);
    } catch (const Error& ex) {
      issues.push_back({line_no, ex.detail()});
      continue;
    }
    if (e.ts_end < e.ts_start) issues.push_back({line_no, "ts_end precedes ts_start"});
    auto [it, inserted] = first_seen.emplace(e.key(), line_no);
    if (!inserted) {
      issues.push_back({line_no, "duplicate event " + key_text(e.key()) + ", first seen at line " +
                                     std::to_string(it->second)});
    }
  }
  return issues;
}

}  // namespace tinyforge
