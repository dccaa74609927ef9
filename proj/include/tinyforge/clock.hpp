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
#include <optional>
#include <string>
#include <string_view>

namespace tinyforge {

/// Millisecond-resolution UTC instants; the trace stores nothing finer.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Millis = std::chrono::milliseconds;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() = 0;
  /// Account for time that passed outside this process (e.g. a simulated
  /// provider's latency). Real clocks ignore it.
  virtual void elapse(Millis) {}
};

class WallClock final : public Clock {
 public:
  Timestamp now() override;
};

/// Time moves only through elapse(). Makes simulated runs reproducible.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(Timestamp origin) : now_(origin) {}
  Timestamp now() override { return now_; }
  void elapse(Millis d) override { now_ += d; }

 private:
  Timestamp now_;
};

Timestamp wall_now();

/// RFC 3339 UTC with millisecond precision, e.g. 2026-01-02T03:04:05.678Z.
std::string format_rfc3339(Timestamp ts);
std::optional<Timestamp> parse_rfc3339(std::string_view text);

}  // namespace tinyforge
