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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tinyforge {

enum class ErrorKind {
  // stage inputs and pipeline control
  MissingField,
  PathNotFound,
  WrongStageFields,
  MissingStageInput,
  PreviousStageFailed,
  IncompatibleStagePair,
  InvalidPolicy,
  WorkspaceError,
  // prompt engine
  LintFailure,
  UnresolvedPlaceholder,
  TemplateNotFound,
  TemplateParse,
  // llm gateway
  InvalidRequest,
  ProviderUnreachable,
  RateLimited,
  BadResponse,
  FixtureExhausted,
  NoCode,
  NegativeTokens,
  // executor
  InterpreterNotFound,
  ToolchainNotFound,
  BoardUnknown,
  PortUnavailable,
  PreconditionFailed,
  NotAFailure,
  // trace store
  StoreUnwritable,
  DuplicateEvent,
  RunNotFound,
  TraceCorrupt,
  // metrics
  EmptySampleSet,
  MixedStages,
  UnknownFormat,
  // cli
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `kind()` is the stable part; the
/// message is for humans and usually names the offending field or path.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

class LintError : public Error {
 public:
  explicit LintError(std::vector<std::string> issues);

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

}  // namespace tinyforge
