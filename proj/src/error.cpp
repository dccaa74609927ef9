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
#include "tinyforge/error.hpp"

namespace tinyforge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::PathNotFound: return "PathNotFound";
    case ErrorKind::WrongStageFields: return "WrongStageFields";
    case ErrorKind::MissingStageInput: return "MissingStageInput";
    case ErrorKind::PreviousStageFailed: return "PreviousStageFailed";
    case ErrorKind::IncompatibleStagePair: return "IncompatibleStagePair";
    case ErrorKind::InvalidPolicy: return "InvalidPolicy";
    case ErrorKind::WorkspaceError: return "WorkspaceError";
    case ErrorKind::LintFailure: return "LintFailure";
    case ErrorKind::UnresolvedPlaceholder: return "UnresolvedPlaceholder";
    case ErrorKind::TemplateNotFound: return "TemplateNotFound";
    case ErrorKind::TemplateParse: return "TemplateParse";
    case ErrorKind::InvalidRequest: return "InvalidRequest";
    case ErrorKind::ProviderUnreachable: return "ProviderUnreachable";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::BadResponse: return "BadResponse";
    case ErrorKind::FixtureExhausted: return "FixtureExhausted";
    case ErrorKind::NoCode: return "NoCode";
    case ErrorKind::NegativeTokens: return "NegativeTokens";
    case ErrorKind::InterpreterNotFound: return "InterpreterNotFound";
    case ErrorKind::ToolchainNotFound: return "ToolchainNotFound";
    case ErrorKind::BoardUnknown: return "BoardUnknown";
    case ErrorKind::PortUnavailable: return "PortUnavailable";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::NotAFailure: return "NotAFailure";
    case ErrorKind::StoreUnwritable: return "StoreUnwritable";
    case ErrorKind::DuplicateEvent: return "DuplicateEvent";
    case ErrorKind::RunNotFound: return "RunNotFound";
    case ErrorKind::TraceCorrupt: return "TraceCorrupt";
    case ErrorKind::EmptySampleSet: return "EmptySampleSet";
    case ErrorKind::MixedStages: return "MixedStages";
    case ErrorKind::UnknownFormat: return "UnknownFormat";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += issue;
  }
  return out;
}

}  // namespace

LintError::LintError(std::vector<std::string> issues)
    : Error(ErrorKind::LintFailure, join_issues(issues)), issues_(std::move(issues)) {}

}  // namespace tinyforge
