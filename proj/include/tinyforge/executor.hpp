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
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tinyforge/clock.hpp"
#include "tinyforge/llm.hpp"
#include "tinyforge/stage.hpp"

namespace tinyforge {

enum class ExecutionKind { InterpreterScript, ToolchainCompile, ToolchainUpload };

struct ExecutionSpec {
  ExecutionKind kind = ExecutionKind::InterpreterScript;
  /// Script file, sketch directory, or binary, depending on kind.
  std::filesystem::path code_or_binary_path;
  std::filesystem::path workspace;
  std::string board_id;
  std::string port;
  Millis timeout{300000};
};

struct ExecutionOutcome {
  /// Exit status; nullopt means the process was killed at the timeout.
  std::optional<int> exit_status;
  std::string stdout_text;
  std::string stderr_text;
  Millis duration{0};
  bool succeeded = false;
  /// Set by a successful compile.
  std::optional<std::filesystem::path> binary;

  bool timed_out() const { return !exit_status.has_value(); }
};

enum class ExcerptOrigin { Stderr, Stdout, ExitOnly, Timeout };

struct ErrorExcerpt {
  std::string text;
  ExcerptOrigin origin = ExcerptOrigin::Stderr;
};

inline constexpr std::size_t kMaxExcerptChars = 4000;

/// Tail of stderr, else tail of stdout, else a synthesized line. Throws
/// NotAFailure for a successful outcome.
ErrorExcerpt summarize_error(const ExecutionOutcome& outcome, Millis timeout);

struct ScriptRunner {
  std::string interpreter = "python3";
  /// Extra variables passed through from the parent environment. PATH always is.
  std::vector<std::string> env_whitelist;
};

/// Runs `interpreter <script>` with cwd = workspace, a scrubbed environment,
/// full stdout/stderr capture, and a hard kill of the process group at the
/// timeout. Throws InterpreterNotFound, PreconditionFailed.
ExecutionOutcome execute_script(const ExecutionSpec& spec, const ScriptRunner& runner = {});

/// Resolves a bare program name against PATH.
std::optional<std::filesystem::path> find_program(std::string_view name);

// ---------------------------------------------------------------------------
// Toolchains

class ToolchainAdapter {
 public:
  virtual ~ToolchainAdapter() = default;
  virtual ExecutionOutcome compile(const std::filesystem::path& sketch_dir, const std::string& board_id,
                                   Millis timeout) = 0;
  virtual ExecutionOutcome upload(const std::filesystem::path& binary_or_sketch, const std::string& board_id,
                                  const std::string& port, Millis timeout) = 0;
  virtual bool knows_board(const std::string& board_id) const = 0;
};

inline constexpr std::string_view kForceCompileErrorMarker = "// FORCE_COMPILE_ERROR:";

std::vector<std::string> default_known_boards();

/// Offline stand-in. A source line `// FORCE_COMPILE_ERROR: <msg>` fails the
/// compile with stderr `<msg>`; anything else writes a placeholder binary to
/// <sketch_dir>/build/<stem>.bin. Upload always succeeds.
class MockToolchain final : public ToolchainAdapter {
 public:
  explicit MockToolchain(std::vector<std::string> known_boards = default_known_boards())
      : known_boards_(std::move(known_boards)) {}

  ExecutionOutcome compile(const std::filesystem::path& sketch_dir, const std::string& board_id,
                           Millis timeout) override;
  ExecutionOutcome upload(const std::filesystem::path& binary_or_sketch, const std::string& board_id,
                          const std::string& port, Millis timeout) override;
  bool knows_board(const std::string& board_id) const override;

 private:
  std::vector<std::string> known_boards_;
};

/// Shells out to `arduino-cli compile --fqbn <board> <sketch_dir>` and
/// `arduino-cli upload -p <port> --fqbn <board> <sketch_dir>`.
class ArduinoCliToolchain final : public ToolchainAdapter {
 public:
  ArduinoCliToolchain(std::string binary, std::vector<std::string> known_boards = {});

  ExecutionOutcome compile(const std::filesystem::path& sketch_dir, const std::string& board_id,
                           Millis timeout) override;
  ExecutionOutcome upload(const std::filesystem::path& binary_or_sketch, const std::string& board_id,
                          const std::string& port, Millis timeout) override;
  /// With an empty board list any well-formed FQBN (vendor:arch:board) passes.
  bool knows_board(const std::string& board_id) const override;

  std::vector<std::string> compile_command(const std::filesystem::path& sketch_dir,
                                           const std::string& board_id) const;
  std::vector<std::string> upload_command(const std::filesystem::path& sketch_dir, const std::string& board_id,
                                          const std::string& port) const;

 private:
  std::string binary_;
  std::vector<std::string> known_boards_;
};

/// Validates the spec then delegates. Throws BoardUnknown, PreconditionFailed.
ExecutionOutcome compile_sketch(const ExecutionSpec& spec, ToolchainAdapter& toolchain);
/// Throws PreconditionFailed (missing binary or port), PortUnavailable.
ExecutionOutcome upload_binary(const ExecutionSpec& spec, ToolchainAdapter& toolchain);

// ---------------------------------------------------------------------------
// Stage execution

/// Where each stage must leave its output, relative to the attempt directory.
/// DP: any file under artifacts/. MC: artifacts/model_int8.tflite, nonzero.
/// SG: the compiled binary.
std::string_view stage_output_contract(LifecycleStage stage);

struct StageExecution {
  ExecutionOutcome outcome;
  /// True when the stage's success criterion holds, not just exit status 0.
  bool accepted = false;
  std::optional<std::filesystem::path> artifact;
  /// Set whenever accepted is false.
  std::optional<ErrorExcerpt> error;
};

class Executor {
 public:
  virtual ~Executor() = default;
  /// Runs generated code inside `attempt_dir`. Attempt-level failures come
  /// back as data; only infrastructure faults throw.
  virtual StageExecution execute(LifecycleStage stage, const CodeArtifact& code,
                                 const std::filesystem::path& attempt_dir, const StageInput& input,
                                 Millis timeout) = 0;
};

struct WorkspaceExecutorOptions {
  ScriptRunner runner;
  std::string script_name = "main.py";
  std::string sketch_name = "sketch";
  /// Upload after a successful compile; needs a port.
  bool upload = false;
  std::string port;
};

/// DP/MC: writes the script and runs it. SG: lays out <sketch>/<sketch>.ino,
/// compiles, optionally uploads. Captures stdout.txt/stderr.txt next to the code.
class WorkspaceExecutor final : public Executor {
 public:
  WorkspaceExecutor(WorkspaceExecutorOptions options, std::shared_ptr<ToolchainAdapter> toolchain);

  StageExecution execute(LifecycleStage stage, const CodeArtifact& code, const std::filesystem::path& attempt_dir,
                         const StageInput& input, Millis timeout) override;

 private:
  WorkspaceExecutorOptions options_;
  std::shared_ptr<ToolchainAdapter> toolchain_;
};

}  // namespace tinyforge
