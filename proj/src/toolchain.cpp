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
#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "detail/process.hpp"
#include "tinyforge/error.hpp"
#include "tinyforge/executor.hpp"

namespace tinyforge {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path sketch_source(const fs::path& sketch_dir) {
  return sketch_dir / (sketch_dir.filename().string() + ".ino");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<std::string> default_known_boards() {
  return {"arduino:mbed_nano:nano33ble", "arduino:mbed_nano:nanorp2040connect", "arduino:avr:uno",
          "arduino:avr:nano", "arduino:mbed_portenta:envie_m7", "esp32:esp32:esp32"};
}

// ---------------------------------------------------------------------------

ExecutionOutcome MockToolchain::compile(const fs::path& sketch_dir, const std::string& board_id, Millis) {
  const auto started = std::chrono::steady_clock::now();
  ExecutionOutcome outcome;
  const auto source = read_file(sketch_source(sketch_dir));
  if (!source) {
    outcome.exit_status = 1;
    outcome.stderr_text = "Error opening sketch: " + sketch_source(sketch_dir).filename().string() + " not found\n";
    return outcome;
  }
  std::istringstream lines(*source);
  std::string line;
  while (std::getline(lines, line)) {
    const std::string t = trim(line);
    if (t.starts_with(kForceCompileErrorMarker)) {
      outcome.exit_status = 1;
      outcome.stderr_text = trim(std::string_view(t).substr(kForceCompileErrorMarker.size()));
      outcome.duration = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - started);
      return outcome;
    }
  }
  const fs::path build = sketch_dir / "build";
  fs::create_directories(build);
  const fs::path binary = build / (sketch_dir.filename().string() + ".ino.bin");
  {
    std::ofstream out(binary, std::ios::binary | std::ios::trunc);
    out << "MOCKBIN " << board_id << " " << source->size() << "\n";
  }
  outcome.exit_status = 0;
  outcome.succeeded = true;
  outcome.binary = binary;
  outcome.stdout_text = "Sketch uses " + std::to_string(source->size()) + " bytes of program storage space.\n";
  outcome.duration = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - started);
  return outcome;
}

ExecutionOutcome MockToolchain::upload(const fs::path&, const std::string&, const std::string& port, Millis) {
  ExecutionOutcome outcome;
  outcome.exit_status = 0;
  outcome.succeeded = true;
  outcome.stdout_text = "Upload to " + port + " complete\n";
  return outcome;
}

bool MockToolchain::knows_board(const std::string& board_id) const {
  return std::find(known_boards_.begin(), known_boards_.end(), board_id) != known_boards_.end();
}

// ---------------------------------------------------------------------------

ArduinoCliToolchain::ArduinoCliToolchain(std::string binary, std::vector<std::string> known_boards)
    : binary_(std::move(binary)), known_boards_(std::move(known_boards)) {}

std::vector<std::string> ArduinoCliToolchain::compile_command(const fs::path& sketch_dir,
                                                              const std::string& board_id) const {
  return {binary_, "compile", "--fqbn", board_id, sketch_dir.string()};
}

std::vector<std::string> ArduinoCliToolchain::upload_command(const fs::path& sketch_dir, const std::string& board_id,
                                                             const std::string& port) const {
  return {binary_, "upload", "-p", port, "--fqbn", board_id, sketch_dir.string()};
}

bool ArduinoCliToolchain::knows_board(const std::string& board_id) const {
  if (!known_boards_.empty()) {
    return std::find(known_boards_.begin(), known_boards_.end(), board_id) != known_boards_.end();
  }
  static const std::regex fqbn(R"(^[A-Za-z0-9_.-]+:[A-Za-z0-9_.-]+:[A-Za-z0-9_.-]+(:.+)?$)");
  return std::regex_match(board_id, fqbn);
}

namespace {

ExecutionOutcome run_tool(std::vector<std::string> argv, const fs::path& cwd, Millis timeout) {
  const auto program = find_program(argv.front());
  if (!program) throw Error(ErrorKind::ToolchainNotFound, argv.front());
  argv.front() = program->string();
  // The CLI keeps its cores and caches under HOME.
  return detail::run_process(argv, cwd, detail::scrubbed_environment(cwd, {"HOME", "ARDUINO_DIRECTORIES_DATA"}),
                             timeout);
}

}  // namespace

ExecutionOutcome ArduinoCliToolchain::compile(const fs::path& sketch_dir, const std::string& board_id,
                                              Millis timeout) {
  return run_tool(compile_command(sketch_dir, board_id), sketch_dir.parent_path(), timeout);
}

ExecutionOutcome ArduinoCliToolchain::upload(const fs::path& binary_or_sketch, const std::string& board_id,
                                             const std::string& port, Millis timeout) {
  std::error_code ec;
  if (port.empty() || (port.front() == '/' && !fs::exists(port, ec))) {
    throw Error(ErrorKind::PortUnavailable, port.empty() ? "no port configured" : port);
  }
  // arduino-cli uploads from the sketch directory, not from the binary.
  fs::path sketch_dir = fs::is_directory(binary_or_sketch, ec) ? binary_or_sketch : binary_or_sketch.parent_path();
  if (sketch_dir.filename() == "build") sketch_dir = sketch_dir.parent_path();
  return run_tool(upload_command(sketch_dir, board_id, port), sketch_dir.parent_path(), timeout);
}

// ---------------------------------------------------------------------------

ExecutionOutcome compile_sketch(const ExecutionSpec& spec, ToolchainAdapter& toolchain) {
  if (spec.kind != ExecutionKind::ToolchainCompile) {
    throw Error(ErrorKind::PreconditionFailed, "compile_sketch needs a ToolchainCompile spec");
  }
  if (spec.timeout <= Millis::zero()) throw Error(ErrorKind::PreconditionFailed, "timeout must be positive");
  if (spec.board_id.empty() || !toolchain.knows_board(spec.board_id)) {
    throw Error(ErrorKind::BoardUnknown, spec.board_id.empty() ? "<empty>" : spec.board_id);
  }
  std::error_code ec;
  if (!fs::is_regular_file(sketch_source(spec.code_or_binary_path), ec)) {
    throw Error(ErrorKind::PreconditionFailed,
                "sketch directory must hold <dirname>.ino: " + spec.code_or_binary_path.string());
  }
  return toolchain.compile(spec.code_or_binary_path, spec.board_id, spec.timeout);
}

ExecutionOutcome upload_binary(const ExecutionSpec& spec, ToolchainAdapter& toolchain) {
  if (spec.kind != ExecutionKind::ToolchainUpload) {
    throw Error(ErrorKind::PreconditionFailed, "upload_binary needs a ToolchainUpload spec");
  }
  std::error_code ec;
  if (spec.code_or_binary_path.empty() || !fs::exists(spec.code_or_binary_path, ec)) {
    throw Error(ErrorKind::PreconditionFailed, "binary does not exist: " + spec.code_or_binary_path.string());
  }
  if (spec.port.empty()) throw Error(ErrorKind::PreconditionFailed, "no port specified");
  if (spec.board_id.empty() || !toolchain.knows_board(spec.board_id)) {
    throw Error(ErrorKind::BoardUnknown, spec.board_id.empty() ? "<empty>" : spec.board_id);
  }
  return toolchain.upload(spec.code_or_binary_path, spec.board_id, spec.port, spec.timeout);
}

}  // namespace tinyforge
