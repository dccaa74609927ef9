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
#include <fstream>

#include <fmt/format.h>

#include "tinyforge/error.hpp"
#include "tinyforge/executor.hpp"

namespace tinyforge {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::WorkspaceError, "cannot write " + p.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

bool has_regular_file(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return false;
  for (auto it = fs::recursive_directory_iterator(dir, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_regular_file(ec)) return true;
  }
  return false;
}

std::string model_file_name(const StageInput& input) {
  const auto target = input.quantization_target.value_or(QuantizationTarget::Int8);
  return "model_" + std::string(to_string(target)) + ".tflite";
}

/// Embeds the converted model as a C array so the sketch can #include it.
void write_model_header(const fs::path& model, const fs::path& header) {
  std::ifstream in(model, std::ios::binary);
  if (!in) return;
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string out = "// Generated from " + model.filename().string() + "\n#pragma once\n\n";
  out += "alignas(16) const unsigned char g_model[] = {";
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i % 12 == 0) out += "\n ";
    out += fmt::format(" 0x{:02x},", static_cast<unsigned char>(bytes[i]));
  }
  out += "\n};\nconst unsigned int g_model_len = " + std::to_string(bytes.size()) + ";\n";
  write_text(header, out);
}

void strip_prefix(std::string& text, const std::string& prefix) {
  if (prefix.size() < 2) return;
  for (auto p = text.find(prefix); p != std::string::npos; p = text.find(prefix, p)) text.erase(p, prefix.size());
}

/// Interpreters report absolute script paths; excerpts name files relative to the attempt directory.
StageExecution finish(ExecutionOutcome outcome, Millis timeout, const fs::path& attempt_dir) {
  StageExecution r;
  if (!outcome.succeeded) {
    r.error = summarize_error(outcome, timeout);
    std::error_code ec;
    const auto canonical = fs::weakly_canonical(attempt_dir, ec);
    if (!ec) strip_prefix(r.error->text, (canonical / "").string());
    strip_prefix(r.error->text, (attempt_dir / "").string());
  }
  r.outcome = std::move(outcome);
  return r;
}

}  // namespace

std::string_view stage_output_contract(LifecycleStage stage) {
  switch (stage) {
    case LifecycleStage::DataProcessing: return "at least one file under artifacts/";
    case LifecycleStage::ModelConversion: return "a non-empty artifacts/model_int8.tflite";
    case LifecycleStage::SketchGeneration: return "a sketch that compiles for the target board";
  }
  return "";
}

WorkspaceExecutor::WorkspaceExecutor(WorkspaceExecutorOptions options, std::shared_ptr<ToolchainAdapter> toolchain)
    : options_(std::move(options)), toolchain_(std::move(toolchain)) {}

StageExecution WorkspaceExecutor::execute(LifecycleStage stage, const CodeArtifact& code, const fs::path& attempt_dir,
                                          const StageInput& input, Millis timeout) {
  std::error_code ec;
  fs::create_directories(attempt_dir / "artifacts", ec);
  if (ec) throw Error(ErrorKind::WorkspaceError, "cannot create " + attempt_dir.string() + ": " + ec.message());

  if (stage != LifecycleStage::SketchGeneration) {
    const fs::path script = attempt_dir / options_.script_name;
    write_text(script, code.code + "\n");
    ExecutionSpec spec{ExecutionKind::InterpreterScript, script, attempt_dir, {}, {}, timeout};
    StageExecution r = finish(execute_script(spec, options_.runner), timeout, attempt_dir);
    write_text(attempt_dir / "stdout.txt", r.outcome.stdout_text);
    write_text(attempt_dir / "stderr.txt", r.outcome.stderr_text);
    if (!r.outcome.succeeded) return r;

    if (stage == LifecycleStage::DataProcessing) {
      if (has_regular_file(attempt_dir / "artifacts")) {
        r.accepted = true;
        r.artifact = attempt_dir / "artifacts";
      }
    } else {
      const fs::path model = attempt_dir / "artifacts" / model_file_name(input);
      if (fs::is_regular_file(model, ec) && fs::file_size(model, ec) > 0) {
        r.accepted = true;
        r.artifact = model;
      }
    }
    if (!r.accepted) {
      const std::string expected = stage == LifecycleStage::DataProcessing
                                       ? std::string("at least one file under artifacts/")
                                       : "a non-empty artifacts/" + model_file_name(input);
      r.error = ErrorExcerpt{"script exited with status 0 but did not produce " + expected, ExcerptOrigin::ExitOnly};
    }
    return r;
  }

  if (!toolchain_) throw Error(ErrorKind::ToolchainNotFound, "no toolchain adapter configured");
  const fs::path sketch_dir = attempt_dir / options_.sketch_name;
  fs::create_directories(sketch_dir, ec);
  write_text(sketch_dir / (options_.sketch_name + ".ino"), code.code + "\n");
  if (input.converted_model_locator && fs::is_regular_file(*input.converted_model_locator, ec)) {
    write_model_header(*input.converted_model_locator, sketch_dir / "model_data.h");
  }

  const std::string board = input.board_id.value_or("");
  ExecutionSpec compile_spec{ExecutionKind::ToolchainCompile, sketch_dir, attempt_dir, board, {}, timeout};
  StageExecution r = finish(compile_sketch(compile_spec, *toolchain_), timeout, attempt_dir);
  write_text(attempt_dir / "stdout.txt", r.outcome.stdout_text);
  write_text(attempt_dir / "stderr.txt", r.outcome.stderr_text);
  if (!r.outcome.succeeded) return r;

  const fs::path artifact = r.outcome.binary.value_or(sketch_dir);
  if (options_.upload) {
    ExecutionSpec upload_spec{ExecutionKind::ToolchainUpload, artifact, attempt_dir, board, options_.port, timeout};
    auto uploaded = upload_binary(upload_spec, *toolchain_);
    write_text(attempt_dir / "upload_stdout.txt", uploaded.stdout_text);
    write_text(attempt_dir / "upload_stderr.txt", uploaded.stderr_text);
    if (!uploaded.succeeded) return finish(std::move(uploaded), timeout, attempt_dir);
  }
  r.accepted = true;
  r.artifact = artifact;
  return r;
}

}  // namespace tinyforge
