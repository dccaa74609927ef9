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
#include <array>
#include <cctype>

#include "tinyforge/error.hpp"
#include "tinyforge/llm.hpp"

namespace tinyforge {

namespace {

constexpr std::array<std::string_view, 7> kScriptTags = {"python", "py", "python3", "sh", "bash", "shell", "zsh"};
constexpr std::array<std::string_view, 7> kSketchTags = {"cpp", "c++", "arduino", "ino", "c", "cxx", "cc"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool tag_matches(std::string_view tag, CodeKind kind) {
  if (tag.empty()) return true;
  const std::string t = lower(tag);
  const auto& tags = kind == CodeKind::InterpreterScript ? kScriptTags : kSketchTags;
  return std::find(tags.begin(), tags.end(), t) != tags.end();
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

/// Drops leading whitespace-only lines and all trailing whitespace.
std::string trim_code(std::string_view s) {
  while (!s.empty()) {
    const auto eol = s.find('\n');
    const auto line = s.substr(0, eol);
    if (!is_blank(line)) break;
    if (eol == std::string_view::npos) return {};
    s.remove_prefix(eol + 1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

struct Fence {
  std::string tag;
  std::string body;
};

std::vector<Fence> find_fences(std::string_view content) {
  std::vector<Fence> fences;
  std::optional<Fence> open;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const auto eol = content.find('\n', pos);
    std::string_view line = content.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    std::string_view stripped = line;
    while (!stripped.empty() && (stripped.front() == ' ' || stripped.front() == '\t')) stripped.remove_prefix(1);
    while (!stripped.empty() && std::isspace(static_cast<unsigned char>(stripped.back()))) stripped.remove_suffix(1);

    if (stripped.starts_with("```")) {
      if (open) {
        fences.push_back(std::move(*open));
        open.reset();
      } else {
        std::string_view tag = stripped.substr(3);
        const auto space = tag.find_first_of(" \t{");
        open = Fence{std::string(tag.substr(0, space)), {}};
      }
    } else if (open) {
      open->body.append(line);
      open->body.push_back('\n');
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  if (open) fences.push_back(std::move(*open));  // unterminated: take what is there
  return fences;
}

}  // namespace

CodeKind code_kind_for(LifecycleStage stage) {
  return stage == LifecycleStage::SketchGeneration ? CodeKind::BoardSketch : CodeKind::InterpreterScript;
}

CodeArtifact extract_code(const LLMResponse& response, CodeKind expected) {
  if (is_blank(response.content)) throw Error(ErrorKind::NoCode, "empty response");

  const auto fences = find_fences(response.content);
  if (fences.empty()) {
    return CodeArtifact{trim_code(response.content), expected, false};
  }
  for (const auto& fence : fences) {
    if (!tag_matches(fence.tag, expected)) continue;
    auto code = trim_code(fence.body);
    if (code.empty()) continue;
    return CodeArtifact{std::move(code), expected, true};
  }
  throw Error(ErrorKind::NoCode, std::string("no non-empty fenced block suitable for ") +
                                     (expected == CodeKind::BoardSketch ? "a board sketch" : "an interpreter script"));
}

}  // namespace tinyforge
