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

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "tinyforge/stage.hpp"

namespace tinyforge {

enum class SectionKind : int {
  ContextSetup = 0,
  Objectives = 1,
  TaskInstructions = 2,
  ErrorHandlingProtocol = 3,
  OutputIndicator = 4,
};

inline constexpr std::array<SectionKind, 5> kSectionOrder = {
    SectionKind::ContextSetup, SectionKind::Objectives, SectionKind::TaskInstructions,
    SectionKind::ErrorHandlingProtocol, SectionKind::OutputIndicator};

/// Enumerator spelling, as used in template files.
std::string_view section_name(SectionKind kind);
std::optional<SectionKind> parse_section(std::string_view name);
/// Heading line emitted in rendered prompts, e.g. "# Error Handling Protocol".
std::string section_heading(SectionKind kind);

/// Slots that exist independently of the stage input.
inline constexpr std::string_view kPriorErrorSlot = "prior_error";
inline constexpr std::string_view kAttemptIndexSlot = "attempt_index";
inline constexpr std::string_view kStageSlot = "stage";

/// True for every name a template may declare: all StageInput field names plus
/// prior_error, attempt_index and stage.
bool is_known_slot(std::string_view name);

struct TemplateSection {
  SectionKind kind;
  std::string body;
};

struct PromptTemplate {
  LifecycleStage stage = LifecycleStage::DataProcessing;
  std::vector<TemplateSection> sections;
  std::vector<std::string> placeholders;
};

/// Placeholder names referenced by `body`, in order of first appearance.
/// Throws TemplateParse on a malformed brace.
std::vector<std::string> referenced_placeholders(std::string_view body);

/// Empty iff every section kind appears exactly once in canonical order, every
/// referenced placeholder is declared and known, and prior_error (if used)
/// appears once, inside the error handling protocol.
std::vector<std::string> lint_template(const PromptTemplate& tmpl);

struct RenderedPrompt {
  std::string text;
  LifecycleStage stage = LifecycleStage::DataProcessing;
  int attempt_index = 1;
  bool contains_error_feedback = false;
};

/// Pure function of its arguments. Sections are emitted in canonical order,
/// each under its heading. A prior error lands in the error handling section
/// only: at the {prior_error} slot when the template has one, otherwise
/// appended to the end of that section.
RenderedPrompt render_prompt(const PromptTemplate& tmpl, const StageInput& input,
                             const std::optional<std::string>& prior_error, int attempt_index);

/// Parses the `== SECTION: <kind> ==` text format. Declared placeholders are
/// the referenced names that are known slots; anything else is left for lint.
PromptTemplate parse_template(LifecycleStage stage, std::string_view text);
PromptTemplate load_template_file(LifecycleStage stage, const std::filesystem::path& path);

/// Stage to template map. Reads may run concurrently with each other.
class TemplateRegistry {
 public:
  /// Throws LintError when the template has issues. Replaces any previous
  /// template for the same stage.
  void register_template(PromptTemplate tmpl);
  /// Throws TemplateNotFound.
  PromptTemplate get(LifecycleStage stage) const;
  bool contains(LifecycleStage stage) const;

  /// Registers dp.txt, mc.txt and sg.txt from `dir`.
  void load_directory(const std::filesystem::path& dir);

 private:
  mutable std::shared_mutex mutex_;
  std::map<LifecycleStage, PromptTemplate> templates_;
};

/// Directory holding the default templates this build ships with.
std::filesystem::path default_template_dir();

}  // namespace tinyforge
