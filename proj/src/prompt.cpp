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
#include "tinyforge/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>

#include "tinyforge/error.hpp"

#ifndef TINYFORGE_TEMPLATE_DIR
#define TINYFORGE_TEMPLATE_DIR "templates"
#endif

namespace tinyforge {

namespace {

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

/// Walks a body, calling on_text for literal runs and on_slot for {name}.
template <typename OnText, typename OnSlot>
void scan_body(std::string_view body, OnText on_text, OnSlot on_slot) {
  std::size_t i = 0;
  while (i < body.size()) {
    const char c = body[i];
    if (c == '{') {
      if (i + 1 < body.size() && body[i + 1] == '{') {
        on_text(std::string_view("{"));
        i += 2;
        continue;
      }
      std::size_t j = i + 1;
      if (j < body.size() && is_name_start(body[j])) {
        while (j < body.size() && is_name_char(body[j])) ++j;
        if (j < body.size() && body[j] == '}') {
          on_slot(body.substr(i + 1, j - i - 1));
          i = j + 1;
          continue;
        }
      }
      throw Error(ErrorKind::TemplateParse, "unbalanced '{' at offset " + std::to_string(i));
    }
    if (c == '}') {
      if (i + 1 < body.size() && body[i + 1] == '}') {
        on_text(std::string_view("}"));
        i += 2;
        continue;
      }
      throw Error(ErrorKind::TemplateParse, "unbalanced '}' at offset " + std::to_string(i));
    }
    std::size_t j = i;
    while (j < body.size() && body[j] != '{' && body[j] != '}') ++j;
    on_text(body.substr(i, j - i));
    i = j;
  }
}

std::string_view trim_blank_lines(std::string_view s) {
  while (!s.empty() && (s.front() == '\n' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<std::string> slot_value(std::string_view name, const PromptTemplate& tmpl, const StageInput& input,
                                      int attempt_index) {
  if (name == kStageSlot) return std::string(stage_label(tmpl.stage));
  if (name == kAttemptIndexSlot) return std::to_string(attempt_index);
  if (auto field = parse_field(name)) return input.value(*field);
  return std::nullopt;
}

int section_rank(SectionKind k) { return static_cast<int>(k); }

}  // namespace

std::string_view section_name(SectionKind kind) {
  switch (kind) {
    case SectionKind::ContextSetup: return "ContextSetup";
    case SectionKind::Objectives: return "Objectives";
    case SectionKind::TaskInstructions: return "TaskInstructions";
    case SectionKind::ErrorHandlingProtocol: return "ErrorHandlingProtocol";
    case SectionKind::OutputIndicator: return "OutputIndicator";
  }
  return "?";
}

std::optional<SectionKind> parse_section(std::string_view name) {
  for (SectionKind k : kSectionOrder) {
    if (section_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string section_heading(SectionKind kind) {
  switch (kind) {
    case SectionKind::ContextSetup: return "# Context Setup";
    case SectionKind::Objectives: return "# Objectives";
    case SectionKind::TaskInstructions: return "# Task Instructions";
    case SectionKind::ErrorHandlingProtocol: return "# Error Handling Protocol";
    case SectionKind::OutputIndicator: return "# Output Format";
  }
  return "#";
}

bool is_known_slot(std::string_view name) {
  return name == kPriorErrorSlot || name == kAttemptIndexSlot || name == kStageSlot || parse_field(name).has_value();
}

std::vector<std::string> referenced_placeholders(std::string_view body) {
  std::vector<std::string> names;
  scan_body(
      body, [](std::string_view) {},
      [&](std::string_view name) {
        if (std::find(names.begin(), names.end(), name) == names.end()) names.emplace_back(name);
      });
  return names;
}

std::vector<std::string> lint_template(const PromptTemplate& tmpl) {
  std::vector<std::string> issues;

  for (SectionKind k : kSectionOrder) {
    const auto n = std::count_if(tmpl.sections.begin(), tmpl.sections.end(),
                                 [k](const TemplateSection& s) { return s.kind == k; });
    if (n == 0) issues.push_back("missing section " + std::string(section_name(k)));
    if (n > 1) issues.push_back("duplicate section " + std::string(section_name(k)));
  }
  for (std::size_t i = 1; i < tmpl.sections.size(); ++i) {
    if (section_rank(tmpl.sections[i].kind) < section_rank(tmpl.sections[i - 1].kind)) {
      issues.push_back("section order violated at index " + std::to_string(i));
      break;
    }
  }

  for (const auto& name : tmpl.placeholders) {
    if (!is_known_slot(name)) issues.push_back("declared placeholder {" + name + "} is not a known slot");
  }

  int prior_error_uses = 0;
  for (const auto& section : tmpl.sections) {
    std::vector<std::string> used;
    int prior_here = 0;
    try {
      scan_body(
          section.body, [](std::string_view) {},
          [&](std::string_view name) {
            if (name == kPriorErrorSlot) ++prior_here;
            if (std::find(used.begin(), used.end(), name) == used.end()) used.emplace_back(name);
          });
    } catch (const Error& e) {
      issues.push_back("section " + std::string(section_name(section.kind)) + ": " + e.detail());
      continue;
    }
    for (const auto& name : used) {
      if (std::find(tmpl.placeholders.begin(), tmpl.placeholders.end(), name) == tmpl.placeholders.end()) {
        issues.push_back("undeclared placeholder {" + name + "} in section " +
                         std::string(section_name(section.kind)));
      }
    }
    if (prior_here > 0 && section.kind != SectionKind::ErrorHandlingProtocol) {
      issues.push_back("{prior_error} used outside ErrorHandlingProtocol in section " +
                       std::string(section_name(section.kind)));
    }
    prior_error_uses += prior_here;
  }
  if (prior_error_uses > 1) issues.push_back("{prior_error} used more than once");
  return issues;
}

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const StageInput& input,
                             const std::optional<std::string>& prior_error, int attempt_index) {
  if (tmpl.stage != input.stage) {
    throw Error(ErrorKind::WrongStageFields, "template for stage " + std::string(stage_key(tmpl.stage)) +
                                                 " rendered with " + std::string(stage_key(input.stage)) + " input");
  }

  std::vector<const TemplateSection*> ordered;
  for (const auto& s : tmpl.sections) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(), [](const TemplateSection* a, const TemplateSection* b) {
    return section_rank(a->kind) < section_rank(b->kind);
  });

  RenderedPrompt out;
  out.stage = tmpl.stage;
  out.attempt_index = attempt_index;
  out.contains_error_feedback = prior_error.has_value();

  for (const TemplateSection* section : ordered) {
    std::string body;
    bool slot_used = false;
    scan_body(
        trim_blank_lines(section->body), [&](std::string_view text) { body.append(text); },
        [&](std::string_view name) {
          if (name == kPriorErrorSlot) {
            // Only the error handling section may carry the excerpt.
            if (section->kind == SectionKind::ErrorHandlingProtocol && !slot_used) {
              body += prior_error ? *prior_error : std::string("(none, this is the first attempt)");
              slot_used = true;
            }
            return;
          }
          auto value = slot_value(name, tmpl, input, attempt_index);
          if (!value) throw Error(ErrorKind::UnresolvedPlaceholder, std::string(name));
          body += *value;
        });
    std::string text = std::move(body);
    if (section->kind == SectionKind::ErrorHandlingProtocol && prior_error && !slot_used) {
      text += "\n\nError output from the previous attempt:\n" + *prior_error;
    }
    if (!out.text.empty()) out.text += "\n\n";
    out.text += section_heading(section->kind);
    out.text += "\n";
    out.text += text;
  }
  out.text += "\n";
  return out;
}

PromptTemplate parse_template(LifecycleStage stage, std::string_view text) {
  PromptTemplate tmpl;
  tmpl.stage = stage;

  constexpr std::string_view kOpen = "== SECTION: ";
  constexpr std::string_view kClose = " ==";

  std::optional<SectionKind> current;
  std::string body;
  auto flush = [&] {
    if (current) tmpl.sections.push_back({*current, std::string(trim_blank_lines(body))});
    body.clear();
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;

    std::string_view trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) trimmed.remove_suffix(1);

    if (trimmed.starts_with(kOpen) && trimmed.ends_with(kClose) && trimmed.size() > kOpen.size() + kClose.size()) {
      const auto name = trimmed.substr(kOpen.size(), trimmed.size() - kOpen.size() - kClose.size());
      auto kind = parse_section(name);
      if (!kind) {
        throw Error(ErrorKind::TemplateParse, "line " + std::to_string(line_no) + ": unknown section kind '" +
                                                  std::string(name) + "'");
      }
      flush();
      current = kind;
    } else if (current) {
      body.append(line);
      body.push_back('\n');
    } else if (!trimmed.empty()) {
      throw Error(ErrorKind::TemplateParse,
                  "line " + std::to_string(line_no) + ": text before the first section delimiter");
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  flush();

  for (const auto& section : tmpl.sections) {
    std::vector<std::string> names;
    try {
      names = referenced_placeholders(section.body);
    } catch (const Error&) {
      continue;  // reported by lint
    }
    for (auto& n : names) {
      if (is_known_slot(n) && std::find(tmpl.placeholders.begin(), tmpl.placeholders.end(), n) ==
                                  tmpl.placeholders.end()) {
        tmpl.placeholders.push_back(std::move(n));
      }
    }
  }
  return tmpl;
}

PromptTemplate load_template_file(LifecycleStage stage, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::TemplateNotFound, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_template(stage, buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

void TemplateRegistry::register_template(PromptTemplate tmpl) {
  auto issues = lint_template(tmpl);
  if (!issues.empty()) throw LintError(std::move(issues));
  std::unique_lock lock(mutex_);
  templates_[tmpl.stage] = std::move(tmpl);
}

PromptTemplate TemplateRegistry::get(LifecycleStage stage) const {
  std::shared_lock lock(mutex_);
  auto it = templates_.find(stage);
  if (it == templates_.end()) {
    throw Error(ErrorKind::TemplateNotFound, "no template registered for stage " + std::string(stage_key(stage)));
  }
  return it->second;
}

bool TemplateRegistry::contains(LifecycleStage stage) const {
  std::shared_lock lock(mutex_);
  return templates_.contains(stage);
}

void TemplateRegistry::load_directory(const std::filesystem::path& dir) {
  for (LifecycleStage stage : kAllStages) {
    register_template(load_template_file(stage, dir / (std::string(stage_key(stage)) + ".txt")));
  }
}

std::filesystem::path default_template_dir() { return TINYFORGE_TEMPLATE_DIR; }

}  // namespace tinyforge
