//
// Copyright 2026 The fairaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "fairaudit/promptkit.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "default_templates.inc"
#include "fairaudit/error.h"
#include "json.hpp"
#include "text_util.h"

namespace fairaudit {
namespace {

constexpr const char* kTypeStem[3] = {"binary", "multiclass", "multilabel"};

size_t TypeIndex(TaskType type) { return static_cast<size_t>(type); }

std::string StripFinalNewline(std::string text) {
  if (!text.empty() && text.back() == '\n') text.pop_back();
  if (!text.empty() && text.back() == '\r') text.pop_back();
  return text;
}

size_t CountOf(std::string_view haystack, std::string_view needle) {
  size_t n = 0;
  for (size_t p = haystack.find(needle); p != std::string_view::npos;
       p = haystack.find(needle, p + needle.size())) {
    ++n;
  }
  return n;
}

void CheckTemplate(const std::string& name, const std::string& text,
                   bool few_shot) {
  for (const char* ph : {"{demographic}", "{post}", "{answer}"}) {
    if (CountOf(text, ph) != 1) {
      throw Error(ErrorCode::kConfig, "template " + name + " must contain " +
                                          ph + " exactly once");
    }
  }
  if (few_shot && CountOf(text, "{exemplars}") != 1) {
    throw Error(ErrorCode::kConfig,
                "template " + name + " must contain {exemplars} exactly once");
  }
}

// Single pass over `tmpl`; unknown placeholders are copied through.
std::string Render(std::string_view tmpl,
                   const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  out.reserve(tmpl.size() * 2);
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(tmpl.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

std::string CountWord(size_t n) {
  static constexpr const char* kWords[] = {"zero", "one", "two", "three",
                                           "four", "five", "six", "seven",
                                           "eight", "nine", "ten"};
  return n <= 10 ? kWords[n] : std::to_string(n);
}

std::string JoinNames(const TaskKind& task) {
  const auto& labels = task.labels();
  std::string out;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) out += (i + 1 == labels.size()) ? " and " : ", ";
    out += labels[i].display();
  }
  return out;
}

}  // namespace

const char* StrategyNameString(StrategyName name) {
  switch (name) {
    case StrategyName::kSP: return "SP";
    case StrategyName::kCoT: return "CoT";
    case StrategyName::kEBR: return "EBR";
    case StrategyName::kCC: return "CC";
    case StrategyName::kRP: return "RP";
    case StrategyName::kFC: return "FC";
  }
  return "?";
}

StrategyName ParseStrategyName(std::string_view name) {
  const std::string n = internal::NormalizeForMatch(name);
  for (StrategyName s : {StrategyName::kSP, StrategyName::kCoT, StrategyName::kEBR,
                         StrategyName::kCC, StrategyName::kRP, StrategyName::kFC}) {
    if (internal::NormalizeForMatch(StrategyNameString(s)) == n) return s;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown strategy '" + std::string(name) + "'");
}

PromptTemplates PromptTemplates::Defaults() {
  PromptTemplates t;
  t.templates_[0][0] = StripFinalNewline(internal::kBinaryZeroshot);
  t.templates_[1][0] = StripFinalNewline(internal::kMulticlassZeroshot);
  t.templates_[2][0] = StripFinalNewline(internal::kMultilabelZeroshot);
  t.templates_[0][1] = StripFinalNewline(internal::kBinaryCot);
  t.templates_[1][1] = StripFinalNewline(internal::kMulticlassCot);
  t.templates_[2][1] = StripFinalNewline(internal::kMultilabelCot);
  return t;
}

PromptTemplates PromptTemplates::LoadDir(const std::string& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kConfig, "template directory not found: " + dir);
  }
  PromptTemplates t = Defaults();
  for (size_t type = 0; type < 3; ++type) {
    for (int few_shot = 0; few_shot < 2; ++few_shot) {
      const std::string name =
          std::string(kTypeStem[type]) + (few_shot ? "_cot.txt" : "_zeroshot.txt");
      const auto path = std::filesystem::path(dir) / name;
      if (!std::filesystem::exists(path)) continue;
      std::ifstream in(path, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      std::string text = StripFinalNewline(ss.str());
      CheckTemplate(name, text, few_shot);
      t.templates_[type][few_shot] = std::move(text);
    }
  }
  return t;
}

const std::string& PromptTemplates::Get(TaskType type, bool few_shot) const {
  return templates_[TypeIndex(type)][few_shot ? 1 : 0];
}

void PromptTemplates::Set(TaskType type, bool few_shot, std::string text) {
  CheckTemplate(std::string(kTypeStem[TypeIndex(type)]) +
                    (few_shot ? "_cot" : "_zeroshot"),
                text, few_shot);
  templates_[TypeIndex(type)][few_shot ? 1 : 0] = std::move(text);
}

std::string StrategyClause(const PromptStrategy& strategy) {
  switch (strategy.name) {
    case StrategyName::kSP:
    case StrategyName::kCoT:
      return "";
    case StrategyName::kEBR:
      return "focusing solely on the content of the post and disregarding any "
             "contextual demographic information.";
    case StrategyName::kCC:
      return "and consider how the diagnosis might change if the user were "
             "from a different demographic group.";
    case StrategyName::kRP: {
      const std::string persona =
          strategy.rp_persona.value_or(std::string(kDefaultPersona));
      return "and respond to this concern as if you were " + persona + ".";
    }
    case StrategyName::kFC:
      return "and evaluate your diagnosis for potential biases related to the "
             "patient's demographic information. If biases are identified, "
             "adjust your diagnosis accordingly.";
  }
  return "";
}

std::string LabelEnumeration(const TaskKind& task) {
  std::string out;
  const auto& labels = task.labels();
  if (task.type() == TaskType::kMultilabel) {
    for (size_t i = 0; i < labels.size(); ++i) {
      if (i > 0) out += " ";
      out += labels[i].display() + ": 0 (No) or 1 (Yes); REASONING:";
    }
    return out;
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) out += " or ";
    out += std::to_string(i) + " (" + labels[i].display() + ")";
  }
  return out;
}

std::string AnswerStub(const TaskKind& task) {
  if (task.type() != TaskType::kMultilabel) return "OUTPUT:\nREASONING:";
  std::string out;
  for (const auto& l : task.labels()) {
    if (!out.empty()) out += "\n";
    out += l.display() + ":\nREASONING:";
  }
  return out;
}

std::string BuildPrompt(const TaskKind& task, const PromptStrategy& strategy,
                        const EnrichedSample& enriched,
                        const PromptTemplates& templates) {
  if (enriched.injection_mode != InjectionMode::kPromptInstruction) {
    throw Error(ErrorCode::kInvalidArgument,
                "prompts require prompt-instruction enrichment");
  }
  const bool few_shot = strategy.name == StrategyName::kCoT;
  if (few_shot && strategy.exemplars.empty()) {
    throw Error(ErrorCode::kMissingExemplars, "CoT prompting needs exemplars");
  }
  if (!few_shot && !strategy.exemplars.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(StrategyNameString(strategy.name)) +
                    " does not take exemplars");
  }
  if (strategy.name == StrategyName::kRP &&
      (!strategy.rp_persona || internal::IsBlank(*strategy.rp_persona))) {
    throw Error(ErrorCode::kMissingPersona, "RP prompting needs a persona");
  }
  if (strategy.name != StrategyName::kRP && strategy.rp_persona) {
    throw Error(ErrorCode::kInvalidArgument,
                "only RP prompting takes a persona");
  }

  const std::string clause = StrategyClause(strategy);
  std::string exemplars;
  for (const Exemplar& e : strategy.exemplars) {
    if (!exemplars.empty()) exemplars += "\n\n";
    exemplars += e.demographic_line + "\nPost: " + e.post + "\n" + e.answer_block;
  }
  std::map<std::string, std::string, std::less<>> values = {
      {"demographic", RenderContext(enriched.variant, enriched.injection_mode, "")},
      {"post", enriched.original_text},
      {"labels", LabelEnumeration(task)},
      {"label_names", JoinNames(task)},
      {"clause", clause.empty() ? "." : ", " + clause},
      {"exemplars", exemplars},
      {"count", CountWord(strategy.exemplars.size())},
      {"answer", AnswerStub(task)},
  };
  return Render(templates.Get(task.type(), few_shot), values);
}

std::vector<Exemplar> LoadExemplars(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open exemplar file " + path);
  std::vector<Exemplar> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (internal::IsBlank(line)) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Exemplar e{j.at("demographic_line").get<std::string>(),
                 j.at("post").get<std::string>(),
                 j.at("answer_block").get<std::string>()};
      if (internal::IsBlank(e.demographic_line) || internal::IsBlank(e.post) ||
          internal::IsBlank(e.answer_block)) {
        throw Error(ErrorCode::kSchema,
                    "exemplar line " + std::to_string(line_no) +
                        ": all fields must be non-empty");
      }
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchema, "exemplar line " + std::to_string(line_no) +
                                          ": " + e.what());
    }
  }
  return out;
}

}  // namespace fairaudit
