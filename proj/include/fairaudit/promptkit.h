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

#ifndef FAIRAUDIT_PROMPTKIT_H_
#define FAIRAUDIT_PROMPTKIT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/task.h"
#include "fairaudit/taxonomy.h"

namespace fairaudit {

enum class StrategyName { kSP, kCoT, kEBR, kCC, kRP, kFC };

const char* StrategyNameString(StrategyName name);
StrategyName ParseStrategyName(std::string_view name);

// A worked few-shot example. `answer_block` holds the OUTPUT/REASONING text.
struct Exemplar {
  std::string demographic_line;
  std::string post;
  std::string answer_block;
};

inline constexpr std::string_view kDefaultPersona = "a doctor";

// CoT carries k >= 1 exemplars and RP carries a persona; the other
// strategies carry neither.
struct PromptStrategy {
  StrategyName name = StrategyName::kSP;
  std::vector<Exemplar> exemplars;
  std::optional<std::string> rp_persona;
};

// Prompt templates, one per (task type, zero-shot | few-shot). Placeholders:
//   {demographic}  the "The post is from ..." line
//   {post}         the post text, verbatim
//   {labels}       answer-format enumeration generated from the task labels
//   {label_names}  "A, B and C" list of label display names
//   {clause}       "." or ", <strategy clause>"
//   {exemplars}    rendered exemplar blocks (few-shot only)
//   {count}        number of exemplars, spelled out
//   {answer}       the empty answer stub the model completes
// Substitution is single-pass: text inserted for a placeholder is never
// rescanned.
class PromptTemplates {
 public:
  static PromptTemplates Defaults();

  // Loads <type>_zeroshot.txt / <type>_cot.txt from `dir`; missing files fall
  // back to the defaults. Throws Error(kConfig) for a template that lacks
  // {demographic}, {post} or {answer} exactly once.
  static PromptTemplates LoadDir(const std::string& dir);

  const std::string& Get(TaskType type, bool few_shot) const;
  void Set(TaskType type, bool few_shot, std::string text);

 private:
  std::string templates_[3][2];
};

// The text inserted by fairness-aware strategies; empty for SP and CoT.
std::string StrategyClause(const PromptStrategy& strategy);

// Three worked examples per task type: Dreaddit-style (binary), CAMS-style
// (multiclass) and IRF-style (multilabel).
std::vector<Exemplar> DefaultExemplars(TaskType type);

// JSON Lines, one {"demographic_line", "post", "answer_block"} per line.
std::vector<Exemplar> LoadExemplars(const std::string& path);

// "0 (A) or 1 (B) or 2 (C)" for single-label tasks;
// "A: 0 (No) or 1 (Yes); REASONING: B: ..." for multilabel.
std::string LabelEnumeration(const TaskKind& task);

// "OUTPUT:\nREASONING:" or one "<label>:\nREASONING:" pair per label.
std::string AnswerStub(const TaskKind& task);

// Throws Error(kMissingExemplars), Error(kMissingPersona), or
// Error(kInvalidArgument) when the sample is not in prompt-instruction mode.
std::string BuildPrompt(const TaskKind& task, const PromptStrategy& strategy,
                        const EnrichedSample& enriched,
                        const PromptTemplates& templates =
                            PromptTemplates::Defaults());

}  // namespace fairaudit

#endif  // FAIRAUDIT_PROMPTKIT_H_
