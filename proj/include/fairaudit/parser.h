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

#ifndef FAIRAUDIT_PARSER_H_
#define FAIRAUDIT_PARSER_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/task.h"

namespace fairaudit {

enum class ParseStatus { kOk, kFailed };

struct ParsedPrediction {
  ParseStatus status = ParseStatus::kFailed;
  // Set for binary/multiclass tasks when status is kOk.
  std::optional<int> label;
  // One 0/1 entry per task label; set for multilabel tasks when kOk.
  std::optional<std::vector<int>> flags;
  std::optional<std::string> reasoning;
  // Diagnostic for failures, e.g. "no OUTPUT token".
  std::string reason;

  bool ok() const { return status == ParseStatus::kOk; }
  // Annotation view of a successful parse.
  Annotation ToAnnotation() const;
};

// Extracts a prediction from model output. Never throws for malformed text;
// failure is reported through status/reason.
//
// When `prompt` is non-empty and the response starts with it (an echoing
// endpoint), the echoed prefix is removed before matching. The first
// "OUTPUT:" wins for single-label tasks; multilabel tasks look for
// "<label>: d (Yes/No)" lines, matching label names or long names
// case-insensitively.
ParsedPrediction ParseResponse(std::string_view text, const TaskKind& task,
                               std::string_view prompt = {});

// Fraction of failed predictions. Throws Error(kEmptyInput) on an empty list.
double FailureRate(std::span<const ParsedPrediction> predictions);

}  // namespace fairaudit

#endif  // FAIRAUDIT_PARSER_H_
