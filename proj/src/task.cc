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

#include "fairaudit/task.h"

#include <set>

#include "fairaudit/error.h"
#include "text_util.h"

namespace fairaudit {

const char* TaskTypeName(TaskType type) {
  switch (type) {
    case TaskType::kBinary: return "binary";
    case TaskType::kMulticlass: return "multiclass";
    case TaskType::kMultilabel: return "multilabel";
  }
  return "unknown";
}

TaskType ParseTaskType(std::string_view name) {
  std::string n = internal::NormalizeForMatch(name);
  if (n == "binary") return TaskType::kBinary;
  if (n == "multiclass" || n == "multi-class") return TaskType::kMulticlass;
  if (n == "multilabel" || n == "multi-label") return TaskType::kMultilabel;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown task type '" + std::string(name) + "'");
}

TaskKind::TaskKind(TaskType type, std::vector<Label> labels)
    : type_(type), labels_(std::move(labels)) {
  const size_t n = labels_.size();
  bool ok = (type_ == TaskType::kBinary && n == 2) ||
            (type_ == TaskType::kMulticlass && n >= 3) ||
            (type_ == TaskType::kMultilabel && n >= 2);
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(TaskTypeName(type_)) + " task cannot have " +
                    std::to_string(n) + " labels");
  }
  std::set<std::string> seen;
  for (const Label& l : labels_) {
    if (internal::IsBlank(l.name)) {
      throw Error(ErrorCode::kInvalidArgument, "empty label name");
    }
    for (const std::string* s : {&l.name, &l.long_name}) {
      if (s->empty()) continue;
      if (!seen.insert(internal::NormalizeForMatch(*s)).second) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate label name '" + *s + "'");
      }
    }
  }
}

std::optional<size_t> TaskKind::FindLabel(std::string_view name) const {
  const std::string key = internal::NormalizeForMatch(name);
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (internal::NormalizeForMatch(labels_[i].name) == key) return i;
    if (!labels_[i].long_name.empty() &&
        internal::NormalizeForMatch(labels_[i].long_name) == key) {
      return i;
    }
  }
  return std::nullopt;
}

bool Annotation::ConsistentWith(const TaskKind& task) const {
  if (task.type() == TaskType::kMultilabel) {
    if (label != -1 || flags.size() != task.num_labels()) return false;
    for (int f : flags) {
      if (f != 0 && f != 1) return false;
    }
    return true;
  }
  return flags.empty() && label >= 0 &&
         static_cast<size_t>(label) < task.num_labels();
}

}  // namespace fairaudit
