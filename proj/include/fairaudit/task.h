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

#ifndef FAIRAUDIT_TASK_H_
#define FAIRAUDIT_TASK_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit {

enum class TaskType { kBinary, kMulticlass, kMultilabel };

const char* TaskTypeName(TaskType type);
TaskType ParseTaskType(std::string_view name);

// A class or aspect. `name` is the short dataset label ("TBe"); `long_name`
// is the spelled-out form used in prompts when present ("Thwarted
// Belongingness").
struct Label {
  std::string name;
  std::string long_name;

  const std::string& display() const {
    return long_name.empty() ? name : long_name;
  }
};

// Task type plus its ordered label set. Label indices are positions in
// labels(), so they are contiguous from 0 by construction.
class TaskKind {
 public:
  // Throws Error(kInvalidArgument) when the label count does not fit the
  // type (binary == 2, multiclass >= 3, multilabel >= 2) or names repeat.
  TaskKind(TaskType type, std::vector<Label> labels);

  TaskType type() const { return type_; }
  const std::vector<Label>& labels() const { return labels_; }
  size_t num_labels() const { return labels_.size(); }

  // Case-insensitive, whitespace-normalised lookup against both name and
  // long_name.
  std::optional<size_t> FindLabel(std::string_view name) const;

 private:
  TaskType type_;
  std::vector<Label> labels_;
};

// Gold or predicted labels for one sample. Binary and multiclass tasks use
// `label`; multilabel tasks use `flags`, one 0/1 entry per task label.
struct Annotation {
  int label = -1;
  std::vector<int> flags;

  static Annotation Single(int label) { return Annotation{label, {}}; }
  static Annotation Multi(std::vector<int> flags) {
    return Annotation{-1, std::move(flags)};
  }

  bool ConsistentWith(const TaskKind& task) const;
  bool operator==(const Annotation&) const = default;
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_TASK_H_
