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

#ifndef FAIRAUDIT_DATASETS_H_
#define FAIRAUDIT_DATASETS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/task.h"
#include "fairaudit/taxonomy.h"

namespace fairaudit {

struct DatasetSpec {
  std::string name;
  TaskKind task;
  std::string source_path;
  // std::nullopt means "all".
  std::optional<size_t> test_subsample = 200;
  int runs = 3;
  uint64_t seed = 0;
  // Size of the published test split; informational.
  size_t reported_test_size = 0;
};

// Specs for the eight supported mental-health datasets. Source paths are
// left empty; the data is not bundled.
std::vector<DatasetSpec> BuiltinSpecs();

// Case-insensitive lookup in BuiltinSpecs().
std::optional<DatasetSpec> FindBuiltinSpec(std::string_view name);

// Reads JSON Lines records:
//   {"id": "...", "text": "...", "label": 1}                (binary/multiclass)
//   {"id": "...", "text": "...", "labels": {"TBe": 1, ...}} (multilabel)
// "label" may also be a label name. Blank lines are skipped. Errors carry the
// 1-based line number: Error(kSchema), Error(kUnknownLabel), Error(kIo).
std::vector<Sample> LoadDataset(const std::string& path, const TaskKind& task);
std::vector<Sample> ParseDataset(std::string_view jsonl, const TaskKind& task);

// Uniform sampling without replacement, deterministic in `seed`. The result
// keeps the input order. std::nullopt returns the input unchanged. Throws
// Error(kNotEnoughSamples) when n exceeds the input size.
std::vector<Sample> Subsample(const std::vector<Sample>& samples,
                              std::optional<size_t> n, uint64_t seed);

// Balanced synthetic samples for offline runs: gold labels cycle through the
// classes (binary/multiclass) or follow a seeded pattern (multilabel).
std::vector<Sample> SyntheticSamples(const TaskKind& task, size_t n,
                                     uint64_t seed);

}  // namespace fairaudit

#endif  // FAIRAUDIT_DATASETS_H_
