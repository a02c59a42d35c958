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

#include "fairaudit/datasets.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "fairaudit/error.h"
#include "json.hpp"
#include "random_util.h"
#include "text_util.h"

namespace fairaudit {
namespace {

std::vector<Label> Names(std::initializer_list<const char*> names) {
  std::vector<Label> out;
  for (const char* n : names) out.push_back({n, ""});
  return out;
}

DatasetSpec Spec(std::string name, TaskType type, std::vector<Label> labels,
                 size_t test_size, std::optional<size_t> subsample = 200) {
  return DatasetSpec{std::move(name), TaskKind(type, std::move(labels)), "",
                     subsample, 3, 0, test_size};
}

[[noreturn]] void Fail(ErrorCode code, size_t line, const std::string& what) {
  throw Error(code, "line " + std::to_string(line) + ": " + what);
}

int ParseFlag(const nlohmann::json& v, size_t line, const std::string& label) {
  if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
  if (v.is_number_integer()) {
    long long f = v.get<long long>();
    if (f == 0 || f == 1) return static_cast<int>(f);
  }
  Fail(ErrorCode::kSchema, line, "label '" + label + "' must be 0 or 1");
}

}  // namespace

std::vector<DatasetSpec> BuiltinSpecs() {
  std::vector<DatasetSpec> specs;
  // Binary tasks put the condition at index 1 (the positive class).
  specs.push_back(Spec("DepEmail", TaskType::kBinary,
                       Names({"Non-depression", "Depression"}), 607));
  specs.push_back(Spec("Dreaddit", TaskType::kBinary,
                       Names({"Non-stress", "Stress"}), 715));
  specs.push_back(Spec("C-SSRS", TaskType::kMulticlass,
                       Names({"Ideation", "Supportive", "Indicator", "Attempt",
                              "Behavior"}),
                       100, std::nullopt));
  // Index order follows the CAMS few-shot exemplars (0 = No Reason).
  specs.push_back(Spec("CAMS", TaskType::kMulticlass,
                       Names({"No Reason", "Bias or Abuse", "Jobs and Careers",
                              "Medication", "Relationship", "Alienation"}),
                       1001));
  specs.push_back(Spec("SWMH", TaskType::kMulticlass,
                       Names({"Anxiety", "Bipolar", "Depression",
                              "SuicideWatch", "Offmychest"}),
                       10883));
  specs.push_back(Spec("IRF", TaskType::kMultilabel,
                       {{"TBe", "Thwarted Belongingness"},
                        {"PBu", "Perceived Burdensomeness"}},
                       1057));
  specs.push_back(Spec("MultiWD", TaskType::kMultilabel,
                       Names({"Spiritual", "Physical", "Intellectual", "Social",
                              "Vocational", "Emotional"}),
                       657));
  specs.push_back(Spec("SAD", TaskType::kMultilabel,
                       Names({"Finance", "Family", "Health", "Emotion", "Work",
                              "Social Relation", "School", "Decision",
                              "Other"}),
                       1370));
  return specs;
}

std::optional<DatasetSpec> FindBuiltinSpec(std::string_view name) {
  const std::string key = internal::NormalizeForMatch(name);
  for (auto& s : BuiltinSpecs()) {
    if (internal::NormalizeForMatch(s.name) == key) return s;
  }
  return std::nullopt;
}

std::vector<Sample> ParseDataset(std::string_view jsonl, const TaskKind& task) {
  std::vector<Sample> out;
  std::set<std::string> ids;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= jsonl.size()) {
    size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (internal::IsBlank(line)) continue;

    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kSchema, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) Fail(ErrorCode::kSchema, line_no, "record is not an object");

    Sample s;
    if (!rec.contains("id")) Fail(ErrorCode::kSchema, line_no, "missing 'id'");
    const auto& jid = rec["id"];
    if (jid.is_string()) {
      s.id = jid.get<std::string>();
    } else if (jid.is_number_integer()) {
      s.id = std::to_string(jid.get<long long>());
    } else {
      Fail(ErrorCode::kSchema, line_no, "'id' must be a string or integer");
    }
    if (!ids.insert(s.id).second) {
      Fail(ErrorCode::kSchema, line_no, "duplicate id '" + s.id + "'");
    }
    if (!rec.contains("text") || !rec["text"].is_string()) {
      Fail(ErrorCode::kSchema, line_no, "missing string 'text'");
    }
    s.text = rec["text"].get<std::string>();
    if (internal::IsBlank(s.text)) Fail(ErrorCode::kSchema, line_no, "empty text");

    if (task.type() == TaskType::kMultilabel) {
      if (!rec.contains("labels") || !rec["labels"].is_object()) {
        Fail(ErrorCode::kSchema, line_no, "missing object 'labels'");
      }
      std::vector<int> flags(task.num_labels(), -1);
      for (const auto& [name, value] : rec["labels"].items()) {
        auto idx = task.FindLabel(name);
        if (!idx) Fail(ErrorCode::kUnknownLabel, line_no, "unknown label '" + name + "'");
        flags[*idx] = ParseFlag(value, line_no, name);
      }
      for (size_t i = 0; i < flags.size(); ++i) {
        if (flags[i] < 0) {
          Fail(ErrorCode::kSchema, line_no,
               "missing value for label '" + task.labels()[i].name + "'");
        }
      }
      s.gold = Annotation::Multi(std::move(flags));
    } else {
      if (!rec.contains("label")) Fail(ErrorCode::kSchema, line_no, "missing 'label'");
      const auto& jl = rec["label"];
      if (jl.is_number_integer()) {
        long long v = jl.get<long long>();
        if (v < 0 || static_cast<size_t>(v) >= task.num_labels()) {
          Fail(ErrorCode::kUnknownLabel, line_no,
               "label index " + std::to_string(v) + " outside [0, " +
                   std::to_string(task.num_labels()) + ")");
        }
        s.gold = Annotation::Single(static_cast<int>(v));
      } else if (jl.is_string()) {
        auto idx = task.FindLabel(jl.get<std::string>());
        if (!idx) {
          Fail(ErrorCode::kUnknownLabel, line_no,
               "unknown label '" + jl.get<std::string>() + "'");
        }
        s.gold = Annotation::Single(static_cast<int>(*idx));
      } else {
        Fail(ErrorCode::kSchema, line_no, "'label' must be an integer or name");
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> LoadDataset(const std::string& path, const TaskKind& task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open dataset " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto samples = ParseDataset(ss.str(), task);
  if (samples.empty()) {
    std::cerr << "warning: dataset " << path << " contains no records\n";
  }
  return samples;
}

std::vector<Sample> Subsample(const std::vector<Sample>& samples,
                              std::optional<size_t> n, uint64_t seed) {
  if (!n) return samples;
  if (*n > samples.size()) {
    throw Error(ErrorCode::kNotEnoughSamples,
                "requested " + std::to_string(*n) + " samples but only " +
                    std::to_string(samples.size()) + " are available");
  }
  std::vector<size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  internal::SplitMix64 rng(seed);
  for (size_t i = 0; i < *n; ++i) {
    size_t j = i + rng.NextBelow(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(*n);
  std::sort(idx.begin(), idx.end());
  std::vector<Sample> out;
  out.reserve(*n);
  for (size_t i : idx) out.push_back(samples[i]);
  return out;
}

std::vector<Sample> SyntheticSamples(const TaskKind& task, size_t n,
                                     uint64_t seed) {
  std::vector<Sample> out;
  out.reserve(n);
  const size_t k = task.num_labels();
  for (size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%05zu", i);
    Sample s;
    s.id = id;
    s.text = "Synthetic post " + std::to_string(i) +
             ": lately I have been thinking about how things are going.";
    if (task.type() == TaskType::kMultilabel) {
      internal::SplitMix64 rng(internal::MixSeed(seed, i));
      std::vector<int> flags(k);
      for (auto& f : flags) f = static_cast<int>(rng.Next() >> 63);
      s.gold = Annotation::Multi(std::move(flags));
    } else {
      s.gold = Annotation::Single(static_cast<int>(i % k));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fairaudit
