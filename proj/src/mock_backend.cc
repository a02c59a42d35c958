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

#include "fairaudit/mock_backend.h"

#include <algorithm>

#include "fairaudit/digest.h"
#include "fairaudit/error.h"
#include "json.hpp"
#include "random_util.h"
#include "text_util.h"

namespace fairaudit {
namespace {

double Clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

bool InUnit(double x) { return x >= 0.0 && x <= 1.0; }

uint64_t DrawSeed(const EnrichedSample& e, const MockBiasProfile& p) {
  std::string key = e.sample_id;
  if (p.coupling == MockCoupling::kIndependent) {
    key.push_back('\0');
    key += e.variant.label;
  }
  return internal::MixSeed(Fnv1a64(key), p.seed);
}

}  // namespace

const char* MockCouplingName(MockCoupling c) {
  return c == MockCoupling::kCounterfactual ? "counterfactual" : "independent";
}

MockCoupling ParseMockCoupling(std::string_view name) {
  const std::string n = internal::NormalizeForMatch(name);
  if (n == "counterfactual") return MockCoupling::kCounterfactual;
  if (n == "independent") return MockCoupling::kIndependent;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown mock coupling '" + std::string(name) + "'");
}

void MockBiasProfile::Validate() const {
  if (!InUnit(base_tpr) || !InUnit(base_fpr) || !InUnit(refusal_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "mock rates must lie in [0, 1]");
  }
}

std::string MockBiasProfile::ToJson() const {
  nlohmann::json deltas = nlohmann::json::object();
  for (const auto& [group, d] : group_deltas) {
    deltas[group] = {{"tpr", d.tpr}, {"fpr", d.fpr}};
  }
  nlohmann::json j = {{"base_tpr", base_tpr},
                      {"base_fpr", base_fpr},
                      {"group_deltas", deltas},
                      {"seed", seed},
                      {"coupling", MockCouplingName(coupling)},
                      {"refusal_rate", refusal_rate}};
  return j.dump();
}

MockBiasProfile MockBiasProfile::FromJson(std::string_view json_text) {
  MockBiasProfile p;
  try {
    auto j = nlohmann::json::parse(json_text);
    p.base_tpr = j.value("base_tpr", p.base_tpr);
    p.base_fpr = j.value("base_fpr", p.base_fpr);
    p.seed = j.value("seed", p.seed);
    p.refusal_rate = j.value("refusal_rate", p.refusal_rate);
    if (j.contains("coupling")) {
      p.coupling = ParseMockCoupling(j["coupling"].get<std::string>());
    }
    if (j.contains("group_deltas")) {
      for (const auto& [group, d] : j["group_deltas"].items()) {
        p.group_deltas[group] = {d.value("tpr", 0.0), d.value("fpr", 0.0)};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("mock profile: ") + e.what());
  }
  p.Validate();
  return p;
}

Annotation MockPlantedLabel(const EnrichedSample& enriched, const TaskKind& task,
                            const MockBiasProfile& profile, bool* refused) {
  double tpr = profile.base_tpr;
  double fpr = profile.base_fpr;
  if (auto it = profile.group_deltas.find(enriched.variant.label);
      it != profile.group_deltas.end()) {
    tpr += it->second.tpr;
    fpr += it->second.fpr;
  }
  tpr = Clamp01(tpr);
  fpr = Clamp01(fpr);

  const uint64_t seed = DrawSeed(enriched, profile);
  const bool refuse =
      internal::SplitMix64(internal::MixSeed(seed, 0x5eed)).NextUnit() <
      profile.refusal_rate;
  if (refused != nullptr) *refused = refuse;
  if (refuse) {
    return task.type() == TaskType::kMultilabel ? Annotation::Multi({})
                                                : Annotation::Single(-1);
  }

  auto draw = [&](size_t label) {
    return internal::SplitMix64(internal::MixSeed(seed, label + 1));
  };
  const Annotation& gold = enriched.gold;
  switch (task.type()) {
    case TaskType::kBinary: {
      const double u = draw(1).NextUnit();
      const bool positive = gold.label == 1 ? u < tpr : u < fpr;
      return Annotation::Single(positive ? 1 : 0);
    }
    case TaskType::kMultilabel: {
      std::vector<int> flags(task.num_labels());
      for (size_t l = 0; l < flags.size(); ++l) {
        const double u = draw(l).NextUnit();
        flags[l] = (gold.flags[l] == 1 ? u < tpr : u < fpr) ? 1 : 0;
      }
      return Annotation::Multi(std::move(flags));
    }
    case TaskType::kMulticlass: {
      internal::SplitMix64 rng = draw(0);
      if (rng.NextUnit() < tpr) return gold;
      int other = static_cast<int>(rng.NextBelow(task.num_labels() - 1));
      if (other >= gold.label) ++other;
      return Annotation::Single(other);
    }
  }
  return gold;
}

std::string RenderAnswer(const Annotation& prediction, const TaskKind& task,
                         std::string_view reasoning) {
  const auto& labels = task.labels();
  if (task.type() != TaskType::kMultilabel) {
    return "OUTPUT: " + std::to_string(prediction.label) + " (" +
           labels[prediction.label].display() + ")\nREASONING: " +
           std::string(reasoning);
  }
  std::string out;
  for (size_t l = 0; l < labels.size(); ++l) {
    if (l > 0) out += "\n";
    const int f = prediction.flags[l];
    out += labels[l].display() + ": " + std::to_string(f) +
           (f == 1 ? " (Yes)" : " (No)") + "\nREASONING: " + std::string(reasoning);
  }
  return out;
}

BackendResponse MockComplete(const EnrichedSample& enriched, const TaskKind& task,
                             const MockBiasProfile& profile) {
  bool refused = false;
  Annotation planted = MockPlantedLabel(enriched, task, profile, &refused);
  BackendResponse r;
  if (refused) {
    r.text = std::string(kMockRefusal);
  } else {
    r.text = RenderAnswer(planted, task,
                          "planted response for " + enriched.sample_id + " (" +
                              enriched.variant.label + ").");
  }
  return r;
}

MockBackend::MockBackend(MockBiasProfile profile) : profile_(std::move(profile)) {
  profile_.Validate();
}

BackendResponse MockBackend::Complete(const std::string& prompt,
                                      const GenerationParams& params,
                                      const RequestContext& context) {
  if (prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "empty prompt");
  if (context.enriched == nullptr || context.task == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "mock backend needs the enriched sample and task");
  }
  ++invocations_;
  MockBiasProfile p = profile_;
  p.seed += params.salt;
  return MockComplete(*context.enriched, *context.task, p);
}

}  // namespace fairaudit
