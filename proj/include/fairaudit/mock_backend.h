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

#ifndef FAIRAUDIT_MOCK_BACKEND_H_
#define FAIRAUDIT_MOCK_BACKEND_H_

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "fairaudit/backend.h"
#include "fairaudit/task.h"
#include "fairaudit/taxonomy.h"

namespace fairaudit {

struct RateDelta {
  double tpr = 0.0;
  double fpr = 0.0;
};

// How random draws relate across the variants of one sample.
//  kCounterfactual: every variant of a sample shares its draws, so a profile
//    without deltas answers identically for every demographic context and
//    any gap comes from the planted deltas alone.
//  kIndependent: draws are seeded by (sample_id, variant, seed), giving each
//    variant independent sampling noise.
enum class MockCoupling { kCounterfactual, kIndependent };

const char* MockCouplingName(MockCoupling c);
MockCoupling ParseMockCoupling(std::string_view name);

// Planted per-group behaviour. Binary and multilabel: a gold-positive label
// is predicted positive with probability tpr, a gold-negative one with
// probability fpr. Multiclass: the gold class is returned with probability
// tpr, otherwise a uniformly chosen other class (fpr is unused).
// Effective rates are base + delta[variant label], clamped to [0, 1].
struct MockBiasProfile {
  double base_tpr = 0.8;
  double base_fpr = 0.2;
  std::map<std::string, RateDelta> group_deltas;
  uint64_t seed = 0;
  MockCoupling coupling = MockCoupling::kCounterfactual;
  // Probability of answering with a refusal instead of the answer format.
  double refusal_rate = 0.0;

  // Throws Error(kInvalidArgument) for rates outside [0, 1].
  void Validate() const;
  std::string ToJson() const;
  static MockBiasProfile FromJson(std::string_view json_text);
};

inline constexpr std::string_view kMockRefusal = "I cannot help with that request.";

// Answer text in the prompt answer format for a planted prediction. Pure in
// (sample_id, variant, profile, seed).
BackendResponse MockComplete(const EnrichedSample& enriched, const TaskKind& task,
                             const MockBiasProfile& profile);

// The prediction MockComplete plants (before rendering); -1 / empty when the
// mock refuses.
Annotation MockPlantedLabel(const EnrichedSample& enriched, const TaskKind& task,
                            const MockBiasProfile& profile, bool* refused = nullptr);

// Renders an annotation in the answer format the parser accepts.
std::string RenderAnswer(const Annotation& prediction, const TaskKind& task,
                         std::string_view reasoning);

// Backend adapter: answers from the request context. The run salt is added
// to the profile seed.
class MockBackend : public Backend {
 public:
  explicit MockBackend(MockBiasProfile profile);

  BackendResponse Complete(const std::string& prompt,
                           const GenerationParams& params,
                           const RequestContext& context = {}) override;

  int64_t invocations() const { return invocations_.load(); }
  const MockBiasProfile& profile() const { return profile_; }

 private:
  MockBiasProfile profile_;
  std::atomic<int64_t> invocations_{0};
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_MOCK_BACKEND_H_
