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

#include <gtest/gtest.h>

#include "fairaudit/datasets.h"
#include "fairaudit/error.h"
#include "fairaudit/metrics.h"
#include "fairaudit/parser.h"

namespace fairaudit {
namespace {

TaskKind Task(const std::string& dataset) { return FindBuiltinSpec(dataset)->task; }

// Runs the mock over synthetic samples and scores it.
std::vector<ScoredPrediction> Score(const TaskKind& task, const Taxonomy& tax,
                                    const MockBiasProfile& profile, size_t n) {
  std::vector<ScoredPrediction> out;
  for (const Sample& s : SyntheticSamples(task, n, 7)) {
    for (const EnrichedSample& e : Enrich(s, tax, InjectionMode::kPromptInstruction)) {
      const auto parsed = ParseResponse(MockComplete(e, task, profile).text, task);
      std::optional<Annotation> pred;
      if (parsed.ok()) pred = parsed.ToAnnotation();
      out.push_back({e.sample_id, e.variant.factor, e.variant.label, e.gold, pred});
    }
  }
  return out;
}

TEST(MockProfileTest, JsonRoundTrip) {
  MockBiasProfile p;
  p.base_tpr = 0.7;
  p.base_fpr = 0.1;
  p.group_deltas["female"] = {0.0, 0.3};
  p.seed = 42;
  p.coupling = MockCoupling::kIndependent;
  p.refusal_rate = 0.05;
  const MockBiasProfile q = MockBiasProfile::FromJson(p.ToJson());
  EXPECT_EQ(q.ToJson(), p.ToJson());
  EXPECT_DOUBLE_EQ(q.group_deltas.at("female").fpr, 0.3);
  EXPECT_EQ(q.coupling, MockCoupling::kIndependent);
}

TEST(MockProfileTest, Validation) {
  MockBiasProfile p;
  p.base_tpr = 1.5;
  EXPECT_THROW(p.Validate(), Error);
  p.base_tpr = 0.5;
  p.refusal_rate = -0.1;
  EXPECT_THROW(p.Validate(), Error);
  EXPECT_THROW(MockBiasProfile::FromJson("{not json"), Error);
  EXPECT_THROW(ParseMockCoupling("sometimes"), Error);
}

TEST(MockBackendTest, AnswersRoundTripThroughTheParser) {
  const Taxonomy tax = BuildTaxonomy();
  for (const char* name : {"Dreaddit", "CAMS", "IRF", "SAD", "SWMH"}) {
    const TaskKind task = Task(name);
    MockBiasProfile profile;
    for (const Sample& s : SyntheticSamples(task, 5, 1)) {
      for (const EnrichedSample& e : Enrich(s, tax, InjectionMode::kPromptInstruction)) {
        const Annotation planted = MockPlantedLabel(e, task, profile);
        const auto parsed = ParseResponse(MockComplete(e, task, profile).text, task);
        ASSERT_TRUE(parsed.ok()) << name << ": " << parsed.reason;
        EXPECT_EQ(parsed.ToAnnotation(), planted) << name;
      }
    }
  }
}

TEST(MockBackendTest, DeterministicAndSaltSensitive) {
  const TaskKind task = Task("CAMS");
  const Taxonomy tax = BuildTaxonomy();
  MockBiasProfile profile;
  profile.base_tpr = 0.5;
  MockBackend a(profile);
  MockBackend b(profile);
  const auto samples = SyntheticSamples(task, 20, 3);
  GenerationParams p;
  GenerationParams salted;
  salted.salt = 1;
  int differ = 0;
  for (const Sample& s : samples) {
    const auto enriched = Enrich(s, tax, InjectionMode::kPromptInstruction);
    RequestContext ctx{&enriched[0], &task};
    const std::string x = a.Complete("prompt", p, ctx).text;
    EXPECT_EQ(x, b.Complete("prompt", p, ctx).text);
    differ += x != a.Complete("prompt", salted, ctx).text ? 1 : 0;
  }
  EXPECT_GT(differ, 0);
  EXPECT_EQ(a.invocations(), 40);
  EXPECT_THROW(a.Complete("prompt", p, {}), Error);
}

TEST(MockBackendTest, RefusalsFailToParse) {
  const TaskKind task = Task("Dreaddit");
  MockBiasProfile profile;
  profile.refusal_rate = 1.0;
  const auto preds = Score(task, RestrictTaxonomy(BuildTaxonomy(), {"gender"}), profile, 10);
  for (const auto& p : preds) EXPECT_FALSE(p.pred);
  EXPECT_FALSE(ParseResponse(kMockRefusal, task).ok());
}

TEST(MockBackendTest, CounterfactualNullProfileHasNoGap) {
  const TaskKind task = Task("Dreaddit");
  const Taxonomy tax = BuildTaxonomy();
  const auto preds = Score(task, tax, MockBiasProfile{}, 50);
  const RunMetrics m = ComputeRunMetrics(preds, task, tax, {});
  for (const auto& f : m.factors) EXPECT_NEAR(*f.eo, 0.0, 1e-12) << f.factor;
}

TEST(MockBackendTest, IndependentCouplingAddsNoise) {
  const TaskKind task = Task("Dreaddit");
  const Taxonomy tax = RestrictTaxonomy(BuildTaxonomy(), {"gender"});
  MockBiasProfile profile;
  profile.coupling = MockCoupling::kIndependent;
  const RunMetrics m = ComputeRunMetrics(Score(task, tax, profile, 50), task, tax, {});
  EXPECT_GT(*m.factors[0].eo, 0.0);
}

TEST(MockBackendTest, PlantedFprGapIsRecovered) {
  const TaskKind task = Task("Dreaddit");
  const Taxonomy tax = RestrictTaxonomy(BuildTaxonomy(), {"gender"});
  MockBiasProfile profile;
  profile.group_deltas["female"] = {0.0, 0.3};
  const RunMetrics m = ComputeRunMetrics(Score(task, tax, profile, 400), task, tax, {});
  // TPR gap 0, FPR gap near 0.3, so EO near 0.15.
  EXPECT_NEAR(*m.factors[0].eo, 0.15, 0.03);
  EXPECT_NEAR(*m.factors[0].labels[0].eo.tpr_gap, 0.0, 1e-12);
}

TEST(MockBackendTest, RenderAnswerFormats) {
  const TaskKind binary = Task("Dreaddit");
  EXPECT_NE(RenderAnswer(Annotation::Single(1), binary, "r").find("OUTPUT: 1"),
            std::string::npos);
  const TaskKind irf = Task("IRF");
  const std::string multi = RenderAnswer(Annotation::Multi({1, 0}), irf, "r");
  const auto parsed = ParseResponse(multi, irf);
  ASSERT_TRUE(parsed.ok());
  EXPECT_EQ(*parsed.flags, (std::vector<int>{1, 0}));
}

}  // namespace
}  // namespace fairaudit
