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

#include "fairaudit/metrics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fairaudit/datasets.h"
#include "fairaudit/error.h"
#include "metric_oracles.h"

namespace fairaudit {
namespace {

using testing::OracleEo;
using testing::OracleWeightedF1;
using testing::Pairs;

std::vector<LabeledPair> Labeled(const std::vector<int>& gold, const std::vector<int>& pred) {
  std::vector<LabeledPair> out;
  for (size_t i = 0; i < gold.size(); ++i) out.push_back({gold[i], pred[i]});
  return out;
}

GroupRates Rates(double tpr, double fpr) {
  // 100 positives and 100 negatives reproduce the rates exactly.
  ConfusionCounts c;
  c.tp = static_cast<int64_t>(std::lround(tpr * 100));
  c.fn = 100 - c.tp;
  c.fp = static_cast<int64_t>(std::lround(fpr * 100));
  c.tn = 100 - c.fp;
  return GroupRates::FromCounts("f", "g", "l", c);
}

TaskKind Multiclass(int k) {
  std::vector<Label> labels;
  for (int i = 0; i < k; ++i) labels.push_back({"c" + std::to_string(i), ""});
  return TaskKind(k == 2 ? TaskType::kBinary : TaskType::kMulticlass, labels);
}

std::vector<PredictionPair> Single(const Pairs& pairs) {
  std::vector<PredictionPair> out;
  for (const auto& [g, p] : pairs) {
    out.push_back({Annotation::Single(g), Annotation::Single(p)});
  }
  return out;
}

TEST(ConfusionTest, HandCounts) {
  EXPECT_EQ(Confusion(Labeled({1, 1, 0, 0}, {1, 0, 0, 1}), 1),
            (ConfusionCounts{1, 1, 1, 1}));
  const auto c = Confusion(Labeled({2, 0, 1}, {2, 1, 1}), 1);
  EXPECT_EQ(c.tp, 1);
  EXPECT_EQ(c.fp, 1);
  EXPECT_EQ(c.tn, 1);
  EXPECT_EQ(c.fn, 0);
  const auto perfect = Confusion(Labeled({0, 1, 1, 0}, {0, 1, 1, 0}), 1);
  EXPECT_EQ(perfect.fp, 0);
  EXPECT_EQ(perfect.fn, 0);
  EXPECT_THROW(Confusion({}, 1), Error);
}

TEST(ConfusionTest, UndefinedRates) {
  ConfusionCounts only_neg{0, 1, 3, 0};
  EXPECT_FALSE(only_neg.tpr());
  EXPECT_DOUBLE_EQ(*only_neg.fpr(), 0.25);
  const auto r = GroupRates::FromCounts("f", "g", "l", only_neg);
  EXPECT_FALSE(r.tpr);
  EXPECT_EQ(r.support, 0);
}

TEST(EoTest, Examples) {
  std::vector<GroupRates> same = {Rates(0.7, 0.1), Rates(0.7, 0.1)};
  EXPECT_EQ(*EoForFactor(same), 0.0);
  std::vector<GroupRates> two = {Rates(0.8, 0.2), Rates(0.6, 0.4)};
  EXPECT_NEAR(*EoForFactor(two), 0.2, 1e-12);
  std::vector<GroupRates> three = {Rates(1.0, 0.3), Rates(0.5, 0.3), Rates(0.0, 0.3)};
  EXPECT_NEAR(*EoForFactor(three), std::sqrt(1.0 / 6.0) / 2.0, 1e-12);
  EXPECT_NEAR(*EoForFactor(three), 0.2041, 1e-4);
  EXPECT_NEAR(*EoForFactor(three, EoCombine::kMax), std::sqrt(1.0 / 6.0), 1e-12);
}

TEST(EoTest, UndefinedHandling) {
  std::vector<GroupRates> one = {Rates(0.5, 0.5)};
  EXPECT_FALSE(EoForFactor(one));
  // Second group has no positives: TPR component has one group, so EO is the
  // FPR gap alone.
  std::vector<GroupRates> partial = {
      Rates(0.9, 0.1), GroupRates::FromCounts("f", "h", "l", ConfusionCounts{0, 3, 7, 0})};
  const auto d = EoForFactorDetailed(partial);
  EXPECT_FALSE(d.tpr_gap);
  EXPECT_NEAR(*d.fpr_gap, 0.2, 1e-12);
  EXPECT_NEAR(*d.value, 0.2, 1e-12);
}

TEST(EoTest, SymmetricUnderRelabeling) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<GroupRates> g;
    for (int i = 0; i < 5; ++i) g.push_back(Rates(std::round(u(rng) * 100) / 100, std::round(u(rng) * 100) / 100));
    const double a = *EoForFactor(g);
    std::shuffle(g.begin(), g.end(), rng);
    EXPECT_NEAR(*EoForFactor(g), a, 1e-12);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(EoTest, TwoGroupGapIsTwicePopulationStd) {
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double a = i * 0.05;
      const double b = j * 0.05;
      const std::vector<double> v = {a, b};
      EXPECT_NEAR(std::fabs(a - b), 2.0 * PopulationStdDev(v), 1e-12);
    }
  }
}

TEST(EoAggregateTest, Examples) {
  EXPECT_DOUBLE_EQ(EoAggregate(std::vector<LabelEo>{{"a", 0.3, 5}}), 0.3);
  EXPECT_DOUBLE_EQ(EoAggregate(std::vector<LabelEo>{{"a", 0.2, 3}, {"b", 0.4, 1}}), 0.25);
  EXPECT_DOUBLE_EQ(EoAggregate(std::vector<LabelEo>{{"a", std::nullopt, 3}, {"b", 0.1, 1}}), 0.1);
  try {
    EoAggregate(std::vector<LabelEo>{{"a", std::nullopt, 3}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllUndefined);
  }
}

TEST(WeightedF1Test, Examples) {
  const TaskKind three = Multiclass(3);
  EXPECT_DOUBLE_EQ(WeightedF1(Single({{0, 0}, {1, 1}, {2, 2}}), three), 1.0);
  // A has support 3 and F1 1; B has support 1 and F1 0.
  EXPECT_DOUBLE_EQ(WeightedF1(Single({{0, 0}, {0, 0}, {0, 0}, {1, 2}}), three), 0.75);
  const TaskKind two = Multiclass(2);
  EXPECT_NEAR(WeightedF1(Single({{0, 1}, {0, 1}, {1, 1}, {1, 1}}), two), 1.0 / 3.0, 1e-12);
  EXPECT_THROW(WeightedF1({}, two), Error);
}

TEST(WeightedF1Test, Multilabel) {
  const TaskKind irf = FindBuiltinSpec("IRF")->task;
  std::vector<PredictionPair> v = {
      {Annotation::Multi({1, 0}), Annotation::Multi({1, 0})},
      {Annotation::Multi({1, 1}), Annotation::Multi({0, 1})},
      {Annotation::Multi({0, 1}), Annotation::Multi({1, 1})},
  };
  // TBe: tp1 fp1 fn1 -> F1 .5, support 2. PBu: tp2 -> F1 1, support 2.
  EXPECT_NEAR(WeightedF1(v, irf), 0.75, 1e-12);
}

TEST(WeightedF1Test, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const int k = 2 + static_cast<int>(rng() % 3);
    const Pairs pairs = testing::RandomPairs(rng, k, 20, true);
    EXPECT_NEAR(WeightedF1(Single(pairs), Multiclass(k)), OracleWeightedF1(pairs, k), 1e-12);
  }
}

TEST(EoTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 1000; ++t) {
    const int k = 2 + static_cast<int>(rng() % 3);
    const int n_groups = 1 + static_cast<int>(rng() % 5);
    const int target = static_cast<int>(rng() % static_cast<uint64_t>(k));
    std::vector<Pairs> groups;
    std::vector<GroupRates> rates;
    for (int g = 0; g < n_groups; ++g) {
      groups.push_back(testing::RandomPairs(rng, k, 20, false));
      std::vector<LabeledPair> lp;
      for (const auto& [a, b] : groups.back()) lp.push_back({a, b});
      rates.push_back(GroupRates::FromCounts("f", std::to_string(g), "l", Confusion(lp, target)));
    }
    for (bool use_max : {false, true}) {
      const auto got = EoForFactor(rates, use_max ? EoCombine::kMax : EoCombine::kMean);
      const auto want = OracleEo(groups, target, use_max);
      ASSERT_EQ(got.has_value(), want.has_value());
      if (got) {
        EXPECT_NEAR(*got, *want, 1e-12);
      }
    }
  }
}

// Balanced factor: the same two samples appear under each group.
std::vector<ScoredPrediction> Balanced(const std::vector<std::string>& groups,
                                       const std::string& factor,
                                       const std::vector<std::vector<int>>& preds) {
  std::vector<ScoredPrediction> out;
  const std::vector<int> gold = {1, 0, 1, 0};
  for (size_t g = 0; g < groups.size(); ++g) {
    for (size_t i = 0; i < gold.size(); ++i) {
      std::optional<Annotation> pred;
      if (preds[g][i] != -2) pred = Annotation::Single(preds[g][i]);
      out.push_back({"s" + std::to_string(i), factor, groups[g],
                     Annotation::Single(gold[i]), pred});
    }
  }
  return out;
}

TEST(StratifyTest, PerFactorScores) {
  const Taxonomy tax = RestrictTaxonomy(BuildTaxonomy(), {"gender"});
  const TaskKind task = Multiclass(2);
  // male: perfect. female: one false positive.
  const auto preds = Balanced({"male", "female"}, "gender", {{1, 0, 1, 0}, {1, 1, 1, 0}});
  const auto r = Stratify(preds, task, tax, {});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].factor, "gender");
  // TPR 1/1, FPR 0 vs .5 -> EO .25
  EXPECT_NEAR(*r[0].eo, 0.25, 1e-12);
  ASSERT_EQ(r[0].labels.size(), 1u);  // binary: positive class only
  EXPECT_EQ(r[0].labels[0].label, "c1");
  const Pairs pooled = {{1, 1}, {0, 0}, {1, 1}, {0, 0}, {1, 1}, {0, 1}, {1, 1}, {0, 0}};
  EXPECT_NEAR(*r[0].f1, OracleWeightedF1(pooled, 2), 1e-12);
}

TEST(StratifyTest, FailuresCountAsWrongForF1AndAreExcludedFromRates) {
  const Taxonomy tax = RestrictTaxonomy(BuildTaxonomy(), {"gender"});
  const TaskKind task = Multiclass(2);
  const auto preds = Balanced({"male", "female"}, "gender", {{1, 0, 1, 0}, {-2, 0, 1, 0}});
  MetricOptions wrong;
  const auto a = Stratify(preds, task, tax, wrong);
  const Pairs pooled = {{1, 1}, {0, 0}, {1, 1}, {0, 0}, {1, -1}, {0, 0}, {1, 1}, {0, 0}};
  EXPECT_NEAR(*a[0].f1, OracleWeightedF1(pooled, 2), 1e-12);
  // Female TPR from the one remaining positive: 1/1, so EO is 0.
  EXPECT_NEAR(*a[0].eo, 0.0, 1e-12);
  MetricOptions exclude;
  exclude.failure_policy = FailurePolicy::kExclude;
  const auto b = Stratify(preds, task, tax, exclude);
  EXPECT_NEAR(*b[0].f1, 1.0, 1e-12);
}

TEST(StratifyTest, UnequalSupportIsAnInvariantViolation) {
  const Taxonomy tax = RestrictTaxonomy(BuildTaxonomy(), {"gender"});
  auto preds = Balanced({"male", "female"}, "gender", {{1, 0, 1, 0}, {1, 0, 1, 0}});
  preds.back().gold = Annotation::Single(1);
  try {
    Stratify(preds, Multiclass(2), tax, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvariant);
  }
}

TEST(StratifyTest, MulticlassWeightsLabelsBySupport) {
  const Taxonomy tax = RestrictTaxonomy(BuildTaxonomy(), {"gender"});
  const TaskKind task = Multiclass(3);
  std::vector<ScoredPrediction> preds;
  const std::vector<int> gold = {0, 0, 0, 1, 2, 2};
  const std::vector<int> male = {0, 0, 0, 1, 2, 2};
  const std::vector<int> female = {0, 0, 1, 1, 2, 0};
  std::vector<Pairs> groups(2);
  for (size_t i = 0; i < gold.size(); ++i) {
    preds.push_back({"s" + std::to_string(i), "gender", "male", Annotation::Single(gold[i]),
                     Annotation::Single(male[i])});
    preds.push_back({"s" + std::to_string(i), "gender", "female", Annotation::Single(gold[i]),
                     Annotation::Single(female[i])});
    groups[0].push_back({gold[i], male[i]});
    groups[1].push_back({gold[i], female[i]});
  }
  const auto r = Stratify(preds, task, tax, {});
  double weighted = 0;
  double total = 0;
  for (int c = 0; c < 3; ++c) {
    double support = 0;
    for (int g : gold) support += g == c ? 2 : 0;  // both groups
    weighted += *OracleEo(groups, c) * support;
    total += support;
  }
  EXPECT_NEAR(*r[0].eo, weighted / total, 1e-12);
}

TEST(RunMetricsTest, AggregationAndPercentages) {
  RunMetrics a;
  a.factors = {{"gender", 0.8, 0.1, {}}, {"age", 0.6, 0.3, {}}};
  a.f1 = 0.7;
  a.eo = 0.2;
  a.parse_failure_rate = 0.1;
  RunMetrics b = a;
  b.f1 = 0.9;
  b.eo = 0.4;
  b.parse_failure_rate = 0.3;
  const std::vector<RunMetrics> runs = {a, b};
  const FairnessReport r = AggregateRuns(runs);
  EXPECT_EQ(r.n_runs, 2);
  EXPECT_NEAR(*r.f1_weighted, 80.0, 1e-9);
  EXPECT_NEAR(*r.eo_overall, 30.0, 1e-9);
  EXPECT_NEAR(r.f1_std, 10.0, 1e-9);
  EXPECT_NEAR(r.parse_failure_rate, 0.2, 1e-12);
  ASSERT_EQ(r.by_factor.size(), 2u);
  EXPECT_NEAR(*r.by_factor[0].f1, 80.0, 1e-9);
  EXPECT_NEAR(*r.by_factor[1].eo, 30.0, 1e-9);
}

TEST(RunMetricsTest, OverallIsMeanOfFactors) {
  const Taxonomy tax = RestrictTaxonomy(BuildTaxonomy(), {"gender", "age"});
  std::vector<ScoredPrediction> preds =
      Balanced({"male", "female"}, "gender", {{1, 0, 1, 0}, {1, 1, 0, 0}});
  for (auto& p : Balanced({"child", "young adult", "middle-aged adult", "older adult"}, "age",
                          {{1, 0, 1, 0}, {1, 1, 1, 0}, {0, 0, 1, 0}, {1, 0, 1, 1}})) {
    preds.push_back(p);
  }
  const RunMetrics m = ComputeRunMetrics(preds, Multiclass(2), tax, {});
  ASSERT_EQ(m.factors.size(), 2u);
  EXPECT_NEAR(*m.eo, (*m.factors[0].eo + *m.factors[1].eo) / 2.0, 1e-15);
  EXPECT_NEAR(*m.f1, (*m.factors[0].f1 + *m.factors[1].f1) / 2.0, 1e-15);
}

TEST(PolicyNamesTest, RoundTrip) {
  for (auto p : {FailurePolicy::kCountAsWrong, FailurePolicy::kExclude, FailurePolicy::kRetryOnce}) {
    EXPECT_EQ(ParseFailurePolicy(FailurePolicyName(p)), p);
  }
  EXPECT_EQ(ParseEoCombine("MAX"), EoCombine::kMax);
  EXPECT_THROW(ParseEoCombine("median"), Error);
}

}  // namespace
}  // namespace fairaudit
