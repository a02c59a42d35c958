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

#ifndef FAIRAUDIT_METRICS_H_
#define FAIRAUDIT_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/task.h"
#include "fairaudit/taxonomy.h"

namespace fairaudit {

struct ConfusionCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;

  int64_t total() const { return tp + fp + tn + fn; }
  // tp / (tp + fn); undefined without gold positives.
  std::optional<double> tpr() const;
  // fp / (fp + tn); undefined without gold negatives.
  std::optional<double> fpr() const;

  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

// A gold/predicted class pair. pred == -1 means "no prediction" and never
// matches a class.
struct LabeledPair {
  int gold;
  int pred;
};

// One-vs-rest counts for `positive`. Binary tasks use positive = 1;
// multilabel callers pass per-label 0/1 pairs with positive = 1.
// Throws Error(kEmptyInput).
ConfusionCounts Confusion(std::span<const LabeledPair> pairs, int positive);

struct GroupRates {
  std::string factor;
  std::string group;
  std::string label;
  ConfusionCounts counts;
  std::optional<double> tpr;
  std::optional<double> fpr;
  // Gold-positive count (tp + fn).
  int64_t support = 0;

  static GroupRates FromCounts(std::string factor, std::string group,
                               std::string label, const ConfusionCounts& c);
};

enum class EoCombine { kMean, kMax };

const char* EoCombineName(EoCombine c);
EoCombine ParseEoCombine(std::string_view name);

struct EoComponents {
  // |a - b| for two groups, population std for more, per rate.
  std::optional<double> tpr_gap;
  std::optional<double> fpr_gap;
  std::optional<double> value;
};

// Equalized-odds gap for one (factor, label). Groups with an undefined rate
// are dropped from that component only; a component needs at least two
// groups. With one computable component EO is that component.
EoComponents EoForFactorDetailed(std::span<const GroupRates> rates,
                                 EoCombine combine = EoCombine::kMean);
std::optional<double> EoForFactor(std::span<const GroupRates> rates,
                                  EoCombine combine = EoCombine::kMean);

double PopulationStdDev(std::span<const double> values);

struct LabelEo {
  std::string label;
  std::optional<double> eo;
  int64_t support = 0;
};

// Support-weighted mean over labels with a defined EO. If every defined
// label has zero support the plain mean is used. Throws Error(kAllUndefined).
double EoAggregate(std::span<const LabelEo> per_label);

struct PredictionPair {
  Annotation gold;
  Annotation pred;
};

// Per-class F1 weighted by gold support (per-label binary F1 weighted by
// gold-positive count for multilabel). F1 is 0 when P + R = 0.
// Throws Error(kEmptyInput).
double WeightedF1(std::span<const PredictionPair> pairs, const TaskKind& task);

enum class FailurePolicy { kCountAsWrong, kExclude, kRetryOnce };

const char* FailurePolicyName(FailurePolicy p);
FailurePolicy ParseFailurePolicy(std::string_view name);

// One scored response with its variant provenance. `pred` is empty when the
// response failed to parse or the request failed.
struct ScoredPrediction {
  std::string sample_id;
  std::string factor;
  std::string group;
  Annotation gold;
  std::optional<Annotation> pred;
};

struct MetricOptions {
  EoCombine eo_combine = EoCombine::kMean;
  // kRetryOnce is resolved before scoring and scores like kCountAsWrong.
  FailurePolicy failure_policy = FailurePolicy::kCountAsWrong;
};

struct LabelEoDetail {
  std::string label;
  EoComponents eo;
  int64_t support = 0;
  std::vector<GroupRates> groups;
};

struct FactorResult {
  std::string factor;
  std::optional<double> f1;
  std::optional<double> eo;
  std::vector<LabelEoDetail> labels;
};

// Per-factor F1 and EO in taxonomy order. Failed predictions are excluded
// from every TPR/FPR; for F1 they count as wrong or are dropped per policy.
// Throws Error(kInvariant) if groups of a factor have unequal gold support.
std::vector<FactorResult> Stratify(std::span<const ScoredPrediction> predictions,
                                   const TaskKind& task, const Taxonomy& taxonomy,
                                   const MetricOptions& options);

struct RunMetrics {
  std::vector<FactorResult> factors;
  std::optional<double> f1;
  std::optional<double> eo;
  double parse_failure_rate = 0.0;
};

RunMetrics ComputeRunMetrics(std::span<const ScoredPrediction> predictions,
                             const TaskKind& task, const Taxonomy& taxonomy,
                             const MetricOptions& options);

struct FactorScore {
  std::string factor;
  std::optional<double> f1;  // percent
  std::optional<double> eo;  // percent
};

// Aggregated result for one (model, dataset, strategy). Percentages are
// exactly 100x the internal rates, averaged over runs.
struct FairnessReport {
  std::string model;
  std::string dataset;
  std::string strategy;
  std::optional<double> f1_weighted;
  std::optional<double> eo_overall;
  double f1_std = 0.0;  // across runs, percent
  double eo_std = 0.0;
  std::vector<FactorScore> by_factor;
  double parse_failure_rate = 0.0;
  int64_t n_samples = 0;
  int64_t n_variants = 0;
  int64_t n_runs = 0;
  std::string eo_combine = "mean";
  std::string failure_policy = "count-as-wrong";
  std::string config_digest;
};

// Averages per-run metrics (population std across runs alongside).
FairnessReport AggregateRuns(std::span<const RunMetrics> runs);

}  // namespace fairaudit

#endif  // FAIRAUDIT_METRICS_H_
