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

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fairaudit/error.h"
#include "text_util.h"

namespace fairaudit {
namespace {

std::optional<double> Ratio(int64_t num, int64_t den) {
  if (den <= 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

double F1FromCounts(const ConfusionCounts& c) {
  const double p = Ratio(c.tp, c.tp + c.fp).value_or(0.0);
  const double r = Ratio(c.tp, c.tp + c.fn).value_or(0.0);
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

// Labels whose one-vs-rest rates enter EO: binary tasks use the positive
// class only.
std::vector<size_t> EoLabels(const TaskKind& task) {
  if (task.type() == TaskType::kBinary) return {1};
  std::vector<size_t> out(task.num_labels());
  std::iota(out.begin(), out.end(), size_t{0});
  return out;
}

// Gold/pred pair for one label in one-vs-rest form: 1 = label present.
LabeledPair BinaryView(const Annotation& gold, const Annotation* pred,
                       size_t label, TaskType type) {
  if (type == TaskType::kMultilabel) {
    return {gold.flags[label], pred ? pred->flags[label] : -1};
  }
  const int l = static_cast<int>(label);
  return {gold.label == l ? 1 : 0, pred ? (pred->label == l ? 1 : 0) : -1};
}

// A prediction that is wrong on every label, used for count-as-wrong.
Annotation WrongPrediction(const Annotation& gold, TaskType type) {
  if (type == TaskType::kMultilabel) {
    std::vector<int> flags(gold.flags.size());
    for (size_t i = 0; i < flags.size(); ++i) flags[i] = 1 - gold.flags[i];
    return Annotation::Multi(std::move(flags));
  }
  return Annotation::Single(-1);
}

std::optional<double> MeanOfDefined(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  size_t n = 0;
  for (const auto& x : v) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

std::optional<double> ConfusionCounts::tpr() const { return Ratio(tp, tp + fn); }
std::optional<double> ConfusionCounts::fpr() const { return Ratio(fp, fp + tn); }

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

ConfusionCounts Confusion(std::span<const LabeledPair> pairs, int positive) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "confusion of no pairs");
  ConfusionCounts c;
  for (const LabeledPair& p : pairs) {
    const bool g = p.gold == positive;
    const bool q = p.pred == positive;
    if (g && q) ++c.tp;
    else if (g) ++c.fn;
    else if (q) ++c.fp;
    else ++c.tn;
  }
  return c;
}

GroupRates GroupRates::FromCounts(std::string factor, std::string group,
                                  std::string label, const ConfusionCounts& c) {
  GroupRates r;
  r.factor = std::move(factor);
  r.group = std::move(group);
  r.label = std::move(label);
  r.counts = c;
  r.tpr = c.tpr();
  r.fpr = c.fpr();
  r.support = c.tp + c.fn;
  return r;
}

const char* EoCombineName(EoCombine c) {
  return c == EoCombine::kMean ? "mean" : "max";
}

EoCombine ParseEoCombine(std::string_view name) {
  const std::string n = internal::NormalizeForMatch(name);
  if (n == "mean") return EoCombine::kMean;
  if (n == "max") return EoCombine::kMax;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown EO combination '" + std::string(name) + "'");
}

double PopulationStdDev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

EoComponents EoForFactorDetailed(std::span<const GroupRates> rates,
                                 EoCombine combine) {
  auto gap = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.size() < 2) return std::nullopt;
    if (v.size() == 2) return std::fabs(v[0] - v[1]);
    return PopulationStdDev(v);
  };
  std::vector<double> tprs;
  std::vector<double> fprs;
  for (const GroupRates& r : rates) {
    if (r.tpr) tprs.push_back(*r.tpr);
    if (r.fpr) fprs.push_back(*r.fpr);
  }
  EoComponents out;
  out.tpr_gap = gap(tprs);
  out.fpr_gap = gap(fprs);
  if (out.tpr_gap && out.fpr_gap) {
    out.value = combine == EoCombine::kMean ? (*out.tpr_gap + *out.fpr_gap) / 2.0
                                            : std::max(*out.tpr_gap, *out.fpr_gap);
  } else if (out.tpr_gap) {
    out.value = out.tpr_gap;
  } else if (out.fpr_gap) {
    out.value = out.fpr_gap;
  }
  return out;
}

std::optional<double> EoForFactor(std::span<const GroupRates> rates,
                                  EoCombine combine) {
  return EoForFactorDetailed(rates, combine).value;
}

double EoAggregate(std::span<const LabelEo> per_label) {
  double weighted = 0.0;
  double weight = 0.0;
  double plain = 0.0;
  size_t defined = 0;
  for (const LabelEo& l : per_label) {
    if (!l.eo) continue;
    weighted += *l.eo * static_cast<double>(l.support);
    weight += static_cast<double>(l.support);
    plain += *l.eo;
    ++defined;
  }
  if (defined == 0) {
    throw Error(ErrorCode::kAllUndefined, "no label has a defined EO");
  }
  if (weight > 0.0) return weighted / weight;
  return plain / static_cast<double>(defined);
}

double WeightedF1(std::span<const PredictionPair> pairs, const TaskKind& task) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "F1 of no predictions");
  const size_t k = task.num_labels();
  std::vector<ConfusionCounts> per(k);
  for (const PredictionPair& p : pairs) {
    for (size_t l = 0; l < k; ++l) {
      LabeledPair b = BinaryView(p.gold, &p.pred, l, task.type());
      const bool g = b.gold == 1;
      const bool q = b.pred == 1;
      if (g && q) ++per[l].tp;
      else if (g) ++per[l].fn;
      else if (q) ++per[l].fp;
      else ++per[l].tn;
    }
  }
  double weighted = 0.0;
  int64_t support = 0;
  for (const ConfusionCounts& c : per) {
    const int64_t s = c.tp + c.fn;
    weighted += F1FromCounts(c) * static_cast<double>(s);
    support += s;
  }
  return support > 0 ? weighted / static_cast<double>(support) : 0.0;
}

const char* FailurePolicyName(FailurePolicy p) {
  switch (p) {
    case FailurePolicy::kCountAsWrong: return "count-as-wrong";
    case FailurePolicy::kExclude: return "exclude";
    case FailurePolicy::kRetryOnce: return "retry-once";
  }
  return "?";
}

FailurePolicy ParseFailurePolicy(std::string_view name) {
  const std::string n = internal::NormalizeForMatch(name);
  if (n == "count-as-wrong") return FailurePolicy::kCountAsWrong;
  if (n == "exclude") return FailurePolicy::kExclude;
  if (n == "retry-once" || n == "retry-once-with-format-reminder") {
    return FailurePolicy::kRetryOnce;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown failure policy '" + std::string(name) + "'");
}

std::vector<FactorResult> Stratify(std::span<const ScoredPrediction> predictions,
                                   const TaskKind& task, const Taxonomy& taxonomy,
                                   const MetricOptions& options) {
  std::map<std::string, std::vector<const ScoredPrediction*>, std::less<>> by_group;
  std::map<std::string, std::string, std::less<>> factor_of_group;
  for (const auto& f : taxonomy) {
    for (const auto& v : f.categories) factor_of_group[v.label] = f.name;
  }
  for (const ScoredPrediction& p : predictions) {
    auto it = factor_of_group.find(p.group);
    if (it == factor_of_group.end() || it->second != p.factor) {
      throw Error(ErrorCode::kInvalidArgument,
                  "prediction for unknown variant '" + p.factor + "/" + p.group + "'");
    }
    if (!p.gold.ConsistentWith(task) || (p.pred && !p.pred->ConsistentWith(task))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "annotation inconsistent with task for sample " + p.sample_id);
    }
    by_group[p.group].push_back(&p);
  }

  const std::vector<size_t> eo_labels = EoLabels(task);
  std::vector<FactorResult> results;
  for (const DemographicFactor& f : taxonomy) {
    bool any = std::any_of(f.categories.begin(), f.categories.end(),
                           [&](const auto& v) { return by_group.count(v.label) > 0; });
    if (!any) continue;

    FactorResult fr;
    fr.factor = f.name;

    std::vector<PredictionPair> f1_pairs;
    for (const auto& v : f.categories) {
      for (const ScoredPrediction* p : by_group[v.label]) {
        if (p->pred) {
          f1_pairs.push_back({p->gold, *p->pred});
        } else if (options.failure_policy != FailurePolicy::kExclude) {
          f1_pairs.push_back({p->gold, WrongPrediction(p->gold, task.type())});
        }
      }
    }
    if (!f1_pairs.empty()) fr.f1 = WeightedF1(f1_pairs, task);

    std::vector<LabelEo> label_eos;
    for (size_t l : eo_labels) {
      LabelEoDetail detail;
      detail.label = task.labels()[l].name;
      std::optional<int64_t> group_support;
      for (const auto& v : f.categories) {
        ConfusionCounts c;
        int64_t gold_pos = 0;
        for (const ScoredPrediction* p : by_group[v.label]) {
          LabeledPair b = BinaryView(p->gold, p->pred ? &*p->pred : nullptr, l,
                                     task.type());
          gold_pos += b.gold;
          if (!p->pred) continue;
          if (b.gold == 1 && b.pred == 1) ++c.tp;
          else if (b.gold == 1) ++c.fn;
          else if (b.pred == 1) ++c.fp;
          else ++c.tn;
        }
        if (group_support && *group_support != gold_pos) {
          throw Error(ErrorCode::kInvariant,
                      "groups of factor '" + f.name + "' have unequal gold support "
                      "for label '" + detail.label + "'");
        }
        group_support = gold_pos;
        detail.support += gold_pos;
        detail.groups.push_back(
            GroupRates::FromCounts(f.name, v.label, detail.label, c));
      }
      detail.eo = EoForFactorDetailed(detail.groups, options.eo_combine);
      label_eos.push_back({detail.label, detail.eo.value, detail.support});
      fr.labels.push_back(std::move(detail));
    }
    try {
      fr.eo = EoAggregate(label_eos);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAllUndefined) throw;
    }
    results.push_back(std::move(fr));
  }
  return results;
}

RunMetrics ComputeRunMetrics(std::span<const ScoredPrediction> predictions,
                             const TaskKind& task, const Taxonomy& taxonomy,
                             const MetricOptions& options) {
  RunMetrics m;
  m.factors = Stratify(predictions, task, taxonomy, options);
  std::vector<std::optional<double>> f1s;
  std::vector<std::optional<double>> eos;
  for (const auto& f : m.factors) {
    f1s.push_back(f.f1);
    eos.push_back(f.eo);
  }
  m.f1 = MeanOfDefined(f1s);
  m.eo = MeanOfDefined(eos);
  if (!predictions.empty()) {
    size_t failed = 0;
    for (const auto& p : predictions) failed += p.pred ? 0 : 1;
    m.parse_failure_rate =
        static_cast<double>(failed) / static_cast<double>(predictions.size());
  }
  return m;
}

FairnessReport AggregateRuns(std::span<const RunMetrics> runs) {
  FairnessReport r;
  r.n_runs = static_cast<int64_t>(runs.size());
  if (runs.empty()) return r;

  auto percent_mean_std = [](const std::vector<std::optional<double>>& v,
                             std::optional<double>& mean, double& sd) {
    std::vector<double> defined;
    for (const auto& x : v) {
      if (x) defined.push_back(*x * 100.0);
    }
    if (defined.empty()) return;
    double s = 0.0;
    for (double x : defined) s += x;
    mean = s / static_cast<double>(defined.size());
    sd = PopulationStdDev(defined);
  };

  std::vector<std::optional<double>> f1s;
  std::vector<std::optional<double>> eos;
  double failure = 0.0;
  for (const auto& run : runs) {
    f1s.push_back(run.f1);
    eos.push_back(run.eo);
    failure += run.parse_failure_rate;
  }
  percent_mean_std(f1s, r.f1_weighted, r.f1_std);
  percent_mean_std(eos, r.eo_overall, r.eo_std);
  r.parse_failure_rate = failure / static_cast<double>(runs.size());

  for (size_t i = 0; i < runs.front().factors.size(); ++i) {
    FactorScore fs;
    fs.factor = runs.front().factors[i].factor;
    std::vector<std::optional<double>> ff;
    std::vector<std::optional<double>> fe;
    for (const auto& run : runs) {
      auto it = std::find_if(run.factors.begin(), run.factors.end(),
                             [&](const FactorResult& x) { return x.factor == fs.factor; });
      if (it == run.factors.end()) continue;
      ff.push_back(it->f1);
      fe.push_back(it->eo);
    }
    double unused = 0.0;
    percent_mean_std(ff, fs.f1, unused);
    percent_mean_std(fe, fs.eo, unused);
    r.by_factor.push_back(std::move(fs));
  }
  return r;
}

}  // namespace fairaudit
