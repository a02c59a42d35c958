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

#ifndef FAIRAUDIT_REPORT_H_
#define FAIRAUDIT_REPORT_H_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/metrics.h"

namespace fairaudit {

enum class TableFormat { kDelimited, kMarkdown };

TableFormat ParseTableFormat(std::string_view name);

// Table 2 shape: one row per (model, strategy), F1/EO column pairs per
// dataset, rows and datasets in first-appearance order. The markdown variant
// bolds the best F1 and underlines the best EO per dataset (first occurrence
// wins ties). Both variants end with a footer describing the metric rules.
std::string RenderResultsTable(std::span<const FairnessReport> reports,
                               TableFormat format);

// Per-factor F1/EO, one row per (model, dataset, strategy).
std::string RenderFactorTable(std::span<const FairnessReport> reports,
                              TableFormat format);

struct MitigationRow {
  std::string strategy;  // "Ref", "FC", "EBR", "RP" or "CC"
  double f1 = 0.0;       // percent
  double eo = 0.0;       // percent
  double delta_f1 = 0.0;
  double delta_eo = 0.0;
};

struct MitigationComparison {
  std::string dataset;
  std::string model;
  std::string reference_strategy;  // the strategy the Ref row came from
  std::vector<MitigationRow> rows;
};

// Builds a comparison with deltas against the Ref row. Throws
// Error(kMissingReference) unless exactly one row is named "Ref".
MitigationComparison MakeMitigation(std::string dataset, std::string model,
                                    std::string reference_strategy,
                                    std::vector<MitigationRow> rows);

// (ref_eo - eo) / ref_eo in percent; empty when ref_eo is 0.
std::optional<double> EoImprovementPercent(double ref_eo, double eo);

// Table 4 shape with a relative-improvement column. Throws
// Error(kMissingReference) without a Ref row.
std::string RenderMitigation(const MitigationComparison& comparison,
                             TableFormat format);

enum class ErrorType {
  kMisinterpretation,
  kSentimentMisjudgment,
  kOverinterpretation,
  kAmbiguity,
  kDemographicBias,
};

inline constexpr std::array<ErrorType, 5> kAllErrorTypes = {
    ErrorType::kMisinterpretation, ErrorType::kSentimentMisjudgment,
    ErrorType::kOverinterpretation, ErrorType::kAmbiguity,
    ErrorType::kDemographicBias};

const char* ErrorTypeName(ErrorType t);
// Accepts "DemographicBias", "demographic bias", "demographic_bias", ...
ErrorType ParseErrorType(std::string_view name);

struct ErrorTag {
  std::string sample_id;
  std::string variant;
  std::string model;
  ErrorType tag = ErrorType::kMisinterpretation;
  std::string annotator;
  std::string note;
};

// One JSON record per line; Error(kSchema) with the line number on bad rows.
std::vector<ErrorTag> ParseAnnotations(std::string_view jsonl);
std::vector<ErrorTag> LoadAnnotations(const std::string& path);

struct ErrorDistribution {
  std::vector<std::string> size_classes;  // S, M, L order
  // size class -> percentage per error type (kAllErrorTypes order)
  std::map<std::string, std::array<double, 5>> percent;
  std::map<std::string, int64_t> totals;
};

// Percentage of each error type within each size class ("S", "M", "L").
// Throws Error(kEmptyInput) for no tags and Error(kInvalidArgument) for a
// model without a size class.
ErrorDistribution ComputeErrorDistribution(
    std::span<const ErrorTag> tags,
    const std::map<std::string, std::string>& size_class_of);

std::string RenderErrorDistribution(const ErrorDistribution& dist,
                                    TableFormat format);

}  // namespace fairaudit

#endif  // FAIRAUDIT_REPORT_H_
