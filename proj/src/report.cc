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

#include "fairaudit/report.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fairaudit/error.h"
#include "json.hpp"
#include "text_util.h"

namespace fairaudit {
namespace {

using internal::FormatFixed;

std::string Cell(const std::optional<double>& v) {
  return v ? FormatFixed(*v, 1) : "-";
}

// Writes one table row in either format.
void Row(std::ostringstream& out, const std::vector<std::string>& cells,
         TableFormat format) {
  if (format == TableFormat::kDelimited) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out << '\t';
      out << cells[i];
    }
    out << '\n';
    return;
  }
  out << '|';
  for (const auto& c : cells) out << ' ' << c << " |";
  out << '\n';
}

void HeaderRule(std::ostringstream& out, size_t n, TableFormat format) {
  if (format != TableFormat::kMarkdown) return;
  out << '|';
  for (size_t i = 0; i < n; ++i) out << " --- |";
  out << '\n';
}

void FooterLine(std::ostringstream& out, const std::string& text,
                TableFormat format) {
  if (format == TableFormat::kDelimited) {
    out << "# " << text << '\n';
  } else {
    out << "\n_" << text << "_\n";
  }
}

void Footer(std::ostringstream& out, std::span<const FairnessReport> reports,
            TableFormat format) {
  std::vector<std::string> seen;
  for (const FairnessReport& r : reports) {
    std::string line = "EO combine: " + r.eo_combine +
                       "; failed parses: " + r.failure_policy +
                       "; undefined TPR/FPR groups are dropped per component";
    if (!r.config_digest.empty()) line += "; config " + r.config_digest;
    if (std::find(seen.begin(), seen.end(), line) == seen.end()) {
      seen.push_back(line);
    }
  }
  if (reports.empty()) return;
  for (const auto& line : seen) FooterLine(out, line, format);
  for (const FairnessReport& r : reports) {
    FooterLine(out,
               "parse failures " + r.model + "/" + r.dataset + "/" + r.strategy +
                   ": " + FormatFixed(r.parse_failure_rate * 100.0, 1) + "%",
               format);
  }
}

template <typename T>
size_t IndexOf(std::vector<T>& v, const T& x) {
  auto it = std::find(v.begin(), v.end(), x);
  if (it != v.end()) return static_cast<size_t>(it - v.begin());
  v.push_back(x);
  return v.size() - 1;
}

std::string Lower(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

TableFormat ParseTableFormat(std::string_view name) {
  const std::string n = Lower(name);
  if (n == "tsv" || n == "delimited") return TableFormat::kDelimited;
  if (n == "markdown" || n == "md") return TableFormat::kMarkdown;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown table format '" + std::string(name) + "'");
}

std::string RenderResultsTable(std::span<const FairnessReport> reports,
                               TableFormat format) {
  using RowKey = std::pair<std::string, std::string>;
  std::vector<RowKey> rows;
  std::vector<std::string> datasets;
  for (const FairnessReport& r : reports) {
    IndexOf(rows, RowKey{r.model, r.strategy});
    IndexOf(datasets, r.dataset);
  }
  // cells[row][dataset]
  std::vector<std::vector<const FairnessReport*>> cells(
      rows.size(), std::vector<const FairnessReport*>(datasets.size(), nullptr));
  for (const FairnessReport& r : reports) {
    const size_t i = IndexOf(rows, RowKey{r.model, r.strategy});
    const size_t j = IndexOf(datasets, r.dataset);
    if (!cells[i][j]) cells[i][j] = &r;
  }

  // Best F1 (highest) and best EO (lowest) per dataset, first occurrence.
  std::vector<std::optional<size_t>> best_f1(datasets.size());
  std::vector<std::optional<size_t>> best_eo(datasets.size());
  for (size_t j = 0; j < datasets.size(); ++j) {
    for (size_t i = 0; i < rows.size(); ++i) {
      const FairnessReport* r = cells[i][j];
      if (!r) continue;
      if (r->f1_weighted &&
          (!best_f1[j] || *r->f1_weighted > *cells[*best_f1[j]][j]->f1_weighted)) {
        best_f1[j] = i;
      }
      if (r->eo_overall &&
          (!best_eo[j] || *r->eo_overall < *cells[*best_eo[j]][j]->eo_overall)) {
        best_eo[j] = i;
      }
    }
  }

  std::ostringstream out;
  std::vector<std::string> header = {"Model", "Strategy"};
  for (const auto& d : datasets) {
    if (format == TableFormat::kDelimited) {
      header.push_back(d + "_F1");
      header.push_back(d + "_EO");
    } else {
      header.push_back(d + " F1");
      header.push_back(d + " EO");
    }
  }
  Row(out, header, format);
  HeaderRule(out, header.size(), format);
  for (size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> line = {rows[i].first, rows[i].second};
    for (size_t j = 0; j < datasets.size(); ++j) {
      const FairnessReport* r = cells[i][j];
      std::string f1 = r ? Cell(r->f1_weighted) : "-";
      std::string eo = r ? Cell(r->eo_overall) : "-";
      if (format == TableFormat::kMarkdown) {
        if (best_f1[j] == i) f1 = "**" + f1 + "**";
        if (best_eo[j] == i) eo = "<u>" + eo + "</u>";
      }
      line.push_back(std::move(f1));
      line.push_back(std::move(eo));
    }
    Row(out, line, format);
  }
  Footer(out, reports, format);
  return out.str();
}

std::string RenderFactorTable(std::span<const FairnessReport> reports,
                              TableFormat format) {
  std::vector<std::string> factors;
  for (const FairnessReport& r : reports) {
    for (const FactorScore& f : r.by_factor) IndexOf(factors, f.factor);
  }
  std::ostringstream out;
  std::vector<std::string> header = {"Model", "Dataset", "Strategy"};
  for (const auto& f : factors) {
    header.push_back(format == TableFormat::kDelimited ? f + "_F1" : f + " F1");
    header.push_back(format == TableFormat::kDelimited ? f + "_EO" : f + " EO");
  }
  Row(out, header, format);
  HeaderRule(out, header.size(), format);
  for (const FairnessReport& r : reports) {
    std::vector<std::string> line = {r.model, r.dataset, r.strategy};
    for (const auto& f : factors) {
      auto it = std::find_if(r.by_factor.begin(), r.by_factor.end(),
                             [&](const FactorScore& s) { return s.factor == f; });
      line.push_back(it == r.by_factor.end() ? "-" : Cell(it->f1));
      line.push_back(it == r.by_factor.end() ? "-" : Cell(it->eo));
    }
    Row(out, line, format);
  }
  Footer(out, reports, format);
  return out.str();
}

MitigationComparison MakeMitigation(std::string dataset, std::string model,
                                    std::string reference_strategy,
                                    std::vector<MitigationRow> rows) {
  const auto refs = std::count_if(rows.begin(), rows.end(),
                                  [](const MitigationRow& r) { return r.strategy == "Ref"; });
  if (refs != 1) {
    throw Error(ErrorCode::kMissingReference,
                "mitigation comparison needs exactly one Ref row, got " +
                    std::to_string(refs));
  }
  const MitigationRow ref = *std::find_if(
      rows.begin(), rows.end(), [](const MitigationRow& r) { return r.strategy == "Ref"; });
  for (MitigationRow& r : rows) {
    r.delta_f1 = r.f1 - ref.f1;
    r.delta_eo = r.eo - ref.eo;
  }
  return {std::move(dataset), std::move(model), std::move(reference_strategy),
          std::move(rows)};
}

std::optional<double> EoImprovementPercent(double ref_eo, double eo) {
  if (ref_eo == 0.0) return std::nullopt;
  return (ref_eo - eo) / ref_eo * 100.0;
}

std::string RenderMitigation(const MitigationComparison& comparison,
                             TableFormat format) {
  auto ref = std::find_if(comparison.rows.begin(), comparison.rows.end(),
                          [](const MitigationRow& r) { return r.strategy == "Ref"; });
  if (ref == comparison.rows.end()) {
    throw Error(ErrorCode::kMissingReference, "mitigation comparison has no Ref row");
  }
  std::ostringstream out;
  std::vector<std::string> header = {"Dataset",  "Model",    "Strategy",
                                     "F1",       "EO",       "dF1",
                                     "dEO",      "EO improvement"};
  if (format == TableFormat::kDelimited) {
    header = {"dataset", "model", "strategy", "f1", "eo", "delta_f1",
              "delta_eo", "eo_improvement"};
  }
  Row(out, header, format);
  HeaderRule(out, header.size(), format);
  for (const MitigationRow& r : comparison.rows) {
    std::string improvement;
    if (r.strategy == "Ref") {
      improvement = "-";
    } else if (auto p = EoImprovementPercent(ref->eo, r.eo)) {
      improvement = FormatFixed(*p, 1) + "%";
    } else {
      improvement = "n/a";
    }
    Row(out,
        {comparison.dataset, comparison.model, r.strategy, FormatFixed(r.f1, 1),
         FormatFixed(r.eo, 1), FormatFixed(r.delta_f1, 1), FormatFixed(r.delta_eo, 1),
         improvement},
        format);
  }
  if (!comparison.reference_strategy.empty()) {
    FooterLine(out, "Ref = " + comparison.reference_strategy, format);
  }
  return out.str();
}

const char* ErrorTypeName(ErrorType t) {
  switch (t) {
    case ErrorType::kMisinterpretation: return "Misinterpretation";
    case ErrorType::kSentimentMisjudgment: return "SentimentMisjudgment";
    case ErrorType::kOverinterpretation: return "Overinterpretation";
    case ErrorType::kAmbiguity: return "Ambiguity";
    case ErrorType::kDemographicBias: return "DemographicBias";
  }
  return "?";
}

ErrorType ParseErrorType(std::string_view name) {
  const std::string n = Lower(name);
  for (ErrorType t : kAllErrorTypes) {
    if (Lower(ErrorTypeName(t)) == n) return t;
  }
  throw Error(ErrorCode::kSchema, "unknown error tag '" + std::string(name) + "'");
}

std::vector<ErrorTag> ParseAnnotations(std::string_view jsonl) {
  std::vector<ErrorTag> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (internal::IsBlank(line)) continue;
    auto fail = [&](const std::string& what) {
      return Error(ErrorCode::kSchema,
                   "annotation line " + std::to_string(line_no) + ": " + what);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
    if (!j.is_object()) throw fail("expected an object");
    auto str = [&](const char* key, bool required) -> std::string {
      auto it = j.find(key);
      if (it == j.end()) {
        if (required) throw fail(std::string("missing '") + key + "'");
        return "";
      }
      if (it->is_number_integer()) return std::to_string(it->get<int64_t>());
      if (!it->is_string()) throw fail(std::string("'") + key + "' must be a string");
      return it->get<std::string>();
    };
    ErrorTag t;
    t.sample_id = str("sample_id", true);
    t.variant = str("variant", false);
    t.model = str("model", true);
    try {
      t.tag = ParseErrorType(str("tag", true));
    } catch (const Error& e) {
      throw fail(e.what());
    }
    t.annotator = str("annotator", false);
    t.note = str("note", false);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ErrorTag> LoadAnnotations(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open annotations '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseAnnotations(buf.str());
}

ErrorDistribution ComputeErrorDistribution(
    std::span<const ErrorTag> tags,
    const std::map<std::string, std::string>& size_class_of) {
  if (tags.empty()) throw Error(ErrorCode::kEmptyInput, "no error annotations");
  std::map<std::string, std::array<int64_t, 5>> counts;
  for (const ErrorTag& t : tags) {
    auto it = size_class_of.find(t.model);
    if (it == size_class_of.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "model '" + t.model + "' has no size class");
    }
    if (it->second != "S" && it->second != "M" && it->second != "L") {
      throw Error(ErrorCode::kInvalidArgument,
                  "size class must be S, M or L, got '" + it->second + "'");
    }
    auto& c = counts[it->second];
    ++c[static_cast<size_t>(t.tag)];
  }
  ErrorDistribution d;
  for (const char* cls : {"S", "M", "L"}) {
    auto it = counts.find(cls);
    if (it == counts.end()) continue;
    int64_t total = 0;
    for (int64_t n : it->second) total += n;
    std::array<double, 5> pct{};
    for (size_t i = 0; i < pct.size(); ++i) {
      pct[i] = 100.0 * static_cast<double>(it->second[i]) / static_cast<double>(total);
    }
    d.size_classes.push_back(cls);
    d.percent[cls] = pct;
    d.totals[cls] = total;
  }
  return d;
}

std::string RenderErrorDistribution(const ErrorDistribution& dist,
                                    TableFormat format) {
  std::ostringstream out;
  std::vector<std::string> header = {"Error type"};
  for (const auto& c : dist.size_classes) header.push_back("LLM_" + c + " (%)");
  Row(out, header, format);
  HeaderRule(out, header.size(), format);
  for (size_t i = 0; i < kAllErrorTypes.size(); ++i) {
    std::vector<std::string> line = {ErrorTypeName(kAllErrorTypes[i])};
    for (const auto& c : dist.size_classes) {
      line.push_back(FormatFixed(dist.percent.at(c)[i], 1));
    }
    Row(out, line, format);
  }
  std::vector<std::string> totals = {"n"};
  for (const auto& c : dist.size_classes) {
    totals.push_back(std::to_string(dist.totals.at(c)));
  }
  Row(out, totals, format);
  return out.str();
}

}  // namespace fairaudit
