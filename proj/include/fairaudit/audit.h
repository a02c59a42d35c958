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

#ifndef FAIRAUDIT_AUDIT_H_
#define FAIRAUDIT_AUDIT_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/backend.h"
#include "fairaudit/datasets.h"
#include "fairaudit/metrics.h"
#include "fairaudit/mock_backend.h"
#include "fairaudit/promptkit.h"
#include "fairaudit/report.h"

namespace fairaudit {

struct DatasetConfig {
  DatasetSpec spec;
  // Generate this many synthetic samples instead of reading spec.source_path.
  std::optional<size_t> synthetic;
};

struct ModelConfig {
  std::string name;  // model name sent to the endpoint; "mock" for the mock
  bool mock = false;
  EndpointConfig endpoint;
  int max_tokens = 512;
  double temperature = 0.0;
};

// Exit statuses of an audit.
enum ExitStatus : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitBackendFatal = 2,
  kExitPartial = 3,
};

struct AuditConfig {
  std::vector<DatasetConfig> datasets;
  std::vector<ModelConfig> models;
  std::vector<StrategyName> strategies;

  std::string taxonomy_path;         // empty: built-in taxonomy
  std::vector<std::string> factors;  // empty: every factor
  std::string templates_dir;         // empty: built-in templates
  std::string exemplars_path;        // empty: built-in exemplars
  std::string rp_persona = std::string(kDefaultPersona);

  MetricOptions metrics;

  int max_workers = 4;
  double rate_limit = 0.0;  // requests per second, 0 = unlimited
  double rate_burst = 1.0;
  RetryPolicy retry;

  std::string cache_dir = ".fairaudit-cache";
  bool no_cache = false;
  std::string output_dir = "fairaudit-out";

  // Audits whose overall parse-failure rate exceeds this exit with
  // kExitPartial.
  double max_failure_rate = 0.2;
  // Requests that failed after retries do not change the exit status.
  bool allow_partial = false;
  // Oversize prompts are skipped (scored as failures) unless this is set.
  bool fail_on_oversize = false;

  MockBiasProfile mock;

  // Throws Error(kConfig): no dataset, model or strategy, a referenced path
  // that does not exist, or an out-of-range option.
  void Validate() const;

  // Structured text form; FromJson(ToJson()) round-trips.
  std::string ToJson() const;
  static AuditConfig FromJson(std::string_view json_text);
  static AuditConfig Load(const std::string& path);
};

struct Estimate {
  int64_t samples = 0;  // summed over datasets, after subsampling
  int64_t variants = 0;
  int64_t requests = 0;
  // Rough prompt-token total: characters / 4. Approximate only.
  int64_t approx_prompt_tokens = 0;
};

// samples x variants x strategies x runs x models, summed over datasets.
// Reads dataset files (to count rows) but makes no requests.
Estimate EstimateAudit(const AuditConfig& config);

struct AuditSummary {
  int64_t expected_requests = 0;  // samples x variants x strategies x runs
  int64_t requests = 0;           // issued, including format-reminder retries
  int64_t reminder_requests = 0;
  int64_t cache_hits = 0;
  int64_t upstream_calls = 0;
  int64_t request_failures = 0;
  int64_t parse_failures = 0;
  double parse_failure_rate = 0.0;
  bool interrupted = false;
};

struct AuditResult {
  int exit_code = kExitOk;
  std::string message;
  std::vector<FairnessReport> reports;
  std::vector<MitigationComparison> mitigations;
  AuditSummary summary;
};

struct RunOptions {
  // One progress line per (dataset, model, strategy); null to silence.
  std::ostream* progress = nullptr;
  // Checked between requests; when it becomes true the audit stops, keeps
  // what is cached and returns with summary.interrupted set.
  const std::atomic<bool>* cancel = nullptr;
  // Replaces the backend built from each ModelConfig (tests).
  std::function<std::shared_ptr<Backend>(const ModelConfig&)> make_backend;
  bool write_outputs = true;
};

// Runs load -> subsample -> enrich -> prompt -> complete -> parse -> score ->
// report for every dataset x model x strategy x run. Writes, under
// config.output_dir: dump.jsonl, results.{tsv,md}, factors.{tsv,md},
// mitigation.{tsv,md}, parse_failures.jsonl, requests.jsonl, summary.json.
// Configuration problems throw Error(kConfig); everything else is reported
// through the exit code.
AuditResult RunAudit(const AuditConfig& config, const RunOptions& options = {});

// Short hex digest over everything that affects results (taxonomy, prompts,
// strategies, metric options, seeds, sampling, models, mock profile).
std::string ConfigDigest(const AuditConfig& config);

// The model name that keys cache entries for a model (mock entries include
// the bias profile).
std::string CacheModelName(const ModelConfig& model, const MockBiasProfile& mock);

struct DumpContents {
  std::vector<FairnessReport> reports;
  std::vector<MitigationComparison> mitigations;
};

// Reads the report and mitigation records back from dump.jsonl text.
DumpContents ParseDump(std::string_view jsonl);
DumpContents LoadDump(const std::string& path);

}  // namespace fairaudit

#endif  // FAIRAUDIT_AUDIT_H_
