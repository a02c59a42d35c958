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

// Command-line front end. Subcommands: audit, mock-audit, estimate, report.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairaudit/fairaudit.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 1;
constexpr int kExitBackendFatal = 2;

struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> datasets;
  std::string data_path;
  std::string sample_n;
  std::optional<uint64_t> seed;
  std::optional<int> runs;
  std::optional<size_t> synthetic;
  std::vector<std::string> models;
  std::string endpoint;
  std::string api_key_env;
  std::optional<int> max_concurrency;
  std::optional<double> rate_limit;
  std::string cache_dir;
  bool no_cache = false;
  std::vector<std::string> strategies;
  std::string eo_combine;
  std::string failure_policy;
  std::string taxonomy;
  std::vector<std::string> factors;
  std::string templates;
  std::string exemplars;
  std::string persona;
  std::string output;
  bool allow_partial = false;
  std::optional<double> max_failure_rate;
  std::string mock_profile;
};

// Thrown for bad flags; reported with exit status 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void AddConfigFlags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--config", f.config_path, "Audit config file (JSON)");
  app->add_option("--dataset", f.datasets, "Dataset name (repeatable)");
  app->add_option("--data-path", f.data_path, "JSONL file for the single dataset");
  app->add_option("--sample-n", f.sample_n, "Samples per dataset, or \"all\"");
  app->add_option("--seed", f.seed, "Sampling seed");
  app->add_option("--runs", f.runs, "Runs per dataset")->check(CLI::PositiveNumber);
  app->add_option("--synthetic", f.synthetic,
                  "Use N generated samples instead of dataset files");
  app->add_option("--model", f.models, "Model name (repeatable)");
  app->add_option("--endpoint", f.endpoint, "Chat-completion base URL");
  app->add_option("--api-key-env", f.api_key_env,
                  "Environment variable holding the API key");
  app->add_option("--max-concurrency", f.max_concurrency, "Concurrent requests")
      ->check(CLI::PositiveNumber);
  app->add_option("--rate-limit", f.rate_limit, "Requests per second (0 = off)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--cache-dir", f.cache_dir, "Response cache directory");
  app->add_flag("--no-cache", f.no_cache, "Disable the response cache");
  app->add_option("--strategies", f.strategies, "SP,CoT,EBR,CC,RP,FC")->delimiter(',');
  app->add_option("--eo-combine", f.eo_combine, "mean or max");
  app->add_option("--failure-policy", f.failure_policy,
                  "count-as-wrong, exclude or retry-once");
  app->add_option("--taxonomy", f.taxonomy, "Taxonomy override file");
  app->add_option("--factors", f.factors, "Restrict to these factors")->delimiter(',');
  app->add_option("--templates", f.templates, "Prompt template directory");
  app->add_option("--exemplars", f.exemplars, "CoT exemplar file (JSONL)");
  app->add_option("--persona", f.persona, "Role-play persona");
  app->add_option("--output", f.output, "Output directory");
  app->add_flag("--allow-partial", f.allow_partial,
                "Exit 0 even if some requests failed after retries");
  app->add_option("--max-failure-rate", f.max_failure_rate,
                  "Parse-failure ceiling in [0, 1]");
  app->add_option("--mock-profile", f.mock_profile, "Mock bias profile (JSON)");
}

// Loads the config file (if any) and applies flag overrides.
std::string BuildConfigJson(const ConfigFlags& f, bool force_mock) {
  json doc = json::object();
  if (!f.config_path.empty()) {
    try {
      doc = json::parse(ReadFile(f.config_path));
    } catch (const json::exception& e) {
      throw UsageError(f.config_path + ": " + e.what());
    }
  }
  if (!f.datasets.empty()) {
    json ds = json::array();
    for (const auto& name : f.datasets) ds.push_back({{"name", name}});
    doc["datasets"] = ds;
  }
  json& datasets = doc["datasets"];
  if (!datasets.is_array()) datasets = json::array();
  if (!f.data_path.empty()) {
    if (datasets.size() != 1) {
      throw UsageError("--data-path needs exactly one dataset");
    }
    datasets[0]["path"] = f.data_path;
  }
  for (json& d : datasets) {
    if (!f.sample_n.empty()) {
      if (f.sample_n == "all") {
        d["sample_n"] = "all";
      } else {
        try {
          d["sample_n"] = std::stoull(f.sample_n);
        } catch (const std::exception&) {
          throw UsageError("--sample-n takes a count or \"all\"");
        }
      }
    }
    if (f.seed) d["seed"] = *f.seed;
    if (f.runs) d["runs"] = *f.runs;
    if (f.synthetic) {
      d["synthetic"] = *f.synthetic;
      if (f.sample_n.empty()) d["sample_n"] = "all";
    }
  }

  if (!f.models.empty()) {
    json old = doc.value("models", json::array());
    json ms = json::array();
    for (const auto& name : f.models) {
      json m = {{"name", name}};
      for (const json& o : old) {
        if (o.is_object() && o.value("name", "") == name) m = o;
      }
      ms.push_back(m);
    }
    doc["models"] = ms;
  }
  if (force_mock) doc["models"] = json::array({{{"name", "mock"}}});
  for (json& m : doc["models"]) {
    if (m.is_string()) m = {{"name", m}};
    if (m.value("name", "") == "mock" || m.value("mock", false)) continue;
    if (!f.endpoint.empty()) m["endpoint"] = f.endpoint;
    if (!f.api_key_env.empty()) m["api_key_env"] = f.api_key_env;
  }

  if (!f.strategies.empty()) doc["strategies"] = f.strategies;
  if (!f.eo_combine.empty()) doc["metrics"]["eo_combine"] = f.eo_combine;
  if (!f.failure_policy.empty()) doc["metrics"]["failure_policy"] = f.failure_policy;
  if (f.max_concurrency) doc["concurrency"]["max_workers"] = *f.max_concurrency;
  if (f.rate_limit) doc["concurrency"]["rate_limit"] = *f.rate_limit;
  if (!f.cache_dir.empty()) doc["cache_dir"] = f.cache_dir;
  if (f.no_cache) doc["no_cache"] = true;
  if (!f.taxonomy.empty()) doc["taxonomy"] = f.taxonomy;
  if (!f.factors.empty()) doc["factors"] = f.factors;
  if (!f.templates.empty()) doc["templates_dir"] = f.templates;
  if (!f.exemplars.empty()) doc["exemplars"] = f.exemplars;
  if (!f.persona.empty()) doc["rp_persona"] = f.persona;
  if (!f.output.empty()) doc["output_dir"] = f.output;
  if (f.allow_partial) doc["allow_partial"] = true;
  if (f.max_failure_rate) doc["max_failure_rate"] = *f.max_failure_rate;
  if (!f.mock_profile.empty()) {
    try {
      doc["mock"] = json::parse(ReadFile(f.mock_profile));
    } catch (const json::exception& e) {
      throw UsageError(f.mock_profile + ": " + e.what());
    }
  }
  return doc.dump();
}

int StatusExit(fa_status status) {
  std::cerr << "fairaudit: " << fa_status_name(status) << ": " << fa_last_error()
            << "\n";
  return status == FA_ERR_AUTH ? kExitBackendFatal : kExitConfig;
}

fa_config* MakeConfig(const ConfigFlags& flags, bool force_mock, int* exit_code) {
  fa_config* config = nullptr;
  const std::string text = BuildConfigJson(flags, force_mock);
  if (fa_status s = fa_config_from_json(text.c_str(), &config); s != FA_OK) {
    *exit_code = StatusExit(s);
    return nullptr;
  }
  return config;
}

void OnSignal(int) { fa_request_interrupt(); }

void PrintProgress(const char* line, void*) { std::cerr << line << std::endl; }

int RunAuditCommand(const ConfigFlags& flags, bool force_mock,
                    const std::string& format, bool print_config) {
  int exit_code = 0;
  fa_config* config = MakeConfig(flags, force_mock, &exit_code);
  if (config == nullptr) return exit_code;
  if (print_config) {
    char* text = nullptr;
    if (fa_config_to_json(config, &text) == FA_OK) {
      std::cerr << text;
      fa_string_free(text);
    }
  }
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  fa_audit_result* result = nullptr;
  const fa_status s = fa_audit_run(config, PrintProgress, nullptr, &result);
  fa_config_free(config);
  if (s != FA_OK) return StatusExit(s);

  exit_code = fa_audit_exit_code(result);
  char* table = nullptr;
  if (exit_code != kExitBackendFatal &&
      fa_audit_render(result, "results", format.c_str(), &table) == FA_OK) {
    std::cout << table;
    fa_string_free(table);
  }
  char* summary = nullptr;
  if (fa_audit_summary_json(result, &summary) == FA_OK) {
    const json j = json::parse(summary);
    std::cerr << "fairaudit: " << j["requests"] << " requests, " << j["cache_hits"]
              << " cache hits, " << j["upstream_calls"] << " upstream calls, "
              << j["parse_failures"] << " parse failures, " << j["request_failures"]
              << " request failures\n";
    fa_string_free(summary);
  }
  if (exit_code != 0) {
    std::cerr << "fairaudit: " << fa_audit_message(result) << "\n";
  }
  fa_audit_result_free(result);
  return exit_code;
}

int RunEstimate(const ConfigFlags& flags) {
  int exit_code = 0;
  fa_config* config = MakeConfig(flags, false, &exit_code);
  if (config == nullptr) return exit_code;
  fa_estimate e{};
  const fa_status s = fa_audit_estimate(config, &e);
  fa_config_free(config);
  if (s != FA_OK) return StatusExit(s);
  std::cout << "samples: " << e.samples << "\n"
            << "variants per sample: " << e.variants << "\n"
            << "requests: " << e.requests << "\n"
            << "prompt tokens (approximate, characters / 4): "
            << e.approx_prompt_tokens << "\n";
  return 0;
}

int RunReport(const std::string& dump, const std::string& table,
              const std::string& format, const std::string& annotations,
              const std::vector<std::string>& size_classes) {
  char* out = nullptr;
  fa_status s;
  if (!annotations.empty()) {
    json classes = json::object();
    for (const auto& entry : size_classes) {
      const auto eq = entry.rfind('=');
      if (eq == std::string::npos) {
        throw UsageError("--size-class takes MODEL=S|M|L, got '" + entry + "'");
      }
      classes[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
    s = fa_error_distribution(annotations.c_str(), classes.dump().c_str(),
                              format.c_str(), &out);
  } else {
    if (dump.empty()) throw UsageError("report needs --dump or --annotations");
    s = fa_render_dump(dump.c_str(), table.c_str(), format.c_str(), &out);
  }
  if (s != FA_OK) return StatusExit(s);
  std::cout << out;
  fa_string_free(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Demographic-bias audits of LLM text classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fa_version());

  ConfigFlags audit_flags;
  ConfigFlags mock_flags;
  ConfigFlags estimate_flags;
  std::string format = "markdown";
  bool print_config = false;

  CLI::App* audit = app.add_subcommand("audit", "Run an audit");
  AddConfigFlags(audit, audit_flags);
  audit->add_option("--format", format, "Table format on stdout: tsv or markdown");
  audit->add_flag("--print-config", print_config, "Print the effective config");

  CLI::App* mock = app.add_subcommand("mock-audit", "Run an audit on the mock backend");
  AddConfigFlags(mock, mock_flags);
  mock->add_option("--format", format, "Table format on stdout: tsv or markdown");
  mock->add_flag("--print-config", print_config, "Print the effective config");

  CLI::App* estimate = app.add_subcommand("estimate", "Count requests and tokens");
  AddConfigFlags(estimate, estimate_flags);

  std::string dump;
  std::string table = "results";
  std::string annotations;
  std::vector<std::string> size_classes;
  CLI::App* report = app.add_subcommand("report", "Re-render tables");
  report->add_option("--dump", dump, "dump.jsonl written by an audit");
  report->add_option("--table", table, "results, factors or mitigation");
  report->add_option("--format", format, "tsv or markdown");
  report->add_option("--annotations", annotations,
                     "Error-annotation file; prints the error distribution");
  report->add_option("--size-class", size_classes, "MODEL=S|M|L (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*audit) return RunAuditCommand(audit_flags, false, format, print_config);
    if (*mock) return RunAuditCommand(mock_flags, true, format, print_config);
    if (*estimate) return RunEstimate(estimate_flags);
    if (*report) return RunReport(dump, table, format, annotations, size_classes);
  } catch (const UsageError& e) {
    std::cerr << "fairaudit: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
