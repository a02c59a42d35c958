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

#include "fairaudit/audit.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "fairaudit/digest.h"
#include "fairaudit/error.h"
#include "fairaudit/parser.h"
#include "json.hpp"
#include "text_util.h"

namespace fairaudit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

Error ConfigError(const std::string& what) {
  return Error(ErrorCode::kConfig, what);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json OptionalJson(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> OptionalFromJson(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

// ---------------------------------------------------------------------------
// Config (de)serialisation

json LabelsToJson(const TaskKind& task) {
  json out = json::array();
  for (const Label& l : task.labels()) {
    if (l.long_name.empty()) {
      out.push_back(l.name);
    } else {
      out.push_back({{"name", l.name}, {"long_name", l.long_name}});
    }
  }
  return out;
}

TaskKind TaskFromJson(const json& j) {
  const TaskType type = ParseTaskType(j.at("task").get<std::string>());
  std::vector<Label> labels;
  for (const json& l : j.at("labels")) {
    if (l.is_string()) {
      labels.push_back({l.get<std::string>(), ""});
    } else {
      labels.push_back({l.at("name").get<std::string>(), l.value("long_name", "")});
    }
  }
  return TaskKind(type, std::move(labels));
}

json DatasetToJson(const DatasetConfig& d) {
  json j = {{"name", d.spec.name},
            {"task", TaskTypeName(d.spec.task.type())},
            {"labels", LabelsToJson(d.spec.task)},
            {"seed", d.spec.seed},
            {"runs", d.spec.runs}};
  if (!d.spec.source_path.empty()) j["path"] = d.spec.source_path;
  if (d.spec.test_subsample) {
    j["sample_n"] = *d.spec.test_subsample;
  } else {
    j["sample_n"] = "all";
  }
  if (d.synthetic) j["synthetic"] = *d.synthetic;
  return j;
}

DatasetConfig DatasetFromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("dataset entries must be objects");
  const std::string name = j.at("name").get<std::string>();
  std::optional<DatasetSpec> spec;
  if (j.contains("task")) {
    spec = DatasetSpec{name, TaskFromJson(j), "", 200, 3, 0, 0};
  } else {
    spec = FindBuiltinSpec(name);
    if (!spec) {
      throw ConfigError("dataset '" + name +
                        "' is not built in; give \"task\" and \"labels\"");
    }
  }
  DatasetConfig d{*spec, std::nullopt};
  d.spec.source_path = j.value("path", "");
  d.spec.seed = j.value("seed", d.spec.seed);
  d.spec.runs = j.value("runs", d.spec.runs);
  if (j.contains("synthetic")) {
    d.synthetic = j.at("synthetic").get<size_t>();
    // Synthetic data is generated at the requested size.
    if (!j.contains("sample_n")) d.spec.test_subsample = std::nullopt;
  }
  if (j.contains("sample_n")) {
    const json& n = j.at("sample_n");
    if (n.is_string()) {
      if (n.get<std::string>() != "all") {
        throw ConfigError("sample_n must be a count or \"all\"");
      }
      d.spec.test_subsample = std::nullopt;
    } else {
      d.spec.test_subsample = n.get<size_t>();
    }
  }
  return d;
}

json ModelToJson(const ModelConfig& m) {
  json j = {{"name", m.name},
            {"max_tokens", m.max_tokens},
            {"temperature", m.temperature}};
  if (m.mock) {
    j["mock"] = true;
  } else {
    j["endpoint"] = m.endpoint.base_url;
    j["api_key_env"] = m.endpoint.api_key_env;
    j["timeout_s"] = m.endpoint.timeout.count();
  }
  return j;
}

ModelConfig ModelFromJson(const json& j) {
  ModelConfig m;
  if (j.is_string()) {
    m.name = j.get<std::string>();
  } else {
    m.name = j.at("name").get<std::string>();
    m.mock = j.value("mock", false);
    m.endpoint.base_url = j.value("endpoint", "");
    m.endpoint.api_key_env = j.value("api_key_env", m.endpoint.api_key_env);
    m.endpoint.timeout = std::chrono::seconds(j.value("timeout_s", 120));
    m.max_tokens = j.value("max_tokens", m.max_tokens);
    m.temperature = j.value("temperature", m.temperature);
  }
  if (m.name == "mock") m.mock = true;
  return m;
}

// ---------------------------------------------------------------------------
// Pipeline pieces

Taxonomy EffectiveTaxonomy(const AuditConfig& config) {
  Taxonomy t = config.taxonomy_path.empty() ? BuildTaxonomy()
                                            : LoadTaxonomy(config.taxonomy_path);
  if (!config.factors.empty()) {
    try {
      t = RestrictTaxonomy(t, config.factors);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  return t;
}

PromptTemplates EffectiveTemplates(const AuditConfig& config) {
  return config.templates_dir.empty() ? PromptTemplates::Defaults()
                                      : PromptTemplates::LoadDir(config.templates_dir);
}

PromptStrategy MakeStrategy(StrategyName name, TaskType type,
                            const AuditConfig& config,
                            const std::vector<Exemplar>& custom_exemplars) {
  PromptStrategy s;
  s.name = name;
  if (name == StrategyName::kCoT) {
    s.exemplars = custom_exemplars.empty() ? DefaultExemplars(type) : custom_exemplars;
  }
  if (name == StrategyName::kRP) s.rp_persona = config.rp_persona;
  return s;
}

std::vector<Sample> LoadSamples(const DatasetConfig& d) {
  std::vector<Sample> all =
      d.synthetic ? SyntheticSamples(d.spec.task, *d.synthetic, d.spec.seed)
                  : LoadDataset(d.spec.source_path, d.spec.task);
  return Subsample(all, d.spec.test_subsample, d.spec.seed);
}

std::string FormatReminder(const TaskKind& task) {
  if (task.type() == TaskType::kMultilabel) {
    return "Your previous answer did not follow the required format. Answer "
           "again with one line per label in the form \"<label>: 0 (No)\" or "
           "\"<label>: 1 (Yes)\", each followed by REASONING:.";
  }
  return "Your previous answer did not follow the required format. Answer "
         "again starting with OUTPUT: followed by the label number and name.";
}

struct Outcome {
  bool attempted = false;
  bool request_failed = false;
  std::string error;
  std::string text;
  ParsedPrediction parsed;
};

struct GroupStats {
  int64_t requests = 0;
  int64_t reminders = 0;
  int64_t cache_hits = 0;
  int64_t upstream = 0;
  int64_t request_failures = 0;
  int64_t parse_failures = 0;
};

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << text;
}

json ReportToJson(const FairnessReport& r) {
  json factors = json::array();
  for (const FactorScore& f : r.by_factor) {
    factors.push_back({{"factor", f.factor},
                       {"f1", OptionalJson(f.f1)},
                       {"eo", OptionalJson(f.eo)}});
  }
  return {{"record", "report"},
          {"model", r.model},
          {"dataset", r.dataset},
          {"strategy", r.strategy},
          {"f1_weighted", OptionalJson(r.f1_weighted)},
          {"eo_overall", OptionalJson(r.eo_overall)},
          {"f1_std", r.f1_std},
          {"eo_std", r.eo_std},
          {"by_factor", factors},
          {"parse_failure_rate", r.parse_failure_rate},
          {"n_samples", r.n_samples},
          {"n_variants", r.n_variants},
          {"n_runs", r.n_runs},
          {"eo_combine", r.eo_combine},
          {"failure_policy", r.failure_policy},
          {"config_digest", r.config_digest}};
}

FairnessReport ReportFromJson(const json& j) {
  FairnessReport r;
  r.model = j.at("model").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.strategy = j.at("strategy").get<std::string>();
  r.f1_weighted = OptionalFromJson(j, "f1_weighted");
  r.eo_overall = OptionalFromJson(j, "eo_overall");
  r.f1_std = j.value("f1_std", 0.0);
  r.eo_std = j.value("eo_std", 0.0);
  for (const json& f : j.value("by_factor", json::array())) {
    r.by_factor.push_back({f.at("factor").get<std::string>(),
                           OptionalFromJson(f, "f1"), OptionalFromJson(f, "eo")});
  }
  r.parse_failure_rate = j.value("parse_failure_rate", 0.0);
  r.n_samples = j.value("n_samples", int64_t{0});
  r.n_variants = j.value("n_variants", int64_t{0});
  r.n_runs = j.value("n_runs", int64_t{0});
  r.eo_combine = j.value("eo_combine", "mean");
  r.failure_policy = j.value("failure_policy", "count-as-wrong");
  r.config_digest = j.value("config_digest", "");
  return r;
}

json MitigationToJson(const MitigationComparison& m) {
  json rows = json::array();
  for (const MitigationRow& r : m.rows) {
    rows.push_back({{"strategy", r.strategy},
                    {"f1", r.f1},
                    {"eo", r.eo},
                    {"delta_f1", r.delta_f1},
                    {"delta_eo", r.delta_eo}});
  }
  return {{"record", "mitigation"},
          {"dataset", m.dataset},
          {"model", m.model},
          {"reference_strategy", m.reference_strategy},
          {"rows", rows}};
}

// Per-run detail records: enough to recompute every metric externally.
void AppendRunRecords(std::string& dump, const FairnessReport& head, int run,
                      const RunMetrics& m) {
  auto base = [&](const char* record) {
    return json{{"record", record},
                {"model", head.model},
                {"dataset", head.dataset},
                {"strategy", head.strategy},
                {"run", run}};
  };
  for (const FactorResult& f : m.factors) {
    for (const LabelEoDetail& l : f.labels) {
      for (const GroupRates& g : l.groups) {
        json j = base("group");
        j["factor"] = f.factor;
        j["label"] = l.label;
        j["group"] = g.group;
        j["tp"] = g.counts.tp;
        j["fp"] = g.counts.fp;
        j["tn"] = g.counts.tn;
        j["fn"] = g.counts.fn;
        j["tpr"] = OptionalJson(g.tpr);
        j["fpr"] = OptionalJson(g.fpr);
        j["support"] = g.support;
        dump += j.dump() + "\n";
      }
      json j = base("label_eo");
      j["factor"] = f.factor;
      j["label"] = l.label;
      j["tpr_gap"] = OptionalJson(l.eo.tpr_gap);
      j["fpr_gap"] = OptionalJson(l.eo.fpr_gap);
      j["eo"] = OptionalJson(l.eo.value);
      j["support"] = l.support;
      dump += j.dump() + "\n";
    }
    json j = base("factor");
    j["factor"] = f.factor;
    j["f1"] = OptionalJson(f.f1);
    j["eo"] = OptionalJson(f.eo);
    dump += j.dump() + "\n";
  }
  json j = base("run");
  j["f1"] = OptionalJson(m.f1);
  j["eo"] = OptionalJson(m.eo);
  j["parse_failure_rate"] = m.parse_failure_rate;
  dump += j.dump() + "\n";
}

std::string JoinTables(const std::vector<std::string>& tables, TableFormat format) {
  std::string out;
  for (size_t i = 0; i < tables.size(); ++i) {
    std::string t = tables[i];
    if (i > 0) {
      if (format == TableFormat::kDelimited) {
        t = t.substr(t.find('\n') + 1);  // one header for the whole file
      } else {
        out += "\n";
      }
    }
    out += t;
  }
  return out;
}

bool IsMitigation(StrategyName s) {
  return s == StrategyName::kFC || s == StrategyName::kEBR ||
         s == StrategyName::kRP || s == StrategyName::kCC;
}

}  // namespace

// ---------------------------------------------------------------------------
// AuditConfig

void AuditConfig::Validate() const {
  if (datasets.empty()) throw ConfigError("no dataset configured");
  if (models.empty()) throw ConfigError("no model configured");
  if (strategies.empty()) throw ConfigError("no prompting strategy configured");
  std::vector<std::string> names;
  for (const DatasetConfig& d : datasets) {
    if (std::find(names.begin(), names.end(), d.spec.name) != names.end()) {
      throw ConfigError("dataset '" + d.spec.name + "' listed twice");
    }
    names.push_back(d.spec.name);
    if (d.spec.runs < 1) throw ConfigError("runs must be at least 1");
    if (!d.synthetic) {
      if (d.spec.source_path.empty()) {
        throw ConfigError("dataset '" + d.spec.name +
                          "' needs a path (the data is not bundled) or "
                          "\"synthetic\"");
      }
      if (!fs::exists(d.spec.source_path)) {
        throw ConfigError("dataset file '" + d.spec.source_path + "' does not exist");
      }
    }
  }
  std::vector<std::string> model_names;
  for (const ModelConfig& m : models) {
    if (m.name.empty()) throw ConfigError("model without a name");
    if (std::find(model_names.begin(), model_names.end(), m.name) !=
        model_names.end()) {
      throw ConfigError("model '" + m.name + "' listed twice");
    }
    model_names.push_back(m.name);
    if (!m.mock && m.endpoint.base_url.empty()) {
      throw ConfigError("model '" + m.name + "' has no endpoint");
    }
    if (m.max_tokens < 1) throw ConfigError("max_tokens must be positive");
  }
  for (size_t i = 0; i < strategies.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (strategies[i] == strategies[j]) {
        throw ConfigError(std::string("strategy ") +
                          StrategyNameString(strategies[i]) + " listed twice");
      }
    }
  }
  for (const auto& [path, what] :
       {std::pair{taxonomy_path, "taxonomy file"},
        std::pair{templates_dir, "template directory"},
        std::pair{exemplars_path, "exemplar file"}}) {
    if (!path.empty() && !fs::exists(path)) {
      throw ConfigError(std::string(what) + " '" + path + "' does not exist");
    }
  }
  if (internal::IsBlank(rp_persona)) throw ConfigError("rp_persona is blank");
  if (max_workers < 1) throw ConfigError("max_workers must be at least 1");
  if (rate_limit < 0.0 || rate_burst < 1.0) {
    throw ConfigError("rate_limit must be >= 0 and burst >= 1");
  }
  if (retry.max_attempts < 1) throw ConfigError("retry attempts must be >= 1");
  if (max_failure_rate < 0.0 || max_failure_rate > 1.0) {
    throw ConfigError("max_failure_rate must lie in [0, 1]");
  }
  try {
    mock.Validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::string AuditConfig::ToJson() const {
  json ds = json::array();
  for (const DatasetConfig& d : datasets) ds.push_back(DatasetToJson(d));
  json ms = json::array();
  for (const ModelConfig& m : models) ms.push_back(ModelToJson(m));
  json ss = json::array();
  for (StrategyName s : strategies) ss.push_back(StrategyNameString(s));
  json j = {
      {"datasets", ds},
      {"models", ms},
      {"strategies", ss},
      {"taxonomy", taxonomy_path},
      {"factors", factors},
      {"templates_dir", templates_dir},
      {"exemplars", exemplars_path},
      {"rp_persona", rp_persona},
      {"metrics",
       {{"eo_combine", EoCombineName(metrics.eo_combine)},
        {"failure_policy", FailurePolicyName(metrics.failure_policy)}}},
      {"concurrency",
       {{"max_workers", max_workers},
        {"rate_limit", rate_limit},
        {"burst", rate_burst}}},
      {"retry",
       {{"max_attempts", retry.max_attempts},
        {"base_delay_ms", retry.base_delay.count()},
        {"max_delay_ms", retry.max_delay.count()}}},
      {"cache_dir", cache_dir},
      {"no_cache", no_cache},
      {"output_dir", output_dir},
      {"max_failure_rate", max_failure_rate},
      {"allow_partial", allow_partial},
      {"oversize", fail_on_oversize ? "fail" : "skip"},
      {"mock", json::parse(mock.ToJson())},
  };
  return j.dump(2) + "\n";
}

AuditConfig AuditConfig::FromJson(std::string_view json_text) {
  AuditConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const json& d : j.value("datasets", json::array())) {
      c.datasets.push_back(DatasetFromJson(d));
    }
    for (const json& m : j.value("models", json::array())) {
      c.models.push_back(ModelFromJson(m));
    }
    for (const json& s : j.value("strategies", json::array())) {
      c.strategies.push_back(ParseStrategyName(s.get<std::string>()));
    }
    c.taxonomy_path = j.value("taxonomy", "");
    c.factors = j.value("factors", std::vector<std::string>{});
    c.templates_dir = j.value("templates_dir", "");
    c.exemplars_path = j.value("exemplars", "");
    c.rp_persona = j.value("rp_persona", c.rp_persona);
    if (j.contains("metrics")) {
      const json& m = j.at("metrics");
      c.metrics.eo_combine = ParseEoCombine(m.value("eo_combine", "mean"));
      c.metrics.failure_policy =
          ParseFailurePolicy(m.value("failure_policy", "count-as-wrong"));
    }
    if (j.contains("concurrency")) {
      const json& m = j.at("concurrency");
      c.max_workers = m.value("max_workers", c.max_workers);
      c.rate_limit = m.value("rate_limit", c.rate_limit);
      c.rate_burst = m.value("burst", c.rate_burst);
    }
    if (j.contains("retry")) {
      const json& r = j.at("retry");
      c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
      c.retry.base_delay = std::chrono::milliseconds(
          r.value("base_delay_ms", static_cast<int64_t>(c.retry.base_delay.count())));
      c.retry.max_delay = std::chrono::milliseconds(
          r.value("max_delay_ms", static_cast<int64_t>(c.retry.max_delay.count())));
    }
    c.cache_dir = j.value("cache_dir", c.cache_dir);
    c.no_cache = j.value("no_cache", c.no_cache);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.max_failure_rate = j.value("max_failure_rate", c.max_failure_rate);
    c.allow_partial = j.value("allow_partial", c.allow_partial);
    const std::string oversize = j.value("oversize", "skip");
    if (oversize != "skip" && oversize != "fail") {
      throw ConfigError("oversize must be \"skip\" or \"fail\"");
    }
    c.fail_on_oversize = oversize == "fail";
    if (j.contains("mock")) c.mock = MockBiasProfile::FromJson(j.at("mock").dump());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

AuditConfig AuditConfig::Load(const std::string& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return FromJson(text);
}

std::string CacheModelName(const ModelConfig& model, const MockBiasProfile& mock) {
  if (!model.mock) return model.name;
  return "mock:" + Sha256Hex(mock.ToJson()).substr(0, 16);
}

std::string ConfigDigest(const AuditConfig& config) {
  Sha256 h;
  h.AddField("fairaudit-config-v1");
  h.AddField(TaxonomyToJson(EffectiveTaxonomy(config)));
  const PromptTemplates templates = EffectiveTemplates(config);
  for (TaskType t : {TaskType::kBinary, TaskType::kMulticlass, TaskType::kMultilabel}) {
    h.AddField(templates.Get(t, false));
    h.AddField(templates.Get(t, true));
  }
  h.AddField(config.exemplars_path.empty() ? "" : ReadFile(config.exemplars_path));
  h.AddField(config.rp_persona);
  for (StrategyName s : config.strategies) h.AddField(StrategyNameString(s));
  h.AddField(EoCombineName(config.metrics.eo_combine));
  h.AddField(FailurePolicyName(config.metrics.failure_policy));
  for (const DatasetConfig& d : config.datasets) {
    json j = DatasetToJson(d);
    j.erase("path");  // where the file lives does not change results
    h.AddField(j.dump());
  }
  for (const ModelConfig& m : config.models) {
    h.AddField(CacheModelName(m, config.mock));
    h.AddField(m.endpoint.base_url);
    h.AddField(std::to_string(m.max_tokens));
    h.AddField(internal::FormatFixed(m.temperature, 6));
  }
  return h.HexDigest().substr(0, 16);
}

// ---------------------------------------------------------------------------
// Estimate

Estimate EstimateAudit(const AuditConfig& config) {
  config.Validate();
  const Taxonomy taxonomy = EffectiveTaxonomy(config);
  const PromptTemplates templates = EffectiveTemplates(config);
  const std::vector<Exemplar> custom =
      config.exemplars_path.empty() ? std::vector<Exemplar>{}
                                    : LoadExemplars(config.exemplars_path);
  Estimate e;
  e.variants = static_cast<int64_t>(VariantCount(taxonomy));
  const auto models = static_cast<int64_t>(config.models.size());
  for (const DatasetConfig& d : config.datasets) {
    const std::vector<Sample> samples = LoadSamples(d);
    const auto n = static_cast<int64_t>(samples.size());
    e.samples += n;
    e.requests += n * e.variants * static_cast<int64_t>(config.strategies.size()) *
                  d.spec.runs * models;
    int64_t chars = 0;
    for (StrategyName s : config.strategies) {
      const PromptStrategy strategy = MakeStrategy(s, d.spec.task.type(), config, custom);
      for (const Sample& sample : samples) {
        for (const EnrichedSample& es :
             Enrich(sample, taxonomy, InjectionMode::kPromptInstruction)) {
          chars += static_cast<int64_t>(
              BuildPrompt(d.spec.task, strategy, es, templates).size());
        }
      }
    }
    e.approx_prompt_tokens += chars / 4 * d.spec.runs * models;
  }
  return e;
}

// ---------------------------------------------------------------------------
// RunAudit

AuditResult RunAudit(const AuditConfig& config, const RunOptions& options) {
  config.Validate();
  const Taxonomy taxonomy = EffectiveTaxonomy(config);
  const PromptTemplates templates = EffectiveTemplates(config);
  const std::vector<Exemplar> custom_exemplars =
      config.exemplars_path.empty() ? std::vector<Exemplar>{}
                                    : LoadExemplars(config.exemplars_path);
  const std::string digest = ConfigDigest(config);
  const auto n_variants = static_cast<int64_t>(VariantCount(taxonomy));

  // Everything is loaded and enriched before the first request so that data
  // problems surface as configuration errors.
  struct PreparedDataset {
    const DatasetConfig* config;
    std::vector<Sample> samples;
    std::vector<EnrichedSample> enriched;
  };
  std::vector<PreparedDataset> prepared;
  for (const DatasetConfig& d : config.datasets) {
    PreparedDataset p{&d, LoadSamples(d), {}};
    for (const Sample& s : p.samples) {
      for (EnrichedSample& e : Enrich(s, taxonomy, InjectionMode::kPromptInstruction)) {
        p.enriched.push_back(std::move(e));
      }
    }
    prepared.push_back(std::move(p));
  }

  const fs::path out_dir(config.output_dir);
  std::ofstream requests_log;
  if (options.write_outputs) {
    fs::create_directories(out_dir);
    requests_log.open(out_dir / "requests.jsonl", std::ios::trunc);
  }
  std::optional<ResponseCache> cache;
  if (!config.no_cache) cache.emplace(config.cache_dir);

  AuditResult result;
  AuditSummary& summary = result.summary;
  for (const PreparedDataset& p : prepared) {
    summary.expected_requests += static_cast<int64_t>(p.enriched.size()) *
                                 static_cast<int64_t>(config.strategies.size()) *
                                 p.config->spec.runs *
                                 static_cast<int64_t>(config.models.size());
  }

  std::string dump;
  std::string failures_log;
  int64_t scored = 0;
  std::atomic<bool> fatal{false};
  std::string fatal_message;
  std::mutex mu;  // guards fatal_message and requests_log

  auto cancelled = [&] {
    return fatal.load() || (options.cancel != nullptr && options.cancel->load());
  };

  for (const ModelConfig& model : config.models) {
    std::shared_ptr<Backend> upstream;
    std::unique_ptr<RateLimiter> limiter;
    try {
      if (options.make_backend) {
        upstream = options.make_backend(model);
      } else if (model.mock) {
        upstream = std::make_shared<MockBackend>(config.mock);
      } else {
        limiter = std::make_unique<RateLimiter>(config.rate_limit, config.rate_burst);
        upstream = std::make_shared<HttpBackend>(model.endpoint, config.retry,
                                                 limiter.get());
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      result.exit_code = kExitBackendFatal;
      result.message = std::string(ErrorCodeName(e.code())) + ": " + e.what();
      return result;
    }
    CachingBackend backend(*upstream, cache ? &*cache : nullptr);

    GenerationParams params;
    params.model_name = CacheModelName(model, config.mock);
    params.max_tokens = model.max_tokens;
    params.temperature = model.temperature;

    for (const PreparedDataset& p : prepared) {
      const DatasetSpec& spec = p.config->spec;
      const TaskKind& task = spec.task;
      std::vector<std::pair<StrategyName, FairnessReport>> done;

      for (StrategyName strategy_name : config.strategies) {
        const PromptStrategy strategy =
            MakeStrategy(strategy_name, task.type(), config, custom_exemplars);
        std::vector<std::string> prompts;
        prompts.reserve(p.enriched.size());
        for (const EnrichedSample& e : p.enriched) {
          prompts.push_back(BuildPrompt(task, strategy, e, templates));
        }
        const std::string reminder = FormatReminder(task);
        const size_t per_run = p.enriched.size();
        const size_t jobs = per_run * static_cast<size_t>(spec.runs);
        std::vector<Outcome> outcomes(jobs);
        std::atomic<size_t> next{0};
        const int64_t hits_before = backend.cache_hits();
        const int64_t upstream_before = backend.upstream_calls();
        std::atomic<int64_t> reminders{0};

        auto call = [&](const std::string& prompt, GenerationParams prm,
                        const RequestContext& ctx, const EnrichedSample& e, int run,
                        Outcome& out) -> bool {
          try {
            BackendResponse r = backend.Complete(prompt, prm, ctx);
            out.text = std::move(r.text);
            if (requests_log.is_open()) {
              json rec = {{"dataset", spec.name},
                          {"model", model.name},
                          {"strategy", StrategyNameString(strategy_name)},
                          {"run", run},
                          {"sample_id", e.sample_id},
                          {"variant", e.variant.label},
                          {"cache_key", CacheKey(prompt, prm)},
                          {"from_cache", r.from_cache},
                          {"attempts", r.attempt_count}};
              std::lock_guard<std::mutex> lock(mu);
              requests_log << rec.dump() << '\n';
            }
            return true;
          } catch (const Error& err) {
            const ErrorCode c = err.code();
            const bool transient = c == ErrorCode::kRateLimited ||
                                   c == ErrorCode::kTransport ||
                                   (c == ErrorCode::kOversizePrompt &&
                                    !config.fail_on_oversize);
            out.request_failed = true;
            out.error = std::string(ErrorCodeName(c)) + ": " + err.what();
            if (!transient) {
              std::lock_guard<std::mutex> lock(mu);
              if (!fatal.exchange(true)) fatal_message = out.error;
            }
            return false;
          }
        };

        auto worker = [&] {
          for (;;) {
            if (cancelled()) return;
            const size_t i = next.fetch_add(1);
            if (i >= jobs) return;
            const int run = static_cast<int>(i / per_run);
            const EnrichedSample& e = p.enriched[i % per_run];
            const std::string& prompt = prompts[i % per_run];
            GenerationParams prm = params;
            prm.salt = spec.seed + static_cast<uint64_t>(run);
            const RequestContext ctx{&e, &task};
            Outcome& out = outcomes[i];
            out.attempted = true;
            if (!call(prompt, prm, ctx, e, run, out)) continue;
            out.parsed = ParseResponse(out.text, task, prompt);
            if (!out.parsed.ok() &&
                config.metrics.failure_policy == FailurePolicy::kRetryOnce &&
                !cancelled()) {
              const std::string retry_prompt = reminder + "\n\n" + prompt;
              ++reminders;
              Outcome second;
              if (call(retry_prompt, prm, ctx, e, run, second)) {
                ParsedPrediction again = ParseResponse(second.text, task, retry_prompt);
                if (again.ok()) {
                  out.text = std::move(second.text);
                  out.parsed = std::move(again);
                }
              }
            }
          }
        };
        {
          std::vector<std::jthread> pool;
          const size_t n_workers =
              std::min<size_t>(static_cast<size_t>(config.max_workers),
                               std::max<size_t>(jobs, 1));
          for (size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        }

        GroupStats stats;
        stats.reminders = reminders.load();
        stats.cache_hits = backend.cache_hits() - hits_before;
        stats.upstream = backend.upstream_calls() - upstream_before;
        for (const Outcome& o : outcomes) {
          if (!o.attempted) continue;
          ++stats.requests;
          if (o.request_failed) ++stats.request_failures;
          else if (!o.parsed.ok()) ++stats.parse_failures;
        }
        stats.requests += stats.reminders;
        summary.requests += stats.requests;
        summary.reminder_requests += stats.reminders;
        summary.cache_hits += stats.cache_hits;
        summary.upstream_calls += stats.upstream;
        summary.request_failures += stats.request_failures;
        summary.parse_failures += stats.parse_failures;

        if (cancelled()) {
          summary.interrupted = !fatal.load();
          break;
        }

        // Scoring: one deterministic pass in (run, sample, variant) order.
        FairnessReport head;
        head.model = model.name;
        head.dataset = spec.name;
        head.strategy = StrategyNameString(strategy_name);
        std::vector<RunMetrics> runs;
        std::string run_records;
        for (int run = 0; run < spec.runs; ++run) {
          std::vector<ScoredPrediction> preds;
          preds.reserve(per_run);
          for (size_t k = 0; k < per_run; ++k) {
            const Outcome& o = outcomes[static_cast<size_t>(run) * per_run + k];
            const EnrichedSample& e = p.enriched[k];
            ScoredPrediction sp{e.sample_id, e.variant.factor, e.variant.label, e.gold,
                                std::nullopt};
            if (!o.request_failed && o.parsed.ok()) {
              sp.pred = o.parsed.ToAnnotation();
            } else {
              json rec = {{"dataset", spec.name},
                          {"model", model.name},
                          {"strategy", head.strategy},
                          {"run", run},
                          {"sample_id", e.sample_id},
                          {"variant", e.variant.label},
                          {"reason", o.request_failed ? "request failed: " + o.error
                                                      : o.parsed.reason},
                          {"raw_sha256", Sha256Hex(o.text)}};
              failures_log += rec.dump() + "\n";
            }
            preds.push_back(std::move(sp));
          }
          scored += static_cast<int64_t>(preds.size());
          runs.push_back(ComputeRunMetrics(preds, task, taxonomy, config.metrics));
          AppendRunRecords(run_records, head, run, runs.back());
        }
        FairnessReport report = AggregateRuns(runs);
        report.model = head.model;
        report.dataset = head.dataset;
        report.strategy = head.strategy;
        report.n_samples = static_cast<int64_t>(p.samples.size());
        report.n_variants = n_variants;
        report.eo_combine = EoCombineName(config.metrics.eo_combine);
        report.failure_policy = FailurePolicyName(config.metrics.failure_policy);
        report.config_digest = digest;
        dump += run_records;
        dump += ReportToJson(report).dump() + "\n";

        if (options.progress != nullptr) {
          auto pct = [](const std::optional<double>& v) {
            return v ? internal::FormatFixed(*v, 1) : std::string("-");
          };
          *options.progress << "fairaudit: " << spec.name << " / " << model.name
                            << " / " << head.strategy << ": " << stats.requests
                            << " requests, " << stats.cache_hits << " cached, "
                            << stats.parse_failures << " parse failures, "
                            << stats.request_failures << " request failures, F1 "
                            << pct(report.f1_weighted) << ", EO "
                            << pct(report.eo_overall) << "\n"
                            << std::flush;
        }
        done.emplace_back(strategy_name, report);
        result.reports.push_back(std::move(report));
      }
      if (cancelled()) break;

      // Mitigation view: CoT (if run) or SP is the reference row.
      auto find = [&](StrategyName s) -> const FairnessReport* {
        for (const auto& [name, r] : done) {
          if (name == s && r.f1_weighted && r.eo_overall) return &r;
        }
        return nullptr;
      };
      const FairnessReport* ref = find(StrategyName::kCoT);
      if (ref == nullptr) ref = find(StrategyName::kSP);
      if (ref != nullptr) {
        std::vector<MitigationRow> rows = {
            {"Ref", *ref->f1_weighted, *ref->eo_overall, 0.0, 0.0}};
        for (StrategyName s : config.strategies) {
          const FairnessReport* r = IsMitigation(s) ? find(s) : nullptr;
          if (r != nullptr) {
            rows.push_back({r->strategy, *r->f1_weighted, *r->eo_overall, 0.0, 0.0});
          }
        }
        if (rows.size() > 1) {
          result.mitigations.push_back(
              MakeMitigation(spec.name, model.name, ref->strategy, std::move(rows)));
          dump += MitigationToJson(result.mitigations.back()).dump() + "\n";
        }
      }
    }
    if (cancelled()) break;
  }

  summary.parse_failure_rate =
      scored > 0 ? static_cast<double>(summary.parse_failures + summary.request_failures) /
                       static_cast<double>(scored)
                 : 0.0;

  if (fatal.load()) {
    result.exit_code = kExitBackendFatal;
    result.message = fatal_message;
  } else if (summary.interrupted) {
    result.exit_code = kExitPartial;
    result.message = "interrupted; completed responses are cached";
  } else if (summary.request_failures > 0 && !config.allow_partial) {
    result.exit_code = kExitPartial;
    result.message = std::to_string(summary.request_failures) +
                     " requests failed after retries";
  } else if (summary.parse_failure_rate > config.max_failure_rate) {
    result.exit_code = kExitPartial;
    result.message = "parse-failure rate " +
                     internal::FormatFixed(summary.parse_failure_rate * 100.0, 1) +
                     "% exceeds the ceiling of " +
                     internal::FormatFixed(config.max_failure_rate * 100.0, 1) + "%";
  }

  if (options.write_outputs) {
    const bool complete = !fatal.load() && !summary.interrupted;
    if (complete) {
      WriteText(out_dir / "dump.jsonl", dump);
      WriteText(out_dir / "parse_failures.jsonl", failures_log);
      for (TableFormat f : {TableFormat::kDelimited, TableFormat::kMarkdown}) {
        const std::string ext = f == TableFormat::kDelimited ? ".tsv" : ".md";
        WriteText(out_dir / ("results" + ext), RenderResultsTable(result.reports, f));
        WriteText(out_dir / ("factors" + ext), RenderFactorTable(result.reports, f));
        std::vector<std::string> tables;
        for (const MitigationComparison& m : result.mitigations) {
          tables.push_back(RenderMitigation(m, f));
        }
        WriteText(out_dir / ("mitigation" + ext), JoinTables(tables, f));
      }
    }
    json s = {{"expected_requests", summary.expected_requests},
              {"requests", summary.requests},
              {"reminder_requests", summary.reminder_requests},
              {"cache_hits", summary.cache_hits},
              {"upstream_calls", summary.upstream_calls},
              {"accounting_ok",
               summary.requests == summary.cache_hits + summary.upstream_calls},
              {"request_failures", summary.request_failures},
              {"parse_failures", summary.parse_failures},
              {"parse_failure_rate", summary.parse_failure_rate},
              {"interrupted", summary.interrupted},
              {"exit_code", result.exit_code},
              {"message", result.message},
              {"config_digest", digest}};
    WriteText(out_dir / "summary.json", s.dump(2) + "\n");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Dumps

DumpContents ParseDump(std::string_view jsonl) {
  DumpContents out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (internal::IsBlank(line)) continue;
    try {
      const json j = json::parse(line);
      const std::string record = j.value("record", "");
      if (record == "report") {
        out.reports.push_back(ReportFromJson(j));
      } else if (record == "mitigation") {
        std::vector<MitigationRow> rows;
        for (const json& r : j.at("rows")) {
          rows.push_back({r.at("strategy").get<std::string>(), r.at("f1").get<double>(),
                          r.at("eo").get<double>(), 0.0, 0.0});
        }
        out.mitigations.push_back(MakeMitigation(
            j.at("dataset").get<std::string>(), j.at("model").get<std::string>(),
            j.value("reference_strategy", ""), std::move(rows)));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchema,
                  "dump line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

DumpContents LoadDump(const std::string& path) { return ParseDump(ReadFile(path)); }

}  // namespace fairaudit
