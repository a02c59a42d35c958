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

#include "fairaudit/fairaudit.h"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <ostream>
#include <sstream>
#include <string>

#include "fairaudit/audit.h"
#include "fairaudit/backend.h"
#include "fairaudit/datasets.h"
#include "fairaudit/error.h"
#include "fairaudit/metrics.h"
#include "fairaudit/parser.h"
#include "fairaudit/promptkit.h"
#include "fairaudit/report.h"
#include "fairaudit/taxonomy.h"
#include "json.hpp"
#include "text_util.h"

struct fa_taxonomy {
  fairaudit::Taxonomy value;
};

struct fa_task {
  fairaudit::TaskKind value;
};

struct fa_prediction {
  fairaudit::ParsedPrediction value;
};

struct fa_config {
  fairaudit::AuditConfig value;
};

struct fa_audit_result {
  fairaudit::AuditResult value;
  std::string summary_json;
};

namespace {

using fairaudit::Error;
using fairaudit::ErrorCode;

thread_local std::string g_last_error;
std::atomic<bool> g_interrupt{false};

void SetError(std::string message) { g_last_error = std::move(message); }

template <typename F>
fa_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return FA_OK;
  } catch (const Error& e) {
    SetError(e.what());
    return static_cast<fa_status>(e.code());
  } catch (const std::bad_alloc&) {
    SetError("out of memory");
    return FA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    SetError(e.what());
    return FA_ERR_INTERNAL;
  } catch (...) {
    SetError("unknown exception");
    return FA_ERR_INTERNAL;
  }
}

void Require(bool condition, const char* what) {
  if (!condition) throw Error(ErrorCode::kInvalidArgument, what);
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

const fairaudit::DemographicVariant& FindVariant(const fairaudit::Taxonomy& t,
                                                 const std::string& label) {
  for (const auto& f : t) {
    for (const auto& v : f.categories) {
      if (v.label == label) return v;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown variant '" + label + "'");
}

// Forwards complete lines written to the stream to a C callback.
class LineCallbackBuf : public std::stringbuf {
 public:
  LineCallbackBuf(fa_progress_fn fn, void* user) : fn_(fn), user_(user) {}

  int sync() override {
    std::string text = str();
    size_t start = 0;
    for (size_t nl; (nl = text.find('\n', start)) != std::string::npos; start = nl + 1) {
      fn_(text.substr(start, nl - start).c_str(), user_);
    }
    str(text.substr(start));
    return 0;
  }

 private:
  fa_progress_fn fn_;
  void* user_;
};

std::string RenderTable(const std::vector<fairaudit::FairnessReport>& reports,
                        const std::vector<fairaudit::MitigationComparison>& mitigations,
                        const char* table, const char* format) {
  Require(table != nullptr && format != nullptr, "table and format are required");
  const fairaudit::TableFormat f = fairaudit::ParseTableFormat(format);
  const std::string t = table;
  if (t == "results") return fairaudit::RenderResultsTable(reports, f);
  if (t == "factors") return fairaudit::RenderFactorTable(reports, f);
  if (t == "mitigation") {
    std::string out;
    for (size_t i = 0; i < mitigations.size(); ++i) {
      std::string rendered = fairaudit::RenderMitigation(mitigations[i], f);
      if (i > 0 && f == fairaudit::TableFormat::kDelimited) {
        rendered = rendered.substr(rendered.find('\n') + 1);
      } else if (i > 0) {
        out += "\n";
      }
      out += rendered;
    }
    return out;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown table '" + t + "'");
}

}  // namespace

extern "C" {

FA_API const char* fa_version(void) { return "0.1.0"; }

FA_API const char* fa_status_name(fa_status status) {
  if (status == FA_OK) return "OK";
  if (status == FA_ERR_INTERNAL) return "InternalError";
  return fairaudit::ErrorCodeName(static_cast<ErrorCode>(status));
}

FA_API const char* fa_last_error(void) { return g_last_error.c_str(); }

FA_API void fa_string_free(char* s) { std::free(s); }

// --- Taxonomy

FA_API fa_status fa_taxonomy_default(fa_taxonomy** out) {
  return Guard([&] {
    Require(out != nullptr, "out is null");
    *out = new fa_taxonomy{fairaudit::BuildTaxonomy()};
  });
}

FA_API fa_status fa_taxonomy_load(const char* path, fa_taxonomy** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "path and out are required");
    *out = new fa_taxonomy{fairaudit::LoadTaxonomy(path)};
  });
}

FA_API void fa_taxonomy_free(fa_taxonomy* taxonomy) { delete taxonomy; }

FA_API size_t fa_taxonomy_factor_count(const fa_taxonomy* taxonomy) {
  return taxonomy ? taxonomy->value.size() : 0;
}

FA_API size_t fa_taxonomy_variant_count(const fa_taxonomy* taxonomy) {
  return taxonomy ? fairaudit::VariantCount(taxonomy->value) : 0;
}

FA_API fa_status fa_taxonomy_to_json(const fa_taxonomy* taxonomy, char** out) {
  return Guard([&] {
    Require(taxonomy != nullptr && out != nullptr, "taxonomy and out are required");
    *out = CopyString(fairaudit::TaxonomyToJson(taxonomy->value));
  });
}

FA_API fa_status fa_render_context(const fa_taxonomy* taxonomy,
                                   const char* variant_label, int text_append,
                                   const char* text, char** out) {
  return Guard([&] {
    Require(taxonomy != nullptr && variant_label != nullptr && out != nullptr,
            "taxonomy, variant_label and out are required");
    const auto& v = FindVariant(taxonomy->value, variant_label);
    *out = CopyString(fairaudit::RenderContext(
        v,
        text_append ? fairaudit::InjectionMode::kTextAppend
                    : fairaudit::InjectionMode::kPromptInstruction,
        text ? text : ""));
  });
}

// --- Tasks

FA_API fa_status fa_task_builtin(const char* dataset_name, fa_task** out) {
  return Guard([&] {
    Require(dataset_name != nullptr && out != nullptr, "name and out are required");
    auto spec = fairaudit::FindBuiltinSpec(dataset_name);
    if (!spec) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("unknown dataset '") + dataset_name + "'");
    }
    *out = new fa_task{spec->task};
  });
}

FA_API fa_status fa_task_create(const char* type, const char* const* labels,
                                size_t n_labels, fa_task** out) {
  return Guard([&] {
    Require(type != nullptr && out != nullptr && (labels != nullptr || n_labels == 0),
            "type, labels and out are required");
    std::vector<fairaudit::Label> ls;
    for (size_t i = 0; i < n_labels; ++i) {
      Require(labels[i] != nullptr, "null label");
      ls.push_back({labels[i], ""});
    }
    *out = new fa_task{fairaudit::TaskKind(fairaudit::ParseTaskType(type), std::move(ls))};
  });
}

FA_API void fa_task_free(fa_task* task) { delete task; }

FA_API size_t fa_task_label_count(const fa_task* task) {
  return task ? task->value.num_labels() : 0;
}

// --- Prompts and parsing

FA_API fa_status fa_build_prompt(const fa_task* task, const fa_taxonomy* taxonomy,
                                 const char* strategy, const char* variant_label,
                                 const char* post, const char* persona, char** out) {
  return Guard([&] {
    Require(task && taxonomy && strategy && variant_label && post && out,
            "task, taxonomy, strategy, variant_label, post and out are required");
    if (fairaudit::internal::IsBlank(post)) {
      throw Error(ErrorCode::kEmptyText, "post text is blank");
    }
    const auto& v = FindVariant(taxonomy->value, variant_label);
    fairaudit::PromptStrategy s;
    s.name = fairaudit::ParseStrategyName(strategy);
    if (s.name == fairaudit::StrategyName::kCoT) {
      s.exemplars = fairaudit::DefaultExemplars(task->value.type());
    }
    if (s.name == fairaudit::StrategyName::kRP) {
      s.rp_persona = persona ? std::string(persona)
                             : std::string(fairaudit::kDefaultPersona);
    }
    fairaudit::EnrichedSample e{"", v, post, {},
                                fairaudit::InjectionMode::kPromptInstruction};
    *out = CopyString(fairaudit::BuildPrompt(task->value, s, e));
  });
}

FA_API fa_status fa_parse_response(const fa_task* task, const char* text,
                                   const char* prompt, fa_prediction** out) {
  return Guard([&] {
    Require(task && text && out, "task, text and out are required");
    *out = new fa_prediction{
        fairaudit::ParseResponse(text, task->value, prompt ? prompt : "")};
  });
}

FA_API void fa_prediction_free(fa_prediction* prediction) { delete prediction; }

FA_API int fa_prediction_ok(const fa_prediction* p) { return p && p->value.ok(); }

FA_API int fa_prediction_label(const fa_prediction* p) {
  return p && p->value.label ? *p->value.label : -1;
}

FA_API size_t fa_prediction_flag_count(const fa_prediction* p) {
  return p && p->value.flags ? p->value.flags->size() : 0;
}

FA_API int fa_prediction_flag(const fa_prediction* p, size_t index) {
  if (!p || !p->value.flags || index >= p->value.flags->size()) return -1;
  return (*p->value.flags)[index];
}

FA_API const char* fa_prediction_reason(const fa_prediction* p) {
  return p ? p->value.reason.c_str() : "";
}

// --- Metrics

FA_API fa_status fa_weighted_f1(const fa_task* task, const int* gold,
                                const int* pred, size_t n, double* out) {
  return Guard([&] {
    Require(task && out && (n == 0 || (gold && pred)), "task, arrays and out are required");
    Require(task->value.type() != fairaudit::TaskType::kMultilabel,
            "use fa_weighted_f1_multilabel for multilabel tasks");
    std::vector<fairaudit::PredictionPair> pairs;
    for (size_t i = 0; i < n; ++i) {
      const auto g = fairaudit::Annotation::Single(gold[i]);
      Require(g.ConsistentWith(task->value), "gold label out of range");
      pairs.push_back({g, fairaudit::Annotation::Single(pred[i])});
    }
    *out = fairaudit::WeightedF1(pairs, task->value);
  });
}

FA_API fa_status fa_weighted_f1_multilabel(const fa_task* task, const int* gold,
                                           const int* pred, size_t n, double* out) {
  return Guard([&] {
    Require(task && out && (n == 0 || (gold && pred)), "task, arrays and out are required");
    Require(task->value.type() == fairaudit::TaskType::kMultilabel,
            "task is not multilabel");
    const size_t k = task->value.num_labels();
    std::vector<fairaudit::PredictionPair> pairs;
    for (size_t i = 0; i < n; ++i) {
      auto g = fairaudit::Annotation::Multi({gold + i * k, gold + (i + 1) * k});
      auto q = fairaudit::Annotation::Multi({pred + i * k, pred + (i + 1) * k});
      Require(g.ConsistentWith(task->value) && q.ConsistentWith(task->value),
              "flags must be 0 or 1");
      pairs.push_back({std::move(g), std::move(q)});
    }
    *out = fairaudit::WeightedF1(pairs, task->value);
  });
}

FA_API fa_status fa_eo_for_factor(const fa_confusion* groups, size_t n_groups,
                                  const char* combine, double* out, int* defined) {
  return Guard([&] {
    Require(out && defined && (n_groups == 0 || groups), "groups, out and defined are required");
    std::vector<fairaudit::GroupRates> rates;
    for (size_t i = 0; i < n_groups; ++i) {
      const fa_confusion& c = groups[i];
      Require(c.tp >= 0 && c.fp >= 0 && c.tn >= 0 && c.fn >= 0, "negative count");
      rates.push_back(fairaudit::GroupRates::FromCounts(
          "", std::to_string(i), "", fairaudit::ConfusionCounts{c.tp, c.fp, c.tn, c.fn}));
    }
    const auto eo = fairaudit::EoForFactor(
        rates, combine ? fairaudit::ParseEoCombine(combine) : fairaudit::EoCombine::kMean);
    *defined = eo.has_value();
    *out = eo.value_or(0.0);
  });
}

FA_API fa_status fa_cache_key(const char* prompt, const char* model,
                              double temperature, int max_tokens,
                              const char* const* stops, size_t n_stops,
                              uint64_t salt, char** out) {
  return Guard([&] {
    Require(prompt && model && out && (n_stops == 0 || stops),
            "prompt, model and out are required");
    fairaudit::GenerationParams params;
    params.model_name = model;
    params.temperature = temperature;
    params.max_tokens = max_tokens;
    params.salt = salt;
    for (size_t i = 0; i < n_stops; ++i) params.stop_sequences.emplace_back(stops[i]);
    *out = CopyString(fairaudit::CacheKey(prompt, params));
  });
}

// --- Audits

FA_API fa_status fa_config_from_json(const char* json, fa_config** out) {
  return Guard([&] {
    Require(json && out, "json and out are required");
    *out = new fa_config{fairaudit::AuditConfig::FromJson(json)};
  });
}

FA_API fa_status fa_config_load(const char* path, fa_config** out) {
  return Guard([&] {
    Require(path && out, "path and out are required");
    *out = new fa_config{fairaudit::AuditConfig::Load(path)};
  });
}

FA_API fa_status fa_config_to_json(const fa_config* config, char** out) {
  return Guard([&] {
    Require(config && out, "config and out are required");
    *out = CopyString(config->value.ToJson());
  });
}

FA_API fa_status fa_config_validate(const fa_config* config) {
  return Guard([&] {
    Require(config != nullptr, "config is null");
    config->value.Validate();
  });
}

FA_API fa_status fa_config_digest(const fa_config* config, char** out) {
  return Guard([&] {
    Require(config && out, "config and out are required");
    *out = CopyString(fairaudit::ConfigDigest(config->value));
  });
}

FA_API void fa_config_free(fa_config* config) { delete config; }

FA_API fa_status fa_audit_estimate(const fa_config* config, fa_estimate* out) {
  return Guard([&] {
    Require(config && out, "config and out are required");
    const fairaudit::Estimate e = fairaudit::EstimateAudit(config->value);
    *out = fa_estimate{e.samples, e.variants, e.requests, e.approx_prompt_tokens};
  });
}

FA_API fa_status fa_audit_run(const fa_config* config, fa_progress_fn progress,
                              void* user_data, fa_audit_result** out) {
  return Guard([&] {
    Require(config && out, "config and out are required");
    fairaudit::RunOptions options;
    options.cancel = &g_interrupt;
    std::unique_ptr<LineCallbackBuf> buf;
    std::unique_ptr<std::ostream> stream;
    if (progress != nullptr) {
      buf = std::make_unique<LineCallbackBuf>(progress, user_data);
      stream = std::make_unique<std::ostream>(buf.get());
      options.progress = stream.get();
    }
    auto result = std::make_unique<fa_audit_result>();
    result->value = fairaudit::RunAudit(config->value, options);
    if (stream) stream->flush();
    const auto& s = result->value.summary;
    nlohmann::json j = {{"expected_requests", s.expected_requests},
                        {"requests", s.requests},
                        {"reminder_requests", s.reminder_requests},
                        {"cache_hits", s.cache_hits},
                        {"upstream_calls", s.upstream_calls},
                        {"request_failures", s.request_failures},
                        {"parse_failures", s.parse_failures},
                        {"parse_failure_rate", s.parse_failure_rate},
                        {"interrupted", s.interrupted},
                        {"exit_code", result->value.exit_code},
                        {"message", result->value.message}};
    result->summary_json = j.dump(2);
    *out = result.release();
  });
}

FA_API void fa_audit_result_free(fa_audit_result* result) { delete result; }

FA_API int fa_audit_exit_code(const fa_audit_result* result) {
  return result ? result->value.exit_code : fairaudit::kExitConfig;
}

FA_API const char* fa_audit_message(const fa_audit_result* result) {
  return result ? result->value.message.c_str() : "";
}

FA_API fa_status fa_audit_summary_json(const fa_audit_result* result, char** out) {
  return Guard([&] {
    Require(result && out, "result and out are required");
    *out = CopyString(result->summary_json);
  });
}

FA_API fa_status fa_audit_render(const fa_audit_result* result, const char* table,
                                 const char* format, char** out) {
  return Guard([&] {
    Require(result && out, "result and out are required");
    *out = CopyString(
        RenderTable(result->value.reports, result->value.mitigations, table, format));
  });
}

FA_API void fa_request_interrupt(void) { g_interrupt.store(true); }

FA_API void fa_clear_interrupt(void) { g_interrupt.store(false); }

// --- Reports

FA_API fa_status fa_render_dump(const char* dump_path, const char* table,
                                const char* format, char** out) {
  return Guard([&] {
    Require(dump_path && out, "dump_path and out are required");
    const fairaudit::DumpContents d = fairaudit::LoadDump(dump_path);
    *out = CopyString(RenderTable(d.reports, d.mitigations, table, format));
  });
}

FA_API fa_status fa_error_distribution(const char* annotations_path,
                                       const char* size_classes_json,
                                       const char* format, char** out) {
  return Guard([&] {
    Require(annotations_path && size_classes_json && format && out,
            "annotations_path, size_classes_json, format and out are required");
    std::map<std::string, std::string> classes;
    try {
      classes = nlohmann::json::parse(size_classes_json)
                    .get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("size classes: ") + e.what());
    }
    const auto tags = fairaudit::LoadAnnotations(annotations_path);
    *out = CopyString(fairaudit::RenderErrorDistribution(
        fairaudit::ComputeErrorDistribution(tags, classes),
        fairaudit::ParseTableFormat(format)));
  });
}

}  // extern "C"
