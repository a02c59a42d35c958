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

// C interface to the fairaudit library. All objects are opaque handles
// created and destroyed through this API. Functions return FA_OK or an error
// status; fa_last_error() describes the most recent failure on the calling
// thread. Strings returned through char** are owned by the caller and must be
// released with fa_string_free().

#ifndef FAIRAUDIT_FAIRAUDIT_H_
#define FAIRAUDIT_FAIRAUDIT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(FA_BUILDING_LIBRARY)
#define FA_API __attribute__((visibility("default")))
#else
#define FA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fa_status {
  FA_OK = 0,
  FA_ERR_INVALID_ARGUMENT = 1,
  FA_ERR_CONFIG = 2,
  FA_ERR_EMPTY_TEXT = 3,
  FA_ERR_SCHEMA = 4,
  FA_ERR_UNKNOWN_LABEL = 5,
  FA_ERR_IO = 6,
  FA_ERR_NOT_ENOUGH_SAMPLES = 7,
  FA_ERR_MISSING_EXEMPLARS = 8,
  FA_ERR_MISSING_PERSONA = 9,
  FA_ERR_AUTH = 10,
  FA_ERR_RATE_LIMITED = 11,
  FA_ERR_TRANSPORT = 12,
  FA_ERR_OVERSIZE_PROMPT = 13,
  FA_ERR_EMPTY_INPUT = 14,
  FA_ERR_ALL_UNDEFINED = 15,
  FA_ERR_MISSING_REFERENCE = 16,
  FA_ERR_INVARIANT = 17,
  FA_ERR_INTERRUPTED = 18,
  FA_ERR_INTERNAL = 99
} fa_status;

FA_API const char* fa_version(void);
FA_API const char* fa_status_name(fa_status status);
// Message of the last failed call on this thread ("" after a success).
FA_API const char* fa_last_error(void);
FA_API void fa_string_free(char* s);

// --- Taxonomy -------------------------------------------------------------

typedef struct fa_taxonomy fa_taxonomy;

// The built-in 60-variant taxonomy.
FA_API fa_status fa_taxonomy_default(fa_taxonomy** out);
FA_API fa_status fa_taxonomy_load(const char* path, fa_taxonomy** out);
FA_API void fa_taxonomy_free(fa_taxonomy* taxonomy);
FA_API size_t fa_taxonomy_factor_count(const fa_taxonomy* taxonomy);
FA_API size_t fa_taxonomy_variant_count(const fa_taxonomy* taxonomy);
FA_API fa_status fa_taxonomy_to_json(const fa_taxonomy* taxonomy, char** out);
// Demographic context for a variant label. With text_append non-zero the
// result is "<text> As <article form>."; otherwise the prompt instruction.
FA_API fa_status fa_render_context(const fa_taxonomy* taxonomy,
                                   const char* variant_label, int text_append,
                                   const char* text, char** out);

// --- Tasks ----------------------------------------------------------------

typedef struct fa_task fa_task;

// Task of a built-in dataset ("Dreaddit", "CAMS", ...).
FA_API fa_status fa_task_builtin(const char* dataset_name, fa_task** out);
// type is "binary", "multiclass" or "multilabel".
FA_API fa_status fa_task_create(const char* type, const char* const* labels,
                                size_t n_labels, fa_task** out);
FA_API void fa_task_free(fa_task* task);
FA_API size_t fa_task_label_count(const fa_task* task);

// --- Prompts and parsing --------------------------------------------------

// strategy is one of SP, CoT, EBR, CC, RP, FC. persona is used by RP only
// (NULL selects the default persona). CoT uses the built-in exemplars.
FA_API fa_status fa_build_prompt(const fa_task* task, const fa_taxonomy* taxonomy,
                                 const char* strategy, const char* variant_label,
                                 const char* post, const char* persona,
                                 char** out);

typedef struct fa_prediction fa_prediction;

// A malformed response is not an error: the prediction reports failure.
// prompt may be NULL; when given, an echoed prompt prefix is ignored.
FA_API fa_status fa_parse_response(const fa_task* task, const char* text,
                                   const char* prompt, fa_prediction** out);
FA_API void fa_prediction_free(fa_prediction* prediction);
FA_API int fa_prediction_ok(const fa_prediction* prediction);
// Predicted class, or -1 for failures and multilabel tasks.
FA_API int fa_prediction_label(const fa_prediction* prediction);
FA_API size_t fa_prediction_flag_count(const fa_prediction* prediction);
FA_API int fa_prediction_flag(const fa_prediction* prediction, size_t index);
FA_API const char* fa_prediction_reason(const fa_prediction* prediction);

// --- Metrics --------------------------------------------------------------

// Binary and multiclass tasks; pred may hold -1 for "no prediction".
FA_API fa_status fa_weighted_f1(const fa_task* task, const int* gold,
                                const int* pred, size_t n, double* out);
// Multilabel tasks; gold and pred are row-major n x label_count 0/1 arrays.
FA_API fa_status fa_weighted_f1_multilabel(const fa_task* task, const int* gold,
                                           const int* pred, size_t n, double* out);

typedef struct fa_confusion {
  int64_t tp;
  int64_t fp;
  int64_t tn;
  int64_t fn;
} fa_confusion;

// Equalized-odds gap over groups' one-vs-rest counts. combine is "mean" or
// "max" (NULL = mean). *defined is 0 when fewer than two groups have a
// defined rate; *out is then 0.
FA_API fa_status fa_eo_for_factor(const fa_confusion* groups, size_t n_groups,
                                  const char* combine, double* out, int* defined);

// Hex SHA-256 cache key of a request.
FA_API fa_status fa_cache_key(const char* prompt, const char* model,
                              double temperature, int max_tokens,
                              const char* const* stops, size_t n_stops,
                              uint64_t salt, char** out);

// --- Audits ---------------------------------------------------------------

typedef struct fa_config fa_config;

FA_API fa_status fa_config_from_json(const char* json, fa_config** out);
FA_API fa_status fa_config_load(const char* path, fa_config** out);
FA_API fa_status fa_config_to_json(const fa_config* config, char** out);
FA_API fa_status fa_config_validate(const fa_config* config);
FA_API fa_status fa_config_digest(const fa_config* config, char** out);
FA_API void fa_config_free(fa_config* config);

typedef struct fa_estimate {
  int64_t samples;
  int64_t variants;
  int64_t requests;
  int64_t approx_prompt_tokens;
} fa_estimate;

FA_API fa_status fa_audit_estimate(const fa_config* config, fa_estimate* out);

typedef struct fa_audit_result fa_audit_result;
typedef void (*fa_progress_fn)(const char* line, void* user_data);

// Runs an audit and writes its artifacts to the configured output directory.
// Returns FA_OK whenever the audit ran; inspect fa_audit_exit_code() for
// partial or fatal outcomes. Configuration and data errors are returned as
// statuses. progress may be NULL.
FA_API fa_status fa_audit_run(const fa_config* config, fa_progress_fn progress,
                              void* user_data, fa_audit_result** out);
FA_API void fa_audit_result_free(fa_audit_result* result);
// 0 ok, 2 backend fatal, 3 partial (failed requests, interruption or a
// parse-failure rate above the ceiling).
FA_API int fa_audit_exit_code(const fa_audit_result* result);
FA_API const char* fa_audit_message(const fa_audit_result* result);
FA_API fa_status fa_audit_summary_json(const fa_audit_result* result, char** out);
// table is "results", "factors" or "mitigation"; format "tsv" or "markdown".
FA_API fa_status fa_audit_render(const fa_audit_result* result, const char* table,
                                 const char* format, char** out);

// Asks running audits to stop after their in-flight requests. Safe to call
// from a signal handler.
FA_API void fa_request_interrupt(void);
FA_API void fa_clear_interrupt(void);

// --- Reports --------------------------------------------------------------

// Re-renders a table from a dump.jsonl written by an audit.
FA_API fa_status fa_render_dump(const char* dump_path, const char* table,
                                const char* format, char** out);
// Error-type distribution from an annotation file. size_classes_json maps
// model names to "S", "M" or "L", e.g. {"llama-3-8b": "M"}.
FA_API fa_status fa_error_distribution(const char* annotations_path,
                                       const char* size_classes_json,
                                       const char* format, char** out);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // FAIRAUDIT_FAIRAUDIT_H_
