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

#ifndef FAIRAUDIT_BACKEND_H_
#define FAIRAUDIT_BACKEND_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/task.h"
#include "fairaudit/taxonomy.h"

namespace fairaudit {

struct GenerationParams {
  double temperature = 0.0;  // greedy decoding
  int max_tokens = 512;
  std::string model_name;
  std::vector<std::string> stop_sequences;
  // Mixed into the cache key only (never sent); distinguishes repeated runs.
  uint64_t salt = 0;
};

struct BackendResponse {
  std::string text;
  std::chrono::milliseconds latency{0};
  bool from_cache = false;
  int attempt_count = 1;
};

// Provenance that travels with a request. HTTP backends ignore it; the mock
// backend answers from it.
struct RequestContext {
  const EnrichedSample* enriched = nullptr;
  const TaskKind* task = nullptr;
};

// Implementations must be safe to call concurrently.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResponse Complete(const std::string& prompt,
                                   const GenerationParams& params,
                                   const RequestContext& context = {}) = 0;
};

// Hex SHA-256 over (model_name, prompt, temperature, max_tokens,
// stop_sequences, salt). Stable across processes and platforms.
std::string CacheKey(const std::string& prompt, const GenerationParams& params);

// On-disk response cache: <dir>/<key[0:2]>/<key>.json, written to a
// temporary file and renamed into place.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<BackendResponse> Get(const std::string& key) const;
  void Put(const std::string& key, const std::string& model,
           const BackendResponse& response) const;
  std::filesystem::path PathFor(const std::string& key) const;

 private:
  std::filesystem::path dir_;
};

// Consults the cache before the wrapped backend and makes at most one
// upstream call per key, even when several workers ask for the same key
// concurrently. A null cache disables caching but keeps the counters.
class CachingBackend : public Backend {
 public:
  CachingBackend(Backend& inner, const ResponseCache* cache)
      : inner_(inner), cache_(cache) {}

  BackendResponse Complete(const std::string& prompt,
                           const GenerationParams& params,
                           const RequestContext& context = {}) override;

  int64_t upstream_calls() const { return upstream_calls_.load(); }
  int64_t cache_hits() const { return cache_hits_.load(); }

 private:
  Backend& inner_;
  const ResponseCache* cache_;
  std::mutex mu_;
  std::map<std::string, std::shared_future<BackendResponse>> in_flight_;
  std::atomic<int64_t> upstream_calls_{0};
  std::atomic<int64_t> cache_hits_{0};
};

// Token bucket; Acquire() blocks until a token is available. A rate of 0
// disables limiting.
class RateLimiter {
 public:
  RateLimiter(double tokens_per_second, double burst);
  void Acquire();

 private:
  using Clock = std::chrono::steady_clock;
  std::mutex mu_;
  double rate_;
  double burst_;
  double tokens_;
  Clock::time_point last_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{30000};
};

struct EndpointConfig {
  // e.g. "https://api.openai.com/v1"; requests go to <base_url>/chat/completions.
  std::string base_url;
  // Environment variable holding the bearer token; empty for endpoints that
  // need no credential.
  std::string api_key_env = "FAIRAUDIT_API_KEY";
  std::chrono::seconds timeout{120};
};

// Chat-completion client. Transient failures (429, 408, 5xx, transport
// errors) are retried with exponential backoff; 401/403 (Error(kAuth)) and
// context overflow (Error(kOversizePrompt)) are not. Exhausted retries raise
// Error(kRateLimited) or Error(kTransport).
class HttpBackend : public Backend {
 public:
  HttpBackend(EndpointConfig endpoint, RetryPolicy retry = {},
              RateLimiter* limiter = nullptr);

  BackendResponse Complete(const std::string& prompt,
                           const GenerationParams& params,
                           const RequestContext& context = {}) override;

  // The JSON body sent for a request.
  static std::string RequestBody(const std::string& prompt,
                                 const GenerationParams& params);

 private:
  EndpointConfig endpoint_;
  RetryPolicy retry_;
  RateLimiter* limiter_;
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_BACKEND_H_
