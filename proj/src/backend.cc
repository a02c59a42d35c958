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

#include "fairaudit/backend.h"

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "fairaudit/digest.h"
#include "fairaudit/error.h"
#include "httplib.h"
#include "json.hpp"

namespace fairaudit {

std::string CacheKey(const std::string& prompt, const GenerationParams& params) {
  char temp[64];
  std::snprintf(temp, sizeof(temp), "%.17g", params.temperature);
  Sha256 h;
  h.AddField("fairaudit-cache-v1");
  h.AddField(params.model_name);
  h.AddField(prompt);
  h.AddField(temp);
  h.AddField(std::to_string(params.max_tokens));
  h.AddField(std::to_string(params.stop_sequences.size()));
  for (const auto& s : params.stop_sequences) h.AddField(s);
  h.AddField(std::to_string(params.salt));
  return h.HexDigest();
}

// ---------------------------------------------------------------------------
// ResponseCache

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create cache directory " + dir_.string());
}

std::filesystem::path ResponseCache::PathFor(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<BackendResponse> ResponseCache::Get(const std::string& key) const {
  std::ifstream in(PathFor(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    auto j = nlohmann::json::parse(ss.str());
    if (j.at("key").get<std::string>() != key) return std::nullopt;
    BackendResponse r;
    r.text = j.at("text").get<std::string>();
    r.attempt_count = j.value("attempt_count", 1);
    r.from_cache = true;
    return r;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;  // torn or foreign file: treat as a miss
  }
}

void ResponseCache::Put(const std::string& key, const std::string& model,
                        const BackendResponse& response) const {
  static std::atomic<uint64_t> counter{0};
  const auto path = PathFor(key);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write cache entry " + tmp.string());
    nlohmann::json j = {{"key", key},
                        {"model", model},
                        {"text", response.text},
                        {"attempt_count", response.attempt_count}};
    out << j.dump() << '\n';
    if (!out.flush()) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot publish cache entry " + path.string());
  }
}

// ---------------------------------------------------------------------------
// CachingBackend

BackendResponse CachingBackend::Complete(const std::string& prompt,
                                         const GenerationParams& params,
                                         const RequestContext& context) {
  const std::string key = CacheKey(prompt, params);
  std::promise<BackendResponse> promise;
  std::shared_future<BackendResponse> waiter;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = in_flight_.find(key);
    if (it != in_flight_.end()) {
      waiter = it->second;
    } else {
      if (cache_ != nullptr) {
        if (auto hit = cache_->Get(key)) {
          ++cache_hits_;
          return *hit;
        }
      }
      in_flight_.emplace(key, promise.get_future().share());
    }
  }
  if (waiter.valid()) {
    BackendResponse r = waiter.get();
    r.from_cache = true;
    ++cache_hits_;
    return r;
  }

  BackendResponse response;
  try {
    ++upstream_calls_;
    response = inner_.Complete(prompt, params, context);
    response.from_cache = false;
    if (cache_ != nullptr) cache_->Put(key, params.model_name, response);
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard<std::mutex> lock(mu_);
    in_flight_.erase(key);
    throw;
  }
  promise.set_value(response);
  std::lock_guard<std::mutex> lock(mu_);
  in_flight_.erase(key);
  return response;
}

// ---------------------------------------------------------------------------
// RateLimiter

RateLimiter::RateLimiter(double tokens_per_second, double burst)
    : rate_(tokens_per_second),
      burst_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      last_(Clock::now()) {}

void RateLimiter::Acquire() {
  if (rate_ <= 0.0) return;
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    const auto now = Clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait = (1.0 - tokens_) / rate_;
    // Holding the lock while sleeping serialises waiters in arrival order.
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
  }
}

// ---------------------------------------------------------------------------
// HttpBackend

namespace {

struct Attempt {
  enum Kind { kOk, kTransient, kFatal } kind = kFatal;
  ErrorCode code = ErrorCode::kTransport;
  std::string message;
  std::string text;
  std::chrono::milliseconds retry_after{0};
};

bool LooksLikeContextOverflow(const std::string& body) {
  std::string lower(body);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower.find("context_length_exceeded") != std::string::npos ||
         lower.find("maximum context length") != std::string::npos ||
         lower.find("context length") != std::string::npos ||
         lower.find("too many tokens") != std::string::npos;
}

Attempt Classify(int status, const std::string& body) {
  Attempt a;
  if (status == 200) {
    try {
      auto j = nlohmann::json::parse(body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      a.text = content.is_null() ? "" : content.get<std::string>();
      a.kind = Attempt::kOk;
    } catch (const nlohmann::json::exception& e) {
      a.kind = Attempt::kFatal;
      a.code = ErrorCode::kTransport;
      a.message = std::string("malformed completion response: ") + e.what();
    }
    return a;
  }
  a.message = "HTTP " + std::to_string(status) + ": " + body.substr(0, 300);
  if (status == 401 || status == 403) {
    a.kind = Attempt::kFatal;
    a.code = ErrorCode::kAuth;
  } else if (status == 413 || ((status == 400 || status == 422) &&
                               LooksLikeContextOverflow(body))) {
    a.kind = Attempt::kFatal;
    a.code = ErrorCode::kOversizePrompt;
  } else if (status == 429) {
    a.kind = Attempt::kTransient;
    a.code = ErrorCode::kRateLimited;
  } else if (status == 408 || status >= 500) {
    a.kind = Attempt::kTransient;
    a.code = ErrorCode::kTransport;
  } else {
    a.kind = Attempt::kFatal;
    a.code = ErrorCode::kTransport;
  }
  return a;
}

}  // namespace

HttpBackend::HttpBackend(EndpointConfig endpoint, RetryPolicy retry,
                         RateLimiter* limiter)
    : endpoint_(std::move(endpoint)), retry_(retry), limiter_(limiter) {
  const std::string& url = endpoint_.base_url;
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfig, "endpoint URL needs a scheme: " + url);
  }
  const size_t path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/chat/completions";
  if (!endpoint_.api_key_env.empty()) {
    const char* key = std::getenv(endpoint_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(ErrorCode::kAuth, "credential environment variable " +
                                        endpoint_.api_key_env + " is not set");
    }
    api_key_ = key;
  }
  if (retry_.max_attempts < 1) retry_.max_attempts = 1;
}

std::string HttpBackend::RequestBody(const std::string& prompt,
                                     const GenerationParams& params) {
  nlohmann::json body = {
      {"model", params.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", params.temperature},
      {"max_tokens", params.max_tokens},
  };
  if (!params.stop_sequences.empty()) body["stop"] = params.stop_sequences;
  return body.dump();
}

BackendResponse HttpBackend::Complete(const std::string& prompt,
                                      const GenerationParams& params,
                                      const RequestContext&) {
  if (prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "empty prompt");
  const std::string body = RequestBody(prompt, params);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto start = std::chrono::steady_clock::now();
  Attempt last;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    if (limiter_ != nullptr) limiter_->Acquire();
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(endpoint_.timeout);
    client.set_read_timeout(endpoint_.timeout);
    client.set_write_timeout(endpoint_.timeout);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last.kind = Attempt::kTransient;
      last.code = ErrorCode::kTransport;
      last.message = "transport failure: " + httplib::to_string(res.error());
    } else {
      last = Classify(res->status, res->body);
      if (res->has_header("Retry-After")) {
        last.retry_after = std::chrono::milliseconds(
            1000 * std::atoll(res->get_header_value("Retry-After").c_str()));
      }
    }
    if (last.kind == Attempt::kOk) {
      BackendResponse r;
      r.text = std::move(last.text);
      r.attempt_count = attempt;
      r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      return r;
    }
    if (last.kind == Attempt::kFatal || attempt == retry_.max_attempts) break;
    auto delay = retry_.base_delay * (int64_t{1} << std::min(attempt - 1, 20));
    delay = std::max(delay, last.retry_after);
    std::this_thread::sleep_for(std::min(delay, retry_.max_delay));
  }
  throw Error(last.code, last.message);
}

}  // namespace fairaudit
