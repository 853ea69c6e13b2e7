// Copyright 2026 The WMPlan Authors
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

#include "wmplan/text_gen_client.h"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "wmplan/error.h"
#include "wmplan/http_util.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

using nlohmann::json;

class ConcurrencyGate {
 public:
  void SetLimit(int limit) {
    std::lock_guard<std::mutex> lock(mu_);
    limit_ = limit < 1 ? 1 : limit;
    cv_.notify_all();
  }
  void Acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < limit_; });
    ++in_flight_;
  }
  void Release() {
    std::lock_guard<std::mutex> lock(mu_);
    --in_flight_;
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int limit_ = 4;
  int in_flight_ = 0;
};

ConcurrencyGate& Gate() {
  static ConcurrencyGate gate;
  return gate;
}

std::string Env(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

}  // namespace

std::string PromptHash(const std::string& prompt) { return Fnv1a64Hex(prompt); }

HttpClientConfig HttpClientConfig::FromEnv() {
  HttpClientConfig c;
  c.endpoint = Env("WM_LLM_ENDPOINT");
  c.model = Env("WM_LLM_MODEL");
  c.api_key = Env("WM_LLM_KEY");
  return c;
}

HttpTextGenClient::HttpTextGenClient(HttpClientConfig config)
    : config_(std::move(config)) {
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::kBadConfig, "text generation endpoint is not set");
  }
}

void HttpTextGenClient::SetGlobalConcurrency(int max_in_flight) {
  Gate().SetLimit(max_in_flight);
}

std::string HttpTextGenClient::Complete(const std::string& prompt) {
  const Url url = SplitUrl(config_.endpoint);
  json body = {{"model", config_.model},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", config_.temperature}};
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(500 << (attempt - 1)));
    }
    Gate().Acquire();
    httplib::Client client(url.origin);
    auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
    client.set_read_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_connection_timeout(std::chrono::seconds(10));
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    auto res = client.Post(url.path + "/chat/completions", headers, payload,
                           "application/json");
    Gate().Release();

    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kGenerationFailed,
                  "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      json doc = json::parse(res->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kGenerationFailed,
                  std::string("malformed completion: ") + e.what());
    }
  }
  throw Error(ErrorCode::kGenerationFailed,
              "giving up after " + std::to_string(config_.retries + 1) +
                  " attempts: " + last_error);
}

MockTextGenClient::MockTextGenClient(std::map<std::string, std::string> responses)
    : responses_(std::move(responses)) {}

std::map<std::string, std::string> MockTextGenClient::LoadFixture(
    const std::string& text) {
  std::map<std::string, std::string> table;
  try {
    json doc = json::parse(text);
    for (const auto& [k, v] : doc.items()) table[k] = v.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("bad mock fixture: ") + e.what());
  }
  return table;
}

MockTextGenClient MockTextGenClient::FromJson(const std::string& text) {
  return MockTextGenClient(LoadFixture(text));
}

std::string MockTextGenClient::Complete(const std::string& prompt) {
  const std::string key = PromptHash(prompt);
  std::lock_guard<std::mutex> lock(mu_);
  prompts_.push_back(prompt);
  auto it = responses_.find(key);
  if (it == responses_.end()) {
    throw Error(ErrorCode::kGenerationFailed, "no mock response for prompt " + key);
  }
  return it->second;
}

int MockTextGenClient::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return static_cast<int>(prompts_.size());
}

std::vector<std::string> MockTextGenClient::prompts() const {
  std::lock_guard<std::mutex> lock(mu_);
  return prompts_;
}

}  // namespace wmplan
