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

#ifndef WMPLAN_TEXT_GEN_CLIENT_H_
#define WMPLAN_TEXT_GEN_CLIENT_H_

#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace wmplan {

// Single-turn text generation. Implementations throw
// Error(kGenerationFailed) when no response can be produced.
class TextGenClient {
 public:
  virtual ~TextGenClient() = default;
  virtual std::string Complete(const std::string& prompt) = 0;
};

// Key used by fixtures: FNV-1a 64 of the prompt bytes as 16 hex digits.
std::string PromptHash(const std::string& prompt);

struct HttpClientConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1
  std::string model;
  std::string api_key;
  double timeout_seconds = 120;
  int retries = 2;
  double temperature = 0;

  // WM_LLM_ENDPOINT, WM_LLM_MODEL, WM_LLM_KEY.
  static HttpClientConfig FromEnv();
};

// POST {endpoint}/chat/completions with
// {model, messages:[{role:"user", content}], temperature}.
class HttpTextGenClient : public TextGenClient {
 public:
  explicit HttpTextGenClient(HttpClientConfig config);
  std::string Complete(const std::string& prompt) override;

  // Cap on in-flight requests shared by every HttpTextGenClient.
  static void SetGlobalConcurrency(int max_in_flight);

 private:
  HttpClientConfig config_;
};

// Answers from a fixed table keyed by PromptHash. Thread-safe.
class MockTextGenClient : public TextGenClient {
 public:
  explicit MockTextGenClient(std::map<std::string, std::string> responses);
  // Fixture document: {"<hash>": "<response>", ...}.
  static MockTextGenClient FromJson(const std::string& text);
  static std::map<std::string, std::string> LoadFixture(const std::string& text);

  std::string Complete(const std::string& prompt) override;

  int calls() const;
  std::vector<std::string> prompts() const;

 private:
  std::map<std::string, std::string> responses_;
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
};

}  // namespace wmplan

#endif  // WMPLAN_TEXT_GEN_CLIENT_H_
