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

#ifndef WMPLAN_EMBEDDER_H_
#define WMPLAN_EMBEDDER_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace wmplan {

// Text -> unit-norm vector (or the zero vector for empty input).
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual int dim() const = 0;
  virtual std::string kind() const = 0;
  virtual std::vector<double> Embed(std::string_view text) const = 0;
};

// Lower-cases ASCII letters and splits on runs of non-alphanumeric bytes
// (bytes >= 0x80 count as word characters so UTF-8 words stay whole).
std::vector<std::string> HashTokens(std::string_view text);

// Signed feature hashing: each token adds +1 or -1 (bit 63 of its FNV-1a
// hash) at index hash mod dim; the sum is L2-normalized.
class MockHashEmbedder : public Embedder {
 public:
  explicit MockHashEmbedder(int dim);
  int dim() const override { return dim_; }
  std::string kind() const override { return "MockHash"; }
  std::vector<double> Embed(std::string_view text) const override;

 private:
  int dim_;
};

struct RemoteEmbedderConfig {
  std::string endpoint;
  std::string model;
  int dim = 0;
  double timeout_seconds = 60;

  // WM_EMB_ENDPOINT, WM_EMB_MODEL.
  static RemoteEmbedderConfig FromEnv(int dim);
};

// POST {endpoint}/embeddings {model, input:[text]} -> data[0].embedding.
// Results are normalized; failures throw Error(kRemoteUnavailable).
class RemoteEmbedder : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig config);
  int dim() const override { return config_.dim; }
  std::string kind() const override { return "Remote"; }
  std::vector<double> Embed(std::string_view text) const override;

 private:
  RemoteEmbedderConfig config_;
};

std::unique_ptr<Embedder> MakeEmbedder(const std::string& kind, int dim);

}  // namespace wmplan

#endif  // WMPLAN_EMBEDDER_H_
