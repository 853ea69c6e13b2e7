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

#include "wmplan/embedder.h"

#include <cmath>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "wmplan/error.h"
#include "wmplan/http_util.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

using nlohmann::json;

bool IsWordByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

void Normalize(std::vector<double>& v) {
  double norm = 0;
  for (double x : v) norm += x * x;
  if (norm == 0) return;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
}

}  // namespace

std::vector<std::string> HashTokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (IsWordByte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                         : static_cast<char>(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

MockHashEmbedder::MockHashEmbedder(int dim) : dim_(dim) {
  if (dim <= 0) throw Error(ErrorCode::kBadConfig, "embedding dim must be positive");
}

std::vector<double> MockHashEmbedder::Embed(std::string_view text) const {
  std::vector<double> v(dim_, 0.0);
  for (const std::string& tok : HashTokens(text)) {
    const std::uint64_t h = Fnv1a64(tok);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[h % static_cast<std::uint64_t>(dim_)] += sign;
  }
  Normalize(v);
  return v;
}

RemoteEmbedderConfig RemoteEmbedderConfig::FromEnv(int dim) {
  RemoteEmbedderConfig c;
  if (const char* e = std::getenv("WM_EMB_ENDPOINT")) c.endpoint = e;
  if (const char* m = std::getenv("WM_EMB_MODEL")) c.model = m;
  c.dim = dim;
  return c;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config)
    : config_(std::move(config)) {
  if (config_.dim <= 0) {
    throw Error(ErrorCode::kBadConfig, "embedding dim must be positive");
  }
}

std::vector<double> RemoteEmbedder::Embed(std::string_view text) const {
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::kRemoteUnavailable, "WM_EMB_ENDPOINT is not set");
  }
  if (TrimView(text).empty()) return std::vector<double>(config_.dim, 0.0);
  const Url url = SplitUrl(config_.endpoint);
  httplib::Client client(url.origin);
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds)));
  json body = {{"model", config_.model}, {"input", json::array({std::string(text)})}};
  auto res = client.Post(url.path + "/embeddings", body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kRemoteUnavailable, httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kRemoteUnavailable, "HTTP " + std::to_string(res->status));
  }
  std::vector<double> v;
  try {
    v = json::parse(res->body).at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kRemoteUnavailable,
                std::string("malformed embedding response: ") + e.what());
  }
  if (static_cast<int>(v.size()) != config_.dim) {
    throw Error(ErrorCode::kDimMismatch,
                "remote embedding has " + std::to_string(v.size()) +
                    " dims, expected " + std::to_string(config_.dim));
  }
  Normalize(v);
  return v;
}

std::unique_ptr<Embedder> MakeEmbedder(const std::string& kind, int dim) {
  if (kind == "MockHash" || kind == "mock") return std::make_unique<MockHashEmbedder>(dim);
  if (kind == "Remote" || kind == "remote") {
    return std::make_unique<RemoteEmbedder>(RemoteEmbedderConfig::FromEnv(dim));
  }
  throw Error(ErrorCode::kBadConfig, "unknown embedder kind " + kind);
}

}  // namespace wmplan
