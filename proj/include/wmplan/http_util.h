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

#ifndef WMPLAN_HTTP_UTIL_H_
#define WMPLAN_HTTP_UTIL_H_

#include <string>

namespace wmplan {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // base path without trailing slash, may be empty
};

// "http://host:8000/v1/" -> {"http://host:8000", "/v1"}.
inline Url SplitUrl(const std::string& endpoint) {
  Url u;
  std::size_t scheme = endpoint.find("://");
  std::size_t slash = endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) {
    u.origin = endpoint;
  } else {
    u.origin = endpoint.substr(0, slash);
    u.path = endpoint.substr(slash);
  }
  while (!u.path.empty() && u.path.back() == '/') u.path.pop_back();
  return u;
}

}  // namespace wmplan

#endif  // WMPLAN_HTTP_UTIL_H_
