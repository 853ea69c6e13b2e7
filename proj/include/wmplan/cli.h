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


// Command-line entry point. One subcommand per process; every file output
// gets a sibling <out>.manifest.json with the run configuration and input
// digests.

#ifndef WMPLAN_CLI_H_
#define WMPLAN_CLI_H_

#include <string>
#include <vector>

namespace wmplan {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 domain error, 2 usage error.
int Dispatch(int argc, const char* const* argv);
int Dispatch(const std::vector<std::string>& args);  // args[0] is the program

}  // namespace wmplan

#endif  // WMPLAN_CLI_H_
