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


// HTTP front end for the arena:
//   GET  /api/battle/next          -> {battle_id, goal, context_ref, plan_a, plan_b}
//   POST /api/battle/{id}/choice   <- {winner: "A"|"B", annotator}
//   GET  /api/leaderboard          -> leaderboard JSON
//   GET  /api/export               -> battle log JSONL

#ifndef WMPLAN_ARENA_SERVER_H_
#define WMPLAN_ARENA_SERVER_H_

#include <memory>
#include <string>

#include "wmplan/arena.h"
#include "wmplan/error.h"

namespace wmplan {

// Battle payload as served to annotators. Model names are never included.
std::string BattlePayloadJson(const Battle& b);

// Maps an arena error to an HTTP status.
int HttpStatusFor(ErrorCode code);

class ArenaServer {
 public:
  explicit ArenaServer(Arena& arena);
  ~ArenaServer();
  ArenaServer(const ArenaServer&) = delete;
  ArenaServer& operator=(const ArenaServer&) = delete;

  // Binds an ephemeral port and returns it, or -1.
  int BindToAnyPort(const std::string& host);
  bool Bind(const std::string& host, int port);
  // Blocks until Stop().
  bool ListenAfterBind();
  void Stop();
  void WaitUntilReady() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ArenaEnv {
  std::string data_dir;  // WM_ARENA_DATA
  std::string log_path;  // WM_ARENA_LOG
  std::uint64_t seed = 0;  // WM_ARENA_SEED
  static ArenaEnv FromEnv();
};

}  // namespace wmplan

#endif  // WMPLAN_ARENA_SERVER_H_
