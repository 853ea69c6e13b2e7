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


#include "wmplan/arena_server.h"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "wmplan/error.h"

namespace wmplan {

using nlohmann::json;

std::string BattlePayloadJson(const Battle& b) {
  return json{{"battle_id", b.id},
              {"dataset", b.setup.dataset},
              {"goal", b.goal},
              {"context_ref", b.context_ref},
              {"plan_a", RenderTrajectory(b.plan_a)},
              {"plan_b", RenderTrajectory(b.plan_b)}}
      .dump();
}

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kExhausted:
      return 410;
    case ErrorCode::kUnknownBattle:
      return 404;
    case ErrorCode::kDuplicateSubmission:
      return 409;
    case ErrorCode::kInvalidWinner:
    case ErrorCode::kPreconditionViolated:
      return 400;
    default:
      return 500;
  }
}

struct ArenaServer::Impl {
  Arena& arena;
  httplib::Server server;

  explicit Impl(Arena& a) : arena(a) {}

  static void Fail(httplib::Response& res, int status, const std::string& code,
                   const std::string& message) {
    res.status = status;
    res.set_content(json{{"error", code}, {"message", message}}.dump(),
                    "application/json");
  }

  template <typename Fn>
  static void Guard(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      Fail(res, HttpStatusFor(e.code()), std::string(ErrorCodeName(e.code())), e.what());
    } catch (const std::exception& e) {
      Fail(res, 500, "Internal", e.what());
    }
  }

  void Routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
    server.Get("/api/battle/next", [this](const httplib::Request&, httplib::Response& res) {
      Guard(res, [&] {
        res.set_content(BattlePayloadJson(arena.NextBattle()), "application/json");
      });
    });
    server.Post(R"(/api/battle/([^/]+)/choice)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  json body = json::parse(req.body, nullptr, false);
                  if (body.is_discarded() || !body.is_object() ||
                      !body.contains("winner") || !body["winner"].is_string()) {
                    Fail(res, 400, "BadRequest", "body must be {winner, annotator}");
                    return;
                  }
                  const std::string winner = body["winner"].get<std::string>();
                  if (winner != "A" && winner != "B") {
                    Fail(res, 400, "InvalidWinner", "winner must be \"A\" or \"B\"");
                    return;
                  }
                  const std::string annotator =
                      body.value("annotator", std::string("anonymous"));
                  Guard(res, [&] {
                    BattleRecord r = arena.RecordChoice(req.matches[1], winner, annotator);
                    res.set_content(json{{"ok", true}, {"seq", r.seq}}.dump(),
                                    "application/json");
                  });
                });
    server.Get("/api/leaderboard", [this](const httplib::Request&, httplib::Response& res) {
      Guard(res, [&] {
        res.set_content(LeaderboardToJson(arena.leaderboard(), arena.config()),
                        "application/json");
      });
    });
    server.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
      Guard(res, [&] { res.set_content(arena.ExportLog(), "application/x-ndjson"); });
    });
  }
};

ArenaServer::ArenaServer(Arena& arena) : impl_(std::make_unique<Impl>(arena)) {
  impl_->Routes();
}

ArenaServer::~ArenaServer() { Stop(); }

int ArenaServer::BindToAnyPort(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool ArenaServer::Bind(const std::string& host, int port) {
  return impl_->server.bind_to_port(host, port);
}

bool ArenaServer::ListenAfterBind() { return impl_->server.listen_after_bind(); }

void ArenaServer::Stop() {
  if (impl_) impl_->server.stop();
}

void ArenaServer::WaitUntilReady() const { impl_->server.wait_until_ready(); }

ArenaEnv ArenaEnv::FromEnv() {
  ArenaEnv env;
  if (const char* v = std::getenv("WM_ARENA_DATA")) env.data_dir = v;
  if (const char* v = std::getenv("WM_ARENA_LOG")) env.log_path = v;
  if (const char* v = std::getenv("WM_ARENA_SEED")) env.seed = std::strtoull(v, nullptr, 10);
  return env;
}

}  // namespace wmplan
