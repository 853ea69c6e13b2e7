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


#include "wmplan/arena.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "testing/generators.h"
#include "testing/oracles.h"
#include "wmplan/error.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

namespace fs = std::filesystem;
using Time = std::chrono::system_clock::time_point;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

std::vector<InventoryItem> Inventory(const std::vector<std::string>& datasets, int goals,
                                     const std::vector<std::string>& models) {
  std::vector<InventoryItem> out;
  for (const auto& ds : datasets) {
    for (int g = 0; g < goals; ++g) {
      InventoryItem item;
      item.dataset = ds;
      item.goal_id = "g" + std::to_string(g);
      item.goal = "goal " + std::to_string(g);
      item.context_ref = "video-" + std::to_string(g);
      for (const auto& m : models) {
        item.plans[m] = Trajectory{item.goal, "", {{"step by " + m, ""}}, false};
      }
      out.push_back(std::move(item));
    }
  }
  return out;
}

ArenaConfig Config(std::vector<std::string> models, std::uint64_t seed = 1) {
  ArenaConfig cfg;
  cfg.models = std::move(models);
  cfg.seed = seed;
  return cfg;
}

fs::path TempPath(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("wmplan_arena_" + name);
  fs::remove_all(p);
  return p;
}

BattleRecord Record(long seq, const std::string& a, const std::string& b,
                    const std::string& winner, const std::string& ds = "d",
                    const std::string& goal = "g0", const std::string& who = "u") {
  BattleRecord r;
  r.seq = seq;
  r.battle_id = "b" + std::to_string(seq);
  r.dataset = ds;
  r.goal_id = goal;
  r.plan_a_model = a;
  r.plan_b_model = b;
  r.winner = winner;
  r.annotator = who;
  return r;
}

TEST_CASE("Elo spot values") {
  auto [w, l] = EloUpdate(1000, 1000, 32);
  CHECK(w == 1016.0);
  CHECK(l == 984.0);
  auto [w2, l2] = EloUpdate(1200, 1000, 32);
  CHECK(w2 - 1200 == doctest::Approx(7.688).epsilon(1e-3));
  CHECK(w2 + l2 == doctest::Approx(2200));
  auto [w3, l3] = EloUpdate(900, 1100, 0);
  CHECK(w3 == 900);
  CHECK(l3 == 1100);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double a = testing::RealIn(rng, 600, 1600), b = testing::RealIn(rng, 600, 1600);
    const double k = testing::RealIn(rng, 1, 64);
    auto got = EloUpdate(a, b, k);
    auto want = testing::ReferenceElo(a, b, k);
    CHECK(got.first == doctest::Approx(want.first).epsilon(1e-14));
    CHECK(got.second == doctest::Approx(want.second).epsilon(1e-14));
  }
}

TEST_CASE("Fleiss kappa and raw agreement") {
  const std::vector<std::vector<std::string>> mixed{
      {"A", "A"}, {"A", "B"}, {"B", "B"}, {"A", "B"}, {"A", "B"}};
  CHECK(FleissKappa(mixed) == doctest::Approx(-0.2));
  CHECK(RawAgreement(mixed) == doctest::Approx(40.0));
  // One A among six votes: P = 2/3, Pe = 26/36.
  CHECK(FleissKappa({{"A", "B", "B"}, {"B", "B", "B"}}) == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(RawAgreement({{"A", "B", "B"}, {"B", "B", "B"}}) == doctest::Approx(200.0 / 3));
  // Two A votes: Pe = 5/9.
  CHECK(FleissKappa({{"A", "A", "B"}, {"B", "B", "B"}}) == doctest::Approx(0.25));
  CHECK(FleissKappa({{"A", "A", "A"}, {"B", "B", "B"}}) == doctest::Approx(1.0));
  CHECK(RawAgreement({{"A", "A", "A"}, {"A", "A", "B"}}) == doctest::Approx(200.0 / 3));
  CHECK(CodeOf([] { FleissKappa({{"A", "A"}, {"A", "A"}}); }) ==
        ErrorCode::kDegenerateMarginals);
  CHECK(CodeOf([] { FleissKappa({{"A"}, {"B"}}); }) == ErrorCode::kPreconditionViolated);
  CHECK(CodeOf([] { FleissKappa({}); }) == ErrorCode::kPreconditionViolated);
  CHECK(CodeOf([] { RawAgreement({{"A", "B"}, {"A"}}); }) == ErrorCode::kPreconditionViolated);
}

TEST_CASE("config and setup validation") {
  CHECK(CodeOf([] { Config({"m"}).Validate(); }) == ErrorCode::kBadConfig);
  CHECK(CodeOf([] { Config({"m", "m"}).Validate(); }) == ErrorCode::kBadConfig);
  ArenaConfig cfg = Config({"a", "b"});
  cfg.k_factor = 0;
  CHECK(CodeOf([&] { cfg.Validate(); }) == ErrorCode::kBadConfig);
  CHECK(Setup::Of("d", "z", "a") == Setup{"d", "a", "z"});
  CHECK(Setup::Of("d", "z", "a").Key() == "d|a|z");
  CHECK(CodeOf([] { Setup::Of("d", "a", "a"); }) == ErrorCode::kPreconditionViolated);
}

TEST_CASE("battle records round trip") {
  BattleRecord r = Record(3, "x", "y", "y");
  r.timestamp = "2026-01-02T03:04:05Z";
  BattleRecord back = BattleRecordFromJson(BattleRecordToJson(r));
  CHECK(BattleRecordToJson(back) == BattleRecordToJson(r));
  CHECK(CodeOf([] { BattleRecordFromJson("{\"seq\":1}"); }) == ErrorCode::kBadRow);
  CHECK(CodeOf([] { BattleRecordFromJson("not json"); }) == ErrorCode::kBadRow);
}

TEST_CASE("state folds the log") {
  ArenaConfig cfg = Config({"a", "b"});
  ArenaState s(cfg);
  s.Apply(Record(1, "a", "b", "a"));
  CHECK(s.rating("a") == 1016.0);
  CHECK(s.rating("b") == 984.0);
  CHECK(s.served(Setup::Of("d", "b", "a")) == 1);
  CHECK(CodeOf([&] { s.Apply(Record(3, "a", "b", "a")); }) == ErrorCode::kPreconditionViolated);
  CHECK(CodeOf([&] { s.Apply(Record(2, "a", "b", "c")); }) == ErrorCode::kInvalidWinner);
  s.Apply(Record(2, "a", "c", "c"));
  CHECK(s.rating("c") > 1000);
  CHECK(s.log().size() == 2);
}

TEST_CASE("zero-sum ratings and order dependence") {
  const std::vector<std::string> models{"m0", "m1", "m2", "m3"};
  ArenaConfig cfg = Config(models);
  Rng rng(9);
  std::vector<BattleRecord> log;
  for (long i = 1; i <= 2000; ++i) {
    const int a = testing::IntIn(rng, 0, 3);
    int b = testing::IntIn(rng, 0, 2);
    if (b >= a) ++b;
    // m0 is strongest so outcomes are lopsided.
    const bool a_wins = testing::RealIn(rng, 0, 1) < (a < b ? 0.8 : 0.2);
    log.push_back(Record(i, models[a], models[b], a_wins ? models[a] : models[b]));
  }
  ArenaState s = ArenaState::Replay(cfg, log);
  double sum = 0;
  for (const auto& [m, r] : s.ratings()) sum += r;
  CHECK(std::abs(sum - 4000) < 1e-9);
  CHECK(s.rating("m0") > s.rating("m3"));
  ArenaState again = ArenaState::Replay(cfg, log);
  CHECK(again.ratings() == s.ratings());

  std::vector<BattleRecord> permuted = log;
  std::reverse(permuted.begin(), permuted.end());
  for (std::size_t i = 0; i < permuted.size(); ++i) permuted[i].seq = static_cast<long>(i) + 1;
  CHECK(ArenaState::Replay(cfg, permuted).ratings() != s.ratings());
}

TEST_CASE("leaderboard") {
  ArenaConfig cfg = Config({"a", "b", "c"});
  cfg.datasets = {"d", "e"};
  ArenaState s(cfg);
  s.Apply(Record(1, "a", "b", "a"));
  s.Apply(Record(2, "b", "a", "a"));
  auto rows = Leaderboard(s, cfg);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].model == "a");
  CHECK(rows[0].win_rate.at("d") == 100.0);
  CHECK_FALSE(rows[0].win_rate.at("e").has_value());
  CHECK(rows[0].battles == 2);
  CHECK(rows[1].model == "c");
  CHECK_FALSE(rows[1].win_rate.at("d").has_value());
  CHECK(rows[2].win_rate.at("d") == 0.0);
  const std::string text = LeaderboardToText(rows, cfg);
  CHECK(text.find("—") != std::string::npos);
  CHECK(text.find("100.0") != std::string::npos);
  auto doc = nlohmann::json::parse(LeaderboardToJson(rows, cfg));
  CHECK(doc["models"][0]["elo_display"] == std::lround(rows[0].elo));
  CHECK(doc["models"][0]["win_rate"]["e"].is_null());
}

TEST_CASE("agreement matrix") {
  ArenaConfig cfg = Config({"a", "b"});
  ArenaState s(cfg);
  s.Apply(Record(1, "a", "b", "a", "d", "g0", "u1"));
  s.Apply(Record(2, "b", "a", "a", "d", "g0", "u2"));
  s.Apply(Record(3, "a", "b", "b", "d", "g0", "u2"));
  s.Apply(Record(4, "a", "b", "b", "d", "g0", "u3"));
  s.Apply(Record(5, "a", "b", "b", "d", "g1", "u1"));
  auto m = s.AgreementMatrix(3);
  REQUIRE(m.size() == 1);
  CHECK(m[0] == std::vector<std::string>{"a", "a", "b"});
  CHECK(s.AgreementMatrix(2).size() == 1);
  CHECK(s.AgreementMatrix(1).size() == 2);
}

TEST_CASE("scheduler serves the least-served setup") {
  const std::vector<std::string> models{"a", "b", "c"};
  Arena arena(Config(models, 4), Inventory({"d"}, 10, models));
  CHECK(arena.setups().size() == 3);
  std::map<std::string, int> counts;
  for (int i = 0; i < 3; ++i) {
    Battle b = arena.NextBattle();
    ++counts[b.setup.Key()];
    arena.RecordChoice(b.id, "A", "u");
  }
  for (const auto& [k, c] : counts) CHECK(c == 1);
  Battle fourth = arena.NextBattle();
  arena.RecordChoice(fourth.id, "B", "u");
  for (int i = 0; i < 2; ++i) {
    Battle next = arena.NextBattle();
    CHECK(next.setup != fourth.setup);
    arena.RecordChoice(next.id, "A", "u");
  }
}

TEST_CASE("scheduler fairness and exhaustion") {
  const std::vector<std::string> models{"a", "b", "c", "d"};
  const int goals = 5;
  Arena arena(Config(models, 11), Inventory({"x", "y"}, goals, models));
  std::map<Setup, std::set<std::string>> goals_seen;
  int served = 0;
  for (;;) {
    Battle b;
    try {
      b = arena.NextBattle();
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kExhausted);
      break;
    }
    CHECK(goals_seen[b.setup].insert(b.goal_id).second);
    CHECK(b.plan_a.steps[0].action == "step by " + b.plan_a_model);
    arena.RecordChoice(b.id, served % 2 ? "A" : "B", "u");
    ++served;
    ArenaState s = arena.snapshot();
    long lo = 1 << 30, hi = 0;
    for (const Setup& setup : arena.setups()) {
      lo = std::min(lo, s.served(setup));
      hi = std::max(hi, s.served(setup));
    }
    CHECK(hi - lo <= 1);
  }
  CHECK(served == 12 * goals);
  for (const auto& [s, g] : goals_seen) CHECK(g.size() == goals);
}

TEST_CASE("scheduler is deterministic for a seed") {
  const std::vector<std::string> models{"a", "b", "c"};
  auto sequence = [&](std::uint64_t seed) {
    Arena arena(Config(models, seed), Inventory({"d"}, 4, models));
    std::vector<std::string> out;
    for (int i = 0; i < 8; ++i) {
      Battle b = arena.NextBattle();
      out.push_back(b.setup.Key() + b.goal_id + b.plan_a_model);
      arena.RecordChoice(b.id, "A", "u");
    }
    return out;
  };
  CHECK(sequence(5) == sequence(5));
  CHECK(sequence(5) != sequence(6));
}

TEST_CASE("submission errors leave state unchanged") {
  const std::vector<std::string> models{"a", "b"};
  Arena arena(Config(models), Inventory({"d"}, 3, models));
  Battle b = arena.NextBattle();
  CHECK(CodeOf([&] { arena.RecordChoice("b99", "A", "u"); }) == ErrorCode::kUnknownBattle);
  CHECK(CodeOf([&] { arena.RecordChoice(b.id, "C", "u"); }) == ErrorCode::kInvalidWinner);
  CHECK(arena.snapshot().log().empty());
  BattleRecord r = arena.RecordChoice(b.id, b.plan_b_model, "u");
  CHECK(r.winner == b.plan_b_model);
  CHECK(r.seq == 1);
  CHECK(CodeOf([&] { arena.RecordChoice(b.id, "A", "u"); }) ==
        ErrorCode::kDuplicateSubmission);
  CHECK(arena.snapshot().log().size() == 1);
  auto rows = arena.leaderboard();
  CHECK(rows[0].model == b.plan_b_model);
  CHECK(rows[0].elo == 1016.0);
}

TEST_CASE("pending battles expire") {
  const std::vector<std::string> models{"a", "b"};
  Time now{};
  ArenaConfig cfg = Config(models);
  cfg.pending_ttl = std::chrono::seconds(60);
  Arena arena(cfg, Inventory({"d"}, 1, models), "", [&] { return now; });
  Battle b = arena.NextBattle();
  CHECK(CodeOf([&] { arena.NextBattle(); }) == ErrorCode::kExhausted);
  now += std::chrono::seconds(61);
  CHECK(CodeOf([&] { arena.RecordChoice(b.id, "A", "u"); }) == ErrorCode::kUnknownBattle);
  Battle again = arena.NextBattle();
  CHECK(again.goal_id == b.goal_id);
  CHECK(again.id != b.id);
  arena.RecordChoice(again.id, "A", "u");
  CHECK(CodeOf([&] { arena.NextBattle(); }) == ErrorCode::kExhausted);
}

TEST_CASE("repeats allow several annotators per item") {
  const std::vector<std::string> models{"a", "b"};
  ArenaConfig cfg = Config(models);
  cfg.repeats_per_item = 3;
  Arena arena(cfg, Inventory({"d"}, 2, models));
  for (int i = 0; i < 6; ++i) {
    Battle b = arena.NextBattle();
    arena.RecordChoice(b.id, "A", "u" + std::to_string(i % 3));
  }
  CHECK(CodeOf([&] { arena.NextBattle(); }) == ErrorCode::kExhausted);
}

TEST_CASE("restart replays the log file") {
  const fs::path dir = TempPath("restart");
  fs::create_directories(dir);
  const std::string log = (dir / "battles.jsonl").string();
  const std::vector<std::string> models{"a", "b", "c"};
  auto inventory = Inventory({"d"}, 2, models);
  std::map<std::string, double> before;
  {
    Arena arena(Config(models), inventory, log);
    for (int i = 0; i < 4; ++i) {
      Battle b = arena.NextBattle();
      arena.RecordChoice(b.id, i % 3 ? "A" : "B", "u");
    }
    before = arena.snapshot().ratings();
  }
  CHECK(LoadBattleLog(log).size() == 4);
  Arena restarted(Config(models), inventory, log);
  CHECK(restarted.snapshot().ratings() == before);
  Battle b = restarted.NextBattle();
  CHECK(b.id == "b5");
  CHECK(CodeOf([&] { restarted.RecordChoice("b1", "A", "u"); }) ==
        ErrorCode::kDuplicateSubmission);
  restarted.RecordChoice(b.id, "A", "u");
  restarted.RecordChoice(restarted.NextBattle().id, "A", "u");
  CHECK(CodeOf([&] { restarted.NextBattle(); }) == ErrorCode::kExhausted);
  CHECK(restarted.ExportLog() == ReadFile(log));
  CHECK(ArenaState::Replay(Config(models), LoadBattleLog(log)).ratings() ==
        restarted.snapshot().ratings());
  CHECK(LoadBattleLog((dir / "missing.jsonl").string()).empty());
  fs::remove_all(dir);
}

TEST_CASE("inventory loading") {
  const fs::path root = TempPath("inventory");
  fs::create_directories(root / "cooking" / "g1");
  fs::create_directories(root / "cooking" / "g2");
  auto write = [](const fs::path& p, const std::string& text) { std::ofstream(p) << text; };
  const std::string plan = "<GOAL>\nmake tea\n</GOAL>\n\n---\n\n<ACTION>\nboil\n</ACTION>\n";
  write(root / "cooking" / "g1" / "alpha.md", plan);
  write(root / "cooking" / "g1" / "beta.md", plan);
  write(root / "cooking" / "g1" / "context.txt", "clip-17\n");
  write(root / "cooking" / "g2" / "notes.txt", "ignored");
  auto items = LoadInventory(root.string());
  REQUIRE(items.size() == 1);
  CHECK(items[0].dataset == "cooking");
  CHECK(items[0].goal_id == "g1");
  CHECK(items[0].goal == "make tea");
  CHECK(items[0].context_ref == "clip-17");
  CHECK(items[0].plans.size() == 2);
  CHECK(CodeOf([&] { LoadInventory((root / "nope").string()); }) == ErrorCode::kIo);
  fs::remove_all(root);
}

}  // namespace
}  // namespace wmplan
