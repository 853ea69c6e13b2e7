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

// Pairwise human-preference arena for plans.
//
// A setup is a (dataset, unordered model pair). Battles are drawn uniformly
// over setups: the next battle comes from a setup with the fewest battles
// served so far. Annotators pick Plan A or Plan B without seeing model names,
// and every recorded choice updates Elo ratings in log order. The battle log
// is the single source of truth; the rating state is a fold over it.

#ifndef WMPLAN_ARENA_H_
#define WMPLAN_ARENA_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "wmplan/trajectory.h"

namespace wmplan {

// Standard Elo with base-10 logistic expectation and scale 400. Returns the
// updated (winner, loser) ratings.
std::pair<double, double> EloUpdate(double winner, double loser, double k);

// Fleiss' kappa over an items x annotators matrix of category labels.
// Every item needs the same number (>= 2) of ratings.
// Throws Error(kPreconditionViolated) or Error(kDegenerateMarginals).
double FleissKappa(const std::vector<std::vector<std::string>>& ratings);

// Mean share of agreeing annotator pairs per item, in percent.
double RawAgreement(const std::vector<std::vector<std::string>>& ratings);

struct ArenaConfig {
  double initial_rating = 1000;
  double k_factor = 32;
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  std::uint64_t seed = 0;
  // Each (setup, goal) may be served this many times; > 1 for agreement pilots.
  int repeats_per_item = 1;
  std::chrono::seconds pending_ttl{30 * 60};

  void Validate() const;
};

struct Setup {
  std::string dataset;
  std::string model_a;  // model_a < model_b
  std::string model_b;

  static Setup Of(std::string dataset, std::string m1, std::string m2);
  std::string Key() const;
  friend auto operator<=>(const Setup&, const Setup&) = default;
};

struct InventoryItem {
  std::string dataset;
  std::string goal_id;
  std::string goal;
  std::string context_ref;
  std::map<std::string, Trajectory> plans;  // by model
};

// Directory layout: <root>/<dataset>/<goal_id>/<model>.md holds trajectory
// markup; an optional context.txt holds the context reference.
std::vector<InventoryItem> LoadInventory(const std::string& root);

struct BattleRecord {
  long seq = 0;
  std::string battle_id;
  std::string dataset;
  std::string goal_id;
  std::string plan_a_model;
  std::string plan_b_model;
  std::string winner;  // model name
  std::string annotator;
  std::string timestamp;  // ISO 8601 UTC
};

std::string BattleRecordToJson(const BattleRecord& r);
BattleRecord BattleRecordFromJson(const std::string& line);

struct DatasetTally {
  long wins = 0;
  long battles = 0;
};

// Ratings and counters implied by a battle log.
class ArenaState {
 public:
  explicit ArenaState(const ArenaConfig& cfg);

  // Appends one record. seq must be size()+1 and the winner one of the pair.
  void Apply(const BattleRecord& r);

  static ArenaState Replay(const ArenaConfig& cfg,
                           const std::vector<BattleRecord>& log);

  double rating(const std::string& model) const { return ratings_.at(model); }
  const std::map<std::string, double>& ratings() const { return ratings_; }
  long served(const Setup& s) const;
  const std::vector<BattleRecord>& log() const { return log_; }
  const std::map<std::string, std::map<std::string, DatasetTally>>& tallies() const {
    return tallies_;
  }
  // Items rated by at least `annotators` people, first choices per item.
  std::vector<std::vector<std::string>> AgreementMatrix(int annotators) const;

 private:
  ArenaConfig cfg_;
  std::map<std::string, double> ratings_;
  std::map<Setup, long> served_;
  std::map<std::string, std::map<std::string, DatasetTally>> tallies_;  // model -> dataset
  // item key -> (annotator, winner) in log order
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> votes_;
  std::vector<BattleRecord> log_;
};

struct LeaderboardRow {
  std::string model;
  double elo = 0;
  long elo_display = 0;
  std::map<std::string, std::optional<double>> win_rate;  // percent by dataset
  long battles = 0;
};

// Rows sorted by rating, highest first.
std::vector<LeaderboardRow> Leaderboard(const ArenaState& state,
                                        const ArenaConfig& cfg);
std::string LeaderboardToJson(const std::vector<LeaderboardRow>& rows,
                              const ArenaConfig& cfg);
std::string LeaderboardToText(const std::vector<LeaderboardRow>& rows,
                              const ArenaConfig& cfg);

struct Battle {
  std::string id;
  Setup setup;
  std::string goal_id;
  std::string goal;
  std::string context_ref;
  std::string plan_a_model;
  std::string plan_b_model;
  Trajectory plan_a;
  Trajectory plan_b;
  std::chrono::system_clock::time_point issued_at;
};

// Thread-safe arena service. Readers share a lock; next-battle reservation
// and choice recording are serialized, and seq numbers are assigned at commit.
class Arena {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  // When `log_path` names an existing file it is replayed first; every new
  // record is appended to it.
  Arena(ArenaConfig cfg, std::vector<InventoryItem> inventory,
        std::string log_path = "", Clock clock = nullptr);

  // Throws Error(kExhausted) when no setup has unserved inventory.
  Battle NextBattle();

  // `winner` is "A", "B" or a model name in the battle. Throws
  // Error(kUnknownBattle), Error(kInvalidWinner) or
  // Error(kDuplicateSubmission); state is unchanged on error.
  BattleRecord RecordChoice(const std::string& battle_id,
                            const std::string& winner,
                            const std::string& annotator);

  std::vector<LeaderboardRow> leaderboard() const;
  std::string ExportLog() const;
  ArenaState snapshot() const;
  std::vector<Setup> setups() const;
  const ArenaConfig& config() const { return cfg_; }

 private:
  void ExpirePendingLocked(std::chrono::system_clock::time_point now);

  ArenaConfig cfg_;
  std::vector<InventoryItem> inventory_;
  std::string log_path_;
  Clock clock_;

  mutable std::shared_mutex mu_;
  ArenaState state_;
  // setup -> inventory indices whose plans cover both models
  std::map<Setup, std::vector<std::size_t>> setup_items_;
  // (setup, item index) -> times served or reserved
  std::map<std::pair<Setup, std::size_t>, int> item_uses_;
  std::map<std::string, Battle> pending_;
  std::set<std::string> completed_;
  std::uint64_t issued_ = 0;
};

std::vector<BattleRecord> LoadBattleLog(const std::string& path);

}  // namespace wmplan

#endif  // WMPLAN_ARENA_H_
