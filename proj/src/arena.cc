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

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wmplan/error.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string IsoTimestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string ItemKey(const std::string& dataset, const std::string& goal_id,
                    const Setup& s) {
  return dataset + "|" + goal_id + "|" + s.model_a + "|" + s.model_b;
}

std::vector<std::size_t> RatingsPerItem(
    const std::vector<std::vector<std::string>>& ratings) {
  if (ratings.empty()) {
    throw Error(ErrorCode::kPreconditionViolated, "no rated items");
  }
  const std::size_t n = ratings.front().size();
  if (n < 2) {
    throw Error(ErrorCode::kPreconditionViolated,
                "every item needs at least two ratings");
  }
  for (const auto& row : ratings) {
    if (row.size() != n) {
      throw Error(ErrorCode::kPreconditionViolated,
                  "every item needs the same number of ratings");
    }
  }
  // Per-item agreeing pairs.
  std::vector<std::size_t> agreeing;
  for (const auto& row : ratings) {
    std::map<std::string, std::size_t> counts;
    for (const auto& c : row) ++counts[c];
    std::size_t pairs = 0;
    for (const auto& [c, k] : counts) pairs += k * (k - 1) / 2;
    agreeing.push_back(pairs);
  }
  return agreeing;
}

}  // namespace

std::pair<double, double> EloUpdate(double winner, double loser, double k) {
  const double expected = 1.0 / (1.0 + std::pow(10.0, (loser - winner) / 400.0));
  const double delta = k * (1.0 - expected);
  return {winner + delta, loser - delta};
}

double FleissKappa(const std::vector<std::vector<std::string>>& ratings) {
  const std::vector<std::size_t> agreeing = RatingsPerItem(ratings);
  const double n = static_cast<double>(ratings.front().size());
  const double items = static_cast<double>(ratings.size());

  double p_bar = 0;
  for (std::size_t a : agreeing) p_bar += static_cast<double>(a) / (n * (n - 1) / 2);
  p_bar /= items;

  std::map<std::string, double> marginal;
  for (const auto& row : ratings) {
    for (const auto& c : row) marginal[c] += 1.0;
  }
  double p_e = 0;
  for (const auto& [c, count] : marginal) {
    const double p = count / (items * n);
    p_e += p * p;
  }
  if (p_e >= 1.0) {
    throw Error(ErrorCode::kDegenerateMarginals,
                "all ratings fall in one category");
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

double RawAgreement(const std::vector<std::vector<std::string>>& ratings) {
  const std::vector<std::size_t> agreeing = RatingsPerItem(ratings);
  const double n = static_cast<double>(ratings.front().size());
  double sum = 0;
  for (std::size_t a : agreeing) sum += static_cast<double>(a) / (n * (n - 1) / 2);
  return 100.0 * sum / static_cast<double>(ratings.size());
}

void ArenaConfig::Validate() const {
  std::set<std::string> unique(models.begin(), models.end());
  if (unique.size() < 2 || unique.size() != models.size()) {
    throw Error(ErrorCode::kBadConfig, "need at least two distinct models");
  }
  if (!(k_factor > 0)) throw Error(ErrorCode::kBadConfig, "K must be > 0");
  if (!std::isfinite(initial_rating)) {
    throw Error(ErrorCode::kBadConfig, "initial rating must be finite");
  }
  if (repeats_per_item < 1) {
    throw Error(ErrorCode::kBadConfig, "repeats_per_item must be >= 1");
  }
}

Setup Setup::Of(std::string dataset, std::string m1, std::string m2) {
  if (m1 == m2) {
    throw Error(ErrorCode::kPreconditionViolated, "a setup needs two distinct models");
  }
  if (m2 < m1) std::swap(m1, m2);
  return Setup{std::move(dataset), std::move(m1), std::move(m2)};
}

std::string Setup::Key() const { return dataset + "|" + model_a + "|" + model_b; }

std::vector<InventoryItem> LoadInventory(const std::string& root) {
  std::vector<InventoryItem> items;
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kIo, "inventory directory not found: " + root);
  }
  auto sorted_dirs = [](const fs::path& p) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_directory()) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  for (const fs::path& ds : sorted_dirs(root)) {
    for (const fs::path& goal_dir : sorted_dirs(ds)) {
      InventoryItem item;
      item.dataset = ds.filename().string();
      item.goal_id = goal_dir.filename().string();
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(goal_dir)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const fs::path& f : files) {
        if (f.filename() == "context.txt") {
          item.context_ref = Trim(ReadFile(f.string()));
        } else if (f.extension() == ".md") {
          Trajectory t = ParseTrajectory(ReadFile(f.string()));
          if (item.goal.empty()) item.goal = t.goal;
          item.plans.emplace(f.stem().string(), std::move(t));
        }
      }
      if (!item.plans.empty()) items.push_back(std::move(item));
    }
  }
  return items;
}

std::string BattleRecordToJson(const BattleRecord& r) {
  return json{{"seq", r.seq},
              {"battle_id", r.battle_id},
              {"dataset", r.dataset},
              {"goal_id", r.goal_id},
              {"plan_a_model", r.plan_a_model},
              {"plan_b_model", r.plan_b_model},
              {"winner", r.winner},
              {"annotator", r.annotator},
              {"timestamp", r.timestamp}}
      .dump();
}

BattleRecord BattleRecordFromJson(const std::string& line) {
  BattleRecord r;
  try {
    json j = json::parse(line);
    r.seq = j.at("seq").get<long>();
    r.battle_id = j.value("battle_id", std::string());
    r.dataset = j.at("dataset").get<std::string>();
    r.goal_id = j.value("goal_id", std::string());
    r.plan_a_model = j.at("plan_a_model").get<std::string>();
    r.plan_b_model = j.at("plan_b_model").get<std::string>();
    r.winner = j.at("winner").get<std::string>();
    r.annotator = j.value("annotator", std::string());
    r.timestamp = j.value("timestamp", std::string());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadRow, std::string("bad battle record: ") + e.what());
  }
  return r;
}

std::vector<BattleRecord> LoadBattleLog(const std::string& path) {
  std::vector<BattleRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (TrimView(line).empty()) continue;
    out.push_back(BattleRecordFromJson(line));
  }
  return out;
}

ArenaState::ArenaState(const ArenaConfig& cfg) : cfg_(cfg) {
  for (const auto& m : cfg.models) ratings_[m] = cfg.initial_rating;
}

void ArenaState::Apply(const BattleRecord& r) {
  if (r.seq != static_cast<long>(log_.size()) + 1) {
    throw Error(ErrorCode::kPreconditionViolated,
                fmt::format("record seq {} but expected {}", r.seq, log_.size() + 1));
  }
  const Setup setup = Setup::Of(r.dataset, r.plan_a_model, r.plan_b_model);
  if (r.winner != r.plan_a_model && r.winner != r.plan_b_model) {
    throw Error(ErrorCode::kInvalidWinner,
                "winner '" + r.winner + "' is not part of the battle");
  }
  const std::string& loser = r.winner == r.plan_a_model ? r.plan_b_model : r.plan_a_model;
  for (const std::string* m : {&r.winner, &loser}) {
    ratings_.try_emplace(*m, cfg_.initial_rating);
  }
  auto [w, l] = EloUpdate(ratings_[r.winner], ratings_[loser], cfg_.k_factor);
  ratings_[r.winner] = w;
  ratings_[loser] = l;

  ++served_[setup];
  DatasetTally& tw = tallies_[r.winner][r.dataset];
  ++tw.wins;
  ++tw.battles;
  ++tallies_[loser][r.dataset].battles;
  votes_[ItemKey(r.dataset, r.goal_id, setup)].emplace_back(r.annotator, r.winner);
  log_.push_back(r);
}

ArenaState ArenaState::Replay(const ArenaConfig& cfg,
                              const std::vector<BattleRecord>& log) {
  ArenaState s(cfg);
  for (const BattleRecord& r : log) s.Apply(r);
  return s;
}

long ArenaState::served(const Setup& s) const {
  auto it = served_.find(s);
  return it == served_.end() ? 0 : it->second;
}

std::vector<std::vector<std::string>> ArenaState::AgreementMatrix(
    int annotators) const {
  std::vector<std::vector<std::string>> out;
  for (const auto& [key, votes] : votes_) {
    std::vector<std::string> row;
    std::set<std::string> seen;
    for (const auto& [who, choice] : votes) {
      if (!seen.insert(who).second) continue;
      row.push_back(choice);
      if (static_cast<int>(row.size()) == annotators) break;
    }
    if (static_cast<int>(row.size()) == annotators) out.push_back(std::move(row));
  }
  return out;
}

std::vector<LeaderboardRow> Leaderboard(const ArenaState& state,
                                        const ArenaConfig& cfg) {
  std::vector<LeaderboardRow> rows;
  for (const auto& [model, rating] : state.ratings()) {
    LeaderboardRow row;
    row.model = model;
    row.elo = rating;
    row.elo_display = std::lround(rating);
    auto t = state.tallies().find(model);
    for (const auto& ds : cfg.datasets) {
      std::optional<double> rate;
      if (t != state.tallies().end()) {
        if (auto d = t->second.find(ds); d != t->second.end() && d->second.battles > 0) {
          rate = 100.0 * static_cast<double>(d->second.wins) /
                 static_cast<double>(d->second.battles);
        }
      }
      row.win_rate[ds] = rate;
    }
    if (t != state.tallies().end()) {
      for (const auto& [ds, tally] : t->second) row.battles += tally.battles;
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const LeaderboardRow& a, const LeaderboardRow& b) {
                     return a.elo > b.elo;
                   });
  return rows;
}

std::string LeaderboardToJson(const std::vector<LeaderboardRow>& rows,
                              const ArenaConfig& cfg) {
  json models = json::array();
  for (const LeaderboardRow& r : rows) {
    json rates = json::object();
    for (const auto& [ds, rate] : r.win_rate) {
      rates[ds] = rate ? json(*rate) : json(nullptr);
    }
    models.push_back({{"model", r.model},
                      {"elo", r.elo},
                      {"elo_display", r.elo_display},
                      {"win_rate", rates},
                      {"battles", r.battles}});
  }
  return json{{"datasets", cfg.datasets}, {"models", models}}.dump(2) + "\n";
}

std::string LeaderboardToText(const std::vector<LeaderboardRow>& rows,
                              const ArenaConfig& cfg) {
  std::string out = fmt::format("{:<24} {:>6}", "Model", "Elo");
  for (const auto& ds : cfg.datasets) out += fmt::format(" {:>12}", ds);
  out += fmt::format(" {:>8}\n", "Battles");
  for (const LeaderboardRow& r : rows) {
    out += fmt::format("{:<24} {:>6}", r.model, r.elo_display);
    for (const auto& ds : cfg.datasets) {
      auto it = r.win_rate.find(ds);
      if (it != r.win_rate.end() && it->second) {
        out += fmt::format(" {:>12.1f}", *it->second);
      } else {
        // Right-align the em dash by display width, not byte count.
        out += std::string(11, ' ') + "—";
      }
    }
    out += fmt::format(" {:>8}\n", r.battles);
  }
  return out;
}

Arena::Arena(ArenaConfig cfg, std::vector<InventoryItem> inventory,
             std::string log_path, Clock clock)
    : cfg_(std::move(cfg)),
      inventory_(std::move(inventory)),
      log_path_(std::move(log_path)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::system_clock::now(); })),
      state_(cfg_) {
  cfg_.Validate();
  if (cfg_.datasets.empty()) {
    std::set<std::string> ds;
    for (const auto& item : inventory_) ds.insert(item.dataset);
    cfg_.datasets.assign(ds.begin(), ds.end());
  }
  state_ = ArenaState(cfg_);

  std::vector<std::string> models = cfg_.models;
  std::sort(models.begin(), models.end());
  const std::set<std::string> datasets(cfg_.datasets.begin(), cfg_.datasets.end());
  for (std::size_t idx = 0; idx < inventory_.size(); ++idx) {
    const InventoryItem& item = inventory_[idx];
    if (!datasets.count(item.dataset)) continue;
    for (std::size_t i = 0; i < models.size(); ++i) {
      for (std::size_t j = i + 1; j < models.size(); ++j) {
        if (item.plans.count(models[i]) && item.plans.count(models[j])) {
          setup_items_[Setup::Of(item.dataset, models[i], models[j])].push_back(idx);
        }
      }
    }
  }

  if (!log_path_.empty()) {
    for (const BattleRecord& r : LoadBattleLog(log_path_)) {
      state_.Apply(r);
      completed_.insert(r.battle_id);
      const Setup s = Setup::Of(r.dataset, r.plan_a_model, r.plan_b_model);
      if (auto it = setup_items_.find(s); it != setup_items_.end()) {
        for (std::size_t idx : it->second) {
          if (inventory_[idx].goal_id == r.goal_id) {
            ++item_uses_[{s, idx}];
            break;
          }
        }
      }
      if (r.battle_id.size() > 1 && r.battle_id[0] == 'b') {
        try {
          issued_ = std::max<std::uint64_t>(issued_, std::stoull(r.battle_id.substr(1)));
        } catch (const std::exception&) {
        }
      }
    }
  }
}

void Arena::ExpirePendingLocked(std::chrono::system_clock::time_point now) {
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (now - it->second.issued_at >= cfg_.pending_ttl) {
      const Battle& b = it->second;
      for (std::size_t idx : setup_items_[b.setup]) {
        if (inventory_[idx].goal_id == b.goal_id) {
          --item_uses_[{b.setup, idx}];
          break;
        }
      }
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
}

Battle Arena::NextBattle() {
  std::unique_lock lock(mu_);
  const auto now = clock_();
  ExpirePendingLocked(now);

  std::map<Setup, long> reserved;
  for (const auto& [id, b] : pending_) ++reserved[b.setup];

  // Setups that still have an item to serve, with served + reserved counts.
  std::vector<std::pair<Setup, long>> open;
  for (const auto& [setup, items] : setup_items_) {
    bool available = false;
    for (std::size_t idx : items) {
      auto it = item_uses_.find({setup, idx});
      if (it == item_uses_.end() || it->second < cfg_.repeats_per_item) {
        available = true;
        break;
      }
    }
    if (available) open.emplace_back(setup, state_.served(setup) + reserved[setup]);
  }
  if (open.empty()) throw Error(ErrorCode::kExhausted, "every setup is fully served");

  long fewest = open.front().second;
  for (const auto& [s, c] : open) fewest = std::min(fewest, c);
  std::vector<Setup> ties;
  for (const auto& [s, c] : open) {
    if (c == fewest) ties.push_back(s);
  }

  const std::uint64_t n = ++issued_;
  Rng rng(MixSeed(cfg_.seed, n));
  const Setup setup = ties[UniformIndex(rng, ties.size())];

  std::vector<std::size_t> items;
  for (std::size_t idx : setup_items_.at(setup)) {
    auto it = item_uses_.find({setup, idx});
    if (it == item_uses_.end() || it->second < cfg_.repeats_per_item) items.push_back(idx);
  }
  const std::size_t idx = items[UniformIndex(rng, items.size())];
  const InventoryItem& item = inventory_[idx];
  const bool swap = UniformIndex(rng, 2) == 1;

  Battle b;
  b.id = fmt::format("b{}", n);
  b.setup = setup;
  b.goal_id = item.goal_id;
  b.goal = item.goal;
  b.context_ref = item.context_ref;
  b.plan_a_model = swap ? setup.model_b : setup.model_a;
  b.plan_b_model = swap ? setup.model_a : setup.model_b;
  b.plan_a = item.plans.at(b.plan_a_model);
  b.plan_b = item.plans.at(b.plan_b_model);
  b.issued_at = now;
  ++item_uses_[{setup, idx}];
  pending_.emplace(b.id, b);
  return b;
}

BattleRecord Arena::RecordChoice(const std::string& battle_id,
                                 const std::string& winner,
                                 const std::string& annotator) {
  std::unique_lock lock(mu_);
  const auto now = clock_();
  ExpirePendingLocked(now);
  if (completed_.count(battle_id)) {
    throw Error(ErrorCode::kDuplicateSubmission,
                "battle " + battle_id + " already has a choice");
  }
  auto it = pending_.find(battle_id);
  if (it == pending_.end()) {
    throw Error(ErrorCode::kUnknownBattle, "no pending battle " + battle_id);
  }
  const Battle& b = it->second;
  std::string model;
  if (winner == "A" || winner == b.plan_a_model) {
    model = b.plan_a_model;
  } else if (winner == "B" || winner == b.plan_b_model) {
    model = b.plan_b_model;
  } else {
    throw Error(ErrorCode::kInvalidWinner, "winner must be \"A\" or \"B\"");
  }

  BattleRecord r;
  r.seq = static_cast<long>(state_.log().size()) + 1;
  r.battle_id = battle_id;
  r.dataset = b.setup.dataset;
  r.goal_id = b.goal_id;
  r.plan_a_model = b.plan_a_model;
  r.plan_b_model = b.plan_b_model;
  r.winner = model;
  r.annotator = annotator;
  r.timestamp = IsoTimestamp(now);

  if (!log_path_.empty()) {
    std::ofstream out(log_path_, std::ios::app);
    out << BattleRecordToJson(r) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot append to " + log_path_);
  }
  state_.Apply(r);
  completed_.insert(battle_id);
  pending_.erase(it);
  return r;
}

std::vector<LeaderboardRow> Arena::leaderboard() const {
  std::shared_lock lock(mu_);
  return Leaderboard(state_, cfg_);
}

std::string Arena::ExportLog() const {
  std::shared_lock lock(mu_);
  std::string out;
  for (const BattleRecord& r : state_.log()) out += BattleRecordToJson(r) + "\n";
  return out;
}

ArenaState Arena::snapshot() const {
  std::shared_lock lock(mu_);
  return state_;
}

std::vector<Setup> Arena::setups() const {
  std::shared_lock lock(mu_);
  std::vector<Setup> out;
  for (const auto& [s, items] : setup_items_) out.push_back(s);
  return out;
}

}  // namespace wmplan
