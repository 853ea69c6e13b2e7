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

// Planning over a pluggable world model.
//
// System-1 planning takes the world model's top proposal at every step.
// System-2 planning generates several candidate plans, simulates them with the
// world model, scores them with a cost model (plus optional guard-rail
// penalties) and keeps the cheapest.

#ifndef WMPLAN_PLANNER_H_
#define WMPLAN_PLANNER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wmplan/critic.h"
#include "wmplan/text_gen_client.h"
#include "wmplan/trajectory.h"

namespace wmplan {

struct PlanContext {
  std::string goal;
  std::string context;  // observation summary, free text
};

struct Prediction {
  std::string state;
  bool achieved = false;
};

// Implementations must be deterministic for a fixed input and must not keep
// per-call state that changes results.
class WorldModel {
 public:
  virtual ~WorldModel() = default;
  // Up to k candidate next actions, most preferred first.
  virtual std::vector<std::string> Propose(const PlanContext& ctx,
                                           const std::vector<Step>& history,
                                           int k) const = 0;
  virtual Prediction Predict(const PlanContext& ctx,
                             const std::vector<Step>& history,
                             const std::string& action) const = 0;
};

class PlanScorer {
 public:
  virtual ~PlanScorer() = default;
  virtual double Cost(const Trajectory& plan) const = 0;
};

// Scores a plan by rendering it for a text critic.
class TextCriticScorer : public PlanScorer {
 public:
  TextCriticScorer(const TextCritic& critic, RenderOptions opts = {});
  double Cost(const Trajectory& plan) const override;

 private:
  const TextCritic& critic_;
  RenderOptions opts_;
};

struct Penalty {
  std::string name;
  std::function<bool(const Trajectory&)> triggered;
  double weight = 0;
};

enum class SearchMode { kFullRollouts, kBeamPartial };
enum class Objective { kMinimize, kMaximize };

struct SearchConfig {
  int num_candidates = 20;
  int beam_width = 4;
  int branching = 4;  // proposals requested per expansion in beam search
  int max_depth = 10;
  SearchMode mode = SearchMode::kFullRollouts;
  Objective objective = Objective::kMinimize;
  std::vector<Penalty> penalties;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct RankedPlan {
  Trajectory plan;
  double cost = 0;  // scorer cost + triggered penalty weights
  int candidate = 0;  // generation order
};

struct RankedPlans {
  std::vector<RankedPlan> plans;  // best first under the objective
  int chosen = 0;

  const RankedPlan& best() const { return plans.at(chosen); }
};

// Throws Error(kWorldModelFailure) when the world model throws.
Trajectory System1Rollout(const WorldModel& w, const PlanContext& ctx,
                          int max_steps);

// Dispatches on cfg.mode. Throws Error(kNoCandidates) when nothing is
// generated.
RankedPlans System2Plan(const WorldModel& w, const PlanScorer& scorer,
                        const PlanContext& ctx, const SearchConfig& cfg);

// Candidate i follows the i-th first-step proposal then the top proposal;
// candidates beyond the first-step branching pick uniformly among
// cfg.branching proposals at later steps (seeded).
RankedPlans FullRolloutSearch(const WorldModel& w, const PlanScorer& scorer,
                              const PlanContext& ctx, const SearchConfig& cfg);

// Depth-synchronous beam over partial plans scored as prefixes. Plans end when
// the goal is reported achieved, at max_depth, or when nothing is proposed.
RankedPlans BeamSearch(const WorldModel& w, const PlanScorer& scorer,
                       const PlanContext& ctx, const SearchConfig& cfg);

// Plan cost plus the weights of triggered penalties.
double TotalCost(const PlanScorer& scorer, const std::vector<Penalty>& penalties,
                 const Trajectory& plan);

// {candidates:[{cost, plan_ref, plan}], chosen}
std::string RankingToJson(const RankedPlans& ranked);

// World model backed by a text generator. The history is rendered as
// trajectory markup and the generator continues it with <ACTION> or <STATE>
// blocks.
class LlmWorldModel : public WorldModel {
 public:
  explicit LlmWorldModel(TextGenClient& client);
  std::vector<std::string> Propose(const PlanContext& ctx,
                                   const std::vector<Step>& history,
                                   int k) const override;
  Prediction Predict(const PlanContext& ctx, const std::vector<Step>& history,
                     const std::string& action) const override;

 private:
  TextGenClient& client_;
};

}  // namespace wmplan

#endif  // WMPLAN_PLANNER_H_
