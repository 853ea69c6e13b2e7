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

// A STRIPS-style propositional world used as a deterministic world model and
// as the ground truth for planner tests.

#ifndef WMPLAN_TOY_WORLD_H_
#define WMPLAN_TOY_WORLD_H_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "wmplan/planner.h"

namespace wmplan {

using FluentSet = std::set<std::string>;

struct ToyAction {
  FluentSet pre;
  FluentSet add;
  FluentSet del;
};

struct ToyWorld {
  FluentSet fluents;
  FluentSet initial;
  FluentSet goal;
  std::map<std::string, ToyAction> actions;  // ordered by name

  // Throws Error(kBadConfig) if any referenced fluent is undeclared.
  void Validate() const;
  bool Satisfied(const FluentSet& state) const;
  int UnmetGoals(const FluentSet& state) const;
  // Action names applicable in `state`, in name order.
  std::vector<std::string> Applicable(const FluentSet& state) const;
};

// (state \ del) U add when pre is a subset of state.
// Throws Error(kUnknownAction) or Error(kPreconditionUnmet).
FluentSet ApplyAction(const ToyWorld& world, const FluentSet& state,
                      const std::string& action);

// Replays action names from `initial`.
FluentSet ReplayActions(const ToyWorld& world, const std::vector<Step>& steps);

// {fluents, initial, goal, actions:{name:{pre, add, del}}}
ToyWorld ToyWorldFromJson(const std::string& text);
std::string ToyWorldToJson(const ToyWorld& world);

std::string RenderFluents(const FluentSet& state);

// WorldModel over a ToyWorld: proposals are the applicable actions in name
// order, predicted states list the resulting fluents.
class ToyWorldModel : public WorldModel {
 public:
  explicit ToyWorldModel(ToyWorld world);

  std::vector<std::string> Propose(const PlanContext& ctx,
                                   const std::vector<Step>& history,
                                   int k) const override;
  Prediction Predict(const PlanContext& ctx, const std::vector<Step>& history,
                     const std::string& action) const override;

  const ToyWorld& world() const { return world_; }

 private:
  ToyWorld world_;
};

// Exact cost: unmet goal fluents after replaying the plan + 0.01 per step.
class ToyWorldCost : public PlanScorer {
 public:
  explicit ToyWorldCost(const ToyWorld& world, double step_cost = 0.01);
  double Cost(const Trajectory& plan) const override;

 private:
  const ToyWorld& world_;
  double step_cost_;
};

}  // namespace wmplan

#endif  // WMPLAN_TOY_WORLD_H_
