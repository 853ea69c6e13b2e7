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

#include "wmplan/toy_world.h"

#include <algorithm>

#include "json.hpp"
#include "wmplan/error.h"

namespace wmplan {
namespace {

using nlohmann::json;

void CheckDeclared(const FluentSet& declared, const FluentSet& used,
                   const std::string& where) {
  for (const auto& f : used) {
    if (!declared.count(f)) {
      throw Error(ErrorCode::kBadConfig,
                  "fluent '" + f + "' in " + where + " is not declared");
    }
  }
}

}  // namespace

void ToyWorld::Validate() const {
  CheckDeclared(fluents, initial, "initial");
  CheckDeclared(fluents, goal, "goal");
  for (const auto& [name, a] : actions) {
    if (name.empty()) throw Error(ErrorCode::kBadConfig, "empty action name");
    CheckDeclared(fluents, a.pre, name + ".pre");
    CheckDeclared(fluents, a.add, name + ".add");
    CheckDeclared(fluents, a.del, name + ".del");
  }
}

bool ToyWorld::Satisfied(const FluentSet& state) const {
  return UnmetGoals(state) == 0;
}

int ToyWorld::UnmetGoals(const FluentSet& state) const {
  int unmet = 0;
  for (const auto& g : goal) unmet += state.count(g) ? 0 : 1;
  return unmet;
}

std::vector<std::string> ToyWorld::Applicable(const FluentSet& state) const {
  std::vector<std::string> out;
  for (const auto& [name, a] : actions) {
    if (std::includes(state.begin(), state.end(), a.pre.begin(), a.pre.end())) {
      out.push_back(name);
    }
  }
  return out;
}

FluentSet ApplyAction(const ToyWorld& world, const FluentSet& state,
                      const std::string& action) {
  auto it = world.actions.find(action);
  if (it == world.actions.end()) {
    throw Error(ErrorCode::kUnknownAction, "unknown action '" + action + "'");
  }
  const ToyAction& a = it->second;
  for (const auto& p : a.pre) {
    if (!state.count(p)) {
      throw Error(ErrorCode::kPreconditionUnmet,
                  "action '" + action + "' needs '" + p + "'");
    }
  }
  FluentSet next;
  for (const auto& f : state) {
    if (!a.del.count(f)) next.insert(f);
  }
  next.insert(a.add.begin(), a.add.end());
  return next;
}

FluentSet ReplayActions(const ToyWorld& world, const std::vector<Step>& steps) {
  FluentSet state = world.initial;
  for (const Step& s : steps) state = ApplyAction(world, state, s.action);
  return state;
}

ToyWorld ToyWorldFromJson(const std::string& text) {
  ToyWorld w;
  try {
    json doc = json::parse(text);
    auto set_of = [](const json& j) { return j.get<FluentSet>(); };
    w.fluents = set_of(doc.at("fluents"));
    w.initial = set_of(doc.at("initial"));
    w.goal = set_of(doc.at("goal"));
    for (const auto& [name, a] : doc.at("actions").items()) {
      ToyAction act;
      if (a.contains("pre")) act.pre = set_of(a["pre"]);
      if (a.contains("add")) act.add = set_of(a["add"]);
      if (a.contains("del")) act.del = set_of(a["del"]);
      w.actions.emplace(name, std::move(act));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("bad toy world: ") + e.what());
  }
  w.Validate();
  return w;
}

std::string ToyWorldToJson(const ToyWorld& world) {
  json actions = json::object();
  for (const auto& [name, a] : world.actions) {
    actions[name] = {{"pre", a.pre}, {"add", a.add}, {"del", a.del}};
  }
  return json{{"fluents", world.fluents},
              {"initial", world.initial},
              {"goal", world.goal},
              {"actions", actions}}
             .dump(2) +
         "\n";
}

std::string RenderFluents(const FluentSet& state) {
  std::string out = "State holds:";
  if (state.empty()) return out + " nothing";
  bool first = true;
  for (const auto& f : state) {
    out += first ? " " : ", ";
    out += f;
    first = false;
  }
  return out;
}

ToyWorldModel::ToyWorldModel(ToyWorld world) : world_(std::move(world)) {
  world_.Validate();
}

std::vector<std::string> ToyWorldModel::Propose(const PlanContext&,
                                                const std::vector<Step>& history,
                                                int k) const {
  auto names = world_.Applicable(ReplayActions(world_, history));
  if (k >= 0 && static_cast<int>(names.size()) > k) names.resize(k);
  return names;
}

Prediction ToyWorldModel::Predict(const PlanContext&,
                                  const std::vector<Step>& history,
                                  const std::string& action) const {
  FluentSet next = ApplyAction(world_, ReplayActions(world_, history), action);
  return Prediction{RenderFluents(next), world_.Satisfied(next)};
}

ToyWorldCost::ToyWorldCost(const ToyWorld& world, double step_cost)
    : world_(world), step_cost_(step_cost) {}

double ToyWorldCost::Cost(const Trajectory& plan) const {
  FluentSet state = ReplayActions(world_, plan.steps);
  return world_.UnmetGoals(state) +
         step_cost_ * static_cast<double>(plan.steps.size());
}

}  // namespace wmplan
