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

#include "wmplan/planner.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "wmplan/error.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

using nlohmann::json;

std::vector<std::string> ProposeChecked(const WorldModel& w,
                                        const PlanContext& ctx,
                                        const std::vector<Step>& history,
                                        int k) {
  try {
    auto out = w.Propose(ctx, history, k);
    if (static_cast<int>(out.size()) > k) out.resize(k);
    return out;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kWorldModelFailure) throw;
    throw Error(ErrorCode::kWorldModelFailure, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kWorldModelFailure, e.what());
  }
}

Prediction PredictChecked(const WorldModel& w, const PlanContext& ctx,
                          const std::vector<Step>& history,
                          const std::string& action) {
  try {
    return w.Predict(ctx, history, action);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kWorldModelFailure) throw;
    throw Error(ErrorCode::kWorldModelFailure, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kWorldModelFailure, e.what());
  }
}

Trajectory MakePlan(const PlanContext& ctx, std::vector<Step> steps,
                    bool achieved) {
  Trajectory t;
  t.goal = ctx.goal;
  t.steps = std::move(steps);
  t.achieved = achieved && !t.steps.empty();
  return t;
}

// Chooses which proposal to follow at a given depth.
using Policy = std::function<std::size_t(int depth, std::size_t count)>;

Trajectory Rollout(const WorldModel& w, const PlanContext& ctx, int max_steps,
                   int k, const Policy& choose) {
  std::vector<Step> history;
  for (int depth = 0; depth < max_steps; ++depth) {
    auto proposals = ProposeChecked(w, ctx, history, k);
    if (proposals.empty()) break;
    const std::string& action = proposals[choose(depth, proposals.size())];
    Prediction p = PredictChecked(w, ctx, history, action);
    history.push_back(Step{action, p.state});
    if (p.achieved) return MakePlan(ctx, std::move(history), true);
  }
  return MakePlan(ctx, std::move(history), false);
}

bool Better(double a, double b, Objective objective) {
  return objective == Objective::kMinimize ? a < b : a > b;
}

RankedPlans Rank(std::vector<RankedPlan> plans, Objective objective) {
  if (plans.empty()) throw Error(ErrorCode::kNoCandidates, "no candidate plans");
  std::stable_sort(plans.begin(), plans.end(),
                   [&](const RankedPlan& a, const RankedPlan& b) {
                     return Better(a.cost, b.cost, objective);
                   });
  return RankedPlans{std::move(plans), 0};
}

std::vector<std::string> ExtractBlocks(std::string_view text,
                                       std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  std::vector<std::string> out;
  std::string body;
  bool inside = false;
  for (const std::string& raw : SplitLines(text)) {
    std::string_view line = TrimView(raw);
    if (!inside && line == open) {
      inside = true;
      body.clear();
    } else if (inside && line == close) {
      inside = false;
      std::string value = Trim(body);
      if (!value.empty()) out.push_back(std::move(value));
    } else if (inside) {
      if (!body.empty()) body.push_back('\n');
      body += raw;
    }
  }
  return out;
}

std::string HistoryMarkup(const PlanContext& ctx, const std::vector<Step>& history) {
  Trajectory t;
  t.goal = Trim(ctx.goal);
  t.steps = history;
  std::string out;
  if (!TrimView(ctx.context).empty()) out += Trim(ctx.context) + "\n\n";
  out += RenderTrajectory(t);
  return out;
}

}  // namespace

TextCriticScorer::TextCriticScorer(const TextCritic& critic, RenderOptions opts)
    : critic_(critic), opts_(opts) {}

double TextCriticScorer::Cost(const Trajectory& plan) const {
  CriticText text = RenderCriticText(plan, plan.steps.size(), opts_);
  return critic_.Cost(text.goal_text, text.trajectory_text);
}

void SearchConfig::Validate() const {
  if (num_candidates < 1) throw Error(ErrorCode::kBadConfig, "num_candidates must be >= 1");
  if (beam_width < 1) throw Error(ErrorCode::kBadConfig, "beam width must be >= 1");
  if (branching < 1) throw Error(ErrorCode::kBadConfig, "branching must be >= 1");
  if (max_depth < 1) throw Error(ErrorCode::kBadConfig, "max depth must be >= 1");
  for (const Penalty& p : penalties) {
    if (!std::isfinite(p.weight)) {
      throw Error(ErrorCode::kBadConfig, "penalty " + p.name + " has a non-finite weight");
    }
    if (!p.triggered) {
      throw Error(ErrorCode::kBadConfig, "penalty " + p.name + " has no predicate");
    }
  }
}

double TotalCost(const PlanScorer& scorer, const std::vector<Penalty>& penalties,
                 const Trajectory& plan) {
  double cost = scorer.Cost(plan);
  for (const Penalty& p : penalties) {
    if (p.weight != 0 && p.triggered(plan)) cost += p.weight;
  }
  return cost;
}

Trajectory System1Rollout(const WorldModel& w, const PlanContext& ctx,
                          int max_steps) {
  if (max_steps < 1) throw Error(ErrorCode::kBadConfig, "max_steps must be >= 1");
  return Rollout(w, ctx, max_steps, 1, [](int, std::size_t) { return 0; });
}

RankedPlans FullRolloutSearch(const WorldModel& w, const PlanScorer& scorer,
                              const PlanContext& ctx, const SearchConfig& cfg) {
  cfg.Validate();
  const auto first = ProposeChecked(w, ctx, {}, cfg.num_candidates);
  if (first.empty()) throw Error(ErrorCode::kNoCandidates, "no first-step proposals");

  std::vector<RankedPlan> plans;
  for (int i = 0; i < cfg.num_candidates; ++i) {
    const std::size_t lead = static_cast<std::size_t>(i) % first.size();
    const bool explore = static_cast<std::size_t>(i) >= first.size();
    Rng rng(MixSeed(cfg.seed, static_cast<std::uint64_t>(i)));
    // The first step is forced below, so the policy only acts from depth 1.
    Policy policy = [&](int depth, std::size_t count) -> std::size_t {
      if (depth == 0) return 0;
      return explore ? UniformIndex(rng, count) : 0;
    };

    std::vector<Step> history;
    Prediction p = PredictChecked(w, ctx, history, first[lead]);
    history.push_back(Step{first[lead], p.state});
    bool achieved = p.achieved;
    for (int depth = 1; depth < cfg.max_depth && !achieved; ++depth) {
      auto proposals = ProposeChecked(w, ctx, history, explore ? cfg.branching : 1);
      if (proposals.empty()) break;
      const std::string action = proposals[policy(depth, proposals.size())];
      Prediction next = PredictChecked(w, ctx, history, action);
      history.push_back(Step{action, next.state});
      achieved = next.achieved;
    }
    Trajectory plan = MakePlan(ctx, std::move(history), achieved);
    const double cost = TotalCost(scorer, cfg.penalties, plan);
    plans.push_back(RankedPlan{std::move(plan), cost, i});
  }
  return Rank(std::move(plans), cfg.objective);
}

RankedPlans BeamSearch(const WorldModel& w, const PlanScorer& scorer,
                       const PlanContext& ctx, const SearchConfig& cfg) {
  cfg.Validate();
  struct Partial {
    std::vector<Step> steps;
    double cost = 0;
  };
  std::vector<RankedPlan> completed;
  auto complete = [&](std::vector<Step> steps, bool achieved) {
    Trajectory plan = MakePlan(ctx, std::move(steps), achieved);
    const double cost = TotalCost(scorer, cfg.penalties, plan);
    const int id = static_cast<int>(completed.size());
    completed.push_back(RankedPlan{std::move(plan), cost, id});
  };

  std::vector<Partial> beam{Partial{}};
  for (int depth = 0; depth < cfg.max_depth && !beam.empty(); ++depth) {
    std::vector<Partial> children;
    for (Partial& p : beam) {
      auto proposals = ProposeChecked(w, ctx, p.steps, cfg.branching);
      if (proposals.empty()) {
        if (!p.steps.empty()) complete(std::move(p.steps), false);
        continue;
      }
      for (const std::string& action : proposals) {
        Prediction pred = PredictChecked(w, ctx, p.steps, action);
        std::vector<Step> steps = p.steps;
        steps.push_back(Step{action, pred.state});
        if (pred.achieved) {
          complete(std::move(steps), true);
        } else {
          children.push_back(Partial{std::move(steps), 0});
        }
      }
    }
    if (depth + 1 == cfg.max_depth) {
      for (Partial& c : children) complete(std::move(c.steps), false);
      break;
    }
    for (Partial& c : children) {
      c.cost = TotalCost(scorer, cfg.penalties, MakePlan(ctx, c.steps, false));
    }
    std::stable_sort(children.begin(), children.end(),
                     [&](const Partial& a, const Partial& b) {
                       return Better(a.cost, b.cost, cfg.objective);
                     });
    if (static_cast<int>(children.size()) > cfg.beam_width) {
      children.resize(cfg.beam_width);
    }
    beam = std::move(children);
  }
  return Rank(std::move(completed), cfg.objective);
}

RankedPlans System2Plan(const WorldModel& w, const PlanScorer& scorer,
                        const PlanContext& ctx, const SearchConfig& cfg) {
  switch (cfg.mode) {
    case SearchMode::kFullRollouts:
      return FullRolloutSearch(w, scorer, ctx, cfg);
    case SearchMode::kBeamPartial:
      return BeamSearch(w, scorer, ctx, cfg);
  }
  throw Error(ErrorCode::kBadConfig, "unknown search mode");
}

std::string RankingToJson(const RankedPlans& ranked) {
  json candidates = json::array();
  for (std::size_t r = 0; r < ranked.plans.size(); ++r) {
    const RankedPlan& p = ranked.plans[r];
    candidates.push_back({{"rank", r},
                          {"cost", p.cost},
                          {"plan_ref", fmt::format("candidate-{}", p.candidate)},
                          {"plan", RenderTrajectory(p.plan)}});
  }
  return json{{"candidates", candidates}, {"chosen", ranked.chosen}}.dump(2) + "\n";
}

LlmWorldModel::LlmWorldModel(TextGenClient& client) : client_(client) {}

std::vector<std::string> LlmWorldModel::Propose(const PlanContext& ctx,
                                                const std::vector<Step>& history,
                                                int k) const {
  std::string prompt = HistoryMarkup(ctx, history);
  prompt += fmt::format(
      "\nPropose up to {} alternative next actions toward the goal. Write each "
      "as one imperative sentence inside its own <ACTION> ... </ACTION> block, "
      "most promising first.\n",
      k);
  auto actions = ExtractBlocks(client_.Complete(prompt), "ACTION");
  if (static_cast<int>(actions.size()) > k) actions.resize(k);
  return actions;
}

Prediction LlmWorldModel::Predict(const PlanContext& ctx,
                                  const std::vector<Step>& history,
                                  const std::string& action) const {
  std::string prompt = HistoryMarkup(ctx, history);
  prompt += "\n---\n\n<ACTION>\n" + Trim(action) + "\n</ACTION>\n\n";
  prompt +=
      "Describe the resulting world state change inside a <STATE> ... </STATE> "
      "block. If the goal is achieved after this action, add a final "
      "<GOAL_ACHIEVED> line.\n";
  const std::string response = client_.Complete(prompt);
  auto states = ExtractBlocks(response, "STATE");
  if (states.empty()) {
    throw Error(ErrorCode::kWorldModelFailure, "response has no <STATE> block");
  }
  Prediction p;
  p.state = states.front();
  for (const std::string& line : SplitLines(response)) {
    if (TrimView(line) == "<GOAL_ACHIEVED>") p.achieved = true;
  }
  return p;
}

}  // namespace wmplan
