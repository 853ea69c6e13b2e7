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

// Goal/plan data model and the tagged trajectory markup:
//
//   <GOAL>
//   Cooking Tomato and Eggs
//   </GOAL>
//
//   ---
//
//   <INTERPRETATION>
//   Now, ...
//   </INTERPRETATION>
//
//   ---
//
//   <ACTION>
//   Preheat the skillet on the stove
//   </ACTION>
//
//   <STATE>
//   ...
//   </STATE>
//
//   ---
//
//   <GOAL_ACHIEVED>
//
// Tags occupy their own line. Block bodies are trimmed of surrounding
// whitespace. "---" separators and HTML comment lines are ignored on parse.

#ifndef WMPLAN_TRAJECTORY_H_
#define WMPLAN_TRAJECTORY_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wmplan {

struct Step {
  std::string action;
  // World-state change description. Empty only in action-only datasets.
  std::string state;

  friend bool operator==(const Step&, const Step&) = default;
};

struct Trajectory {
  std::string goal;
  std::string interpretation;
  std::vector<Step> steps;
  bool achieved = false;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct RenderOptions {
  bool include_interpretation = true;
  bool include_states = true;
};

// Throws Error(kInvalidTrajectory) describing the first broken invariant.
void ValidateTrajectory(const Trajectory& t);

Trajectory ParseTrajectory(std::string_view text);
std::string RenderTrajectory(const Trajectory& t);

// Text pair consumed by cost models.
struct CriticText {
  std::string goal_text;
  std::string trajectory_text;
};

// Renders the goal (plus interpretation) and the first `prefix_length` steps
// as numbered "Action:" lines, each followed by a "State:" line when states
// are enabled.
CriticText RenderCriticText(const Trajectory& t, std::size_t prefix_length,
                            const RenderOptions& opts = {});

// Same as above but over a bare step list.
std::string RenderStepsText(std::span<const Step> steps,
                            bool include_states = true);

// First `length` steps; achieved is cleared unless the full trajectory is kept.
Trajectory Prefix(const Trajectory& t, std::size_t length);

// Non-identity permutation of the steps drawn deterministically from `seed`.
Trajectory ShuffleSteps(const Trajectory& t, std::uint64_t seed);

Trajectory AppendSteps(const Trajectory& base, std::span<const Step> extra);

}  // namespace wmplan

#endif  // WMPLAN_TRAJECTORY_H_
