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

// Self-Refine plan extraction: a draft request followed by critique-and-revise
// rounds over a rendered caption tree. Every round re-sends the full meta
// prompt with the previous draft embedded and expects a fenced YAML block
// with discussion / plan / goal / interpretation keys.

#ifndef WMPLAN_REFINE_H_
#define WMPLAN_REFINE_H_

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wmplan/text_gen_client.h"
#include "wmplan/trajectory.h"

namespace wmplan {

// Verbatim prompt assets (version v1).
std::string_view SelfRefineMetaPrompt();
std::string_view PlanRequirements();
inline constexpr std::string_view kPromptVersion = "v1";

struct PlanStep {
  std::string action;
  std::string state;
  double start = 0;
  double end = 0;
  // Timestamps as written by the model, kept for format validation.
  std::string start_text;
  std::string end_text;
};

struct PlanExtraction {
  std::string discussion;
  std::vector<PlanStep> plan;
  std::string goal;
  std::string interpretation;
};

enum class ViolationKind {
  kOutOfBounds,
  kOverlap,
  kEmptyAction,
  kMissingKey,
  kBadTimestampFormat,
};

std::string_view ViolationKindName(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::optional<std::size_t> step;
  std::string message;
};

// Fills the meta prompt. An empty draft gives the draft-round prompt. When
// bounds are present, the <min_start>/<max_end> markers are replaced by the
// two-decimal values.
std::string BuildRefinePrompt(std::string_view tree_text,
                              std::string_view extra_info,
                              std::string_view previous_draft,
                              std::optional<double> min_start = std::nullopt,
                              std::optional<double> max_end = std::nullopt);

// Extracts and parses the first ```yaml fenced block.
// Throws Error(kUnparseableResponse) or Error(kMissingKey).
PlanExtraction ParseExtraction(std::string_view response);

std::vector<Violation> ValidateExtraction(const PlanExtraction& p,
                                          double min_start, double max_end);

// Maps an extraction onto a trajectory marked achieved. Throws
// Error(kInvalidExtraction) when validation within [min_start, max_end]
// fails or the texts cannot form a valid Trajectory.
Trajectory ToTrajectory(const PlanExtraction& p, double min_start,
                        double max_end);
// Same, bounded by the plan's own span.
Trajectory ToTrajectory(const PlanExtraction& p);

// Per-step (start, end) sidecar for a converted trajectory.
std::vector<std::pair<double, double>> StepSpans(const PlanExtraction& p);

struct RefineRequest {
  std::string tree_text;
  std::string extra_info;  // ASR transcripts, expert commentary, ...
  int iterations = 2;
  std::optional<double> min_start;
  std::optional<double> max_end;
};

struct RefineRound {
  int round = 0;  // 0 = draft
  std::string prompt_hash;
  std::string response;
  std::optional<PlanExtraction> parsed;
  std::string error;  // parse failure message, empty on success
};

struct RefineResult {
  PlanExtraction extraction;
  int source_round = 0;  // round whose response produced `extraction`
  bool fell_back = false;
  std::vector<RefineRound> audit;
};

// Issues 1 + iterations requests. An unparseable round falls back to the last
// parseable draft; throws Error(kUnparseableResponse) when no round parses.
// Client failures propagate.
RefineResult SelfRefine(TextGenClient& client, const RefineRequest& request);
RefineResult SelfRefine(TextGenClient& client, std::string_view tree_text,
                        std::string_view extra_info, int iterations = 2);

std::string RefineResultToJson(const RefineResult& result);
std::string ExtractionToJson(const PlanExtraction& p);

}  // namespace wmplan

#endif  // WMPLAN_REFINE_H_
