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

#ifndef WMPLAN_EVALHARNESS_H_
#define WMPLAN_EVALHARNESS_H_

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wmplan/critic.h"
#include "wmplan/trajectory.h"

namespace wmplan {

// Goal-achievement detection: a reference plan followed by unrelated steps.
// A critic detects achievement when its cost over prefixes is lowest right
// after the last gold step.
struct GadCase {
  std::string goal;
  std::string interpretation;
  std::vector<Step> gold;
  std::vector<Step> distractors;
};

// JSONL {goal, interpretation, gold:[{action,state}], distractors:[...]}.
std::vector<GadCase> LoadGadCases(std::istream& in);
void WriteGadCases(std::span<const GadCase> cases, std::ostream& out);

struct GadCaseResult {
  std::size_t n_gold = 0;
  std::size_t argmin_k = 0;   // 1-based; ties resolve to the smallest k
  std::vector<double> costs;  // costs[k-1] for prefix length k
  bool hit = false;
};

struct GadReport {
  double accuracy = 0;
  std::vector<GadCaseResult> cases;
};

// 1-based index of the smallest value, earliest on ties.
std::size_t ArgminOneBased(std::span<const double> values);

GadReport EvalGad(const TextCritic& critic, std::span<const GadCase> cases,
                  const RenderOptions& opts = {});

// Mean of 1 / (N_gold + N_distractor): the hit rate of a uniformly random
// argmin.
double ChanceAccuracy(std::span<const GadCase> cases);

// Visual planning assistance: predicted vs gold step-id sequences of a fixed
// horizon.
struct VpaPrediction {
  std::vector<std::string> predicted;
  std::vector<std::string> gold;
};

struct VpaMetrics {
  double success_rate = 0;  // SR: whole sequence matches
  double mean_accuracy = 0; // mAcc: per-position matches
  double mean_iou = 0;      // mIoU: set overlap per sample
};

// Throws Error(kLengthMismatch) when lengths differ within a sample or the
// horizon is not uniform across samples.
VpaMetrics ComputeVpaMetrics(std::span<const VpaPrediction> preds);

// JSONL {pred:[...], gold:[...]}; ids may be strings or integers.
std::vector<VpaPrediction> LoadVpaPredictions(std::istream& in);

// Four-way procedural planning: choose the candidate plan with the lowest cost.
struct WpItem {
  std::string goal;
  std::vector<std::vector<std::string>> candidates;  // exactly 4
  int correct = 0;
};

std::vector<WpItem> LoadWpItems(std::istream& in);

// Candidate text: numbered "Action:" lines without states.
std::string RenderCandidate(const std::vector<std::string>& steps);

struct WpReport {
  double accuracy = 0;
  std::vector<int> predicted;
};

WpReport EvalWp(const TextCritic& critic, std::span<const WpItem> items);

// CSV: case_id,progress_percent,normalized_cost,is_argmin. Progress is
// 100*k/N_gold; costs are min-max normalized per case, flat curves map to 0.
void ExportCostCurves(const GadReport& report, std::ostream& out);

std::string GadReportToJson(const GadReport& report, double chance);

}  // namespace wmplan

#endif  // WMPLAN_EVALHARNESS_H_
