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

#include "wmplan/evalharness.h"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "json.hpp"
#include "wmplan/error.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

using nlohmann::json;

template <typename Fn>
void ForEachJsonLine(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (TrimView(line).empty()) continue;
    try {
      fn(json::parse(line), n);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kBadRow, fmt::format("line {}: {}", n, e.what()));
    }
  }
}

std::vector<Step> StepsFromJson(const json& arr) {
  std::vector<Step> steps;
  for (const auto& s : arr) {
    if (s.is_string()) {
      steps.push_back(Step{Trim(s.get<std::string>()), ""});
    } else {
      steps.push_back(Step{Trim(s.at("action").get<std::string>()),
                           Trim(s.value("state", std::string()))});
    }
  }
  return steps;
}

json StepsToJson(const std::vector<Step>& steps) {
  json arr = json::array();
  for (const Step& s : steps) arr.push_back({{"action", s.action}, {"state", s.state}});
  return arr;
}

std::string IdText(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

std::vector<GadCase> LoadGadCases(std::istream& in) {
  std::vector<GadCase> out;
  ForEachJsonLine(in, [&](const json& row, std::size_t n) {
    GadCase c;
    c.goal = Trim(row.at("goal").get<std::string>());
    c.interpretation = Trim(row.value("interpretation", std::string()));
    c.gold = StepsFromJson(row.at("gold"));
    c.distractors = StepsFromJson(row.at("distractors"));
    if (c.goal.empty() || c.gold.empty() || c.distractors.empty()) {
      throw Error(ErrorCode::kBadRow,
                  fmt::format("line {}: need a goal, >= 1 gold and >= 1 "
                              "distractor step",
                              n));
    }
    out.push_back(std::move(c));
  });
  return out;
}

void WriteGadCases(std::span<const GadCase> cases, std::ostream& out) {
  for (const GadCase& c : cases) {
    out << json{{"goal", c.goal},
                {"interpretation", c.interpretation},
                {"gold", StepsToJson(c.gold)},
                {"distractors", StepsToJson(c.distractors)}}
               .dump()
        << '\n';
  }
}

std::size_t ArgminOneBased(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "argmin of nothing");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best + 1;
}

GadReport EvalGad(const TextCritic& critic, std::span<const GadCase> cases,
                  const RenderOptions& opts) {
  if (cases.empty()) throw Error(ErrorCode::kEmptyInput, "no GAD cases");
  GadReport report;
  std::size_t hits = 0;
  for (const GadCase& c : cases) {
    Trajectory t;
    t.goal = c.goal;
    t.interpretation = c.interpretation;
    t.steps = c.gold;
    t.steps.insert(t.steps.end(), c.distractors.begin(), c.distractors.end());

    GadCaseResult r;
    r.n_gold = c.gold.size();
    for (std::size_t k = 1; k <= t.steps.size(); ++k) {
      CriticText text = RenderCriticText(t, k, opts);
      r.costs.push_back(critic.Cost(text.goal_text, text.trajectory_text));
    }
    r.argmin_k = ArgminOneBased(r.costs);
    r.hit = r.argmin_k == r.n_gold;
    hits += r.hit ? 1 : 0;
    report.cases.push_back(std::move(r));
  }
  report.accuracy = static_cast<double>(hits) / static_cast<double>(cases.size());
  return report;
}

double ChanceAccuracy(std::span<const GadCase> cases) {
  if (cases.empty()) throw Error(ErrorCode::kEmptyInput, "no GAD cases");
  double sum = 0;
  for (const GadCase& c : cases) {
    sum += 1.0 / static_cast<double>(c.gold.size() + c.distractors.size());
  }
  return sum / static_cast<double>(cases.size());
}

VpaMetrics ComputeVpaMetrics(std::span<const VpaPrediction> preds) {
  if (preds.empty()) throw Error(ErrorCode::kEmptyInput, "no predictions");
  const std::size_t horizon = preds.front().gold.size();
  if (horizon == 0) throw Error(ErrorCode::kLengthMismatch, "horizon is zero");
  std::size_t exact = 0;
  std::size_t matched_positions = 0;
  double iou_sum = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const VpaPrediction& p = preds[i];
    if (p.predicted.size() != p.gold.size() || p.gold.size() != horizon) {
      throw Error(ErrorCode::kLengthMismatch,
                  fmt::format("sample {}: predicted {} / gold {} steps, "
                              "horizon {}",
                              i, p.predicted.size(), p.gold.size(), horizon));
    }
    std::size_t same = 0;
    for (std::size_t t = 0; t < horizon; ++t) same += p.predicted[t] == p.gold[t];
    matched_positions += same;
    exact += same == horizon ? 1 : 0;

    std::set<std::string> a(p.predicted.begin(), p.predicted.end());
    std::set<std::string> b(p.gold.begin(), p.gold.end());
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    iou_sum += static_cast<double>(inter) /
               static_cast<double>(a.size() + b.size() - inter);
  }
  const double n = static_cast<double>(preds.size());
  return VpaMetrics{static_cast<double>(exact) / n,
                    static_cast<double>(matched_positions) / (n * horizon),
                    iou_sum / n};
}

std::vector<VpaPrediction> LoadVpaPredictions(std::istream& in) {
  std::vector<VpaPrediction> out;
  ForEachJsonLine(in, [&](const json& row, std::size_t) {
    VpaPrediction p;
    for (const auto& v : row.at("pred")) p.predicted.push_back(IdText(v));
    for (const auto& v : row.at("gold")) p.gold.push_back(IdText(v));
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<WpItem> LoadWpItems(std::istream& in) {
  std::vector<WpItem> out;
  ForEachJsonLine(in, [&](const json& row, std::size_t n) {
    WpItem item;
    item.goal = row.at("goal").get<std::string>();
    item.candidates =
        row.at("candidates").get<std::vector<std::vector<std::string>>>();
    item.correct = row.at("correct").get<int>();
    if (item.candidates.size() != 4 || item.correct < 0 || item.correct > 3) {
      throw Error(ErrorCode::kBadRow,
                  fmt::format("line {}: need 4 candidates and correct in [0,3]", n));
    }
    out.push_back(std::move(item));
  });
  return out;
}

std::string RenderCandidate(const std::vector<std::string>& steps) {
  std::vector<Step> s;
  for (const auto& a : steps) s.push_back(Step{a, ""});
  return RenderStepsText(s, /*include_states=*/false);
}

WpReport EvalWp(const TextCritic& critic, std::span<const WpItem> items) {
  if (items.empty()) throw Error(ErrorCode::kEmptyInput, "no WorldPrediction items");
  WpReport report;
  std::size_t correct = 0;
  for (const WpItem& item : items) {
    if (item.candidates.size() != 4) {
      throw Error(ErrorCode::kBadRow, "item must have exactly 4 candidates");
    }
    std::vector<double> costs;
    for (const auto& c : item.candidates) {
      costs.push_back(critic.Cost(item.goal, RenderCandidate(c)));
    }
    const int pick = static_cast<int>(ArgminOneBased(costs)) - 1;
    report.predicted.push_back(pick);
    correct += pick == item.correct ? 1 : 0;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(items.size());
  return report;
}

void ExportCostCurves(const GadReport& report, std::ostream& out) {
  out << "case_id,progress_percent,normalized_cost,is_argmin\n";
  for (std::size_t id = 0; id < report.cases.size(); ++id) {
    const GadCaseResult& r = report.cases[id];
    if (r.costs.empty()) continue;
    const auto [lo, hi] = std::minmax_element(r.costs.begin(), r.costs.end());
    const double range = *hi - *lo;
    for (std::size_t k = 1; k <= r.costs.size(); ++k) {
      const double progress = 100.0 * static_cast<double>(k) /
                              static_cast<double>(r.n_gold);
      const double norm = range > 0 ? (r.costs[k - 1] - *lo) / range : 0.0;
      out << fmt::format("{},{:.4f},{:.6f},{}\n", id, progress, norm,
                         k == r.argmin_k ? 1 : 0);
    }
  }
}

std::string GadReportToJson(const GadReport& report, double chance) {
  json cases = json::array();
  for (const GadCaseResult& r : report.cases) {
    cases.push_back({{"n_gold", r.n_gold},
                     {"argmin_k", r.argmin_k},
                     {"hit", r.hit},
                     {"costs", r.costs}});
  }
  return json{{"accuracy", report.accuracy},
              {"chance_accuracy", chance},
              {"cases", cases}}
             .dump(2) +
         "\n";
}

}  // namespace wmplan
