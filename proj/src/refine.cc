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

#include "wmplan/refine.h"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>

#include "json.hpp"
#include "wmplan/error.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

using nlohmann::json;

// Placeholder spellings are those of the published prompt, typos included.
constexpr std::string_view kTreeSlot = "{TREE OF CAPTIONS}";
constexpr std::string_view kExtraSlot = "{ADDITIONAL VIDEO INFO}";
constexpr std::string_view kDraftSlot = "{PREVISOUS DRAFT}";
constexpr std::string_view kRequirementsSlot = "{REQUIREMENTS OF PALN EXTRACTION}";

// Bounds are compared after two-decimal rounding by the model.
constexpr double kTimeEps = 1e-9;

std::string ReplaceAll(std::string text, std::string_view from,
                       std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

// Single left-to-right pass so inserted text is never re-scanned.
std::string FillSlots(
    std::string_view tmpl,
    const std::vector<std::pair<std::string_view, std::string_view>>& slots) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t best = std::string_view::npos;
    std::size_t which = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      std::size_t at = tmpl.find(slots[i].first, pos);
      if (at < best) {
        best = at;
        which = i;
      }
    }
    if (best == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, best - pos));
    out.append(slots[which].second);
    pos = best + slots[which].first.size();
  }
  return out;
}

std::string RequireText(const YAML::Node& map, const char* key) {
  YAML::Node n = map[key];
  if (!n || n.IsNull()) {
    throw Error(ErrorCode::kMissingKey, std::string("missing key '") + key + "'");
  }
  if (!n.IsScalar()) {
    throw Error(ErrorCode::kUnparseableResponse,
                std::string("'") + key + "' must be text");
  }
  return Trim(n.Scalar());
}

double RequireTime(const YAML::Node& step, const char* key, std::size_t index,
                   std::string* raw) {
  YAML::Node n = step[key];
  if (!n || n.IsNull()) {
    throw Error(ErrorCode::kMissingKey,
                fmt::format("plan step {} is missing '{}'", index, key));
  }
  if (!n.IsScalar()) {
    throw Error(ErrorCode::kUnparseableResponse,
                fmt::format("plan step {} '{}' is not a scalar", index, key));
  }
  *raw = Trim(n.Scalar());
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw Error(ErrorCode::kUnparseableResponse,
                fmt::format("plan step {} '{}' is not a number: {}", index, key,
                            *raw));
  }
}

bool IsTwoDecimalTimestamp(const std::string& raw) {
  static const std::regex kPattern(R"(^\d+(\.\d{1,2})?$)");
  return std::regex_match(raw, kPattern);
}

std::string FormatTime(double t) { return fmt::format("{:.2f}", t); }

json ExtractionJson(const PlanExtraction& p) {
  json plan = json::array();
  for (const PlanStep& s : p.plan) {
    plan.push_back({{"action", s.action},
                    {"state", s.state},
                    {"start", s.start},
                    {"end", s.end}});
  }
  return {{"discussion", p.discussion},
          {"plan", plan},
          {"goal", p.goal},
          {"interpretation", p.interpretation}};
}

}  // namespace

std::string_view ViolationKindName(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kOutOfBounds: return "OutOfBounds";
    case ViolationKind::kOverlap: return "Overlap";
    case ViolationKind::kEmptyAction: return "EmptyAction";
    case ViolationKind::kMissingKey: return "MissingKey";
    case ViolationKind::kBadTimestampFormat: return "BadTimestampFormat";
  }
  return "Unknown";
}

std::string BuildRefinePrompt(std::string_view tree_text,
                              std::string_view extra_info,
                              std::string_view previous_draft,
                              std::optional<double> min_start,
                              std::optional<double> max_end) {
  std::string tmpl = FillSlots(SelfRefineMetaPrompt(),
                               {{kRequirementsSlot, PlanRequirements()}});
  if (min_start) tmpl = ReplaceAll(std::move(tmpl), "<min_start>", FormatTime(*min_start));
  if (max_end) tmpl = ReplaceAll(std::move(tmpl), "<max_end>", FormatTime(*max_end));
  return FillSlots(tmpl, {{kTreeSlot, tree_text},
                          {kExtraSlot, extra_info},
                          {kDraftSlot, previous_draft}});
}

PlanExtraction ParseExtraction(std::string_view response) {
  constexpr std::string_view kFence = "```yaml";
  std::size_t open = response.find(kFence);
  if (open == std::string_view::npos) {
    throw Error(ErrorCode::kUnparseableResponse, "no ```yaml block");
  }
  std::size_t body_start = response.find('\n', open);
  if (body_start == std::string_view::npos) {
    throw Error(ErrorCode::kUnparseableResponse, "empty ```yaml block");
  }
  ++body_start;
  // The block ends at the first line consisting of a bare fence.
  std::size_t close = std::string_view::npos;
  for (std::size_t pos = body_start; pos < response.size();) {
    std::size_t nl = response.find('\n', pos);
    std::size_t end = nl == std::string_view::npos ? response.size() : nl;
    if (TrimView(response.substr(pos, end - pos)) == "```") {
      close = pos;
      break;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (close == std::string_view::npos) {
    throw Error(ErrorCode::kUnparseableResponse, "unterminated ```yaml block");
  }
  const std::string block(response.substr(body_start, close - body_start));

  YAML::Node root;
  try {
    root = YAML::Load(block);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kUnparseableResponse,
                std::string("invalid YAML: ") + e.what());
  }
  if (!root.IsMap()) {
    throw Error(ErrorCode::kUnparseableResponse, "YAML block is not a mapping");
  }

  PlanExtraction p;
  if (root["discussion"] && root["discussion"].IsScalar()) {
    p.discussion = Trim(root["discussion"].Scalar());
  }
  YAML::Node plan = root["plan"];
  if (!plan || plan.IsNull()) {
    throw Error(ErrorCode::kMissingKey, "missing key 'plan'");
  }
  if (!plan.IsSequence() || plan.size() == 0) {
    throw Error(ErrorCode::kUnparseableResponse, "'plan' must be a nonempty list");
  }
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const YAML::Node step = plan[i];
    if (!step.IsMap()) {
      throw Error(ErrorCode::kUnparseableResponse,
                  fmt::format("plan step {} is not a mapping", i));
    }
    PlanStep s;
    YAML::Node action = step["action"];
    if (!action || !action.IsScalar()) {
      throw Error(ErrorCode::kMissingKey,
                  fmt::format("plan step {} is missing 'action'", i));
    }
    s.action = Trim(action.Scalar());
    if (step["state"] && step["state"].IsScalar()) {
      s.state = Trim(step["state"].Scalar());
    }
    s.start = RequireTime(step, "start", i, &s.start_text);
    s.end = RequireTime(step, "end", i, &s.end_text);
    p.plan.push_back(std::move(s));
  }
  p.goal = RequireText(root, "goal");
  p.interpretation = RequireText(root, "interpretation");
  return p;
}

std::vector<Violation> ValidateExtraction(const PlanExtraction& p,
                                          double min_start, double max_end) {
  std::vector<Violation> out;
  if (p.plan.empty()) {
    out.push_back({ViolationKind::kMissingKey, std::nullopt, "plan is empty"});
  }
  if (p.goal.empty()) {
    out.push_back({ViolationKind::kMissingKey, std::nullopt, "goal is empty"});
  }
  for (std::size_t i = 0; i < p.plan.size(); ++i) {
    const PlanStep& s = p.plan[i];
    if (TrimView(s.action).empty()) {
      out.push_back({ViolationKind::kEmptyAction, i,
                     fmt::format("step {} has no action text", i)});
    }
    for (const std::string* raw : {&s.start_text, &s.end_text}) {
      if (!raw->empty() && !IsTwoDecimalTimestamp(*raw)) {
        out.push_back({ViolationKind::kBadTimestampFormat, i,
                       fmt::format("step {} timestamp '{}' is not a decimal "
                                   "with at most two fraction digits",
                                   i, *raw)});
      }
    }
    if (!std::isfinite(s.start) || !std::isfinite(s.end) || !(s.start < s.end)) {
      out.push_back({ViolationKind::kBadTimestampFormat, i,
                     fmt::format("step {} span [{}, {}) is empty or reversed",
                                 i, s.start, s.end)});
    }
    if (s.start < min_start - kTimeEps || s.end > max_end + kTimeEps) {
      out.push_back({ViolationKind::kOutOfBounds, i,
                     fmt::format("step {} span [{}, {}] leaves [{}, {}]", i,
                                 FormatTime(s.start), FormatTime(s.end),
                                 FormatTime(min_start), FormatTime(max_end))});
    }
  }
  for (std::size_t i = 0; i < p.plan.size(); ++i) {
    for (std::size_t j = i + 1; j < p.plan.size(); ++j) {
      const PlanStep& a = p.plan[i];
      const PlanStep& b = p.plan[j];
      if (a.start < b.end - kTimeEps && b.start < a.end - kTimeEps) {
        out.push_back({ViolationKind::kOverlap, j,
                       fmt::format("steps {} and {} overlap", i, j)});
      }
    }
  }
  return out;
}

Trajectory ToTrajectory(const PlanExtraction& p, double min_start,
                        double max_end) {
  auto violations = ValidateExtraction(p, min_start, max_end);
  if (!violations.empty()) {
    throw Error(ErrorCode::kInvalidExtraction,
                fmt::format("{} violation(s), first: {}", violations.size(),
                            violations.front().message));
  }
  Trajectory t;
  t.goal = Trim(p.goal);
  t.interpretation = Trim(p.interpretation);
  for (const PlanStep& s : p.plan) {
    t.steps.push_back(Step{Trim(s.action), Trim(s.state)});
  }
  t.achieved = true;
  try {
    ValidateTrajectory(t);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidExtraction, e.what());
  }
  return t;
}

Trajectory ToTrajectory(const PlanExtraction& p) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const PlanStep& s : p.plan) {
    lo = std::min(lo, s.start);
    hi = std::max(hi, s.end);
  }
  return ToTrajectory(p, lo, hi);
}

std::vector<std::pair<double, double>> StepSpans(const PlanExtraction& p) {
  std::vector<std::pair<double, double>> out;
  for (const PlanStep& s : p.plan) out.emplace_back(s.start, s.end);
  return out;
}

RefineResult SelfRefine(TextGenClient& client, const RefineRequest& request) {
  if (request.iterations < 0) {
    throw Error(ErrorCode::kBadConfig, "iterations must be >= 0");
  }
  RefineResult result;
  std::optional<std::size_t> last_good;
  std::string previous_draft;
  for (int round = 0; round <= request.iterations; ++round) {
    const std::string prompt =
        BuildRefinePrompt(request.tree_text, request.extra_info, previous_draft,
                          request.min_start, request.max_end);
    RefineRound r;
    r.round = round;
    r.prompt_hash = PromptHash(prompt);
    r.response = client.Complete(prompt);
    try {
      r.parsed = ParseExtraction(r.response);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnparseableResponse &&
          e.code() != ErrorCode::kMissingKey) {
        throw;
      }
      r.error = e.what();
    }
    if (r.parsed) last_good = result.audit.size();
    // The next round critiques the latest usable draft.
    previous_draft =
        last_good ? Trim(r.parsed ? r.response : result.audit[*last_good].response)
                  : Trim(r.response);
    result.audit.push_back(std::move(r));
  }
  if (!last_good) {
    throw Error(ErrorCode::kUnparseableResponse,
                fmt::format("none of {} rounds produced a parseable extraction",
                            result.audit.size()));
  }
  result.source_round = result.audit[*last_good].round;
  result.extraction = *result.audit[*last_good].parsed;
  result.fell_back = *last_good + 1 != result.audit.size();
  return result;
}

RefineResult SelfRefine(TextGenClient& client, std::string_view tree_text,
                        std::string_view extra_info, int iterations) {
  RefineRequest request;
  request.tree_text = std::string(tree_text);
  request.extra_info = std::string(extra_info);
  request.iterations = iterations;
  return SelfRefine(client, request);
}

std::string ExtractionToJson(const PlanExtraction& p) {
  return ExtractionJson(p).dump(2) + "\n";
}

std::string RefineResultToJson(const RefineResult& result) {
  json audit = json::array();
  for (const RefineRound& r : result.audit) {
    audit.push_back({{"round", r.round},
                     {"prompt_hash", r.prompt_hash},
                     {"response", r.response},
                     {"parsed", r.parsed ? ExtractionJson(*r.parsed) : json(nullptr)},
                     {"error", r.error}});
  }
  json doc = {{"prompt_version", kPromptVersion},
              {"extraction", ExtractionJson(result.extraction)},
              {"source_round", result.source_round},
              {"fell_back", result.fell_back},
              {"audit", audit}};
  return doc.dump(2) + "\n";
}

}  // namespace wmplan
