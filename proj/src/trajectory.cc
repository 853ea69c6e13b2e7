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

#include "wmplan/trajectory.h"

#include <array>
#include <numeric>
#include <optional>

#include "wmplan/error.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

enum class Block { kGoal, kInterpretation, kAction, kState };

struct TagInfo {
  Block block;
  std::string_view open;
  std::string_view close;
};

constexpr std::array<TagInfo, 4> kTags = {{
    {Block::kGoal, "<GOAL>", "</GOAL>"},
    {Block::kInterpretation, "<INTERPRETATION>", "</INTERPRETATION>"},
    {Block::kAction, "<ACTION>", "</ACTION>"},
    {Block::kState, "<STATE>", "</STATE>"},
}};

constexpr std::string_view kAchievedToken = "<GOAL_ACHIEVED>";
constexpr std::string_view kSeparator = "---";

const TagInfo& InfoFor(Block b) { return kTags[static_cast<int>(b)]; }

std::optional<Block> OpenTag(std::string_view line) {
  for (const auto& t : kTags) {
    if (line == t.open) return t.block;
  }
  return std::nullopt;
}

std::optional<Block> CloseTag(std::string_view line) {
  for (const auto& t : kTags) {
    if (line == t.close) return t.block;
  }
  return std::nullopt;
}

bool IsMarkupLine(std::string_view line) {
  return OpenTag(line) || CloseTag(line) || line == kAchievedToken;
}

bool ContainsMarkup(std::string_view text) {
  for (const auto& t : kTags) {
    if (text.find(t.open) != std::string_view::npos ||
        text.find(t.close) != std::string_view::npos) {
      return true;
    }
  }
  return text.find(kAchievedToken) != std::string_view::npos;
}

// Lines the parser would read as a tag, including one-line block forms.
bool HasMarkupLine(std::string_view text) {
  for (const auto& raw : SplitLines(text)) {
    std::string_view line = TrimView(raw);
    if (IsMarkupLine(line)) return true;
    for (const auto& t : kTags) {
      if (line.starts_with(t.open) || line.ends_with(t.close)) return true;
    }
  }
  return false;
}

bool IsCommentLine(std::string_view line) {
  return line.size() >= 7 && line.substr(0, 4) == "<!--" &&
         line.substr(line.size() - 3) == "-->";
}

void CheckBody(std::string_view what, std::string_view text) {
  if (TrimView(text).size() != text.size()) {
    throw Error(ErrorCode::kInvalidTrajectory,
                std::string(what) + " has surrounding whitespace");
  }
  if (HasMarkupLine(text)) {
    throw Error(ErrorCode::kInvalidTrajectory,
                std::string(what) + " contains a markup tag line");
  }
}

void AppendBlock(std::string& out, Block b, std::string_view body) {
  const TagInfo& info = InfoFor(b);
  out.append(info.open);
  out.push_back('\n');
  if (!body.empty()) {
    out.append(body);
    out.push_back('\n');
  }
  out.append(info.close);
  out.push_back('\n');
}

}  // namespace

void ValidateTrajectory(const Trajectory& t) {
  CheckBody("goal", t.goal);
  CheckBody("interpretation", t.interpretation);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const Step& s = t.steps[i];
    if (s.action.empty()) {
      throw Error(ErrorCode::kInvalidTrajectory,
                  "step " + std::to_string(i) + " has an empty action");
    }
    if (ContainsMarkup(s.action)) {
      throw Error(ErrorCode::kInvalidTrajectory,
                  "step " + std::to_string(i) + " action contains markup");
    }
    CheckBody("action", s.action);
    CheckBody("state", s.state);
  }
  if (t.achieved && t.steps.empty()) {
    throw Error(ErrorCode::kInvalidTrajectory,
                "achieved trajectory must have at least one step");
  }
}

Trajectory ParseTrajectory(std::string_view text) {
  Trajectory t;
  bool have_goal = false;
  bool have_interpretation = false;
  bool state_open_for_last = false;  // last action may still take a STATE
  bool achieved_token = false;

  std::optional<Block> current;
  std::string body;
  std::size_t open_line = 0;

  auto finish = [&] {
    std::string value = Trim(body);
    switch (*current) {
      case Block::kGoal:
        if (have_goal) throw Error(ErrorCode::kDuplicateBlock, "second <GOAL> block");
        t.goal = std::move(value);
        have_goal = true;
        break;
      case Block::kInterpretation:
        if (have_interpretation) {
          throw Error(ErrorCode::kDuplicateBlock, "second <INTERPRETATION> block");
        }
        t.interpretation = std::move(value);
        have_interpretation = true;
        break;
      case Block::kAction:
        t.steps.push_back(Step{std::move(value), ""});
        state_open_for_last = true;
        achieved_token = false;
        break;
      case Block::kState:
        t.steps.back().state = std::move(value);
        state_open_for_last = false;
        break;
    }
    current.reset();
    body.clear();
  };
  auto append = [&](std::string_view part) {
    if (!body.empty()) body.push_back('\n');
    body.append(part);
  };

  const auto lines = SplitLines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = TrimView(lines[n]);
    if (current) {
      const std::string_view close = InfoFor(*current).close;
      if (line == close) {
        finish();
        continue;
      }
      if (IsMarkupLine(line)) {
        throw Error(ErrorCode::kUnbalancedTag,
                    std::string(InfoFor(*current).open) + " opened on line " +
                        std::to_string(open_line + 1) + " is not closed");
      }
      // "text</TAG>" closes the block on its last content line.
      if (line.size() > close.size() && line.ends_with(close)) {
        append(TrimView(line.substr(0, line.size() - close.size())));
        finish();
        continue;
      }
      append(lines[n]);
      continue;
    }

    if (line.empty() || line == kSeparator || IsCommentLine(line)) continue;
    if (line == kAchievedToken) {
      achieved_token = true;
      continue;
    }
    std::optional<Block> open = OpenTag(line);
    std::string_view rest;
    if (!open) {
      // "<TAG>text" or "<TAG>text</TAG>" on one line.
      for (const auto& tag : kTags) {
        if (line.starts_with(tag.open)) {
          open = tag.block;
          rest = TrimView(line.substr(tag.open.size()));
          break;
        }
      }
    }
    if (open) {
      if (*open == Block::kState && !state_open_for_last) {
        throw Error(ErrorCode::kStateWithoutAction,
                    "<STATE> on line " + std::to_string(n + 1) +
                        " does not follow an <ACTION> block");
      }
      current = open;
      open_line = n;
      const std::string_view close = InfoFor(*open).close;
      if (rest.ends_with(close)) {
        append(TrimView(rest.substr(0, rest.size() - close.size())));
        finish();
      } else if (!rest.empty()) {
        append(rest);
      }
      continue;
    }
    if (CloseTag(line)) {
      throw Error(ErrorCode::kUnbalancedTag,
                  "unexpected " + std::string(line) + " on line " +
                      std::to_string(n + 1));
    }
    // Free text between blocks is tolerated; model outputs often add some.
  }
  if (current) {
    throw Error(ErrorCode::kUnbalancedTag,
                std::string(InfoFor(*current).open) + " opened on line " +
                    std::to_string(open_line + 1) + " is not closed");
  }
  if (t.goal.empty()) throw Error(ErrorCode::kEmptyGoal, "no goal text");
  t.achieved = achieved_token && !t.steps.empty();
  return t;
}

std::string RenderTrajectory(const Trajectory& t) {
  ValidateTrajectory(t);
  std::vector<std::string> sections;
  {
    std::string s;
    AppendBlock(s, Block::kGoal, t.goal);
    sections.push_back(std::move(s));
  }
  if (!t.interpretation.empty()) {
    std::string s;
    AppendBlock(s, Block::kInterpretation, t.interpretation);
    sections.push_back(std::move(s));
  }
  for (const Step& step : t.steps) {
    std::string s;
    AppendBlock(s, Block::kAction, step.action);
    s.push_back('\n');
    AppendBlock(s, Block::kState, step.state);
    sections.push_back(std::move(s));
  }
  if (t.achieved) sections.push_back(std::string(kAchievedToken) + "\n");

  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i > 0) {
      out.push_back('\n');
      out.append(kSeparator);
      out.append("\n\n");
    }
    out.append(sections[i]);
  }
  return out;
}

std::string RenderStepsText(std::span<const Step> steps, bool include_states) {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out += std::to_string(i + 1) + ". Action: " + steps[i].action + "\n";
    if (include_states) out += "State: " + steps[i].state + "\n";
  }
  return out;
}

CriticText RenderCriticText(const Trajectory& t, std::size_t prefix_length,
                            const RenderOptions& opts) {
  if (prefix_length > t.steps.size()) {
    throw Error(ErrorCode::kPrefixOutOfRange,
                "prefix " + std::to_string(prefix_length) + " exceeds " +
                    std::to_string(t.steps.size()) + " steps");
  }
  CriticText out;
  out.goal_text = t.goal;
  if (opts.include_interpretation && !t.interpretation.empty()) {
    out.goal_text += "\n" + t.interpretation;
  }
  out.trajectory_text = RenderStepsText(
      std::span<const Step>(t.steps).first(prefix_length),
      opts.include_states);
  return out;
}

Trajectory Prefix(const Trajectory& t, std::size_t length) {
  if (length > t.steps.size()) {
    throw Error(ErrorCode::kPrefixOutOfRange,
                "prefix " + std::to_string(length) + " exceeds " +
                    std::to_string(t.steps.size()) + " steps");
  }
  Trajectory out = t;
  out.steps.resize(length);
  out.achieved = t.achieved && length == t.steps.size();
  return out;
}

Trajectory ShuffleSteps(const Trajectory& t, std::uint64_t seed) {
  const std::size_t n = t.steps.size();
  if (n < 2) {
    throw Error(ErrorCode::kTooFewSteps,
                "shuffling needs at least 2 steps, got " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  Rng rng(seed);
  auto is_identity = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      if (order[i] != i) return false;
    }
    return true;
  };
  do {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SeededShuffle(order, rng);
  } while (is_identity());

  Trajectory out = t;
  for (std::size_t i = 0; i < n; ++i) out.steps[i] = t.steps[order[i]];
  out.achieved = false;
  return out;
}

Trajectory AppendSteps(const Trajectory& base, std::span<const Step> extra) {
  Trajectory out = base;
  out.steps.insert(out.steps.end(), extra.begin(), extra.end());
  out.achieved = false;
  return out;
}

}  // namespace wmplan
