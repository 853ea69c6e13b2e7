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

#include "wmplan/segtree.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>

#include "json.hpp"
#include "wmplan/error.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

using nlohmann::json;

// Slack for float durations such as 10.1 - 5.1 when comparing to thresholds.
constexpr double kDurationEps = 1e-9;

json ParseJsonLine(const std::string& line, ErrorCode code, std::size_t n) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(code, "line " + std::to_string(n) + ": " + e.what());
  }
}

std::string Span(const TreeNode& n) {
  return fmt::format("{:.2f}s -> {:.2f}s (duration: {:.1f}s)", n.start, n.end,
                     n.duration());
}

}  // namespace

FeatureStream LoadFeatureStream(std::istream& in) {
  FeatureStream s;
  std::string line;
  std::size_t n = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++n;
    if (TrimView(line).empty()) continue;
    if (!have_header) {
      json h = ParseJsonLine(line, ErrorCode::kBadHeader, n);
      if (!h.is_object() || !h.contains("dim") ||
          !h["dim"].is_number_integer() || h["dim"].get<long>() <= 0) {
        throw Error(ErrorCode::kBadHeader, "header needs a positive \"dim\"");
      }
      if (h.contains("unit") && h["unit"] != "seconds") {
        throw Error(ErrorCode::kBadHeader, "unit must be \"seconds\"");
      }
      s.dim = h["dim"].get<int>();
      have_header = true;
      continue;
    }
    json row = ParseJsonLine(line, ErrorCode::kBadRow, n);
    if (!row.is_object() || !row.contains("t0") || !row.contains("t1") ||
        !row.contains("v") || !row["t0"].is_number() ||
        !row["t1"].is_number() || !row["v"].is_array()) {
      throw Error(ErrorCode::kBadRow,
                  "line " + std::to_string(n) + " needs t0, t1 and v");
    }
    Frame f;
    f.t0 = row["t0"].get<double>();
    f.t1 = row["t1"].get<double>();
    for (const auto& x : row["v"]) {
      if (!x.is_number()) {
        throw Error(ErrorCode::kBadRow,
                    "line " + std::to_string(n) + ": non-numeric feature");
      }
      f.v.push_back(x.get<double>());
    }
    if (static_cast<int>(f.v.size()) != s.dim) {
      throw Error(ErrorCode::kDimMismatch,
                  fmt::format("line {}: vector length {} under dim {}", n,
                              f.v.size(), s.dim));
    }
    if (!(f.t0 < f.t1)) {
      throw Error(ErrorCode::kNonMonotonic,
                  fmt::format("line {}: t0 {} is not before t1 {}", n, f.t0,
                              f.t1));
    }
    if (!s.frames.empty()) {
      const Frame& prev = s.frames.back();
      if (f.t0 < prev.t1) {
        throw Error(ErrorCode::kNonMonotonic,
                    fmt::format("line {}: frame starting at {} precedes the "
                                "end of the previous frame ({})",
                                n, f.t0, prev.t1));
      }
    }
    s.frames.push_back(std::move(f));
  }
  if (!have_header) throw Error(ErrorCode::kBadHeader, "missing header line");
  return s;
}

void WriteFeatureStream(const FeatureStream& s, std::ostream& out) {
  out << json{{"dim", s.dim}, {"unit", "seconds"}}.dump() << '\n';
  for (const Frame& f : s.frames) {
    out << json{{"t0", f.t0}, {"t1", f.t1}, {"v", f.v}}.dump() << '\n';
  }
}

SegStat SegStat::FromFrame(const Frame& f) {
  SegStat s;
  s.n = 1;
  s.sum = f.v;
  for (double x : f.v) s.sumsq += x * x;
  s.start = f.t0;
  s.end = f.t1;
  return s;
}

SegStat SegStat::Merge(const SegStat& left, const SegStat& right) {
  SegStat s;
  s.n = left.n + right.n;
  s.sum = left.sum;
  for (std::size_t i = 0; i < s.sum.size(); ++i) s.sum[i] += right.sum[i];
  s.sumsq = left.sumsq + right.sumsq;
  s.start = left.start;
  s.end = right.end;
  return s;
}

double SegStat::Sse() const {
  double sq = 0;
  for (double x : sum) sq += x * x;
  return std::max(0.0, sumsq - sq / static_cast<double>(n));
}

double WardDelta(const SegStat& a, const SegStat& b) {
  if (a.sum.size() != b.sum.size()) {
    throw Error(ErrorCode::kDimMismatch, "segment dimensions differ");
  }
  const double na = static_cast<double>(a.n);
  const double nb = static_cast<double>(b.n);
  double dist = 0;
  for (std::size_t i = 0; i < a.sum.size(); ++i) {
    double d = a.sum[i] / na - b.sum[i] / nb;
    dist += d * d;
  }
  return na * nb / (na + nb) * dist;
}

void CaptionTree::Validate() const {
  if (nodes.empty()) throw Error(ErrorCode::kBadTree, "tree has no nodes");
  if (root < 0 || root >= static_cast<int>(nodes.size())) {
    throw Error(ErrorCode::kBadTree, "root id out of range");
  }
  std::vector<int> parents(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& n = nodes[i];
    if (n.id != static_cast<int>(i)) {
      throw Error(ErrorCode::kBadTree, "node ids must equal their index");
    }
    if (!(n.start <= n.end)) {
      throw Error(ErrorCode::kBadTree, fmt::format("node {} has end < start", i));
    }
    if (n.children.empty()) continue;
    if (n.children.size() != 2) {
      throw Error(ErrorCode::kBadTree,
                  fmt::format("node {} must have 0 or 2 children", i));
    }
    for (int c : n.children) {
      if (c < 0 || c >= static_cast<int>(nodes.size()) || c == n.id) {
        throw Error(ErrorCode::kBadTree,
                    fmt::format("node {} has a bad child id {}", i, c));
      }
      ++parents[c];
    }
    const TreeNode& l = nodes[n.children[0]];
    const TreeNode& r = nodes[n.children[1]];
    if (l.start != n.start || r.end != n.end || l.end > r.start) {
      throw Error(ErrorCode::kBadTree,
                  fmt::format("children of node {} do not partition it", i));
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    int expected = static_cast<int>(i) == root ? 0 : 1;
    if (parents[i] != expected) {
      throw Error(ErrorCode::kBadTree,
                  fmt::format("node {} has {} parents", i, parents[i]));
    }
  }
  // Parent counts alone admit detached cycles; require reachability too.
  if (BfsWindows(*this, static_cast<int>(nodes.size())).size() !=
      nodes.size()) {
    throw Error(ErrorCode::kBadTree, "not every node is reachable from root");
  }
}

Segmentation Segment(const FeatureStream& s, const SegmentOptions& opts) {
  if (s.frames.empty()) throw Error(ErrorCode::kEmptyStream, "no frames");
  if (opts.pool_frames < 1) {
    throw Error(ErrorCode::kBadConfig, "pool_frames must be >= 1");
  }
  Segmentation out;
  std::vector<SegStat> stats;
  for (std::size_t i = 0; i < s.frames.size();) {
    SegStat leaf = SegStat::FromFrame(s.frames[i++]);
    for (int k = 1; k < opts.pool_frames && i < s.frames.size(); ++k) {
      leaf = SegStat::Merge(leaf, SegStat::FromFrame(s.frames[i++]));
    }
    stats.push_back(std::move(leaf));
  }
  out.leaves = stats;

  auto& nodes = out.tree.nodes;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    nodes.push_back(TreeNode{static_cast<int>(i), stats[i].start, stats[i].end,
                             {}, std::nullopt});
  }

  // active[i] is a node id; gap[i] is the merge cost of active[i], active[i+1].
  std::vector<int> active(stats.size());
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = static_cast<int>(i);
  std::vector<double> gap;
  for (std::size_t i = 0; i + 1 < active.size(); ++i) {
    gap.push_back(WardDelta(stats[i], stats[i + 1]));
  }

  while (active.size() > 1) {
    // Costs equal up to rounding count as ties, so the leftmost pair wins.
    const double lowest = *std::min_element(gap.begin(), gap.end());
    const double tol = kTieTolerance * std::max(1.0, std::abs(lowest));
    std::size_t best = 0;
    while (gap[best] > lowest + tol) ++best;
    const int left = active[best];
    const int right = active[best + 1];
    const int id = static_cast<int>(nodes.size());
    stats.push_back(SegStat::Merge(stats[left], stats[right]));
    nodes.push_back(TreeNode{id, stats[id].start, stats[id].end,
                             {left, right}, std::nullopt});
    out.merges.push_back(MergeRecord{left, right, id, gap[best]});

    active[best] = id;
    active.erase(active.begin() + static_cast<long>(best) + 1);
    gap.erase(gap.begin() + static_cast<long>(best));
    if (best > 0) gap[best - 1] = WardDelta(stats[active[best - 1]], stats[id]);
    if (best < gap.size()) gap[best] = WardDelta(stats[id], stats[active[best + 1]]);
  }
  out.tree.root = active.front();
  return out;
}

CaptionTree BuildTree(const FeatureStream& s, const SegmentOptions& opts) {
  return Segment(s, opts).tree;
}

std::vector<int> BfsWindows(const CaptionTree& tree, int k) {
  std::vector<int> out;
  if (tree.root < 0 || k < 1) return out;
  std::deque<int> queue{tree.root};
  while (!queue.empty() && static_cast<int>(out.size()) < k) {
    int id = queue.front();
    queue.pop_front();
    out.push_back(id);
    for (int c : tree.node(id).children) queue.push_back(c);
  }
  return out;
}

std::vector<int> FilterCaptionable(const CaptionTree& tree,
                                   double min_duration) {
  std::vector<int> out;
  for (int id : BfsWindows(tree, static_cast<int>(tree.nodes.size()))) {
    if (tree.node(id).duration() >= min_duration - kDurationEps) {
      out.push_back(id);
    }
  }
  return out;
}

std::vector<int> SampleWindows(const CaptionTree& tree, int k,
                               double min_duration) {
  std::vector<int> ids = FilterCaptionable(tree, min_duration);
  if (k < 0) k = 0;
  if (static_cast<int>(ids.size()) > k) ids.resize(k);
  return ids;
}

std::string DfsRender(const CaptionTree& tree,
                      const std::map<int, std::string>& labels,
                      const DfsRenderOptions& opts) {
  std::vector<std::string> lines;
  auto caption_of = [&](const TreeNode& n) -> std::optional<std::string> {
    if (auto it = labels.find(n.id); it != labels.end()) return it->second;
    return n.caption;
  };
  auto visible_children = [&](const TreeNode& n) {
    std::vector<int> out;
    for (int c : n.children) {
      if (tree.node(c).duration() >= opts.min_duration - kDurationEps) {
        out.push_back(c);
      }
    }
    return out;
  };

  // Explicit stack keeps deep (degenerate) trees off the call stack.
  struct Item {
    int id;
    int depth;
    std::string index;
  };
  std::vector<Item> stack{{tree.root, 0, ""}};
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    const TreeNode& n = tree.node(item.id);
    const std::vector<int> kids = visible_children(n);
    auto caption = caption_of(n);
    if (item.depth == 0) {
      lines.push_back("# " + Span(n));
      if (caption) {
        lines.emplace_back();
        lines.push_back(*caption);
      }
    } else if (!kids.empty()) {
      lines.push_back(std::string(item.depth + 1, '#') + " Segment " +
                      item.index + " - " + Span(n));
      if (caption) {
        lines.emplace_back();
        lines.push_back(*caption);
      }
    } else {
      std::string line = "**" + Span(n) + "**:";
      if (caption) line += " " + *caption;
      lines.push_back(std::move(line));
    }
    lines.emplace_back();
    for (std::size_t i = kids.size(); i-- > 0;) {
      std::string index = item.index.empty()
                              ? std::to_string(i + 1)
                              : item.index + "." + std::to_string(i + 1);
      stack.push_back(Item{kids[i], item.depth + 1, std::move(index)});
    }
  }
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string CaptionTreeToJson(const CaptionTree& tree) {
  json nodes = json::array();
  for (const TreeNode& n : tree.nodes) {
    nodes.push_back({{"id", n.id},
                     {"start", n.start},
                     {"end", n.end},
                     {"children", n.children},
                     {"caption", n.caption ? json(*n.caption) : json(nullptr)}});
  }
  return json{{"root", tree.root}, {"nodes", nodes}}.dump(2) + "\n";
}

CaptionTree CaptionTreeFromJson(const std::string& text) {
  CaptionTree tree;
  try {
    json doc = json::parse(text);
    tree.root = doc.at("root").get<int>();
    for (const auto& jn : doc.at("nodes")) {
      TreeNode n;
      n.id = jn.at("id").get<int>();
      n.start = jn.at("start").get<double>();
      n.end = jn.at("end").get<double>();
      n.children = jn.at("children").get<std::vector<int>>();
      if (jn.contains("caption") && !jn["caption"].is_null()) {
        n.caption = jn["caption"].get<std::string>();
      }
      tree.nodes.push_back(std::move(n));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadTree, e.what());
  }
  std::sort(tree.nodes.begin(), tree.nodes.end(),
            [](const TreeNode& a, const TreeNode& b) { return a.id < b.id; });
  tree.Validate();
  return tree;
}

}  // namespace wmplan
