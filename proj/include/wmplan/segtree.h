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

// Hierarchical temporal segmentation of a feature stream.
//
// Frames start as singleton segments. At every step the temporally adjacent
// pair whose merge adds the least within-segment sum of squared deviations
// (Ward's criterion) is merged, leftmost pair on ties, until one segment
// remains. Each merge becomes an internal node, so the result is a binary
// tree whose levels tile the stream.

#ifndef WMPLAN_SEGTREE_H_
#define WMPLAN_SEGTREE_H_

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace wmplan {

// Merge costs within this relative distance of the minimum count as tied.
inline constexpr double kTieTolerance = 1e-9;

struct Frame {
  double t0 = 0;
  double t1 = 0;
  std::vector<double> v;
};

struct FeatureStream {
  int dim = 0;
  std::vector<Frame> frames;
};

// JSON Lines: header {"dim": d, "unit": "seconds"}, then one
// {"t0": .., "t1": .., "v": [..]} object per frame.
FeatureStream LoadFeatureStream(std::istream& in);
void WriteFeatureStream(const FeatureStream& s, std::ostream& out);

// Sufficient statistics of a contiguous run of frames.
struct SegStat {
  long n = 0;
  std::vector<double> sum;
  double sumsq = 0;  // sum of squared norms
  double start = 0;
  double end = 0;

  static SegStat FromFrame(const Frame& f);
  // Combines two adjacent segments; `left` must precede `right`.
  static SegStat Merge(const SegStat& left, const SegStat& right);
  // Sum of squared deviations from the segment mean.
  double Sse() const;
};

// Increase in total SSE caused by merging a and b:
// n_a n_b / (n_a + n_b) * |mean_a - mean_b|^2.
double WardDelta(const SegStat& a, const SegStat& b);

struct TreeNode {
  int id = 0;
  double start = 0;
  double end = 0;
  std::vector<int> children;  // empty or exactly {left, right}
  std::optional<std::string> caption;

  double duration() const { return end - start; }
  bool is_leaf() const { return children.empty(); }
};

struct CaptionTree {
  std::vector<TreeNode> nodes;  // nodes[i].id == i
  int root = -1;

  const TreeNode& node(int id) const { return nodes.at(id); }
  // Throws Error(kBadTree) on structural problems.
  void Validate() const;
};

struct MergeRecord {
  int left = 0;
  int right = 0;
  int node = 0;
  double delta = 0;
};

struct SegmentOptions {
  // Consecutive frames pooled into each leaf before clustering; 1 = off.
  int pool_frames = 1;
};

struct Segmentation {
  CaptionTree tree;
  std::vector<MergeRecord> merges;  // in merge order
  std::vector<SegStat> leaves;
};

Segmentation Segment(const FeatureStream& s, const SegmentOptions& opts = {});
CaptionTree BuildTree(const FeatureStream& s, const SegmentOptions& opts = {});

// Ids of nodes lasting at least `min_duration` seconds, in BFS order.
std::vector<int> FilterCaptionable(const CaptionTree& tree,
                                   double min_duration = 5.0);

// First min(k, |nodes|) ids in BFS order, earlier child first.
std::vector<int> BfsWindows(const CaptionTree& tree, int k = 5);

// Window sampling used for plan extraction: the first k captionable nodes.
std::vector<int> SampleWindows(const CaptionTree& tree, int k = 5,
                               double min_duration = 5.0);

struct DfsRenderOptions {
  // Nodes shorter than this are omitted together with their subtrees; a node
  // whose children are all omitted renders as a leaf line.
  double min_duration = 0;
};

// Markdown in depth-first order:
//   # 0.00s -> 164.53s (duration: 164.5s)
//   ## Segment 1 - 0.00s -> 126.20s (duration: 126.2s)
//   **0.00s -> 23.27s (duration: 23.3s)**: caption
// `labels` overrides node captions by id.
std::string DfsRender(const CaptionTree& tree,
                      const std::map<int, std::string>& labels = {},
                      const DfsRenderOptions& opts = {});

std::string CaptionTreeToJson(const CaptionTree& tree);
CaptionTree CaptionTreeFromJson(const std::string& text);

}  // namespace wmplan

#endif  // WMPLAN_SEGTREE_H_
