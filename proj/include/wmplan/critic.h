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

// Self-supervised plan critic.
//
// The critic maps (goal text, partial trajectory text) to a scalar cost. Lower
// cost means the trajectory is closer to achieving the goal. It is trained on
// ranked pairs built from complete trajectories:
//
//   good  = base prefix extended by its true next step(s)   C_good < C_base
//   bad   = base prefix extended by another task's step(s)  C_base < C_bad
//   shuf  = base prefix with its steps permuted             C_base < C_shuf
//
// with a squared-hinge ranking loss plus a cost-centering penalty:
//
//   L = max(0, margin + C_pos - C_neg)^2 + lambda * (C_pos^2 + C_neg^2)

#ifndef WMPLAN_CRITIC_H_
#define WMPLAN_CRITIC_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wmplan/embedder.h"
#include "wmplan/segtree.h"
#include "wmplan/trajectory.h"

namespace wmplan {

// Anything that assigns a cost to a (goal, trajectory) text pair.
class TextCritic {
 public:
  virtual ~TextCritic() = default;
  virtual double Cost(const std::string& goal_text,
                      const std::string& trajectory_text) const = 0;
};

// One-hidden-layer scorer over sentence-pair features
//   z = [e_g, e_t, e_g * e_t, |e_g - e_t|]
//   C = w2 . tanh(W1 z + b1) + b2
struct CriticModel {
  int dim = 0;
  int hidden = 0;
  std::vector<double> w1;  // hidden x 4*dim, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0;

  int input_dim() const { return 4 * dim; }

  static CriticModel Zeros(int dim, int hidden);
  // W1 ~ U(-1/sqrt(4 dim), 1/sqrt(4 dim)); everything else zero.
  static CriticModel Init(int dim, int hidden, std::uint64_t seed);
};

std::vector<double> PairFeatures(std::span<const double> goal_embedding,
                                 std::span<const double> trajectory_embedding);

// Cost from precomputed pair features.
double ForwardCost(const CriticModel& m, std::span<const double> features);

double Score(const CriticModel& m, const Embedder& e,
             const std::string& goal_text, const std::string& trajectory_text);

class NeuralCritic : public TextCritic {
 public:
  // Both arguments must outlive the critic.
  NeuralCritic(const CriticModel& model, const Embedder& embedder);
  double Cost(const std::string& goal_text,
              const std::string& trajectory_text) const override;

 private:
  const CriticModel& model_;
  const Embedder& embedder_;
};

struct CriticTrainConfig {
  double margin = 1.0;
  double lambda = 0.01;
  int batch_size = 128;
  int epochs = 1;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void Validate() const;
};

double PairLoss(double c_pos, double c_neg, const CriticTrainConfig& cfg);

enum class PairKind { kGoodVsBase, kBaseVsBad, kBaseVsShuffled, kExternal };

std::string_view PairKindName(PairKind kind);
PairKind PairKindFromName(std::string_view name);

struct PairExample {
  std::string goal_text;
  std::string pos_text;  // should cost less
  std::string neg_text;
  PairKind kind = PairKind::kExternal;
};

struct PairBuildConfig {
  std::uint64_t seed = 0;
  int min_base = 1;
  int good_steps = 1;        // true continuation steps appended for "good"
  int distractor_steps = 1;  // foreign steps appended for "bad"
  RenderOptions render;
};

// Every trajectory needs >= 2 steps. Throws Error(kNoDistractorSource) when
// the corpus holds a single goal.
std::vector<PairExample> BuildPairs(std::span<const Trajectory> trajectories,
                                    const PairBuildConfig& cfg = {});

// Subtree pseudo-trajectory: the node caption is the goal and the captions of
// the leaves below it, in time order, are action-only steps.
Trajectory SubtreeTrajectory(const CaptionTree& tree, int node);

// Up to `count` distinct internal nodes drawn uniformly; nodes that yield
// fewer than two captioned leaves are dropped.
std::vector<Trajectory> SampleSubtreeTrajectories(const CaptionTree& tree,
                                                  int count,
                                                  std::uint64_t seed);

// JSONL rows {goal, pos, neg}; kind is External. Throws Error(kBadRow).
std::vector<PairExample> LoadExternalPairs(std::istream& in);
// JSONL rows {goal, pos, neg, kind}; missing kind means External.
std::vector<PairExample> LoadPairs(std::istream& in);
void WritePairs(std::span<const PairExample> pairs, std::ostream& out);

struct EncodedPair {
  std::vector<double> pos_features;
  std::vector<double> neg_features;
};

std::vector<EncodedPair> EncodePairs(const Embedder& e,
                                     std::span<const PairExample> pairs);

struct CriticGradients {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0;
};

struct LossAndGradients {
  double loss = 0;
  CriticGradients grad;
};

// Mean pair loss over the batch and its exact gradient. Embeddings are
// treated as constants.
LossAndGradients LossAndGrads(const CriticModel& m,
                              std::span<const EncodedPair> batch,
                              const CriticTrainConfig& cfg);
LossAndGradients LossAndGrads(const CriticModel& m, const Embedder& e,
                              std::span<const PairExample> batch,
                              const CriticTrainConfig& cfg);

struct TrainResult {
  CriticModel model;
  std::vector<double> loss_history;  // one entry per batch
};

// Seeded per-epoch shuffling and Adam updates. Deterministic given cfg.seed.
TrainResult Train(const CriticModel& init, const Embedder& e,
                  std::span<const PairExample> pairs,
                  const CriticTrainConfig& cfg);

std::string CriticModelToJson(const CriticModel& m, const Embedder& e);

struct LoadedCritic {
  CriticModel model;
  std::string embedder_kind;
  int embedder_dim = 0;
};

LoadedCritic CriticModelFromJson(const std::string& text);

}  // namespace wmplan

#endif  // WMPLAN_CRITIC_H_
