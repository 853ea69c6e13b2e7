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

#include "wmplan/critic.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "json.hpp"
#include "wmplan/error.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

using nlohmann::json;

// Hidden activations for one feature vector.
void HiddenLayer(const CriticModel& m, std::span<const double> z,
                 std::vector<double>& act) {
  const std::size_t in = z.size();
  act.resize(m.hidden);
  for (int j = 0; j < m.hidden; ++j) {
    const double* row = m.w1.data() + static_cast<std::size_t>(j) * in;
    double s = m.b1[j];
    for (std::size_t i = 0; i < in; ++i) s += row[i] * z[i];
    act[j] = std::tanh(s);
  }
}

// Accumulates scale * dC/dparams at features z into g.
void AccumulateGrad(const CriticModel& m, std::span<const double> z,
                    const std::vector<double>& act, double scale,
                    CriticGradients& g) {
  const std::size_t in = z.size();
  g.b2 += scale;
  for (int j = 0; j < m.hidden; ++j) {
    g.w2[j] += scale * act[j];
    const double dpre = scale * m.w2[j] * (1.0 - act[j] * act[j]);
    if (dpre == 0) continue;
    g.b1[j] += dpre;
    double* row = g.w1.data() + static_cast<std::size_t>(j) * in;
    for (std::size_t i = 0; i < in; ++i) row[i] += dpre * z[i];
  }
}

void CheckShape(const CriticModel& m) {
  if (m.dim <= 0 || m.hidden <= 0 ||
      m.w1.size() != static_cast<std::size_t>(m.hidden) * m.input_dim() ||
      m.b1.size() != static_cast<std::size_t>(m.hidden) ||
      m.w2.size() != static_cast<std::size_t>(m.hidden)) {
    throw Error(ErrorCode::kBadModel, "critic parameter shapes are inconsistent");
  }
}

std::string RequireField(const json& row, const char* key, std::size_t line) {
  if (!row.contains(key) || !row[key].is_string()) {
    throw Error(ErrorCode::kBadRow,
                fmt::format("line {}: missing text field '{}'", line, key));
  }
  std::string v = row[key].get<std::string>();
  if (TrimView(v).empty()) {
    throw Error(ErrorCode::kBadRow, fmt::format("line {}: empty '{}'", line, key));
  }
  return v;
}

std::vector<PairExample> ReadPairRows(std::istream& in, bool read_kind) {
  std::vector<PairExample> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (TrimView(line).empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kBadRow, fmt::format("line {}: {}", n, e.what()));
    }
    if (!row.is_object()) {
      throw Error(ErrorCode::kBadRow, fmt::format("line {}: not an object", n));
    }
    PairExample p;
    p.goal_text = RequireField(row, "goal", n);
    p.pos_text = RequireField(row, "pos", n);
    p.neg_text = RequireField(row, "neg", n);
    if (p.pos_text == p.neg_text) {
      throw Error(ErrorCode::kBadRow, fmt::format("line {}: pos equals neg", n));
    }
    p.kind = PairKind::kExternal;
    if (read_kind && row.contains("kind")) {
      try {
        p.kind = PairKindFromName(row["kind"].get<std::string>());
      } catch (const std::exception& e) {
        throw Error(ErrorCode::kBadRow, fmt::format("line {}: {}", n, e.what()));
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

CriticModel CriticModel::Zeros(int dim, int hidden) {
  if (dim <= 0 || hidden <= 0) {
    throw Error(ErrorCode::kBadConfig, "critic dims must be positive");
  }
  CriticModel m;
  m.dim = dim;
  m.hidden = hidden;
  m.w1.assign(static_cast<std::size_t>(hidden) * 4 * dim, 0.0);
  m.b1.assign(hidden, 0.0);
  m.w2.assign(hidden, 0.0);
  return m;
}

CriticModel CriticModel::Init(int dim, int hidden, std::uint64_t seed) {
  CriticModel m = Zeros(dim, hidden);
  const double bound = 1.0 / std::sqrt(4.0 * dim);
  Rng rng(seed);
  for (double& w : m.w1) w = (2.0 * UniformUnit(rng) - 1.0) * bound;
  return m;
}

std::vector<double> PairFeatures(std::span<const double> goal_embedding,
                                 std::span<const double> trajectory_embedding) {
  if (goal_embedding.size() != trajectory_embedding.size()) {
    throw Error(ErrorCode::kDimMismatch, "goal and trajectory embeddings differ");
  }
  const std::size_t d = goal_embedding.size();
  std::vector<double> z(4 * d);
  for (std::size_t i = 0; i < d; ++i) {
    const double g = goal_embedding[i];
    const double t = trajectory_embedding[i];
    z[i] = g;
    z[d + i] = t;
    z[2 * d + i] = g * t;
    z[3 * d + i] = std::abs(g - t);
  }
  return z;
}

double ForwardCost(const CriticModel& m, std::span<const double> features) {
  if (static_cast<int>(features.size()) != m.input_dim()) {
    throw Error(ErrorCode::kDimMismatch,
                fmt::format("feature length {} but model expects {}",
                            features.size(), m.input_dim()));
  }
  std::vector<double> act;
  HiddenLayer(m, features, act);
  double c = m.b2;
  for (int j = 0; j < m.hidden; ++j) c += m.w2[j] * act[j];
  return c;
}

double Score(const CriticModel& m, const Embedder& e,
             const std::string& goal_text, const std::string& trajectory_text) {
  if (e.dim() != m.dim) {
    throw Error(ErrorCode::kDimMismatch,
                fmt::format("embedder dim {} but critic dim {}", e.dim(), m.dim));
  }
  return ForwardCost(m, PairFeatures(e.Embed(goal_text), e.Embed(trajectory_text)));
}

NeuralCritic::NeuralCritic(const CriticModel& model, const Embedder& embedder)
    : model_(model), embedder_(embedder) {
  CheckShape(model_);
  if (embedder_.dim() != model_.dim) {
    throw Error(ErrorCode::kDimMismatch, "embedder and critic dims differ");
  }
}

double NeuralCritic::Cost(const std::string& goal_text,
                          const std::string& trajectory_text) const {
  return Score(model_, embedder_, goal_text, trajectory_text);
}

void CriticTrainConfig::Validate() const {
  if (!(margin > 0)) throw Error(ErrorCode::kBadConfig, "margin must be > 0");
  if (!(lambda >= 0)) throw Error(ErrorCode::kBadConfig, "lambda must be >= 0");
  if (batch_size < 1) throw Error(ErrorCode::kBadConfig, "batch size must be >= 1");
  if (epochs < 0) throw Error(ErrorCode::kBadConfig, "epochs must be >= 0");
  if (!(learning_rate >= 0)) {
    throw Error(ErrorCode::kBadConfig, "learning rate must be >= 0");
  }
}

double PairLoss(double c_pos, double c_neg, const CriticTrainConfig& cfg) {
  const double hinge = std::max(0.0, cfg.margin + c_pos - c_neg);
  return hinge * hinge + cfg.lambda * (c_pos * c_pos + c_neg * c_neg);
}

std::string_view PairKindName(PairKind kind) {
  switch (kind) {
    case PairKind::kGoodVsBase: return "GoodVsBase";
    case PairKind::kBaseVsBad: return "BaseVsBad";
    case PairKind::kBaseVsShuffled: return "BaseVsShuffled";
    case PairKind::kExternal: return "External";
  }
  return "External";
}

PairKind PairKindFromName(std::string_view name) {
  for (PairKind k : {PairKind::kGoodVsBase, PairKind::kBaseVsBad,
                     PairKind::kBaseVsShuffled, PairKind::kExternal}) {
    if (PairKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kBadRow, "unknown pair kind " + std::string(name));
}

std::vector<PairExample> BuildPairs(std::span<const Trajectory> trajectories,
                                    const PairBuildConfig& cfg) {
  if (cfg.min_base < 1 || cfg.good_steps < 1 || cfg.distractor_steps < 1) {
    throw Error(ErrorCode::kBadConfig,
                "min_base, good_steps and distractor_steps must be >= 1");
  }
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (trajectories[i].steps.size() < 2) {
      throw Error(ErrorCode::kTooFewSteps,
                  fmt::format("trajectory {} has fewer than 2 steps", i));
    }
  }
  // Distractor sources per goal: indices of trajectories with another goal.
  std::map<std::string, std::vector<std::size_t>> others;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    others.try_emplace(trajectories[i].goal);
  }
  if (others.size() < 2) {
    throw Error(ErrorCode::kNoDistractorSource,
                "distractors need trajectories with at least two goals");
  }
  for (auto& [goal, list] : others) {
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      if (trajectories[i].goal != goal) list.push_back(i);
    }
  }

  auto render = [&](const Trajectory& t) {
    return RenderCriticText(t, t.steps.size(), cfg.render);
  };

  std::vector<PairExample> out;
  Rng rng(cfg.seed);
  std::uint64_t shuffle_stream = 0;
  for (const Trajectory& full : trajectories) {
    const std::size_t n = full.steps.size();
    const std::vector<std::size_t>& pool = others.at(full.goal);
    for (std::size_t k = static_cast<std::size_t>(cfg.min_base); k < n; ++k) {
      const Trajectory base = Prefix(full, k);
      const CriticText base_text = render(base);
      const std::string& goal_text = base_text.goal_text;

      const Trajectory good =
          Prefix(full, std::min(n, k + static_cast<std::size_t>(cfg.good_steps)));
      out.push_back({goal_text, render(good).trajectory_text,
                     base_text.trajectory_text, PairKind::kGoodVsBase});

      // A contiguous run of foreign steps from one unrelated trajectory.
      const Trajectory& src = trajectories[pool[UniformIndex(rng, pool.size())]];
      const std::size_t take =
          std::min(src.steps.size(), static_cast<std::size_t>(cfg.distractor_steps));
      const std::size_t from = UniformIndex(rng, src.steps.size() - take + 1);
      const Trajectory bad = AppendSteps(
          base, std::span<const Step>(src.steps).subspan(from, take));
      PairExample bad_pair{goal_text, base_text.trajectory_text,
                           render(bad).trajectory_text, PairKind::kBaseVsBad};
      if (bad_pair.pos_text != bad_pair.neg_text) out.push_back(std::move(bad_pair));

      if (k >= 2) {
        const Trajectory shuffled =
            ShuffleSteps(base, MixSeed(cfg.seed, shuffle_stream++));
        PairExample shuf{goal_text, base_text.trajectory_text,
                         render(shuffled).trajectory_text,
                         PairKind::kBaseVsShuffled};
        // Repeated step texts can make a permutation textually identical.
        if (shuf.pos_text != shuf.neg_text) out.push_back(std::move(shuf));
      }
    }
  }
  return out;
}

Trajectory SubtreeTrajectory(const CaptionTree& tree, int node) {
  const TreeNode& top = tree.node(node);
  if (!top.caption || TrimView(*top.caption).empty()) {
    throw Error(ErrorCode::kBadTree,
                fmt::format("node {} has no caption to use as a goal", node));
  }
  Trajectory t;
  t.goal = Trim(*top.caption);
  std::vector<int> stack{node};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    const TreeNode& n = tree.node(id);
    if (n.is_leaf()) {
      if (n.caption && !TrimView(*n.caption).empty()) {
        t.steps.push_back(Step{Trim(*n.caption), ""});
      }
      continue;
    }
    stack.push_back(n.children[1]);
    stack.push_back(n.children[0]);
  }
  return t;
}

std::vector<Trajectory> SampleSubtreeTrajectories(const CaptionTree& tree,
                                                  int count,
                                                  std::uint64_t seed) {
  std::vector<int> internal;
  for (const TreeNode& n : tree.nodes) {
    if (!n.is_leaf() && n.caption) internal.push_back(n.id);
  }
  Rng rng(seed);
  SeededShuffle(internal, rng);
  if (count >= 0 && static_cast<std::size_t>(count) < internal.size()) {
    internal.resize(count);
  }
  std::vector<Trajectory> out;
  for (int id : internal) {
    Trajectory t = SubtreeTrajectory(tree, id);
    if (t.steps.size() >= 2) out.push_back(std::move(t));
  }
  return out;
}

std::vector<PairExample> LoadExternalPairs(std::istream& in) {
  return ReadPairRows(in, /*read_kind=*/false);
}

std::vector<PairExample> LoadPairs(std::istream& in) {
  return ReadPairRows(in, /*read_kind=*/true);
}

void WritePairs(std::span<const PairExample> pairs, std::ostream& out) {
  for (const PairExample& p : pairs) {
    out << json{{"goal", p.goal_text},
                {"pos", p.pos_text},
                {"neg", p.neg_text},
                {"kind", PairKindName(p.kind)}}
               .dump()
        << '\n';
  }
}

std::vector<EncodedPair> EncodePairs(const Embedder& e,
                                     std::span<const PairExample> pairs) {
  // Goals and prefixes repeat heavily across pairs.
  std::unordered_map<std::string, std::vector<double>> cache;
  auto embed = [&](const std::string& s) -> const std::vector<double>& {
    auto it = cache.find(s);
    if (it == cache.end()) it = cache.emplace(s, e.Embed(s)).first;
    return it->second;
  };
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const PairExample& p : pairs) {
    const std::vector<double> g = embed(p.goal_text);
    out.push_back({PairFeatures(g, embed(p.pos_text)),
                   PairFeatures(g, embed(p.neg_text))});
  }
  return out;
}

LossAndGradients LossAndGrads(const CriticModel& m,
                              std::span<const EncodedPair> batch,
                              const CriticTrainConfig& cfg) {
  CheckShape(m);
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty batch");
  LossAndGradients out;
  out.grad.w1.assign(m.w1.size(), 0.0);
  out.grad.b1.assign(m.hidden, 0.0);
  out.grad.w2.assign(m.hidden, 0.0);
  const double inv = 1.0 / static_cast<double>(batch.size());

  std::vector<double> act_pos;
  std::vector<double> act_neg;
  for (const EncodedPair& p : batch) {
    if (static_cast<int>(p.pos_features.size()) != m.input_dim() ||
        static_cast<int>(p.neg_features.size()) != m.input_dim()) {
      throw Error(ErrorCode::kDimMismatch, "pair features do not match the model");
    }
    HiddenLayer(m, p.pos_features, act_pos);
    HiddenLayer(m, p.neg_features, act_neg);
    double c_pos = m.b2;
    double c_neg = m.b2;
    for (int j = 0; j < m.hidden; ++j) {
      c_pos += m.w2[j] * act_pos[j];
      c_neg += m.w2[j] * act_neg[j];
    }
    out.loss += PairLoss(c_pos, c_neg, cfg) * inv;

    const double hinge = std::max(0.0, cfg.margin + c_pos - c_neg);
    const double d_pos = 2.0 * hinge + 2.0 * cfg.lambda * c_pos;
    const double d_neg = -2.0 * hinge + 2.0 * cfg.lambda * c_neg;
    AccumulateGrad(m, p.pos_features, act_pos, d_pos * inv, out.grad);
    AccumulateGrad(m, p.neg_features, act_neg, d_neg * inv, out.grad);
  }
  return out;
}

LossAndGradients LossAndGrads(const CriticModel& m, const Embedder& e,
                              std::span<const PairExample> batch,
                              const CriticTrainConfig& cfg) {
  const auto encoded = EncodePairs(e, batch);
  return LossAndGrads(m, encoded, cfg);
}

TrainResult Train(const CriticModel& init, const Embedder& e,
                  std::span<const PairExample> pairs,
                  const CriticTrainConfig& cfg) {
  cfg.Validate();
  CheckShape(init);
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no training pairs");
  if (e.dim() != init.dim) {
    throw Error(ErrorCode::kDimMismatch, "embedder and critic dims differ");
  }
  const std::vector<EncodedPair> encoded = EncodePairs(e, pairs);

  TrainResult out{init, {}};
  CriticModel& m = out.model;

  struct Moments {
    std::vector<double> first;
    std::vector<double> second;
  };
  auto zeros = [](std::size_t n) { return Moments{std::vector<double>(n), std::vector<double>(n)}; };
  Moments mw1 = zeros(m.w1.size()), mb1 = zeros(m.b1.size()),
          mw2 = zeros(m.w2.size()), mb2 = zeros(1);

  long step = 0;
  auto adam = [&](std::vector<double>& param, const std::vector<double>& grad,
                  Moments& mom) {
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < param.size(); ++i) {
      mom.first[i] = cfg.beta1 * mom.first[i] + (1 - cfg.beta1) * grad[i];
      mom.second[i] = cfg.beta2 * mom.second[i] + (1 - cfg.beta2) * grad[i] * grad[i];
      const double mhat = mom.first[i] / c1;
      const double vhat = mom.second[i] / c2;
      param[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  };

  std::vector<std::size_t> order(encoded.size());
  std::vector<EncodedPair> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(MixSeed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    SeededShuffle(order, rng);
    for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), at + cfg.batch_size);
      batch.clear();
      for (std::size_t i = at; i < end; ++i) batch.push_back(encoded[order[i]]);
      LossAndGradients lg = LossAndGrads(m, batch, cfg);
      out.loss_history.push_back(lg.loss);
      ++step;
      adam(m.w1, lg.grad.w1, mw1);
      adam(m.b1, lg.grad.b1, mb1);
      adam(m.w2, lg.grad.w2, mw2);
      std::vector<double> b2{m.b2};
      adam(b2, {lg.grad.b2}, mb2);
      m.b2 = b2[0];
    }
  }
  return out;
}

std::string CriticModelToJson(const CriticModel& m, const Embedder& e) {
  json doc = {{"dim", m.dim},
              {"hidden", m.hidden},
              {"W1", m.w1},
              {"b1", m.b1},
              {"w2", m.w2},
              {"b2", m.b2},
              {"embedder", {{"kind", e.kind()}, {"dim", e.dim()}}}};
  return doc.dump() + "\n";
}

LoadedCritic CriticModelFromJson(const std::string& text) {
  LoadedCritic out;
  try {
    json doc = json::parse(text);
    CriticModel& m = out.model;
    m.dim = doc.at("dim").get<int>();
    m.hidden = doc.at("hidden").get<int>();
    m.w1 = doc.at("W1").get<std::vector<double>>();
    m.b1 = doc.at("b1").get<std::vector<double>>();
    m.w2 = doc.at("w2").get<std::vector<double>>();
    m.b2 = doc.at("b2").get<double>();
    out.embedder_kind = doc.at("embedder").at("kind").get<std::string>();
    out.embedder_dim = doc.at("embedder").at("dim").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadModel, e.what());
  }
  CheckShape(out.model);
  if (out.embedder_dim != out.model.dim) {
    throw Error(ErrorCode::kBadModel, "embedder dim differs from critic dim");
  }
  for (double v : out.model.w1) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kBadModel, "non-finite weight");
  }
  return out;
}

}  // namespace wmplan
