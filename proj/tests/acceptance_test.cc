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


// Acceptance suite: one PASS/FAIL line per criterion, with timing.

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "testing/generators.h"
#include "testing/oracles.h"
#include "wmplan/arena.h"
#include "wmplan/critic.h"
#include "wmplan/embedder.h"
#include "wmplan/error.h"
#include "wmplan/evalharness.h"
#include "wmplan/planner.h"
#include "wmplan/segtree.h"
#include "wmplan/toy_world.h"
#include "wmplan/trajectory.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records the first failure only.
  void Expect(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

FeatureStream Stream1d(const std::vector<double>& values) {
  FeatureStream s;
  s.dim = 1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s.frames.push_back(Frame{static_cast<double>(i), static_cast<double>(i + 1), {values[i]}});
  }
  return s;
}

SegStat StatOf(const std::vector<double>& values) {
  FeatureStream s = Stream1d(values);
  SegStat st = SegStat::FromFrame(s.frames[0]);
  for (std::size_t i = 1; i < s.frames.size(); ++i) {
    st = SegStat::Merge(st, SegStat::FromFrame(s.frames[i]));
  }
  return st;
}

class FnCritic : public TextCritic {
 public:
  explicit FnCritic(std::function<double(const std::string&, const std::string&)> fn)
      : fn_(std::move(fn)) {}
  double Cost(const std::string& g, const std::string& t) const override { return fn_(g, t); }

 private:
  std::function<double(const std::string&, const std::string&)> fn_;
};

Outcome SegmentationOracle() {
  Outcome o;
  Rng rng(20260101);
  for (int trial = 0; trial < 200 && o.pass; ++trial) {
    FeatureStream s = testing::RandomStream(rng, 32, 4, trial % 3 == 0);
    Segmentation seg = Segment(s);
    auto brute = testing::BruteForceMerges(s, 1e-9);
    o.Expect(brute.size() == seg.merges.size(), fmt::format("stream {}: merge count", trial));
    if (!o.pass) break;
    std::vector<std::pair<std::size_t, std::size_t>> range(seg.tree.nodes.size());
    for (std::size_t i = 0; i < s.frames.size(); ++i) range[i] = {i, i + 1};
    double total = 0;
    for (std::size_t m = 0; m < brute.size(); ++m) {
      const MergeRecord& r = seg.merges[m];
      range[r.node] = {range[r.left].first, range[r.right].second};
      o.Expect(range[r.left].first == brute[m].lo && range[r.left].second == brute[m].mid &&
                   range[r.right].second == brute[m].hi,
               fmt::format("stream {} merge {}: span differs from brute force", trial, m));
      total += r.delta;
    }
    const double sse = testing::BruteSse(s, 0, s.frames.size());
    o.Expect(std::abs(total - sse) <= 1e-9 * std::max(1.0, std::abs(sse)),
             fmt::format("stream {}: merge costs {} vs SSE {}", trial, total, sse));
  }
  if (o.pass) o.detail = "200 streams";
  return o;
}

Outcome WardSpotValues() {
  Outcome o;
  const double two = WardDelta(StatOf({0}), StatOf({2}));
  const double hundred = WardDelta(StatOf({0, 0}), StatOf({10, 10}));
  o.Expect(two == 2.0, fmt::format("[0]|[2] gave {}", two));
  o.Expect(hundred == 100.0, fmt::format("[0,0]|[10,10] gave {}", hundred));
  if (o.pass) o.detail = "2 and 100";
  return o;
}

Outcome GradientCheck() {
  Outcome o;
  Rng rng(424242);
  CriticTrainConfig cfg;
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = testing::IntIn(rng, 1, 6), hidden = testing::IntIn(rng, 1, 6);
    CriticModel m = CriticModel::Zeros(dim, hidden);
    testing::ForEachParam(m, [&](double& x) { x = testing::RealIn(rng, -0.8, 0.8); });
    auto vec = [&] {
      std::vector<double> v;
      for (int i = 0; i < dim; ++i) v.push_back(testing::RealIn(rng, -1, 1));
      return v;
    };
    std::vector<EncodedPair> batch{{PairFeatures(vec(), vec()), PairFeatures(vec(), vec())}};
    const auto analytic = testing::FlattenGrad(LossAndGrads(m, batch, cfg).grad);
    std::size_t i = 0;
    testing::ForEachParam(m, [&](double& x) {
      const double h = 1e-5, saved = x;
      x = saved + h;
      const double up = LossAndGrads(m, batch, cfg).loss;
      x = saved - h;
      const double down = LossAndGrads(m, batch, cfg).loss;
      x = saved;
      const double numeric = (up - down) / (2 * h);
      const double rel = std::abs(analytic[i] - numeric) /
                         std::max({1e-3, std::abs(analytic[i]), std::abs(numeric)});
      worst = std::max(worst, rel);
      o.Expect(rel <= 1e-4, fmt::format("config {} param {}: rel error {:.2e}", trial, i, rel));
      ++i;
    });
  }
  if (o.pass) o.detail = fmt::format("100 configs, worst rel error {:.1e}", worst);
  return o;
}

Outcome PairLossSpotValues() {
  Outcome o;
  CriticTrainConfig cfg;  // margin 1, lambda 0.01
  const double a = PairLoss(0, 2, cfg), b = PairLoss(0, 0, cfg), c = PairLoss(2, 0, cfg);
  o.Expect(std::abs(a - 0.04) < 1e-12, fmt::format("(0,2) gave {}", a));
  o.Expect(std::abs(b - 1.0) < 1e-12, fmt::format("(0,0) gave {}", b));
  o.Expect(std::abs(c - 9.04) < 1e-12, fmt::format("(2,0) gave {}", c));
  if (o.pass) o.detail = "0.04, 1.0, 9.04";
  return o;
}

Outcome CriticTraining() {
  Outcome o;
  Rng rng(7);
  std::vector<Trajectory> train, test;
  for (int g = 0; g < 600; ++g) {
    Trajectory t = testing::SyntheticPlan(g, 3 + static_cast<int>(UniformIndex(rng, 5)));
    (g < 500 ? train : test).push_back(std::move(t));
  }
  PairBuildConfig pc;
  pc.seed = 1;
  pc.render.include_states = false;
  const auto pairs = BuildPairs(train, pc);
  MockHashEmbedder embedder(512);
  CriticTrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 32;
  cfg.seed = 3;
  TrainResult r = Train(CriticModel::Init(512, 16, 5), embedder, pairs, cfg);
  NeuralCritic critic(r.model, embedder);

  int ordered = 0, triplets = 0;
  for (std::size_t ti = 0; ti < test.size(); ++ti) {
    const Trajectory& t = test[ti];
    const Trajectory& other = test[(ti + 1) % test.size()];
    for (std::size_t k = 1; k + 1 <= t.steps.size(); ++k) {
      auto cost = [&](const Trajectory& x, std::size_t n) {
        CriticText text = RenderCriticText(x, n, pc.render);
        return critic.Cost(text.goal_text, text.trajectory_text);
      };
      Trajectory bad = AppendSteps(Prefix(t, k), std::span<const Step>(other.steps.data(), 1));
      const double base = cost(t, k), good = cost(t, k + 1), worse = cost(bad, k + 1);
      ordered += good < base && base < worse;
      ++triplets;
    }
  }
  const double triplet_rate = static_cast<double>(ordered) / triplets;
  auto cases = testing::SyntheticGadCases(test);
  GadReport report = EvalGad(critic, cases, pc.render);
  const double chance = ChanceAccuracy(cases);
  o.Expect(triplet_rate >= 0.95, fmt::format("triplet order {:.1f}%", 100 * triplet_rate));
  o.Expect(report.accuracy >= 0.90, fmt::format("GAD accuracy {:.1f}%", 100 * report.accuracy));
  o.detail = fmt::format("{} pairs, triplets {:.1f}%, GAD {:.1f}% vs chance {:.1f}%",
                         pairs.size(), 100 * triplet_rate, 100 * report.accuracy, 100 * chance);
  return o;
}

Outcome PlannerOracle() {
  Outcome o;
  Rng rng(5150);
  int matched = 0, worlds = 0;
  while (worlds < 50) {
    ToyWorld w = testing::RandomToyWorld(rng);
    if (w.Applicable(w.initial).empty()) continue;
    ++worlds;
    const int depth = testing::IntIn(rng, 1, 5);
    ToyWorldModel model(w);
    ToyWorldCost cost(model.world());
    SearchConfig cfg;
    cfg.mode = SearchMode::kBeamPartial;
    cfg.branching = 4;
    cfg.max_depth = depth;
    cfg.beam_width = 1024;  // 4^5 keeps every partial plan
    const double got = System2Plan(model, cost, {"g", ""}, cfg).best().cost;
    const double want = testing::ExhaustiveOptimum(w, 4, depth);
    matched += std::abs(got - want) < 1e-12;
  }
  o.Expect(matched == 50, fmt::format("{}/50 optima matched", matched));

  ToyWorld trap = testing::TrapWorld();
  ToyWorldModel model(trap);
  ToyWorldCost cost(model.world());
  SearchConfig cfg;
  cfg.mode = SearchMode::kBeamPartial;
  cfg.max_depth = 4;
  cfg.beam_width = 1;
  const RankedPlans greedy = System2Plan(model, cost, {"g", ""}, cfg);
  cfg.beam_width = 4;
  const RankedPlans wide = System2Plan(model, cost, {"g", ""}, cfg);
  o.Expect(std::abs(greedy.best().cost - 1.01) < 1e-12 && !greedy.best().plan.achieved,
           fmt::format("beam 1 cost {}", greedy.best().cost));
  o.Expect(std::abs(wide.best().cost - 0.03) < 1e-12 && wide.best().plan.achieved,
           fmt::format("beam 4 cost {}", wide.best().cost));
  if (o.pass) {
    o.detail = fmt::format("50/50 optima; trap beam1={:.2f} beam4={:.2f}", greedy.best().cost,
                           wide.best().cost);
  }
  return o;
}

std::vector<InventoryItem> Inventory(const std::vector<std::string>& datasets, int goals,
                                     const std::vector<std::string>& models) {
  std::vector<InventoryItem> out;
  for (const auto& ds : datasets) {
    for (int g = 0; g < goals; ++g) {
      InventoryItem item;
      item.dataset = ds;
      item.goal_id = "g" + std::to_string(g);
      item.goal = "goal " + std::to_string(g);
      for (const auto& m : models) item.plans[m] = Trajectory{item.goal, "", {{m, ""}}, false};
      out.push_back(std::move(item));
    }
  }
  return out;
}

Outcome EloCriterion() {
  Outcome o;
  auto [w, l] = EloUpdate(1000, 1000, 32);
  o.Expect(w == 1016.0 && l == 984.0, fmt::format("first battle gave {}/{}", w, l));

  const std::vector<std::string> models{"m0", "m1", "m2", "m3", "m4"};
  ArenaConfig cfg;
  cfg.models = models;
  Rng rng(99);
  std::vector<BattleRecord> log;
  for (long i = 1; i <= 10000; ++i) {
    const int a = testing::IntIn(rng, 0, 4);
    int b = testing::IntIn(rng, 0, 3);
    if (b >= a) ++b;
    BattleRecord r;
    r.seq = i;
    r.battle_id = fmt::format("b{}", i);
    r.dataset = i % 2 ? "cooking" : "repair";
    r.goal_id = fmt::format("g{}", i % 37);
    r.plan_a_model = models[a];
    r.plan_b_model = models[b];
    r.winner = testing::RealIn(rng, 0, 1) < (a < b ? 0.7 : 0.3) ? models[a] : models[b];
    log.push_back(std::move(r));
  }
  ArenaState state(cfg);
  double worst = 0;
  for (const BattleRecord& r : log) {
    state.Apply(r);
    double sum = 0;
    for (const auto& [m, rating] : state.ratings()) sum += rating;
    worst = std::max(worst, std::abs(sum - 5000.0));
  }
  o.Expect(worst <= 1e-9, fmt::format("rating sum drifted by {:.2e}", worst));

  std::string text;
  for (const BattleRecord& r : log) text += BattleRecordToJson(r) + "\n";
  std::vector<BattleRecord> reloaded;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) reloaded.push_back(BattleRecordFromJson(line));
  ArenaState replayed = ArenaState::Replay(cfg, reloaded);
  bool identical = replayed.ratings().size() == state.ratings().size();
  for (const auto& [m, rating] : state.ratings()) {
    const double other = replayed.rating(m);
    identical = identical && std::memcmp(&rating, &other, sizeof(double)) == 0;
  }
  o.Expect(identical, "replayed ratings differ");

  // Scheduler: 3 datasets x 6 model pairs, 4 full rounds.
  const std::vector<std::string> four{"a", "b", "c", "d"};
  ArenaConfig acfg;
  acfg.models = four;
  acfg.seed = 17;
  Arena arena(acfg, Inventory({"x", "y", "z"}, 10, four));
  const int setups = static_cast<int>(arena.setups().size());
  const int rounds = 4;
  for (int i = 0; i < setups * rounds; ++i) {
    Battle b = arena.NextBattle();
    arena.RecordChoice(b.id, i % 2 ? "A" : "B", "ann");
  }
  ArenaState served = arena.snapshot();
  for (const Setup& s : arena.setups()) {
    o.Expect(served.served(s) == rounds, fmt::format("setup {} served {} times", s.Key(),
                                                     served.served(s)));
  }
  if (o.pass) {
    o.detail = fmt::format("1016/984, drift {:.1e} over 10k, replay identical, {} setups x {}",
                           worst, setups, rounds);
  }
  return o;
}

Outcome FleissCriterion() {
  Outcome o;
  // Two items, three annotators: one A vote among six, so P = 2/3 and Pe = 26/36.
  const std::vector<std::vector<std::string>> example{{"A", "B", "B"}, {"B", "B", "B"}};
  const double kappa = FleissKappa(example);
  const double perfect = FleissKappa({{"A", "A", "A"}, {"B", "B", "B"}});
  const double raw = RawAgreement(example);
  o.Expect(std::abs(kappa + 0.2) <= 1e-12, fmt::format("kappa {}", kappa));
  o.Expect(std::abs(perfect - 1.0) <= 1e-12, fmt::format("perfect agreement kappa {}", perfect));
  o.Expect(std::abs(raw - 200.0 / 3) <= 1e-9, fmt::format("raw agreement {}", raw));
  if (o.pass) o.detail = fmt::format("kappa {:.3f}, perfect {:.1f}, raw {:.2f}%", kappa, perfect, raw);
  return o;
}

Outcome VpaCriterion() {
  Outcome o;
  struct Example {
    std::vector<std::string> pred, gold;
    double sr, macc, miou;
  };
  const std::vector<Example> examples{{{"a", "b", "c"}, {"a", "b", "c"}, 1, 1, 1},
                                      {{"a", "b", "c"}, {"a", "c", "c"}, 0, 2.0 / 3, 2.0 / 3},
                                      {{"a", "b", "c"}, {"b", "c", "d"}, 0, 0, 0.5}};
  for (const Example& e : examples) {
    VpaMetrics m = ComputeVpaMetrics(std::vector<VpaPrediction>{{e.pred, e.gold}});
    o.Expect(std::abs(m.success_rate - e.sr) < 1e-12 && std::abs(m.mean_accuracy - e.macc) < 1e-12 &&
                 std::abs(m.mean_iou - e.miou) < 1e-12,
             fmt::format("example gold {} gave {}/{}/{}", fmt::join(e.gold, ""), m.success_rate,
                         m.mean_accuracy, m.mean_iou));
  }
  Rng rng(31337);
  for (int i = 0; i < 1000; ++i) {
    const int horizon = testing::IntIn(rng, 1, 5);
    std::vector<VpaPrediction> preds;
    for (int n = testing::IntIn(rng, 1, 20); n > 0; --n) {
      VpaPrediction p;
      for (int t = 0; t < horizon; ++t) {
        p.gold.push_back(std::to_string(testing::IntIn(rng, 0, 4)));
        p.predicted.push_back(testing::IntIn(rng, 0, 2) == 0
                                  ? p.gold.back()
                                  : std::to_string(testing::IntIn(rng, 0, 4)));
      }
      preds.push_back(std::move(p));
    }
    VpaMetrics m = ComputeVpaMetrics(preds);
    o.Expect(m.success_rate <= m.mean_accuracy, fmt::format("set {}: SR > mAcc", i));
  }
  if (o.pass) o.detail = "3 examples, 1000 random sets";
  return o;
}

Outcome ParserCriterion() {
  Outcome o;
  Trajectory t = ParseTrajectory(ReadFile(std::string(WMPLAN_TESTDATA) +
                                          "/cooking_tomato_and_eggs.txt"));
  o.Expect(t.steps.size() == 10 && t.achieved,
           fmt::format("fixture gave {} steps, achieved={}", t.steps.size(), t.achieved));
  Rng rng(8080);
  for (int i = 0; i < 1000; ++i) {
    Trajectory r = testing::RandomTrajectory(rng);
    o.Expect(ParseTrajectory(RenderTrajectory(r)) == r, fmt::format("round trip {} failed", i));
  }
  if (o.pass) o.detail = "10 steps achieved; 1000 round trips";
  return o;
}

Outcome GadInvariance() {
  Outcome o;
  Rng rng(1234);
  const std::vector<std::function<double(double)>> transforms{
      [](double x) { return 3 * x + 7; }, [](double x) { return std::exp(x); },
      [](double x) { return x * x * x; }, [](double x) { return std::atan(x); }};
  for (int report = 0; report < 100; ++report) {
    std::vector<GadCase> cases;
    std::map<std::string, double> table;
    for (int c = testing::IntIn(rng, 1, 8); c > 0; --c) {
      GadCase gc;
      gc.goal = fmt::format("goal {} {}", report, c);
      const int gold = testing::IntIn(rng, 1, 5), extra = testing::IntIn(rng, 1, 5);
      for (int i = 0; i < gold; ++i) gc.gold.push_back(Step{fmt::format("g{}", i), ""});
      for (int i = 0; i < extra; ++i) gc.distractors.push_back(Step{fmt::format("d{}", i), ""});
      cases.push_back(std::move(gc));
    }
    auto raw = [&](const std::string& g, const std::string& t) {
      auto [it, fresh] = table.try_emplace(g + "\n" + t, 0.0);
      // Coarse values so ties occur.
      if (fresh) it->second = std::round(testing::RealIn(rng, -2, 2) * 4) / 4;
      return it->second;
    };
    const GadReport base = EvalGad(FnCritic(raw), cases);
    for (const auto& f : transforms) {
      const GadReport moved = EvalGad(FnCritic([&](const std::string& g, const std::string& t) {
                                        return f(raw(g, t));
                                      }),
                                      cases);
      for (std::size_t c = 0; c < cases.size(); ++c) {
        o.Expect(moved.cases[c].argmin_k == base.cases[c].argmin_k,
                 fmt::format("report {} case {}: argmin moved", report, c));
      }
      o.Expect(moved.accuracy == base.accuracy, fmt::format("report {}: accuracy moved", report));
    }
  }
  if (o.pass) o.detail = "100 reports x 4 transforms";
  return o;
}

}  // namespace
}  // namespace wmplan

int main() {
  using wmplan::Criterion;
  const std::vector<Criterion> criteria{
      {"Segmentation matches brute-force Ward merging", 30, wmplan::SegmentationOracle},
      {"Ward merge cost spot values", 1, wmplan::WardSpotValues},
      {"Critic gradients match finite differences", 60, wmplan::GradientCheck},
      {"Pair loss spot values", 1, wmplan::PairLossSpotValues},
      {"Critic training orders triplets and detects goal achievement", 300,
       wmplan::CriticTraining},
      {"Planner matches exhaustive optimum; beam trap", 60, wmplan::PlannerOracle},
      {"Elo updates, conservation, replay and scheduling", 10, wmplan::EloCriterion},
      {"Fleiss kappa and raw agreement", 1, wmplan::FleissCriterion},
      {"VPA metrics", 5, wmplan::VpaCriterion},
      {"Trajectory parser", 10, wmplan::ParserCriterion},
      {"GAD argmin invariance under increasing transforms", 10, wmplan::GadInvariance},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    wmplan::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      o.detail += fmt::format(" (over the {:.0f} s budget)", c.budget_seconds);
      o.pass = false;
    }
    failures += o.pass ? 0 : 1;
    fmt::print("{} {} [{:.2f} s] {}\n", o.pass ? "PASS" : "FAIL", c.name, secs, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
