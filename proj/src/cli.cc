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


#include "wmplan/cli.h"

#include <fmt/format.h>

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wmplan/arena.h"
#include "wmplan/arena_server.h"
#include "wmplan/critic.h"
#include "wmplan/embedder.h"
#include "wmplan/error.h"
#include "wmplan/evalharness.h"
#include "wmplan/planner.h"
#include "wmplan/refine.h"
#include "wmplan/segtree.h"
#include "wmplan/text_gen_client.h"
#include "wmplan/toy_world.h"
#include "wmplan/util.h"

namespace wmplan {
namespace {

using nlohmann::json;

std::vector<std::string> SplitCsv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return in;
}

// Manifest beside an output: options as given (or defaulted), tool version
// and FNV-1a digests of every input file. No timestamps, so reruns match.
void WriteManifest(const std::string& out, const CLI::App& sub,
                   const std::vector<std::string>& inputs) {
  json config = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt == sub.get_help_ptr() || opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& r = opt->results();
      config[name] = r.size() == 1 ? json(r.front()) : json(r);
    } else if (!opt->get_default_str().empty()) {
      config[name] = opt->get_default_str();
    }
  }
  json digests = json::object();
  for (const std::string& path : inputs) {
    const std::string bytes = ReadFile(path);
    digests[path] = {{"fnv1a64", Fnv1a64Hex(bytes)}, {"bytes", bytes.size()}};
  }
  json manifest = {{"subcommand", sub.get_name()},
                   {"version", kVersion},
                   {"prompt_version", std::string(kPromptVersion)},
                   {"config", config},
                   {"inputs", digests}};
  WriteFile(out + ".manifest.json", manifest.dump(2) + "\n");
}

// Writes to `out`, or stdout when empty.
void Emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    WriteFile(out, text);
  }
}

// Copy of the subtree under `node` with ids renumbered in DFS preorder.
CaptionTree Subtree(const CaptionTree& tree, int node) {
  CaptionTree sub;
  std::function<int(int)> copy = [&](int id) {
    const TreeNode& n = tree.node(id);
    const int new_id = static_cast<int>(sub.nodes.size());
    sub.nodes.push_back(TreeNode{new_id, n.start, n.end, {}, n.caption});
    std::vector<int> kids;
    for (int c : n.children) kids.push_back(copy(c));
    sub.nodes[new_id].children = kids;
    return new_id;
  };
  sub.root = copy(node);
  return sub;
}

std::unique_ptr<TextGenClient> MakeClient(const std::string& responses) {
  if (!responses.empty()) {
    return std::make_unique<MockTextGenClient>(
        MockTextGenClient::LoadFixture(ReadFile(responses)));
  }
  HttpClientConfig cfg = HttpClientConfig::FromEnv();
  if (cfg.endpoint.empty()) {
    throw Error(ErrorCode::kBadConfig,
                "set WM_LLM_ENDPOINT or pass --responses for offline runs");
  }
  return std::make_unique<HttpTextGenClient>(cfg);
}

struct LoadedScorer {
  LoadedCritic critic;
  std::unique_ptr<Embedder> embedder;
  std::unique_ptr<NeuralCritic> neural;
};

std::unique_ptr<LoadedScorer> LoadCritic(const std::string& path) {
  auto s = std::make_unique<LoadedScorer>();
  s->critic = CriticModelFromJson(ReadFile(path));
  s->embedder = MakeEmbedder(s->critic.embedder_kind, s->critic.embedder_dim);
  s->neural = std::make_unique<NeuralCritic>(s->critic.model, *s->embedder);
  return s;
}

struct Options {
  std::string features, tree, labels, out, tree_text, extra, responses, model,
      trajectory_out, world, goal, context, critic, cases, predictions, items,
      report, data, log, host = "127.0.0.1", models, datasets, embedder = "mock",
      mode = "full", objective = "minimize";
  std::vector<std::string> trajectories, pairs;
  std::uint64_t seed = 0;
  int pool = 1, k = 5, iterations = 2, min_base = 1, good_steps = 1,
      distractor_steps = 1, batch_size = 128, epochs = 1, dim = 256, hidden = 32,
      horizon = 10, candidates = 20, beam = 4, branching = 4, port = 8080,
      repeats = 1, annotators = 3;
  long prefix = -1;
  double min_duration = 0, window_min_duration = 5.0, margin = 1.0, lambda = 0.01,
         lr = 1e-3, k_factor = 32, initial = 1000, repeat_penalty = 0;
  std::optional<double> min_start, max_end;
  bool no_interpretation = false, no_states = false, llm = false;
};

RenderOptions RenderFrom(const Options& o) {
  return RenderOptions{!o.no_interpretation, !o.no_states};
}

std::string ToyGoalText(const ToyWorld& w) {
  std::string s = "Reach:";
  bool first = true;
  for (const auto& g : w.goal) {
    s += (first ? " " : ", ") + g;
    first = false;
  }
  return s;
}

struct PlanSetup {
  std::unique_ptr<TextGenClient> client;
  std::unique_ptr<WorldModel> world;
  std::optional<ToyWorld> toy;
  PlanContext ctx;
};

PlanSetup MakePlanSetup(const Options& o) {
  PlanSetup p;
  if (!o.world.empty()) {
    p.toy = ToyWorldFromJson(ReadFile(o.world));
    p.world = std::make_unique<ToyWorldModel>(*p.toy);
    p.ctx.goal = o.goal.empty() ? ToyGoalText(*p.toy) : o.goal;
  } else {
    if (o.goal.empty()) throw Error(ErrorCode::kEmptyGoal, "--goal is required with --llm");
    p.client = MakeClient(o.responses);
    p.world = std::make_unique<LlmWorldModel>(*p.client);
    p.ctx.goal = o.goal;
  }
  p.ctx.context = o.context;
  return p;
}

void AddWorldOptions(CLI::App* sub, Options& o, std::vector<std::string>& inputs) {
  auto* world = sub->add_option("--world", o.world, "toy world JSON")
                    ->check(CLI::ExistingFile);
  auto* llm = sub->add_flag("--llm", o.llm, "use the text-generation endpoint");
  world->excludes(llm);
  sub->add_option("--responses", o.responses, "mock responses JSON for --llm")
      ->check(CLI::ExistingFile);
  sub->add_option("--goal", o.goal);
  sub->add_option("--context", o.context);
  sub->add_option("--horizon", o.horizon, "maximum plan length")->capture_default_str();
  (void)inputs;
}

}  // namespace

int Dispatch(const std::vector<std::string>& args) {
  CLI::App app{"World-model planning toolkit", "wmplan"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;
  // Subcommand name -> (action, output path for the manifest, input files).
  std::map<std::string, std::function<void()>> actions;
  std::map<std::string, std::function<std::vector<std::string>()>> inputs_of;
  std::vector<std::string> unused;

  {
    auto* s = app.add_subcommand("segment", "build a caption tree from a feature stream");
    s->add_option("--features", o.features, "feature stream JSONL")
        ->required()->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "caption tree JSON")->required();
    s->add_option("--pool", o.pool, "frames pooled per leaf")->capture_default_str();
    actions["segment"] = [&] {
      std::ifstream in = OpenIn(o.features);
      SegmentOptions so;
      so.pool_frames = o.pool;
      Emit(o.out, CaptionTreeToJson(BuildTree(LoadFeatureStream(in), so)));
    };
    inputs_of["segment"] = [&] { return std::vector<std::string>{o.features}; };
  }
  {
    auto* s = app.add_subcommand("tree-render", "render a caption tree as nested markdown");
    s->add_option("--tree", o.tree)->required()->check(CLI::ExistingFile);
    s->add_option("--labels", o.labels, "JSON object node id -> caption")
        ->check(CLI::ExistingFile);
    s->add_option("--min-duration", o.min_duration)->capture_default_str();
    s->add_option("--out", o.out);
    actions["tree-render"] = [&] {
      CaptionTree tree = CaptionTreeFromJson(ReadFile(o.tree));
      std::map<int, std::string> labels;
      if (!o.labels.empty()) {
        for (const auto& [id, text] : json::parse(ReadFile(o.labels)).items()) {
          labels[std::stoi(id)] = text.get<std::string>();
        }
      }
      Emit(o.out, DfsRender(tree, labels, DfsRenderOptions{o.min_duration}));
    };
    inputs_of["tree-render"] = [&] {
      std::vector<std::string> in{o.tree};
      if (!o.labels.empty()) in.push_back(o.labels);
      return in;
    };
  }
  {
    auto* s = app.add_subcommand("tree-windows", "breadth-first window sampling");
    s->add_option("--tree", o.tree)->required()->check(CLI::ExistingFile);
    s->add_option("--k", o.k, "windows to sample")->capture_default_str();
    s->add_option("--min-duration", o.window_min_duration)->capture_default_str();
    s->add_option("--out", o.out)->required();
    actions["tree-windows"] = [&] {
      CaptionTree tree = CaptionTreeFromJson(ReadFile(o.tree));
      json out = json::array();
      for (int id : SampleWindows(tree, o.k, o.window_min_duration)) {
        const TreeNode& n = tree.node(id);
        out.push_back({{"node", id},
                       {"start", n.start},
                       {"end", n.end},
                       {"tree_text", DfsRender(Subtree(tree, id))}});
      }
      Emit(o.out, out.dump(2) + "\n");
    };
    inputs_of["tree-windows"] = [&] { return std::vector<std::string>{o.tree}; };
  }
  {
    auto* s = app.add_subcommand("refine", "Self-Refine plan extraction");
    s->add_option("--tree-text", o.tree_text, "rendered caption tree")
        ->required()->check(CLI::ExistingFile);
    s->add_option("--extra", o.extra, "extra information text")->check(CLI::ExistingFile);
    s->add_option("--iterations", o.iterations)->capture_default_str();
    s->add_option("--min-start", o.min_start);
    s->add_option("--max-end", o.max_end);
    s->add_option("--responses", o.responses, "mock responses JSON (offline)")
        ->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "refinement result JSON")->required();
    s->add_option("--trajectory-out", o.trajectory_out, "plan as trajectory markup");
    actions["refine"] = [&] {
      auto client = MakeClient(o.responses);
      RefineRequest req;
      req.tree_text = ReadFile(o.tree_text);
      if (!o.extra.empty()) req.extra_info = ReadFile(o.extra);
      req.iterations = o.iterations;
      req.min_start = o.min_start;
      req.max_end = o.max_end;
      RefineResult r = SelfRefine(*client, req);
      Emit(o.out, RefineResultToJson(r));
      if (!o.trajectory_out.empty()) {
        Trajectory t = o.min_start && o.max_end
                           ? ToTrajectory(r.extraction, *o.min_start, *o.max_end)
                           : ToTrajectory(r.extraction);
        WriteFile(o.trajectory_out, RenderTrajectory(t));
      }
    };
    inputs_of["refine"] = [&] {
      std::vector<std::string> in{o.tree_text};
      if (!o.extra.empty()) in.push_back(o.extra);
      if (!o.responses.empty()) in.push_back(o.responses);
      return in;
    };
  }
  {
    auto* s = app.add_subcommand("pairs-build", "build critic training pairs");
    s->add_option("--trajectories", o.trajectories, "trajectory markup files")
        ->required()->check(CLI::ExistingFile);
    s->add_option("--seed", o.seed)->capture_default_str();
    s->add_option("--min-base", o.min_base)->capture_default_str();
    s->add_option("--good-steps", o.good_steps)->capture_default_str();
    s->add_option("--distractor-steps", o.distractor_steps)->capture_default_str();
    s->add_flag("--no-interpretation", o.no_interpretation);
    s->add_flag("--no-states", o.no_states);
    s->add_option("--out", o.out, "pairs JSONL")->required();
    actions["pairs-build"] = [&] {
      std::vector<Trajectory> trajs;
      for (const auto& path : o.trajectories) trajs.push_back(ParseTrajectory(ReadFile(path)));
      PairBuildConfig cfg;
      cfg.seed = o.seed;
      cfg.min_base = o.min_base;
      cfg.good_steps = o.good_steps;
      cfg.distractor_steps = o.distractor_steps;
      cfg.render = RenderFrom(o);
      std::ostringstream out;
      WritePairs(BuildPairs(trajs, cfg), out);
      Emit(o.out, out.str());
    };
    inputs_of["pairs-build"] = [&] { return o.trajectories; };
  }
  {
    auto* s = app.add_subcommand("critic-train", "train the ranking critic");
    s->add_option("--pairs", o.pairs, "pairs JSONL files")
        ->required()->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "model JSON")->required();
    s->add_option("--seed", o.seed)->capture_default_str();
    s->add_option("--margin", o.margin)->capture_default_str();
    s->add_option("--lambda", o.lambda)->capture_default_str();
    s->add_option("--batch-size", o.batch_size)->capture_default_str();
    s->add_option("--epochs", o.epochs)->capture_default_str();
    s->add_option("--lr", o.lr)->capture_default_str();
    s->add_option("--dim", o.dim, "embedding dimension")->capture_default_str();
    s->add_option("--hidden", o.hidden)->capture_default_str();
    s->add_option("--embedder", o.embedder, "mock or remote")->capture_default_str();
    actions["critic-train"] = [&] {
      std::vector<PairExample> pairs;
      for (const auto& path : o.pairs) {
        std::ifstream in = OpenIn(path);
        auto p = LoadPairs(in);
        pairs.insert(pairs.end(), p.begin(), p.end());
      }
      auto embedder = MakeEmbedder(o.embedder, o.dim);
      CriticTrainConfig cfg;
      cfg.margin = o.margin;
      cfg.lambda = o.lambda;
      cfg.batch_size = o.batch_size;
      cfg.epochs = o.epochs;
      cfg.learning_rate = o.lr;
      cfg.seed = o.seed;
      TrainResult r = Train(CriticModel::Init(embedder->dim(), o.hidden, o.seed),
                            *embedder, pairs, cfg);
      Emit(o.out, CriticModelToJson(r.model, *embedder));
      if (!r.loss_history.empty()) {
        std::cerr << fmt::format("{} pairs, {} batches, final batch loss {:.6f}\n",
                                 pairs.size(), r.loss_history.size(),
                                 r.loss_history.back());
      }
    };
    inputs_of["critic-train"] = [&] { return o.pairs; };
  }
  {
    auto* s = app.add_subcommand("critic-score", "score a trajectory with a trained critic");
    s->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
    s->add_option("--trajectory", o.trajectories, "trajectory markup file")
        ->required()->expected(1)->check(CLI::ExistingFile);
    s->add_option("--prefix", o.prefix, "prefix length (default: every prefix)");
    s->add_flag("--no-interpretation", o.no_interpretation);
    s->add_flag("--no-states", o.no_states);
    s->add_option("--out", o.out);
    actions["critic-score"] = [&] {
      auto critic = LoadCritic(o.model);
      Trajectory t = ParseTrajectory(ReadFile(o.trajectories.front()));
      json costs = json::array();
      std::size_t lo = 0, hi = t.steps.size();
      if (o.prefix >= 0) lo = hi = static_cast<std::size_t>(o.prefix);
      for (std::size_t k = lo; k <= hi; ++k) {
        CriticText text = RenderCriticText(t, k, RenderFrom(o));
        costs.push_back({{"prefix", k},
                         {"cost", critic->neural->Cost(text.goal_text, text.trajectory_text)}});
      }
      Emit(o.out, costs.dump(2) + "\n");
    };
    inputs_of["critic-score"] = [&] {
      return std::vector<std::string>{o.model, o.trajectories.front()};
    };
  }
  {
    auto* s = app.add_subcommand("plan-sys1", "greedy single rollout");
    AddWorldOptions(s, o, unused);
    s->add_option("--out", o.out, "plan markup");
    actions["plan-sys1"] = [&] {
      PlanSetup p = MakePlanSetup(o);
      Emit(o.out, RenderTrajectory(System1Rollout(*p.world, p.ctx, o.horizon)));
    };
    inputs_of["plan-sys1"] = [&] {
      std::vector<std::string> in;
      if (!o.world.empty()) in.push_back(o.world);
      if (!o.responses.empty()) in.push_back(o.responses);
      return in;
    };
  }
  {
    auto* s = app.add_subcommand("plan-sys2", "cost-ranked plan search");
    AddWorldOptions(s, o, unused);
    s->add_option("--critic", o.critic, "critic model JSON (default: toy world cost)")
        ->check(CLI::ExistingFile);
    s->add_option("--candidates", o.candidates)->capture_default_str();
    s->add_option("--beam", o.beam)->capture_default_str();
    s->add_option("--branching", o.branching)->capture_default_str();
    s->add_option("--mode", o.mode)
        ->check(CLI::IsMember({"full", "beam"}))->capture_default_str();
    s->add_option("--objective", o.objective)
        ->check(CLI::IsMember({"minimize", "maximize"}))->capture_default_str();
    s->add_option("--repeat-penalty", o.repeat_penalty,
                  "cost added when an action repeats back to back")->capture_default_str();
    s->add_option("--seed", o.seed)->capture_default_str();
    s->add_option("--out", o.out, "ranking JSON")->required();
    s->add_option("--trajectory-out", o.trajectory_out, "chosen plan markup");
    actions["plan-sys2"] = [&] {
      PlanSetup p = MakePlanSetup(o);
      std::unique_ptr<LoadedScorer> critic;
      std::unique_ptr<PlanScorer> scorer;
      if (!o.critic.empty()) {
        critic = LoadCritic(o.critic);
        scorer = std::make_unique<TextCriticScorer>(*critic->neural, RenderFrom(o));
      } else if (p.toy) {
        scorer = std::make_unique<ToyWorldCost>(*p.toy);
      } else {
        throw Error(ErrorCode::kBadConfig, "--critic is required with --llm");
      }
      SearchConfig cfg;
      cfg.num_candidates = o.candidates;
      cfg.beam_width = o.beam;
      cfg.branching = o.branching;
      cfg.max_depth = o.horizon;
      cfg.mode = o.mode == "beam" ? SearchMode::kBeamPartial : SearchMode::kFullRollouts;
      cfg.objective = o.objective == "maximize" ? Objective::kMaximize : Objective::kMinimize;
      cfg.seed = o.seed;
      if (o.repeat_penalty != 0) {
        cfg.penalties.push_back(Penalty{
            "repeat",
            [](const Trajectory& t) {
              for (std::size_t i = 1; i < t.steps.size(); ++i) {
                if (t.steps[i].action == t.steps[i - 1].action) return true;
              }
              return false;
            },
            o.repeat_penalty});
      }
      RankedPlans ranked = System2Plan(*p.world, *scorer, p.ctx, cfg);
      Emit(o.out, RankingToJson(ranked));
      if (!o.trajectory_out.empty()) {
        WriteFile(o.trajectory_out, RenderTrajectory(ranked.best().plan));
      }
    };
    inputs_of["plan-sys2"] = [&] {
      std::vector<std::string> in;
      for (const auto* f : {&o.world, &o.responses, &o.critic}) {
        if (!f->empty()) in.push_back(*f);
      }
      return in;
    };
  }
  {
    auto* s = app.add_subcommand("eval-gad", "goal-achievement detection");
    s->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
    s->add_option("--cases", o.cases, "GAD cases JSONL")->required()->check(CLI::ExistingFile);
    s->add_flag("--no-interpretation", o.no_interpretation);
    s->add_flag("--no-states", o.no_states);
    s->add_option("--out", o.out, "report JSON")->required();
    actions["eval-gad"] = [&] {
      auto critic = LoadCritic(o.model);
      std::ifstream in = OpenIn(o.cases);
      auto cases = LoadGadCases(in);
      GadReport report = EvalGad(*critic->neural, cases, RenderFrom(o));
      const double chance = ChanceAccuracy(cases);
      Emit(o.out, GadReportToJson(report, chance));
      std::cout << fmt::format("accuracy {:.4f} chance {:.4f} over {} cases\n",
                               report.accuracy, chance, cases.size());
    };
    inputs_of["eval-gad"] = [&] { return std::vector<std::string>{o.model, o.cases}; };
  }
  {
    auto* s = app.add_subcommand("eval-vpa", "SR / mAcc / mIoU of step predictions");
    s->add_option("--predictions", o.predictions, "JSONL {pred, gold}")
        ->required()->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "metrics JSON")->required();
    actions["eval-vpa"] = [&] {
      std::ifstream in = OpenIn(o.predictions);
      auto preds = LoadVpaPredictions(in);
      VpaMetrics m = ComputeVpaMetrics(preds);
      Emit(o.out, json{{"samples", preds.size()},
                       {"horizon", preds.front().gold.size()},
                       {"success_rate", 100 * m.success_rate},
                       {"mean_accuracy", 100 * m.mean_accuracy},
                       {"mean_iou", 100 * m.mean_iou}}
                          .dump(2) +
                      "\n");
    };
    inputs_of["eval-vpa"] = [&] { return std::vector<std::string>{o.predictions}; };
  }
  {
    auto* s = app.add_subcommand("eval-wp", "four-way procedural planning");
    s->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
    s->add_option("--items", o.items, "JSONL {goal, candidates, correct}")
        ->required()->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "report JSON")->required();
    actions["eval-wp"] = [&] {
      auto critic = LoadCritic(o.model);
      std::ifstream in = OpenIn(o.items);
      auto items = LoadWpItems(in);
      WpReport r = EvalWp(*critic->neural, items);
      Emit(o.out, json{{"accuracy", r.accuracy}, {"predicted", r.predicted}}.dump(2) + "\n");
    };
    inputs_of["eval-wp"] = [&] { return std::vector<std::string>{o.model, o.items}; };
  }
  {
    auto* s = app.add_subcommand("curves-export", "cost curves CSV from a GAD report");
    s->add_option("--report", o.report, "eval-gad report JSON")
        ->required()->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "CSV")->required();
    actions["curves-export"] = [&] {
      GadReport report;
      try {
        json j = json::parse(ReadFile(o.report));
        report.accuracy = j.at("accuracy").get<double>();
        for (const auto& c : j.at("cases")) {
          GadCaseResult r;
          r.n_gold = c.at("n_gold").get<std::size_t>();
          r.argmin_k = c.at("argmin_k").get<std::size_t>();
          r.hit = c.at("hit").get<bool>();
          r.costs = c.at("costs").get<std::vector<double>>();
          report.cases.push_back(std::move(r));
        }
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kBadRow, std::string("bad GAD report: ") + e.what());
      }
      std::ostringstream out;
      ExportCostCurves(report, out);
      Emit(o.out, out.str());
    };
    inputs_of["curves-export"] = [&] { return std::vector<std::string>{o.report}; };
  }
  {
    auto* s = app.add_subcommand("arena-serve", "serve the preference arena over HTTP");
    const ArenaEnv env = ArenaEnv::FromEnv();
    o.data = env.data_dir;
    o.log = env.log_path;
    o.seed = env.seed;
    s->add_option("--data", o.data, "plan inventory directory (WM_ARENA_DATA)");
    s->add_option("--log", o.log, "battle log JSONL (WM_ARENA_LOG)");
    s->add_option("--seed", o.seed, "scheduler seed (WM_ARENA_SEED)");
    s->add_option("--models", o.models, "comma-separated; default: all in inventory");
    s->add_option("--datasets", o.datasets, "comma-separated; default: all in inventory");
    s->add_option("--repeats", o.repeats, "annotations per item")->capture_default_str();
    s->add_option("--host", o.host)->capture_default_str();
    s->add_option("--port", o.port)->capture_default_str();
    actions["arena-serve"] = [&] {
      if (o.data.empty()) throw Error(ErrorCode::kBadConfig, "no inventory: set --data");
      auto inventory = LoadInventory(o.data);
      ArenaConfig cfg;
      cfg.seed = o.seed;
      cfg.repeats_per_item = o.repeats;
      cfg.models = SplitCsv(o.models);
      cfg.datasets = SplitCsv(o.datasets);
      if (cfg.models.empty()) {
        std::set<std::string> m;
        for (const auto& item : inventory) {
          for (const auto& [name, plan] : item.plans) m.insert(name);
        }
        cfg.models.assign(m.begin(), m.end());
      }
      Arena arena(cfg, std::move(inventory), o.log);
      ArenaServer server(arena);
      if (!server.Bind(o.host, o.port)) {
        throw Error(ErrorCode::kIo, fmt::format("cannot bind {}:{}", o.host, o.port));
      }
      std::cerr << fmt::format("arena on http://{}:{} with {} setups\n", o.host, o.port,
                               arena.setups().size());
      server.ListenAfterBind();
    };
    inputs_of["arena-serve"] = [&] {
      std::vector<std::string> in;
      if (!o.log.empty() && std::ifstream(o.log)) in.push_back(o.log);
      return in;
    };
  }
  {
    auto* s = app.add_subcommand("arena-report", "leaderboard and agreement from a battle log");
    s->add_option("--log", o.log, "battle log JSONL")->required()->check(CLI::ExistingFile);
    s->add_option("--models", o.models, "comma-separated; default: all in the log");
    s->add_option("--datasets", o.datasets, "comma-separated; default: all in the log");
    s->add_option("--k-factor", o.k_factor)->capture_default_str();
    s->add_option("--initial", o.initial)->capture_default_str();
    s->add_option("--annotators", o.annotators, "ratings per item for agreement")
        ->capture_default_str();
    s->add_option("--out", o.out, "report JSON");
    actions["arena-report"] = [&] {
      auto log = LoadBattleLog(o.log);
      ArenaConfig cfg;
      cfg.k_factor = o.k_factor;
      cfg.initial_rating = o.initial;
      cfg.models = SplitCsv(o.models);
      cfg.datasets = SplitCsv(o.datasets);
      std::set<std::string> models, datasets;
      for (const auto& r : log) {
        models.insert(r.plan_a_model);
        models.insert(r.plan_b_model);
        datasets.insert(r.dataset);
      }
      if (cfg.models.empty()) cfg.models.assign(models.begin(), models.end());
      if (cfg.datasets.empty()) cfg.datasets.assign(datasets.begin(), datasets.end());
      cfg.Validate();
      ArenaState state = ArenaState::Replay(cfg, log);
      auto rows = Leaderboard(state, cfg);
      json report = {{"leaderboard", json::parse(LeaderboardToJson(rows, cfg))},
                     {"battles", log.size()}};
      auto matrix = state.AgreementMatrix(o.annotators);
      json agreement = {{"items", matrix.size()}, {"annotators", o.annotators}};
      if (!matrix.empty()) {
        agreement["raw_agreement"] = RawAgreement(matrix);
        try {
          agreement["fleiss_kappa"] = FleissKappa(matrix);
        } catch (const Error& e) {
          agreement["fleiss_kappa"] = nullptr;
        }
      }
      report["agreement"] = agreement;
      std::cout << LeaderboardToText(rows, cfg);
      if (!o.out.empty()) WriteFile(o.out, report.dump(2) + "\n");
    };
    inputs_of["arena-report"] = [&] { return std::vector<std::string>{o.log}; };
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    actions.at(name)();
    std::string manifest_for = o.out;
    if (name == "arena-serve") manifest_for = o.log;
    if (!manifest_for.empty()) WriteManifest(manifest_for, *sub, inputs_of.at(name)());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int Dispatch(int argc, const char* const* argv) {
  return Dispatch(std::vector<std::string>(argv, argv + argc));
}

}  // namespace wmplan
