#include "tiglab/evaluation.hpp"

#include "tiglab/errors.hpp"
#include "tiglab/metrics.hpp"

#include <unordered_set>

namespace tiglab {

std::string to_string(Setting s) { return s == Setting::Transductive ? "transductive" : "inductive"; }

Setting parse_setting(const std::string& s) {
  if (s == "transductive") return Setting::Transductive;
  if (s == "inductive") return Setting::Inductive;
  throw ConfigError("eval.setting", "unknown setting '" + s + "'");
}

std::vector<std::int64_t> setting_events(const TemporalGraph& graph, const SplitSpec& split, Setting setting,
                                         const InductiveSpec* inductive) {
  const EventRange test = split.range(Stage::Test);
  if (setting == Setting::Inductive) {
    if (inductive == nullptr) throw ValidationError("inductive evaluation needs masked nodes");
    return inductive_eval_events(graph, test, *inductive);
  }
  const auto train = stage_events(graph, split.range(Stage::Pretrain), inductive);
  return transductive_eval_events(graph, test, nodes_seen(graph, train));
}

namespace {

Engine make_engine(Artifacts& art, const TemporalGraph& graph, Task task, const EvalOptions& opts) {
  EngineOptions eo;
  eo.task = task;
  eo.path = opts.path;
  eo.train_backbone = false;
  eo.K = art.backbone->config().K;
  eo.seed = opts.negative_seed;
  return Engine(graph, art, eo, nullptr);
}

StreamState replay_to(Engine& engine, const TemporalGraph& graph, const SplitSpec& split, Stage upto,
                      const EvalOptions& opts) {
  const auto history = stage_events(graph, split.range(Stage::Pretrain), opts.inductive);
  StreamState state = stream_state_from(engine.artifacts().memory, graph, history);
  engine.replay(state, stage_events(graph, split.range(Stage::Prompt), opts.inductive), opts.batch_size);
  if (upto == Stage::Test) {
    engine.replay(state, stage_events(graph, split.range(Stage::Val), nullptr), opts.batch_size);
  }
  return state;
}

}  // namespace

LinkEvalResult evaluate_link_prediction(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split,
                                        const EvalOptions& opts) {
  const auto keep_list = setting_events(graph, split, opts.setting, opts.inductive);
  if (keep_list.empty()) throw ValidationError("no test events left for the " + to_string(opts.setting) + " setting");
  const std::unordered_set<std::int64_t> keep(keep_list.begin(), keep_list.end());

  Engine engine = make_engine(art, graph, Task::LinkPrediction, opts);
  StreamState state = replay_to(engine, graph, split, Stage::Test, opts);
  const auto test = stage_events(graph, split.range(Stage::Test), nullptr);
  const PassScores scores = score_pass(engine, graph, state, test, opts.batch_size, opts.negative_seed);

  LinkEvalResult out;
  for (std::size_t i = 0; i < scores.events.size(); ++i) {
    const std::int64_t idx = scores.events[i];
    if (!keep.contains(idx)) continue;
    const InteractionEvent& e = graph.events[static_cast<std::size_t>(idx)];
    out.scored.pos.push_back(scores.pos[i]);
    out.scored.neg.push_back(scores.neg[i]);
    out.scored.events.push_back(idx);
    out.scored.src.push_back(e.src);
    out.scored.dst.push_back(e.dst);
    out.scored.t.push_back(e.t);
  }
  out.ap = average_precision(out.scored.pos, out.scored.neg);
  return out;
}

NodeEvalResult evaluate_node_classification(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split,
                                            const EvalOptions& opts) {
  Engine engine = make_engine(art, graph, Task::NodeClassification, opts);
  StreamState state = replay_to(engine, graph, split, Stage::Test, opts);
  const auto test = stage_events(graph, split.range(Stage::Test), nullptr);
  const PassScores scores = score_pass(engine, graph, state, test, opts.batch_size, opts.negative_seed);
  if (scores.labels.empty()) throw ValidationError("no labeled events in the test stage");
  NodeEvalResult out;
  out.class1_prob = scores.class1_prob;
  out.labels = scores.labels;
  out.auroc = auroc(out.class1_prob, out.labels);
  return out;
}

double baseline_val_ap(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split, const EvalOptions& opts) {
  EvalOptions o = opts;
  o.path = ScorePath::Pretext;
  Engine engine = make_engine(art, graph, Task::LinkPrediction, o);
  StreamState state = replay_to(engine, graph, split, Stage::Val, o);
  const auto val = stage_events(graph, split.range(Stage::Val), nullptr);
  return pass_metric(Task::LinkPrediction, score_pass(engine, graph, state, val, o.batch_size, o.negative_seed));
}

}  // namespace tiglab
