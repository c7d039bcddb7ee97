#include "tiglab/orchestration.hpp"

#include "tiglab/checkpoint.hpp"
#include "tiglab/errors.hpp"

#include <algorithm>
#include <cstring>
#include <unordered_set>

namespace tiglab {

std::string to_string(Mode m) { return m == Mode::Prompt ? "prompt" : "prompt_finetune"; }

Mode parse_mode(const std::string& s) {
  if (s == "prompt") return Mode::Prompt;
  if (s == "prompt_finetune") return Mode::PromptFinetune;
  throw ConfigError("paradigm.mode", "unknown mode '" + s + "'");
}

std::string to_string(NcStrategy s) {
  switch (s) {
    case NcStrategy::ReuseFrozen: return "reuse_frozen";
    case NcStrategy::InitAndTune: return "init_and_tune";
    case NcStrategy::Reinit: return "reinit";
  }
  return "unknown";
}

NcStrategy parse_nc_strategy(const std::string& s) {
  for (NcStrategy v : {NcStrategy::ReuseFrozen, NcStrategy::InitAndTune, NcStrategy::Reinit}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("paradigm.nc_strategy", "unknown strategy '" + s + "'");
}

void ParadigmSpec::validate() const {
  if (nc_strategy && task != Task::NodeClassification) {
    throw ConfigError("paradigm.nc_strategy", "only valid for node_classification");
  }
  if (n_classes < 2) throw ConfigError("paradigm.n_classes", "need at least two classes");
  if (d_pos < 1) throw ConfigError("model.d_pos", "must be positive");
  if (d_prompt < 0) throw ConfigError("model.prompt_dim", "must be positive");
}

FrozenSet::FrozenSet(ag::ParamList params) : params_(std::move(params)), bytes_(serialize_parameters(params_)) {}

bool FrozenSet::contains(const ag::Parameter* p) const {
  return std::find(params_.begin(), params_.end(), p) != params_.end();
}

void FrozenSet::verify() const {
  if (serialize_parameters(params_) == bytes_) return;
  const Archive before = decode_archive(bytes_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Mat& was = before.tensors[i].value;
    const Mat& now = params_[i]->value;
    if (std::memcmp(was.data(), now.data(), sizeof(double) * static_cast<std::size_t>(now.size())) != 0) {
      throw FreezeViolation("frozen tensor '" + params_[i]->name + "' changed during the stage");
    }
  }
  throw FreezeViolation("frozen parameters changed during the stage");
}

void attach_downstream(Artifacts& art, const TemporalGraph& graph, const ParadigmSpec& spec, std::uint64_t seed) {
  const BackboneConfig& bc = art.backbone->config();
  if (!art.prompt) {
    PromptConfig pc;
    pc.variant = spec.variant;
    pc.d = spec.d_prompt > 0 ? spec.d_prompt : bc.d_emb;
    pc.d_z = bc.d_emb;
    pc.K = bc.K;
    pc.d_pos = spec.d_pos;
    pc.n_heads = bc.n_heads;
    pc.n_nodes = graph.n_nodes;
    pc.d_e = graph.d_e;
    pc.d_t = bc.d_t;
    pc.d_n = graph.d_n;
    art.prompt.emplace(pc, seed ^ 0x70f0ULL);
  }
  if (!art.fusion && is_temporal_generator(spec.variant)) art.fusion.emplace(bc.d_emb, seed ^ 0xf05eULL, art.prompt->config().d);
  if (spec.task == Task::LinkPrediction && !art.link_head) art.link_head.emplace(bc.d_emb, seed ^ 0x11a4ULL);
  if (spec.task == Task::NodeClassification && !art.node_head) {
    art.node_head.emplace(bc.d_emb, spec.n_classes, seed ^ 0x40deULL);
  }
}

namespace {

bool prompt_frozen(const ParadigmSpec& spec) {
  return spec.task == Task::NodeClassification && spec.nc_strategy == NcStrategy::ReuseFrozen;
}

ag::ParamList head_params(Artifacts& art, Task task) {
  ag::ParamList out;
  if (art.fusion) art.fusion->collect(out);
  if (task == Task::LinkPrediction && art.link_head) art.link_head->collect(out);
  if (task == Task::NodeClassification && art.node_head) art.node_head->collect(out);
  return out;
}

}  // namespace

ag::ParamList stage_trainable(Artifacts& art, const ParadigmSpec& spec) {
  ag::ParamList out;
  if (art.prompt && !prompt_frozen(spec)) out = art.prompt->parameters();
  const ag::ParamList heads = head_params(art, spec.task);
  out.insert(out.end(), heads.begin(), heads.end());
  if (spec.mode == Mode::PromptFinetune) {
    const ag::ParamList bb = art.backbone_parameters();
    out.insert(out.end(), bb.begin(), bb.end());
  }
  return out;
}

FrozenSet stage_frozen(Artifacts& art, const ParadigmSpec& spec) {
  ag::ParamList out;
  if (spec.mode == Mode::Prompt) out = art.backbone_parameters();
  if (art.prompt && prompt_frozen(spec)) {
    const ag::ParamList p = art.prompt->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return FrozenSet(std::move(out));
}

namespace {

StageResult adapt(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split, const ParadigmSpec& spec,
                  const TrainConfig& cfg, const StageOptions& opts) {
  spec.validate();
  const EventRange prompt_range = split.range(Stage::Prompt);
  if (prompt_range.empty()) throw ValidationError("prompt stage is empty");
  attach_downstream(art, graph, spec, cfg.seed);

  const FrozenSet frozen = stage_frozen(art, spec);
  FitPlan plan;
  plan.trainable = stage_trainable(art, spec);
  plan.train_events = stage_events(graph, prompt_range, opts.inductive);
  if (!opts.skip_validation) plan.val_events = stage_events(graph, split.range(Stage::Val), nullptr);

  EngineOptions eo;
  eo.task = spec.task;
  eo.path = ScorePath::Prompted;
  eo.train_backbone = spec.mode == Mode::PromptFinetune;
  eo.K = art.backbone->config().K;
  eo.seed = cfg.seed;
  Engine engine(graph, art, eo, opts.audit);

  const auto history = stage_events(graph, split.range(Stage::Pretrain), opts.inductive);
  const StreamState start = stream_state_from(art.memory, graph, history);
  FitResult fr = fit(engine, graph, start, std::move(plan), cfg, opts.audit);
  frozen.verify();

  StageResult out;
  out.log = std::move(fr.log);
  out.trainable_scalars = out.log.trainable_scalars;
  out.frozen_scalars = frozen.scalars();
  return out;
}

}  // namespace

StageResult prompt_tune(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split, const ParadigmSpec& spec,
                        const TrainConfig& cfg, const StageOptions& opts) {
  if (spec.mode != Mode::Prompt) throw ConfigError("paradigm.mode", "prompt_tune requires mode 'prompt'");
  return adapt(art, graph, split, spec, cfg, opts);
}

StageResult prompt_finetune(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split,
                            const ParadigmSpec& spec, const TrainConfig& cfg, const StageOptions& opts) {
  if (spec.mode != Mode::PromptFinetune) {
    throw ConfigError("paradigm.mode", "prompt_finetune requires mode 'prompt_finetune'");
  }
  return adapt(art, graph, split, spec, cfg, opts);
}

StageResult run_nc_strategy(const Artifacts* lp, Artifacts& art, const TemporalGraph& graph, const SplitSpec& split,
                            const ParadigmSpec& spec, const TrainConfig& cfg, const StageOptions& opts) {
  if (spec.task != Task::NodeClassification) throw ConfigError("paradigm.task", "strategies apply to node_classification");
  const NcStrategy strategy = spec.nc_strategy.value_or(NcStrategy::Reinit);
  if (strategy == NcStrategy::Reinit) {
    art.prompt.reset();
    art.fusion.reset();
  } else {
    if (lp == nullptr || !lp->prompt) {
      throw ValidationError(to_string(strategy) + " needs a prompt generator tuned on link prediction");
    }
    if (lp->prompt->variant() != spec.variant) {
      throw ValidationError("link-prediction prompt variant differs from the requested one");
    }
    art.prompt = lp->prompt;
    art.fusion = lp->fusion;
  }
  ParadigmSpec s = spec;
  s.nc_strategy = strategy;
  return adapt(art, graph, split, s, cfg, opts);
}

StageResult run_paradigm(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split, const ParadigmSpec& spec,
                         const TrainConfig& cfg, const StageOptions& opts) {
  return spec.mode == Mode::Prompt ? prompt_tune(art, graph, split, spec, cfg, opts)
                                   : prompt_finetune(art, graph, split, spec, cfg, opts);
}

}  // namespace tiglab
