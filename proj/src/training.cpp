#include "tiglab/training.hpp"

#include "tiglab/errors.hpp"
#include "tiglab/metrics.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace tiglab {

std::string to_string(Task t) {
  return t == Task::LinkPrediction ? "link_prediction" : "node_classification";
}

Task parse_task(const std::string& s) {
  if (s == "link_prediction") return Task::LinkPrediction;
  if (s == "node_classification") return Task::NodeClassification;
  throw ConfigError("paradigm.task", "unknown task '" + s + "'");
}

Artifacts Artifacts::clone() const {
  Artifacts out;
  if (backbone) out.backbone = backbone->clone();
  out.memory = memory;
  out.prompt = prompt;
  out.fusion = fusion;
  out.link_head = link_head;
  out.node_head = node_head;
  return out;
}

ag::ParamList Artifacts::backbone_parameters() {
  ag::ParamList out = backbone->parameters();
  backbone->time_encoder().collect(out);
  return out;
}

ag::ParamList Artifacts::downstream_parameters() {
  ag::ParamList out;
  if (prompt) {
    ag::ParamList p = prompt->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  if (fusion) fusion->collect(out);
  if (link_head) link_head->collect(out);
  if (node_head) node_head->collect(out);
  return out;
}

void DisciplineAudit::record_gradient(std::span<const std::int64_t> events) {
  for (std::int64_t i : events) {
    if (i >= split_.val_boundary()) {
      throw DisciplineViolation("event " + std::to_string(i) + " at or past the validation boundary " +
                                std::to_string(split_.val_boundary()) + " contributed a gradient");
    }
    max_gradient_event_ = std::max(max_gradient_event_, i);
  }
  gradient_events_ += static_cast<std::int64_t>(events.size());
}

void DisciplineAudit::record_early_stop(std::span<const std::int64_t> events) {
  const EventRange val = split_.range(Stage::Val);
  for (std::int64_t i : events) {
    if (!val.contains(i)) {
      throw DisciplineViolation("event " + std::to_string(i) + " outside the validation stage fed early stopping");
    }
    max_early_stop_event_ = std::max(max_early_stop_event_, i);
  }
  early_stop_events_ += static_cast<std::int64_t>(events.size());
}

std::vector<NodeId> sample_negatives(const TemporalGraph& graph, std::size_t n, std::mt19937_64& rng) {
  const NodeId lo = graph.bipartite() ? graph.n_users : 0;
  std::uniform_int_distribution<NodeId> pick(lo, graph.n_nodes - 1);
  std::vector<NodeId> out(n);
  for (auto& v : out) v = pick(rng);
  return out;
}

Engine::Engine(const TemporalGraph& graph, Artifacts& artifacts, EngineOptions opts, DisciplineAudit* audit)
    : graph_(&graph), art_(&artifacts), opts_(opts), audit_(audit), rng_(opts.seed ^ 0xd1ce5eedULL) {
  if (!art_->backbone) throw ValidationError("engine needs a backbone");
}

namespace {

std::vector<Index> iota_range(Index begin, Index count) {
  std::vector<Index> out(static_cast<std::size_t>(count));
  std::iota(out.begin(), out.end(), begin);
  return out;
}

}  // namespace

ag::Var Engine::prompted(const ag::Var& z, std::span<const NodeQuery> queries, std::span<const double> elapsed,
                         const MemoryView& view, bool backbone_grad) {
  if (!art_->prompt) return z;
  PromptState& p = *art_->prompt;
  switch (p.variant()) {
    case PromptVariant::StaticOutput: return p.static_output(z);
    case PromptVariant::StaticInput: return z;
    default: break;
  }
  if (!art_->fusion) throw ValidationError("per-node prompts need fusion parameters");
  Backbone& bb = *art_->backbone;
  PromptContext ctx;
  ctx.graph = graph_;
  ctx.time_encoder = &bb.time_encoder();
  ctx.elapsed = elapsed;
  const int K = opts_.K;
  ctx.embed = [&, backbone_grad, K](std::span<const NodeQuery> q) {
    std::optional<ag::NoGradGuard> guard;
    if (!backbone_grad) guard.emplace();
    EmbedOptions eo;
    eo.K = K;
    return bb.embed(*graph_, view, q, eo);
  };
  const ag::Var prompts = p.generate(ctx, queries, z);
  return fuse(*art_->fusion, z, prompts);
}

BatchForward Engine::forward(StreamState& state, std::span<const std::int64_t> events,
                             std::span<const NodeId> negatives, bool record) {
  const TemporalGraph& g = *graph_;
  const bool link = opts_.task == Task::LinkPrediction;
  const auto B = static_cast<Index>(events.size());
  if (link && negatives.size() != events.size()) throw ValidationError("one negative per positive required");

  BatchForward out;
  std::vector<NodeQuery> queries;
  std::vector<double> elapsed;
  if (link) {
    queries.resize(static_cast<std::size_t>(3 * B));
    elapsed.resize(queries.size());
  }
  const double t0 = g.t_min();
  auto since_last = [&](NodeId v, double t) {
    const auto last = state.tracker.last(v);
    return t - (last ? *last : t0);
  };
  for (Index r = 0; r < B; ++r) {
    const InteractionEvent& e = g.events[static_cast<std::size_t>(events[static_cast<std::size_t>(r)])];
    if (link) {
      const NodeId neg = negatives[static_cast<std::size_t>(r)];
      const std::size_t i = static_cast<std::size_t>(r);
      queries[i] = {e.src, e.t};
      queries[i + B] = {e.dst, e.t};
      queries[i + 2 * B] = {neg, e.t};
      elapsed[i] = since_last(e.src, e.t);
      elapsed[i + B] = since_last(e.dst, e.t);
      elapsed[i + 2 * B] = since_last(neg, e.t);
    } else if (e.has_label()) {
      queries.push_back({e.src, e.t});
      elapsed.push_back(since_last(e.src, e.t));
      out.labels.push_back(e.label);
      out.labeled_events.push_back(events[static_cast<std::size_t>(r)]);
    }
    state.tracker.observe(e);
  }

  std::optional<ag::NoGradGuard> outer;
  if (!record) outer.emplace();

  const bool prompted_path = opts_.path == ScorePath::Prompted;
  const bool input_prompt = prompted_path && art_->prompt && art_->prompt->variant() == PromptVariant::StaticInput;
  // Frozen backbones stay off the tape unless an input-style prompt must be differentiated through them.
  const bool backbone_grad = record && (opts_.train_backbone || input_prompt);
  {
    std::optional<ag::NoGradGuard> guard;
    if (!(record && opts_.train_backbone)) guard.emplace();
    out.update = art_->backbone->compute_memory_update(state.memory);
  }
  if (queries.empty()) return out;
  const MemoryView view(state.memory, &out.update);

  ag::Var offset;
  if (input_prompt) offset = art_->prompt->static_input_offset();
  EmbedOptions eo;
  eo.K = opts_.K;
  eo.training = training_mode && record;
  eo.rng = &rng_;
  eo.input_offset = offset.defined() ? &offset : nullptr;

  ag::Var z;
  {
    std::optional<ag::NoGradGuard> guard;
    if (!backbone_grad) guard.emplace();
    z = art_->backbone->embed(g, view, queries, eo);
  }
  const ag::Var zt = prompted_path ? prompted(z, queries, elapsed, view, backbone_grad) : z;

  if (link) {
    const auto src = iota_range(0, B), dst = iota_range(B, B), neg = iota_range(2 * B, B);
    const ag::Var zs = ag::gather_rows(zt, src), zd = ag::gather_rows(zt, dst), zn = ag::gather_rows(zt, neg);
    if (prompted_path) {
      if (!art_->link_head) throw ValidationError("prompted link scoring needs a link head");
      out.pos_logits = art_->link_head->logits(zs, zd);
      out.neg_logits = art_->link_head->logits(zs, zn);
    } else {
      std::optional<ag::NoGradGuard> guard;
      if (!backbone_grad) guard.emplace();
      out.pos_logits = art_->backbone->link_logits(zs, zd);
      out.neg_logits = art_->backbone->link_logits(zs, zn);
    }
  } else {
    if (!art_->node_head) throw ValidationError("node classification needs a node head");
    out.class_logits = art_->node_head->logits(zt, &rng_, training_mode && record);
  }
  if (record && audit_ != nullptr) audit_->record_gradient(events);
  return out;
}

void Engine::finish(StreamState& state, const BatchForward& fwd, std::span<const std::int64_t> events) {
  commit(state.memory, fwd.update);
  store_messages(state.memory, *graph_, events);
}

void Engine::replay(StreamState& state, std::span<const std::int64_t> events, int batch_size) {
  ag::NoGradGuard guard;
  for (std::size_t a = 0; a < events.size(); a += static_cast<std::size_t>(batch_size)) {
    const auto chunk = events.subspan(a, std::min<std::size_t>(static_cast<std::size_t>(batch_size), events.size() - a));
    const MemoryUpdate upd = art_->backbone->compute_memory_update(state.memory);
    commit(state.memory, upd);
    for (std::int64_t i : chunk) state.tracker.observe(graph_->events[static_cast<std::size_t>(i)]);
    store_messages(state.memory, *graph_, chunk);
  }
}

PassScores score_pass(Engine& engine, const TemporalGraph& graph, StreamState& state,
                      std::span<const std::int64_t> events, int batch_size, std::uint64_t negative_seed) {
  PassScores out;
  std::mt19937_64 rng(negative_seed);
  const bool link = engine.options().task == Task::LinkPrediction;
  const bool was_training = engine.training_mode;
  engine.training_mode = false;
  for (std::size_t a = 0; a < events.size(); a += static_cast<std::size_t>(batch_size)) {
    const auto chunk = events.subspan(a, std::min<std::size_t>(static_cast<std::size_t>(batch_size), events.size() - a));
    const std::vector<NodeId> negs = link ? sample_negatives(graph, chunk.size(), rng) : std::vector<NodeId>{};
    const BatchForward fwd = engine.forward(state, chunk, negs, false);
    if (link) {
      for (Index i = 0; i < fwd.pos_logits.rows(); ++i) {
        out.pos.push_back(1.0 / (1.0 + std::exp(-fwd.pos_logits.value()(i, 0))));
        out.neg.push_back(1.0 / (1.0 + std::exp(-fwd.neg_logits.value()(i, 0))));
      }
      out.events.insert(out.events.end(), chunk.begin(), chunk.end());
    } else if (!fwd.labels.empty()) {
      const Mat probs = ag::softmax_rows(fwd.class_logits.value());
      for (Index i = 0; i < probs.rows(); ++i) out.class1_prob.push_back(probs(i, 1));
      out.labels.insert(out.labels.end(), fwd.labels.begin(), fwd.labels.end());
      out.labeled_events.insert(out.labeled_events.end(), fwd.labeled_events.begin(), fwd.labeled_events.end());
    }
    engine.finish(state, fwd, chunk);
  }
  engine.training_mode = was_training;
  return out;
}

double pass_metric(Task task, const PassScores& scores) {
  if (task == Task::LinkPrediction) return average_precision(scores.pos, scores.neg);
  if (scores.labels.empty()) throw ValidationError("no labeled events to evaluate");
  return auroc(scores.class1_prob, scores.labels);
}

FitResult fit(Engine& engine, const TemporalGraph& graph, const StreamState& start, FitPlan plan,
              const TrainConfig& cfg, DisciplineAudit* audit) {
  using Clock = std::chrono::steady_clock;
  if (cfg.batch_size < 1 || cfg.max_epochs < 1 || cfg.patience < 1) {
    throw ConfigError("training", "batch size, epochs and patience must be positive");
  }
  const Task task = engine.options().task;
  nn::Adam opt(plan.trainable, cfg.lr);
  FitResult result;
  result.log.trainable_scalars = ag::count_scalars(plan.trainable);

  double best = -std::numeric_limits<double>::infinity();
  std::vector<Mat> best_values = nn::snapshot(plan.trainable);
  int since_best = 0;
  const std::uint64_t val_seed = cfg.seed * 0x9E3779B97F4A7C15ULL + 17;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t_start = Clock::now();
    StreamState state = start;
    if (plan.on_epoch_start) plan.on_epoch_start(epoch, state);
    std::mt19937_64 neg_rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(epoch));

    engine.training_mode = true;
    double loss_sum = 0.0;
    int n_losses = 0;
    const std::span<const std::int64_t> train(plan.train_events);
    for (std::size_t a = 0; a < train.size(); a += static_cast<std::size_t>(cfg.batch_size)) {
      const auto chunk =
          train.subspan(a, std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), train.size() - a));
      const std::vector<NodeId> negs =
          task == Task::LinkPrediction ? sample_negatives(graph, chunk.size(), neg_rng) : std::vector<NodeId>{};
      opt.zero_grad();
      const BatchForward fwd = engine.forward(state, chunk, negs, true);
      ag::Var loss;
      if (task == Task::LinkPrediction) {
        const ag::Var both[] = {fwd.pos_logits, fwd.neg_logits};
        std::vector<double> targets(chunk.size(), 1.0);
        targets.resize(2 * chunk.size(), 0.0);
        loss = ag::bce_with_logits(ag::vcat(both), targets);
      } else if (!fwd.labels.empty()) {
        loss = ag::softmax_cross_entropy(fwd.class_logits, fwd.labels);
      }
      if (loss.defined()) {
        if (!std::isfinite(loss.scalar())) {
          throw DivergenceError("non-finite loss " + std::to_string(loss.scalar()) + " at epoch " +
                                std::to_string(epoch) + ", batch starting at event " + std::to_string(chunk.front()));
        }
        loss.backward();
        opt.step();
        loss_sum += loss.scalar();
        ++n_losses;
      }
      engine.finish(state, fwd, chunk);
    }
    engine.training_mode = false;
    const double train_seconds = std::chrono::duration<double>(Clock::now() - t_start).count();

    std::optional<MemoryState> snap;
    if (plan.snapshot_memory) {
      snap = state.memory;
      flush_and_update_memory(*snap, *engine.artifacts().backbone);
    }
    double metric = std::numeric_limits<double>::infinity();
    if (!plan.val_events.empty()) {
      engine.replay(state, plan.bridge_events, cfg.eval_batch_size);
      if (audit != nullptr) audit->record_early_stop(plan.val_events);
      const PassScores scores = score_pass(engine, graph, state, plan.val_events, cfg.eval_batch_size, val_seed);
      metric = pass_metric(task, scores);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = n_losses > 0 ? loss_sum / n_losses : 0.0;
    entry.val_metric = metric;
    entry.train_seconds = train_seconds;
    entry.seconds = std::chrono::duration<double>(Clock::now() - t_start).count();
    result.log.epochs.push_back(entry);

    if (metric > best || plan.val_events.empty()) {
      best = metric;
      best_values = nn::snapshot(plan.trainable);
      result.log.best_epoch = epoch;
      result.log.best_val = metric;
      result.best_memory = std::move(snap);
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      result.log.early_stopped = true;
      break;
    }
  }
  nn::restore(plan.trainable, best_values);
  return result;
}

std::vector<std::int64_t> stage_events(const TemporalGraph& graph, EventRange range, const InductiveSpec* inductive) {
  if (range.empty()) return {};
  return training_events(graph, range, inductive);
}

StreamState stream_state_from(const MemoryState& memory, const TemporalGraph& graph,
                              std::span<const std::int64_t> events) {
  StreamState s{memory, LastInteractionTracker(graph.n_nodes)};
  for (std::int64_t i : events) s.tracker.observe(graph.events[static_cast<std::size_t>(i)]);
  return s;
}

PretrainResult pretrain(const TemporalGraph& graph, const SplitSpec& split, const BackboneSpec& spec,
                        const TrainConfig& cfg, const PretrainOptions& opts) {
  if (split.range(Stage::Pretrain).empty()) throw ValidationError("pre-training stage is empty");
  Artifacts art;
  art.backbone = make_backbone(spec.name, spec.config, graph.d_n, graph.d_e, cfg.seed);

  EngineOptions eo;
  eo.task = Task::LinkPrediction;
  eo.path = ScorePath::Pretext;
  eo.train_backbone = true;
  eo.K = spec.config.K;
  eo.seed = cfg.seed;
  Engine engine(graph, art, eo, opts.audit);

  FitPlan plan;
  plan.train_events = stage_events(graph, split.range(Stage::Pretrain), opts.inductive);
  plan.bridge_events = stage_events(graph, split.range(Stage::Prompt), opts.inductive);
  plan.val_events = stage_events(graph, split.range(Stage::Val), nullptr);
  plan.trainable = art.backbone_parameters();
  plan.snapshot_memory = true;
  plan.on_epoch_start = opts.on_epoch_start;

  const StreamState start{init_state(graph.n_nodes, spec.config.d_mem), LastInteractionTracker(graph.n_nodes)};
  FitResult fr = fit(engine, graph, start, std::move(plan), cfg, opts.audit);
  art.memory = fr.best_memory ? std::move(*fr.best_memory) : start.memory;
  return {std::move(art), std::move(fr.log)};
}

}  // namespace tiglab
