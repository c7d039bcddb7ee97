#pragma once

#include "tiglab/backbone.hpp"
#include "tiglab/fusion_head.hpp"
#include "tiglab/graph_store.hpp"
#include "tiglab/tprog.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace tiglab {

enum class Task { LinkPrediction, NodeClassification };
enum class ScorePath {
  Pretext,   // backbone embeddings scored by the pre-training link head
  Prompted,  // prompted embeddings scored by the downstream heads
};

std::string to_string(Task t);
Task parse_task(const std::string& s);

/// Everything a run carries between stages.
struct Artifacts {
  std::unique_ptr<Backbone> backbone;
  MemoryState memory;  // flushed memory at the end of the pre-training stage
  std::optional<PromptState> prompt;
  std::optional<FusionParams> fusion;
  std::optional<LinkHead> link_head;
  std::optional<NodeHead> node_head;

  Artifacts() = default;
  Artifacts(Artifacts&&) = default;
  Artifacts& operator=(Artifacts&&) = default;
  Artifacts clone() const;

  /// Theta plus the shared time encoder.
  ag::ParamList backbone_parameters();
  /// Prompt generator, fusion and heads that are present.
  ag::ParamList downstream_parameters();
};

/// Records which events feed gradients and early stopping; throws on a leak.
class DisciplineAudit {
 public:
  explicit DisciplineAudit(const SplitSpec& split) : split_(split) {}

  void record_gradient(std::span<const std::int64_t> events);
  void record_early_stop(std::span<const std::int64_t> events);

  std::int64_t gradient_events() const { return gradient_events_; }
  std::int64_t max_gradient_event() const { return max_gradient_event_; }
  std::int64_t early_stop_events() const { return early_stop_events_; }
  std::int64_t max_early_stop_event() const { return max_early_stop_event_; }

 private:
  SplitSpec split_;
  std::int64_t gradient_events_ = 0;
  std::int64_t max_gradient_event_ = -1;
  std::int64_t early_stop_events_ = 0;
  std::int64_t max_early_stop_event_ = -1;
};

/// Memory plus last-interaction times: the state replayed along the stream.
struct StreamState {
  MemoryState memory;
  LastInteractionTracker tracker;
};

struct EngineOptions {
  Task task = Task::LinkPrediction;
  ScorePath path = ScorePath::Pretext;
  bool train_backbone = true;
  int K = 10;
  std::uint64_t seed = 0;  // dropout stream
};

struct BatchForward {
  MemoryUpdate update;
  ag::Var pos_logits;  // link task, n x 1
  ag::Var neg_logits;
  ag::Var class_logits;  // node task, one row per labeled event
  std::vector<int> labels;
  std::vector<std::int64_t> labeled_events;
};

/// Runs chronological batches against one set of artifacts.
class Engine {
 public:
  Engine(const TemporalGraph& graph, Artifacts& artifacts, EngineOptions opts, DisciplineAudit* audit = nullptr);

  /// Flushes pending messages, embeds the batch and scores it. `record` builds a tape.
  /// Advances the state's interaction tracker; call `finish` afterwards.
  BatchForward forward(StreamState& state, std::span<const std::int64_t> events, std::span<const NodeId> negatives,
                       bool record);

  /// Commits the memory update and queues the batch's messages.
  void finish(StreamState& state, const BatchForward& fwd, std::span<const std::int64_t> events);

  /// Advances memory and tracker over events without scoring.
  void replay(StreamState& state, std::span<const std::int64_t> events, int batch_size);

  EngineOptions& options() { return opts_; }
  Artifacts& artifacts() { return *art_; }
  bool training_mode = false;  // enables dropout

 private:
  ag::Var prompted(const ag::Var& z, std::span<const NodeQuery> queries, std::span<const double> elapsed,
                   const MemoryView& view, bool backbone_grad);

  const TemporalGraph* graph_;
  Artifacts* art_;
  EngineOptions opts_;
  DisciplineAudit* audit_;
  std::mt19937_64 rng_;
};

/// Uniform negative destinations over the item partition (all nodes when not bipartite).
std::vector<NodeId> sample_negatives(const TemporalGraph& graph, std::size_t n, std::mt19937_64& rng);

struct TrainConfig {
  int batch_size = 200;
  double lr = 1e-4;
  int max_epochs = 50;
  int patience = 5;
  std::uint64_t seed = 0;
  int eval_batch_size = 200;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double train_seconds = 0.0;  // optimization pass only
  double seconds = 0.0;        // including replay and validation
};

struct TrainingLog {
  std::vector<EpochLog> epochs;
  int best_epoch = -1;
  double best_val = 0.0;
  bool early_stopped = false;
  std::int64_t trainable_scalars = 0;
};

/// Chronological event lists driving one fit.
struct FitPlan {
  std::vector<std::int64_t> train_events;
  std::vector<std::int64_t> bridge_events;  // replayed without gradients before validation
  std::vector<std::int64_t> val_events;
  ag::ParamList trainable;
  bool snapshot_memory = false;  // keep the flushed post-training memory of the best epoch
  std::function<void(int epoch, const StreamState&)> on_epoch_start;
};

struct FitResult {
  TrainingLog log;
  std::optional<MemoryState> best_memory;
};

/// Epoch loop with Adam, early stopping on the validation metric (AP or AUROC) and
/// best-epoch restoration of `plan.trainable`. Every epoch starts from `start`.
/// With no validation events every epoch counts as the best (timing runs).
FitResult fit(Engine& engine, const TemporalGraph& graph, const StreamState& start, FitPlan plan,
              const TrainConfig& cfg, DisciplineAudit* audit);

/// Scores of one chronological pass: link AP inputs or node-class probabilities.
struct PassScores {
  std::vector<double> pos, neg;  // link task, aligned with `events`
  std::vector<std::int64_t> events;
  std::vector<double> class1_prob;  // node task, aligned with `labeled_events`
  std::vector<int> labels;
  std::vector<std::int64_t> labeled_events;
};

/// Gradient-free pass over `events`, advancing `state`.
PassScores score_pass(Engine& engine, const TemporalGraph& graph, StreamState& state,
                      std::span<const std::int64_t> events, int batch_size, std::uint64_t negative_seed);

/// Validation metric of a pass: AP for links, AUROC for node classes.
double pass_metric(Task task, const PassScores& scores);

struct BackboneSpec {
  std::string name = "memory_attention";
  BackboneConfig config;
};

struct PretrainResult {
  Artifacts artifacts;
  TrainingLog log;
};

struct PretrainOptions {
  const InductiveSpec* inductive = nullptr;
  DisciplineAudit* audit = nullptr;
  std::function<void(int epoch, const StreamState&)> on_epoch_start;
};

/// Link-prediction pre-training over the pre-training stage with one uniform
/// negative per positive. Memory is reset every epoch; the best validation-AP
/// epoch's parameters and flushed memory are returned.
PretrainResult pretrain(const TemporalGraph& graph, const SplitSpec& split, const BackboneSpec& backbone,
                        const TrainConfig& cfg, const PretrainOptions& opts = {});

/// Fresh stream state with the tracker replayed over `events`.
StreamState stream_state_from(const MemoryState& memory, const TemporalGraph& graph,
                              std::span<const std::int64_t> events);

/// Concatenates index lists of consecutive event ranges (inductive filtering applied when given).
std::vector<std::int64_t> stage_events(const TemporalGraph& graph, EventRange range, const InductiveSpec* inductive);

}  // namespace tiglab
