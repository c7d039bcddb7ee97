#pragma once

#include "tiglab/training.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tiglab {

enum class Setting { Transductive, Inductive };

std::string to_string(Setting s);
Setting parse_setting(const std::string& s);

struct EvalOptions {
  Setting setting = Setting::Transductive;
  const InductiveSpec* inductive = nullptr;  // masks used during training; required for inductive
  std::uint64_t negative_seed = 0;
  int batch_size = 200;
  /// Prompted uses fusion and the downstream head; Pretext is the no-prompt baseline.
  ScorePath path = ScorePath::Prompted;
};

/// One scored test event with its sampled negative.
struct EvalBatchResult {
  std::vector<double> pos, neg;
  std::vector<std::int64_t> events;
  std::vector<NodeId> src, dst;
  std::vector<double> t;
};

struct LinkEvalResult {
  double ap = 0.0;
  EvalBatchResult scored;  // filtered to the setting
};

struct NodeEvalResult {
  double auroc = 0.0;
  std::vector<double> class1_prob;
  std::vector<int> labels;
};

/// Test events kept by a setting: both endpoints seen while training (transductive)
/// or at least one masked endpoint (inductive).
std::vector<std::int64_t> setting_events(const TemporalGraph& graph, const SplitSpec& split, Setting setting,
                                         const InductiveSpec* inductive);

/// Starts from the checkpoint memory, replays prompt and validation stages, then scores
/// every test event in order and keeps the setting's subset.
LinkEvalResult evaluate_link_prediction(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split,
                                        const EvalOptions& opts);

/// AUROC of the class-1 probability over labeled test events.
NodeEvalResult evaluate_node_classification(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split,
                                            const EvalOptions& opts);

/// Validation-stage AP of the no-prompt baseline (pre-training head).
double baseline_val_ap(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split, const EvalOptions& opts);

}  // namespace tiglab
