#pragma once

#include "tiglab/training.hpp"

#include <optional>
#include <string>

namespace tiglab {

enum class Mode { Prompt, PromptFinetune };
enum class NcStrategy { ReuseFrozen, InitAndTune, Reinit };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);
std::string to_string(NcStrategy s);
NcStrategy parse_nc_strategy(const std::string& s);

struct ParadigmSpec {
  Mode mode = Mode::Prompt;
  Task task = Task::LinkPrediction;
  std::optional<NcStrategy> nc_strategy;  // node classification only
  PromptVariant variant = PromptVariant::Projection;
  int d_prompt = 0;  // 0 means the embedding width
  int d_pos = 16;
  int n_classes = 2;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parameters held fixed during a stage, with their serialized values at stage start.
class FrozenSet {
 public:
  FrozenSet() = default;
  explicit FrozenSet(ag::ParamList params);

  const ag::ParamList& params() const { return params_; }
  std::int64_t scalars() const { return ag::count_scalars(params_); }
  bool contains(const ag::Parameter* p) const;
  /// Throws FreezeViolation naming the first changed tensor.
  void verify() const;

 private:
  ag::ParamList params_;
  std::string bytes_;
};

struct StageOptions {
  const InductiveSpec* inductive = nullptr;
  DisciplineAudit* audit = nullptr;
  bool skip_validation = false;  // timing runs: no early stopping pass
};

struct StageResult {
  TrainingLog log;
  std::int64_t trainable_scalars = 0;
  std::int64_t frozen_scalars = 0;
};

/// Builds the prompt generator, fusion and task head that are not already present.
void attach_downstream(Artifacts& art, const TemporalGraph& graph, const ParadigmSpec& spec, std::uint64_t seed);

/// Trainable and frozen sets of a stage, before any optimization.
ag::ParamList stage_trainable(Artifacts& art, const ParadigmSpec& spec);
FrozenSet stage_frozen(Artifacts& art, const ParadigmSpec& spec);

/// Frozen backbone: only prompt generator, fusion and head are optimized. Batches of `cfg.batch_size`
/// over the prompt stage, early stopping on the validation stage. Throws FreezeViolation if any
/// frozen scalar moved.
StageResult prompt_tune(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split, const ParadigmSpec& spec,
                        const TrainConfig& cfg, const StageOptions& opts = {});

/// Same loop with the backbone and time encoder in the optimizer.
StageResult prompt_finetune(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split,
                            const ParadigmSpec& spec, const TrainConfig& cfg, const StageOptions& opts = {});

/// Node-classification adaptation. `lp` must carry a tuned prompt generator for
/// reuse_frozen and init_and_tune; `art` starts from the pre-trained checkpoint.
StageResult run_nc_strategy(const Artifacts* lp, Artifacts& art, const TemporalGraph& graph, const SplitSpec& split,
                            const ParadigmSpec& spec, const TrainConfig& cfg, const StageOptions& opts = {});

/// Dispatches on spec.mode.
StageResult run_paradigm(Artifacts& art, const TemporalGraph& graph, const SplitSpec& split, const ParadigmSpec& spec,
                         const TrainConfig& cfg, const StageOptions& opts = {});

}  // namespace tiglab
