#pragma once

#include "tiglab/config.hpp"
#include "tiglab/errors.hpp"
#include "tiglab/metrics.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tiglab {

/// A runtime failure tagged with the pipeline stage that raised it.
class StageFailure : public Error {
 public:
  StageFailure(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;  // e.g. transductive_ap, baseline_transductive_ap, auroc
  std::map<std::string, double> seconds;  // wall clock per stage
  std::map<std::string, std::int64_t> trainable_scalars;
  TrainingLog pretrain_log;
  TrainingLog prompt_log;
};

struct MetricsReport {
  std::string name;
  std::string dataset;
  std::string backbone;
  std::string tprog;
  std::string paradigm;
  std::string task;
  std::string primary_metric;  // transductive_ap or auroc
  nlohmann::json config;
  std::vector<SeedResult> seeds;
  std::map<std::string, MeanStd> aggregate;
  nlohmann::json sweep;  // {axis, value} when produced by a sweep

  nlohmann::json to_json() const;
};

struct RunOptions {
  bool write_outputs = true;
  nlohmann::json sweep;  // copied into the report
  /// Reuse a saved backbone instead of pre-training; `force` skips the config-hash check.
  std::optional<std::filesystem::path> checkpoint;
  bool force = false;
};

/// pretrain -> paradigm stage -> evaluation for every seed; writes report, metric
/// records, manifest and per-seed archives under cfg.output_dir.
MetricsReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

enum class SweepAxis { PromptFraction, PromptDim, PretrainFraction };
std::string to_string(SweepAxis a);
SweepAxis parse_sweep_axis(const std::string& s);

/// Config for one sweep point. prompt_fraction keeps pre-training at its configured share and
/// splits the rest evenly between validation and test; pretrain_fraction keeps validation and
/// test fixed and gives the remainder to the prompt stage.
ExperimentConfig sweep_point(const ExperimentConfig& base, SweepAxis axis, double value);

/// One run per value with shared seeds; writes sweep.csv sorted by value.
std::vector<MetricsReport> sweep(const ExperimentConfig& cfg, SweepAxis axis, std::vector<double> values,
                                 const RunOptions& opts = {});

struct EfficiencyEntry {
  std::string variant;
  std::string stage;  // prompt or prompt_finetune
  double seconds = 0.0;
  std::int64_t trainable_scalars = 0;
};

struct EfficiencyRecord {
  std::vector<EfficiencyEntry> entries;
  std::int64_t backbone_scalars = 0;  // Theta plus time encoder
  nlohmann::json to_json() const;
};

/// One prompt-stage epoch per variant in prompt mode and in prompt-based fine-tuning,
/// timed on the optimization pass alone.
EfficiencyRecord report_efficiency(const ExperimentConfig& cfg,
                                   const std::vector<PromptVariant>& variants = {PromptVariant::Vanilla,
                                                                                 PromptVariant::Transformer,
                                                                                 PromptVariant::Projection});

enum class PlotKind { Sweep, Comparison };
PlotKind parse_plot_kind(const std::string& s);

/// Report JSON documents found under `dir` (report.json files, any depth), sorted by path.
std::vector<nlohmann::json> collect_reports(const std::filesystem::path& dir);

/// CSV always; an SVG next to it. Returns the written paths.
std::vector<std::filesystem::path> emit_plots(const std::vector<nlohmann::json>& reports, PlotKind kind,
                                              const std::filesystem::path& out_dir);

/// Git-style hash over the graph's events and features.
std::string dataset_hash(const TemporalGraph& graph);

}  // namespace tiglab
