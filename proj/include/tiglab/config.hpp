#pragma once

#include "tiglab/graph_store.hpp"
#include "tiglab/orchestration.hpp"
#include "tiglab/synthetic.hpp"
#include "tiglab/training.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tiglab {

struct ExperimentConfig {
  std::string name = "experiment";
  // Exactly one of the two dataset sources.
  std::optional<std::filesystem::path> dataset_path;  // Jodie-format CSV
  std::optional<SyntheticSpec> synthetic;

  std::array<double, 4> split{0.5, 0.2, 0.15, 0.15};
  std::optional<double> inductive_fraction;  // fraction of val/test nodes hidden during training

  BackboneSpec backbone;
  ParadigmSpec paradigm;

  int pretrain_batch = 200;
  int prompt_batch = 100;
  int eval_batch = 200;
  double lr = 1e-4;
  std::optional<double> prompt_lr;  // prompt stage; defaults to lr
  int max_epochs = 50;
  int patience = 5;
  bool evaluate_baseline = true;  // also score the frozen no-prompt backbone

  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::filesystem::path output_dir = "runs";
};

/// The schema every config is checked against (JSON-schema subset).
const nlohmann::json& config_schema();

/// Checks `doc` against `schema`; throws ConfigError carrying the dotted field path.
void validate_against_schema(const nlohmann::json& doc, const nlohmann::json& schema, const std::string& path = "");

/// Validates then converts. Relative dataset paths resolve against `data_dir` when given.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::optional<std::filesystem::path>& data_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form (every field, defaults filled in).
nlohmann::json config_to_json(const ExperimentConfig& cfg);

TrainConfig pretrain_settings(const ExperimentConfig& cfg, std::uint64_t seed);
TrainConfig prompt_settings(const ExperimentConfig& cfg, std::uint64_t seed);

/// Graph named by the config (file or synthetic with the given seed offset).
TemporalGraph load_dataset(const ExperimentConfig& cfg);

}  // namespace tiglab
