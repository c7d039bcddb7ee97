#include "tiglab/config.hpp"

#include "tiglab/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

namespace tiglab {

using nlohmann::json;

const json& config_schema() {
  static const json schema = json::parse(R"({
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "name": {"type": "string"},
    "dataset": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "path": {"type": "string"},
        "synthetic": {
          "type": "object",
          "additionalProperties": false,
          "required": ["kind"],
          "properties": {
            "kind": {"enum": ["planted_repeat", "planted_drift", "hetero_nodes"]},
            "n_users": {"type": "integer", "minimum": 1},
            "n_items": {"type": "integer", "minimum": 1},
            "n_events": {"type": "integer", "minimum": 4},
            "seed": {"type": "integer", "minimum": 0},
            "drift_point": {"type": "number", "minimum": 0, "maximum": 1},
            "repeat_prob": {"type": "number", "minimum": 0, "maximum": 1},
            "d_e": {"type": "integer", "minimum": 1},
            "d_n": {"type": "integer", "minimum": 1},
            "label_signal": {"type": "number"},
            "mean_gap": {"type": "number", "exclusiveMinimum": 0},
            "random_node_features": {"type": "boolean"}
          }
        }
      }
    },
    "split": {
      "type": "array", "minItems": 4, "maxItems": 4,
      "items": {"type": "number", "minimum": 0, "maximum": 1}
    },
    "inductive": {
      "type": "object",
      "additionalProperties": false,
      "required": ["node_fraction"],
      "properties": {"node_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}}
    },
    "model": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "backbone": {"type": "string"},
        "d": {"type": "integer", "minimum": 1},
        "d_mem": {"type": "integer", "minimum": 1},
        "d_t": {"type": "integer", "minimum": 1},
        "d_pos": {"type": "integer", "minimum": 1},
        "prompt_dim": {"type": "integer", "minimum": 1},
        "n_heads": {"type": "integer", "minimum": 1},
        "K": {"type": "integer", "minimum": 1},
        "dropout": {"type": "number", "minimum": 0, "exclusiveMaximum": 1}
      }
    },
    "paradigm": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "mode": {"enum": ["prompt", "prompt_finetune"]},
        "task": {"enum": ["link_prediction", "node_classification"]},
        "nc_strategy": {"enum": ["reuse_frozen", "init_and_tune", "reinit"]},
        "tprog": {"enum": ["vanilla", "transformer", "projection", "static_output", "static_input"]},
        "n_classes": {"type": "integer", "minimum": 2}
      }
    },
    "training": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "pretrain_batch": {"type": "integer", "minimum": 1},
        "prompt_batch": {"type": "integer", "minimum": 1},
        "eval_batch": {"type": "integer", "minimum": 1},
        "lr": {"type": "number", "exclusiveMinimum": 0},
        "prompt_lr": {"type": "number", "exclusiveMinimum": 0},
        "max_epochs": {"type": "integer", "minimum": 1},
        "patience": {"type": "integer", "minimum": 1},
        "evaluate_baseline": {"type": "boolean"}
      }
    },
    "seeds": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
    "output_dir": {"type": "string"}
  }
})");
  return schema;
}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
  if (type == "number") return v.is_number();
  return false;
}

}  // namespace

void validate_against_schema(const json& doc, const json& schema, const std::string& path) {
  const std::string where = path.empty() ? "<root>" : path;
  if (schema.contains("type") && !has_type(doc, schema["type"].get<std::string>())) {
    throw ConfigError(where, "expected " + schema["type"].get<std::string>() + ", got " + doc.type_name());
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& option : schema["enum"]) found = found || option == doc;
    if (!found) throw ConfigError(where, "must be one of " + schema["enum"].dump());
  }
  if (doc.is_number()) {
    const double v = doc.get<double>();
    if (schema.contains("minimum") && v < schema["minimum"].get<double>()) {
      throw ConfigError(where, "must be >= " + schema["minimum"].dump());
    }
    if (schema.contains("maximum") && v > schema["maximum"].get<double>()) {
      throw ConfigError(where, "must be <= " + schema["maximum"].dump());
    }
    if (schema.contains("exclusiveMinimum") && v <= schema["exclusiveMinimum"].get<double>()) {
      throw ConfigError(where, "must be > " + schema["exclusiveMinimum"].dump());
    }
    if (schema.contains("exclusiveMaximum") && v >= schema["exclusiveMaximum"].get<double>()) {
      throw ConfigError(where, "must be < " + schema["exclusiveMaximum"].dump());
    }
  }
  if (doc.is_object()) {
    for (const auto& key : schema.value("required", json::array())) {
      if (!doc.contains(key.get<std::string>())) throw ConfigError(join(path, key), "required field missing");
    }
    const json props = schema.value("properties", json::object());
    for (const auto& [key, value] : doc.items()) {
      if (props.contains(key)) {
        validate_against_schema(value, props[key], join(path, key));
      } else if (!schema.value("additionalProperties", true)) {
        throw ConfigError(join(path, key), "unknown field");
      }
    }
  }
  if (doc.is_array()) {
    const auto n = doc.size();
    if (schema.contains("minItems") && n < schema["minItems"].get<std::size_t>()) {
      throw ConfigError(where, "needs at least " + schema["minItems"].dump() + " items");
    }
    if (schema.contains("maxItems") && n > schema["maxItems"].get<std::size_t>()) {
      throw ConfigError(where, "allows at most " + schema["maxItems"].dump() + " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < n; ++i) validate_against_schema(doc[i], schema["items"], where + "[" + std::to_string(i) + "]");
    }
  }
}

ExperimentConfig config_from_json(const json& doc, const std::optional<std::filesystem::path>& data_dir) {
  validate_against_schema(doc, config_schema());
  ExperimentConfig c;
  c.name = doc.value("name", c.name);

  const json ds = doc.value("dataset", json::object());
  if (ds.contains("path") == ds.contains("synthetic")) {
    throw ConfigError("dataset", "give exactly one of 'path' or 'synthetic'");
  }
  if (ds.contains("path")) {
    std::filesystem::path p = ds["path"].get<std::string>();
    if (p.is_relative() && data_dir) p = *data_dir / p;
    c.dataset_path = p;
  } else {
    const json& s = ds["synthetic"];
    SyntheticSpec spec;
    spec.kind = parse_synthetic_kind(s["kind"].get<std::string>());
    spec.n_users = s.value("n_users", spec.n_users);
    spec.n_items = s.value("n_items", spec.n_items);
    spec.n_events = s.value("n_events", spec.n_events);
    spec.seed = s.value("seed", spec.seed);
    spec.drift_point = s.value("drift_point", spec.drift_point);
    spec.repeat_prob = s.value("repeat_prob", spec.repeat_prob);
    spec.d_e = s.value("d_e", spec.d_e);
    spec.d_n = s.value("d_n", spec.d_n);
    spec.label_signal = s.value("label_signal", spec.label_signal);
    spec.mean_gap = s.value("mean_gap", spec.mean_gap);
    spec.random_node_features = s.value("random_node_features", spec.random_node_features);
    c.synthetic = spec;
  }

  if (doc.contains("split")) {
    for (std::size_t i = 0; i < 4; ++i) c.split[i] = doc["split"][i].get<double>();
    double total = 0.0;
    for (double f : c.split) total += f;
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split", "fractions must sum to 1");
  }
  if (doc.contains("inductive")) c.inductive_fraction = doc["inductive"]["node_fraction"].get<double>();

  const json m = doc.value("model", json::object());
  BackboneConfig& b = c.backbone.config;
  c.backbone.name = m.value("backbone", c.backbone.name);
  b.d_emb = m.value("d", b.d_emb);
  b.d_mem = m.value("d_mem", b.d_mem);
  b.d_t = m.value("d_t", b.d_t);
  b.n_heads = m.value("n_heads", b.n_heads);
  b.K = m.value("K", b.K);
  b.dropout = m.value("dropout", b.dropout);
  if (b.d_emb % b.n_heads != 0) throw ConfigError("model.n_heads", "must divide model.d");
  c.paradigm.d_pos = m.value("d_pos", c.paradigm.d_pos);
  c.paradigm.d_prompt = m.value("prompt_dim", 0);

  const json p = doc.value("paradigm", json::object());
  c.paradigm.mode = parse_mode(p.value("mode", "prompt"));
  c.paradigm.task = parse_task(p.value("task", "link_prediction"));
  c.paradigm.variant = parse_prompt_variant(p.value("tprog", "projection"));
  c.paradigm.n_classes = p.value("n_classes", c.paradigm.n_classes);
  if (p.contains("nc_strategy")) c.paradigm.nc_strategy = parse_nc_strategy(p["nc_strategy"].get<std::string>());
  c.paradigm.validate();
  const int d_prompt = c.paradigm.d_prompt > 0 ? c.paradigm.d_prompt : b.d_emb;
  if (c.paradigm.variant == PromptVariant::Transformer && d_prompt % b.n_heads != 0) {
    throw ConfigError("model.prompt_dim", "must be divisible by model.n_heads for the transformer generator");
  }
  if (!is_temporal_generator(c.paradigm.variant) && c.paradigm.d_prompt > 0 && c.paradigm.d_prompt != b.d_emb) {
    throw ConfigError("model.prompt_dim", "static prompts take the embedding width");
  }

  const json t = doc.value("training", json::object());
  c.pretrain_batch = t.value("pretrain_batch", c.pretrain_batch);
  c.prompt_batch = t.value("prompt_batch", c.prompt_batch);
  c.eval_batch = t.value("eval_batch", c.eval_batch);
  c.lr = t.value("lr", c.lr);
  if (t.contains("prompt_lr")) c.prompt_lr = t["prompt_lr"].get<double>();
  c.max_epochs = t.value("max_epochs", c.max_epochs);
  c.patience = t.value("patience", c.patience);
  c.evaluate_baseline = t.value("evaluate_baseline", c.evaluate_baseline);

  if (doc.contains("seeds")) c.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
  c.output_dir = doc.value("output_dir", c.output_dir.string());
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
  }
  std::optional<std::filesystem::path> data_dir;
  if (const char* env = std::getenv("TIGLAB_DATA_DIR"); env != nullptr && *env != '\0') data_dir = env;
  return config_from_json(doc, data_dir);
}

json config_to_json(const ExperimentConfig& c) {
  json ds;
  if (c.dataset_path) {
    ds["path"] = c.dataset_path->string();
  } else if (c.synthetic) {
    const SyntheticSpec& s = *c.synthetic;
    ds["synthetic"] = {{"kind", to_string(s.kind)},       {"n_users", s.n_users},
                       {"n_items", s.n_items},            {"n_events", s.n_events},
                       {"seed", s.seed},                  {"drift_point", s.drift_point},
                       {"repeat_prob", s.repeat_prob},    {"d_e", s.d_e},
                       {"d_n", s.d_n},                    {"label_signal", s.label_signal},
                       {"mean_gap", s.mean_gap},          {"random_node_features", s.random_node_features}};
  }
  const BackboneConfig& b = c.backbone.config;
  json doc = {
      {"name", c.name},
      {"dataset", ds},
      {"split", c.split},
      {"model",
       {{"backbone", c.backbone.name}, {"d", b.d_emb}, {"d_mem", b.d_mem}, {"d_t", b.d_t},
        {"d_pos", c.paradigm.d_pos}, {"n_heads", b.n_heads}, {"K", b.K}, {"dropout", b.dropout}}},
      {"paradigm",
       {{"mode", to_string(c.paradigm.mode)}, {"task", to_string(c.paradigm.task)},
        {"tprog", to_string(c.paradigm.variant)}, {"n_classes", c.paradigm.n_classes}}},
      {"training",
       {{"pretrain_batch", c.pretrain_batch}, {"prompt_batch", c.prompt_batch}, {"eval_batch", c.eval_batch},
        {"lr", c.lr}, {"max_epochs", c.max_epochs}, {"patience", c.patience},
        {"evaluate_baseline", c.evaluate_baseline}}},
      {"seeds", c.seeds},
      {"output_dir", c.output_dir.string()},
  };
  if (c.paradigm.d_prompt > 0) doc["model"]["prompt_dim"] = c.paradigm.d_prompt;
  if (c.paradigm.nc_strategy) doc["paradigm"]["nc_strategy"] = to_string(*c.paradigm.nc_strategy);
  if (c.prompt_lr) doc["training"]["prompt_lr"] = *c.prompt_lr;
  if (c.inductive_fraction) doc["inductive"] = {{"node_fraction", *c.inductive_fraction}};
  return doc;
}

TrainConfig pretrain_settings(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainConfig t;
  t.batch_size = cfg.pretrain_batch;
  t.lr = cfg.lr;
  t.max_epochs = cfg.max_epochs;
  t.patience = cfg.patience;
  t.seed = seed;
  t.eval_batch_size = cfg.eval_batch;
  return t;
}

TrainConfig prompt_settings(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainConfig t = pretrain_settings(cfg, seed);
  t.batch_size = cfg.prompt_batch;
  if (cfg.prompt_lr) t.lr = *cfg.prompt_lr;
  return t;
}

TemporalGraph load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset_path) return build_graph(load_jodie_csv(*cfg.dataset_path));
  if (cfg.synthetic) return generate_synthetic(*cfg.synthetic);
  throw ConfigError("dataset", "no dataset configured");
}

}  // namespace tiglab
