// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: tiglab_acceptance [criterion numbers...]   (default: all)
// Exit status is 0 when every evaluated criterion passes. A criterion whose input
// data is absent prints FAIL with "not evaluated" and does not change the status.

#include "gradcheck.hpp"
#include "tiglab/checkpoint.hpp"
#include "tiglab/config.hpp"
#include "tiglab/evaluation.hpp"
#include "tiglab/experiment.hpp"
#include "tiglab/fusion_head.hpp"
#include "tiglab/metrics.hpp"
#include "tiglab/orchestration.hpp"
#include "tiglab/time_encoder.hpp"
#include "tiglab/tprog.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace tiglab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool evaluated = true;
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

ExperimentConfig acceptance_config(const std::string& name) {
  std::optional<fs::path> data_dir;
  if (const char* env = std::getenv("TIGLAB_DATA_DIR"); env != nullptr && *env != '\0') data_dir = env;
  std::ifstream in(fs::path(TIGLAB_CONFIG_DIR) / (name + ".json"));
  return config_from_json(nlohmann::json::parse(in), data_dir);
}

// Audit counters gathered from every instrumented run in this process.
struct AuditTotals {
  std::int64_t runs = 0;
  std::int64_t gradient_events = 0;
  std::int64_t early_stop_events = 0;
  std::int64_t gradient_leaks = 0;     // gradient events at or past the validation boundary
  std::int64_t early_stop_leaks = 0;   // early-stopping events outside the validation stage
  std::vector<std::string> violations;

  void add(const DisciplineAudit& a, const SplitSpec& split) {
    ++runs;
    gradient_events += a.gradient_events();
    early_stop_events += a.early_stop_events();
    if (a.max_gradient_event() >= split.val_boundary()) ++gradient_leaks;
    if (a.early_stop_events() > 0 && !split.range(Stage::Val).contains(a.max_early_stop_event())) ++early_stop_leaks;
  }
};

AuditTotals g_audit;

// Pre-trains one seed with the audit attached.
PretrainResult audited_pretrain(const TemporalGraph& g, const SplitSpec& split, const ExperimentConfig& cfg,
                                std::uint64_t seed) {
  DisciplineAudit audit(split);
  PretrainOptions po;
  po.audit = &audit;
  PretrainResult r = pretrain(g, split, cfg.backbone, pretrain_settings(cfg, seed), po);
  g_audit.add(audit, split);
  return r;
}

StageResult audited_stage(Artifacts& art, const TemporalGraph& g, const SplitSpec& split, const ParadigmSpec& spec,
                          const TrainConfig& tc) {
  DisciplineAudit audit(split);
  StageOptions so;
  so.audit = &audit;
  StageResult r = spec.task == Task::NodeClassification ? run_nc_strategy(nullptr, art, g, split, spec, tc, so)
                                                        : run_paradigm(art, g, split, spec, tc, so);
  g_audit.add(audit, split);
  return r;
}

// ---------------------------------------------------------------------------

Outcome metric_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(1, 25), level(0, 7);
  std::uniform_real_distribution<double> cont(0.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto draw = [&] { return trial % 2 == 0 ? level(rng) / 7.0 : cont(rng); };
    std::vector<double> pos(static_cast<std::size_t>(size(rng))), neg(static_cast<std::size_t>(size(rng)));
    for (auto& s : pos) s = draw();
    for (auto& s : neg) s = draw();

    // AP oracle: rank every item by pairwise comparison (earlier input first on ties).
    std::vector<double> all(pos);
    all.insert(all.end(), neg.begin(), neg.end());
    std::vector<std::pair<std::size_t, double>> ranked;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      std::size_t rank = 0, hits = 0;
      for (std::size_t j = 0; j < all.size(); ++j) {
        if (all[j] > all[i] || (all[j] == all[i] && j <= i)) {
          ++rank;
          hits += j < pos.size();
        }
      }
      ranked.push_back({rank, static_cast<double>(hits) / static_cast<double>(rank)});
    }
    std::sort(ranked.begin(), ranked.end());
    double ap = 0.0;
    for (const auto& r : ranked) ap += r.second;
    ap /= static_cast<double>(pos.size());
    if (average_precision(pos, neg) != ap) ++mismatches;

    // AUROC oracle: every positive/negative pair, ties counting one half.
    long long twice = 0;
    for (double p : pos)
      for (double n : neg) twice += p > n ? 2 : (p == n ? 1 : 0);
    const double au = static_cast<double>(twice) / (2.0 * static_cast<double>(pos.size() * neg.size()));
    std::vector<int> labels(pos.size(), 1);
    labels.resize(all.size(), 0);
    if (auroc(all, labels) != au) ++mismatches;
  }
  const double secs = since(t0);
  return {true, mismatches == 0 && secs < 10.0,
          std::to_string(mismatches) + " mismatches over 1000 instances, " + fmt(secs, 2) + " s"};
}

Outcome freeze_contract() {
  // Every variant on a link stream, plus node classification on a labeled stream.
  std::vector<std::string> broken;
  int checked = 0;
  for (const char* name : {"planted_drift", "hetero_nodes"}) {
    ExperimentConfig cfg = acceptance_config(name);
    cfg.synthetic->n_events = 1000;
    cfg.max_epochs = 2;
    const TemporalGraph g = load_dataset(cfg);
    const SplitSpec split = chronological_split(g, cfg.split);
    const PretrainResult pr = audited_pretrain(g, split, cfg, 0);
    for (PromptVariant v : {PromptVariant::Vanilla, PromptVariant::Transformer, PromptVariant::Projection,
                            PromptVariant::StaticOutput, PromptVariant::StaticInput}) {
      Artifacts art = pr.artifacts.clone();
      ParadigmSpec spec = cfg.paradigm;
      spec.mode = Mode::Prompt;
      spec.variant = v;
      const std::string before = serialize_parameters(art.backbone_parameters());
      audited_stage(art, g, split, spec, prompt_settings(cfg, 0));
      ++checked;
      if (serialize_parameters(art.backbone_parameters()) != before) broken.push_back(std::string(name) + "/" + to_string(v));
    }
  }
  std::string detail = std::to_string(checked) + " prompt-mode runs, backbone bytes identical in " +
                       std::to_string(checked - static_cast<int>(broken.size()));
  for (const auto& b : broken) detail += "; changed: " + b;
  return {true, broken.empty(), detail};
}

Outcome gradient_checks() {
  using testing::grad_check;
  using testing::random_mat;
  using testing::weighted_sum;
  const auto t0 = Clock::now();
  std::vector<std::pair<std::string, double>> results;

  TemporalGraph g;
  {
    std::vector<std::tuple<NodeId, NodeId, double>> edges;
    for (int i = 0; i < 30; ++i) edges.emplace_back(i % 4, (i * 5) % 3, 1.0 + i);
    EventStream s;
    s.n_users = 4;
    s.n_items = 3;
    s.d_e = 3;
    s.edge_feats = FeatureTable(30, 3);
    std::mt19937_64 rng(2);
    std::normal_distribution<float> n(0.0f, 1.0f);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto [u, v, t] = edges[i];
      s.events.push_back({u, 4 + v, t, -1, static_cast<std::int64_t>(i)});
      for (int f = 0; f < 3; ++f) s.edge_feats(static_cast<Index>(i), f) = n(rng);
    }
    BuildOptions bo;
    bo.zero_feature_dim = 2;
    g = build_graph(std::move(s), {}, bo);
  }
  TimeEncoder enc = init_time_encoder(3);
  enc.phase.value = random_mat(1, 3, 3, 0.3);
  const std::vector<double> deltas{0.4, 2.0, 7.5, 0.0};
  ag::ParamList te;
  enc.collect(te);
  results.push_back({"time_encoder", grad_check(te, [&] { return weighted_sum(enc.encode(deltas)); }).max_rel});

  const std::vector<NodeQuery> qs{{0, 12.0}, {5, 20.0}, {1, 0.5}, {6, 29.5}};
  std::vector<NodeId> nodes;
  for (const auto& q : qs) nodes.push_back(q.node);
  const std::vector<double> elapsed{0.5, 3.0, 0.0, 7.5};
  const Mat z_table = random_mat(g.n_nodes, 4, 4);
  PromptContext ctx;
  ctx.graph = &g;
  ctx.time_encoder = &enc;
  ctx.elapsed = elapsed;
  ctx.embed = [&](std::span<const NodeQuery> q) {
    Mat out(static_cast<Index>(q.size()), 4);
    for (std::size_t i = 0; i < q.size(); ++i) out.row(static_cast<Index>(i)) = z_table.row(q[i].node);
    return ag::constant(std::move(out));
  };
  for (PromptVariant v : {PromptVariant::Vanilla, PromptVariant::Transformer, PromptVariant::Projection,
                          PromptVariant::StaticOutput, PromptVariant::StaticInput}) {
    PromptConfig pc;
    pc.variant = v;
    pc.d = 4;
    pc.K = 3;
    pc.d_pos = 2;
    pc.n_nodes = g.n_nodes;
    pc.d_e = g.d_e;
    pc.d_t = 3;
    pc.d_n = g.d_n;
    PromptState s(pc, 5);
    // Move off the zero initialisation so every path carries gradient.
    for (ag::Parameter* p : s.parameters()) p->value = random_mat(p->value.rows(), p->value.cols(), 6, 0.5);
    ag::Parameter zq("zq", random_mat(4, 4, 7));
    ag::ParamList ps = s.parameters();
    ps.push_back(&zq);
    std::function<ag::Var()> loss;
    if (is_temporal_generator(v)) {
      loss = [&] { return weighted_sum(s.generate(ctx, qs, ag::leaf(zq))); };
    } else if (v == PromptVariant::StaticOutput) {
      loss = [&] { return weighted_sum(s.static_output(ag::leaf(zq))); };
    } else {
      loss = [&] { return weighted_sum(ag::repeat_row(s.static_input_offset(), 3)); };
    }
    results.push_back({"tprog_" + to_string(v), grad_check(ps, loss).max_rel});
  }

  FusionParams rho(4, 8, 6);
  ag::Parameter z("z", random_mat(5, 4, 9)), p("p", random_mat(5, 6, 10)), zv("zv", random_mat(5, 4, 11));
  ag::ParamList fp{&z, &p};
  rho.collect(fp);
  results.push_back({"fusion", grad_check(fp, [&] { return weighted_sum(fuse(rho, ag::leaf(z), ag::leaf(p))); }).max_rel});
  LinkHead lh(4, 12);
  ag::ParamList lp{&z, &zv};
  lh.collect(lp);
  const std::vector<double> y{1, 0, 1, 0, 0};
  results.push_back(
      {"link_head", grad_check(lp, [&] { return ag::bce_with_logits(lh.logits(ag::leaf(z), ag::leaf(zv)), y); }).max_rel});
  NodeHead nh(4, 2, 13, 0.0);
  ag::ParamList np{&z};
  nh.collect(np);
  const std::vector<int> c{0, 1, 1, 0, 1};
  results.push_back({"node_head", grad_check(np, [&] { return ag::softmax_cross_entropy(nh.logits(ag::leaf(z)), c); }).max_rel});

  const double secs = since(t0);
  double worst = 0.0;
  std::string detail;
  for (const auto& [name, rel] : results) {
    worst = std::max(worst, rel);
    detail += name + "=" + fmt(rel, 8) + " ";
  }
  detail += "(" + fmt(secs, 2) + " s)";
  return {true, worst < 1e-3 && secs < 60.0, "max rel error " + fmt(worst, 8) + "; " + detail};
}

Outcome planted_drift_recovery() {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = acceptance_config("planted_drift");
  const TemporalGraph g = load_dataset(cfg);
  const SplitSpec split = chronological_split(g, cfg.split);
  std::vector<double> base, prompt, finetune;
  std::string per_seed;
  for (std::uint64_t seed : cfg.seeds) {
    const PretrainResult pr = audited_pretrain(g, split, cfg, seed);
    EvalOptions frozen;
    frozen.path = ScorePath::Pretext;
    frozen.negative_seed = seed;
    Artifacts b = pr.artifacts.clone();
    base.push_back(evaluate_link_prediction(b, g, split, frozen).ap);

    EvalOptions eo;
    eo.negative_seed = seed;
    ParadigmSpec spec = cfg.paradigm;
    spec.variant = PromptVariant::Projection;
    spec.mode = Mode::Prompt;
    Artifacts p = pr.artifacts.clone();
    audited_stage(p, g, split, spec, prompt_settings(cfg, seed));
    prompt.push_back(evaluate_link_prediction(p, g, split, eo).ap);

    spec.mode = Mode::PromptFinetune;
    Artifacts f = pr.artifacts.clone();
    audited_stage(f, g, split, spec, prompt_settings(cfg, seed));
    finetune.push_back(evaluate_link_prediction(f, g, split, eo).ap);
    per_seed += " seed" + std::to_string(seed) + "[" + fmt(base.back(), 3) + "/" + fmt(prompt.back(), 3) + "/" +
                fmt(finetune.back(), 3) + "]";
  }
  const double secs = since(t0);
  const double gain = mean_of(prompt) - mean_of(base);
  const bool ok = gain >= 0.05 && mean_of(finetune) >= mean_of(prompt) && secs < 300.0;
  return {true, ok,
          "mean AP frozen " + fmt(mean_of(base)) + ", prompt " + fmt(mean_of(prompt)) + " (gain " + fmt(gain) +
              "), prompt_finetune " + fmt(mean_of(finetune)) + ";" + per_seed + " frozen/prompt/finetune, " +
              fmt(secs, 1) + " s"};
}

Outcome per_node_vs_uniform() {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = acceptance_config("hetero_nodes");
  const TemporalGraph g = load_dataset(cfg);
  const SplitSpec split = chronological_split(g, cfg.split);
  std::map<PromptVariant, std::vector<double>> scores;
  for (std::uint64_t seed : cfg.seeds) {
    const PretrainResult pr = audited_pretrain(g, split, cfg, seed);
    for (PromptVariant v : {PromptVariant::Vanilla, PromptVariant::Projection, PromptVariant::StaticOutput,
                            PromptVariant::StaticInput}) {
      Artifacts art = pr.artifacts.clone();
      ParadigmSpec spec = cfg.paradigm;
      spec.variant = v;
      audited_stage(art, g, split, spec, prompt_settings(cfg, seed));
      EvalOptions eo;
      eo.negative_seed = seed;
      scores[v].push_back(evaluate_node_classification(art, g, split, eo).auroc);
    }
  }
  const double secs = since(t0);
  const double static_best =
      std::max(mean_of(scores[PromptVariant::StaticOutput]), mean_of(scores[PromptVariant::StaticInput]));
  const double margin =
      std::min(mean_of(scores[PromptVariant::Vanilla]), mean_of(scores[PromptVariant::Projection])) - static_best;
  std::string detail = "mean AUROC";
  for (const auto& [v, s] : scores) detail += " " + to_string(v) + "=" + fmt(mean_of(s));
  detail += "; margin " + fmt(margin) + ", " + fmt(secs, 1) + " s";
  return {true, margin >= 0.03 && secs < 300.0, detail};
}

Outcome real_data() {
  const char* dir = std::getenv("TIGLAB_DATA_DIR");
  if (dir == nullptr || !fs::exists(fs::path(dir) / "wikipedia.csv")) {
    return {false, false, "not evaluated: $TIGLAB_DATA_DIR/wikipedia.csv is absent"};
  }
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = acceptance_config("wikipedia");
  const TemporalGraph g = load_dataset(cfg);
  const SplitSpec split = chronological_split(g, cfg.split);
  std::vector<double> base, prompt;
  for (std::uint64_t seed : cfg.seeds) {
    const PretrainResult pr = audited_pretrain(g, split, cfg, seed);
    EvalOptions frozen;
    frozen.path = ScorePath::Pretext;
    frozen.negative_seed = seed;
    Artifacts b = pr.artifacts.clone();
    base.push_back(evaluate_link_prediction(b, g, split, frozen).ap);
    Artifacts p = pr.artifacts.clone();
    ParadigmSpec spec = cfg.paradigm;
    spec.variant = PromptVariant::Projection;
    spec.mode = Mode::Prompt;
    audited_stage(p, g, split, spec, prompt_settings(cfg, seed));
    EvalOptions eo;
    eo.negative_seed = seed;
    prompt.push_back(evaluate_link_prediction(p, g, split, eo).ap);
  }
  const double delta = mean_of(prompt) - mean_of(base);
  return {true, mean_of(base) >= 0.90 && delta >= 0.0,
          "mean transductive AP pre-trained " + fmt(mean_of(base)) + ", with projection prompt " + fmt(mean_of(prompt)) +
              " (delta " + fmt(delta) + "), " + fmt(since(t0), 0) + " s"};
}

Outcome prompt_data_trend() {
  const auto t0 = Clock::now();
  const ExperimentConfig base = acceptance_config("planted_drift");
  const std::vector<double> fractions{0.05, 0.10, 0.15, 0.20};
  std::vector<double> means;
  std::string detail;
  for (double f : fractions) {
    const ExperimentConfig cfg = sweep_point(base, SweepAxis::PromptFraction, f);
    const TemporalGraph g = load_dataset(cfg);
    const SplitSpec split = chronological_split(g, cfg.split);
    std::vector<double> ap;
    for (std::uint64_t seed : cfg.seeds) {
      const PretrainResult pr = audited_pretrain(g, split, cfg, seed);
      Artifacts art = pr.artifacts.clone();
      audited_stage(art, g, split, cfg.paradigm, prompt_settings(cfg, seed));
      EvalOptions eo;
      eo.negative_seed = seed;
      ap.push_back(evaluate_link_prediction(art, g, split, eo).ap);
    }
    means.push_back(mean_of(ap));
    detail += fmt(f, 2) + "->" + fmt(means.back()) + " ";
  }
  const double rho = spearman(fractions, means);
  const double secs = since(t0);
  return {true, rho >= 0.0 && secs < 900.0, "Spearman " + fmt(rho, 3) + "; " + detail + "(" + fmt(secs, 1) + " s)"};
}

Outcome efficiency_shape() {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = acceptance_config("mooc_scale");
  const EfficiencyRecord rec = report_efficiency(cfg, {PromptVariant::Vanilla, PromptVariant::Projection});
  std::map<std::string, std::map<std::string, EfficiencyEntry>> by;
  for (const auto& e : rec.entries) by[e.variant][e.stage] = e;
  const auto& van = by["vanilla"];
  const bool fewer = van.at("prompt").trainable_scalars < van.at("prompt_finetune").trainable_scalars;
  bool fast = true;
  std::string detail = "vanilla trainable " + std::to_string(van.at("prompt").trainable_scalars) + " vs " +
                       std::to_string(van.at("prompt_finetune").trainable_scalars) + ";";
  for (const char* v : {"vanilla", "projection"}) {
    const double ratio = by[v].at("prompt").seconds / by[v].at("prompt_finetune").seconds;
    fast = fast && ratio < 0.5;
    detail += std::string(" ") + v + " epoch " + fmt(by[v].at("prompt").seconds, 1) + " s / " +
              fmt(by[v].at("prompt_finetune").seconds, 1) + " s = " + fmt(ratio, 3);
  }
  detail += " (" + fmt(since(t0), 0) + " s)";
  return {true, fewer && fast, detail};
}

Outcome data_discipline() {
  // Negative controls: the hooks must fire on a leak.
  const ExperimentConfig cfg = acceptance_config("planted_drift");
  const TemporalGraph g = load_dataset(cfg);
  const SplitSpec split = chronological_split(g, cfg.split);
  DisciplineAudit probe(split);
  bool grad_hook = false, stop_hook = false;
  const std::int64_t val_event[] = {split.val_boundary()};
  const std::int64_t test_event[] = {split.range(Stage::Test).begin};
  try {
    probe.record_gradient(val_event);
  } catch (const DisciplineViolation&) {
    grad_hook = true;
  }
  try {
    probe.record_early_stop(test_event);
  } catch (const DisciplineViolation&) {
    stop_hook = true;
  }
  // An inductive run adds masked-node coverage to the instrumented runs of other criteria.
  ExperimentConfig ind = cfg;
  ind.max_epochs = 3;
  const InductiveSpec mask = mask_inductive_nodes(g, split, 0.1, 0);
  DisciplineAudit audit(split);
  PretrainOptions po;
  po.audit = &audit;
  po.inductive = &mask;
  PretrainResult pr = pretrain(g, split, ind.backbone, pretrain_settings(ind, 0), po);
  g_audit.add(audit, split);
  DisciplineAudit stage_audit(split);
  StageOptions so;
  so.audit = &stage_audit;
  so.inductive = &mask;
  ParadigmSpec spec = ind.paradigm;
  spec.mode = Mode::PromptFinetune;
  run_paradigm(pr.artifacts, g, split, spec, prompt_settings(ind, 0), so);
  g_audit.add(stage_audit, split);

  const bool ok = grad_hook && stop_hook && g_audit.gradient_leaks == 0 && g_audit.early_stop_leaks == 0 &&
                  g_audit.runs > 0 && g_audit.gradient_events > 0;
  return {true, ok,
          std::to_string(g_audit.runs) + " instrumented runs, " + std::to_string(g_audit.gradient_events) +
              " gradient events, " + std::to_string(g_audit.early_stop_events) + " early-stopping events; leaks " +
              std::to_string(g_audit.gradient_leaks) + " gradient / " + std::to_string(g_audit.early_stop_leaks) +
              " early-stop; hooks fire on injected leaks: " + (grad_hook && stop_hook ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric oracles", metric_oracles},
      {"freeze contract", freeze_contract},
      {"gradient checks", gradient_checks},
      {"planted-drift recovery", planted_drift_recovery},
      {"per-node vs uniform prompts", per_node_vs_uniform},
      {"real-data directional check", real_data},
      {"prompt-data trend", prompt_data_trend},
      {"efficiency shape", efficiency_shape},
      {"data discipline", data_discipline},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {true, false, std::string("error: ") + e.what()};
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (o.evaluated && !o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
