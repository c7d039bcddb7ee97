#include "tiglab/experiment.hpp"

#include "tiglab/checkpoint.hpp"
#include "tiglab/errors.hpp"
#include "tiglab/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace tiglab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <class F>
auto tagged(const std::string& stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(stage, e.what());
  }
}

std::string number_label(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json log_json(const TrainingLog& log) {
  json epochs = json::array();
  for (const EpochLog& e : log.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_metric", e.val_metric},
                      {"train_seconds", e.train_seconds},
                      {"seconds", e.seconds}});
  }
  return {{"epochs", epochs},
          {"best_epoch", log.best_epoch},
          {"best_val", log.best_val},
          {"early_stopped", log.early_stopped},
          {"trainable_scalars", log.trainable_scalars}};
}

json mean_std_json(const MeanStd& m, std::size_t n) {
  json j = {{"mean", m.mean}, {"n", n}};
  if (m.has_std) {
    j["std"] = m.std;
  } else {
    j["std"] = "n/a";
  }
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string dataset_label(const ExperimentConfig& cfg) {
  if (cfg.dataset_path) return cfg.dataset_path->stem().string();
  return cfg.synthetic ? to_string(cfg.synthetic->kind) : "unknown";
}

}  // namespace

std::string dataset_hash(const TemporalGraph& graph) {
  std::string bytes;
  auto put = [&bytes](const void* p, std::size_t n) { bytes.append(static_cast<const char*>(p), n); };
  for (const InteractionEvent& e : graph.events) {
    put(&e.src, sizeof e.src);
    put(&e.dst, sizeof e.dst);
    put(&e.t, sizeof e.t);
    put(&e.label, sizeof e.label);
    put(&e.feat_row, sizeof e.feat_row);
  }
  put(graph.edge_feats.data(), sizeof(float) * static_cast<std::size_t>(graph.edge_feats.size()));
  put(graph.node_feats.data(), sizeof(float) * static_cast<std::size_t>(graph.node_feats.size()));
  return content_hash(bytes);
}

json MetricsReport::to_json() const {
  json per_seed = json::array();
  for (const SeedResult& r : seeds) {
    per_seed.push_back({{"seed", r.seed},
                        {"metrics", r.metrics},
                        {"seconds", r.seconds},
                        {"trainable_scalars", r.trainable_scalars},
                        {"pretrain_log", log_json(r.pretrain_log)},
                        {"prompt_log", log_json(r.prompt_log)}});
  }
  json agg = json::object();
  for (const auto& [k, v] : aggregate) agg[k] = mean_std_json(v, seeds.size());
  json j = {{"schema_version", 1},  {"name", name},       {"dataset", dataset},
            {"backbone", backbone}, {"tprog", tprog},     {"paradigm", paradigm},
            {"task", task},         {"primary_metric", primary_metric},
            {"aggregate", agg},     {"seeds", per_seed},  {"config", config}};
  if (!sweep.is_null()) j["sweep"] = sweep;
  return j;
}

MetricsReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (cfg.seeds.empty()) throw ConfigError("seeds", "at least one seed required");
  MetricsReport rep;
  rep.name = cfg.name;
  rep.dataset = dataset_label(cfg);
  rep.backbone = cfg.backbone.name;
  rep.tprog = to_string(cfg.paradigm.variant);
  rep.paradigm = to_string(cfg.paradigm.mode);
  rep.task = to_string(cfg.paradigm.task);
  rep.primary_metric = cfg.paradigm.task == Task::LinkPrediction ? "transductive_ap" : "auroc";
  rep.config = config_to_json(cfg);
  rep.sweep = opts.sweep;

  const TemporalGraph graph = tagged("load", [&] { return load_dataset(cfg); });
  const SplitSpec split = chronological_split(graph, cfg.split);
  const std::string data_hash =
      tagged("load", [&] { return cfg.dataset_path ? content_hash_file(*cfg.dataset_path) : dataset_hash(graph); });

  const fs::path out = cfg.output_dir;
  if (opts.write_outputs) fs::create_directories(out);
  json seed_manifest = json::array();
  std::string records;

  const bool link = cfg.paradigm.task == Task::LinkPrediction;
  for (std::uint64_t seed : cfg.seeds) {
    SeedResult r;
    r.seed = seed;
    const fs::path seed_dir = out / ("seed_" + std::to_string(seed));
    if (opts.write_outputs) fs::create_directories(seed_dir);

    std::optional<InductiveSpec> inductive;
    if (cfg.inductive_fraction) {
      inductive = tagged("split", [&] { return mask_inductive_nodes(graph, split, *cfg.inductive_fraction, seed); });
    }
    const InductiveSpec* ind = inductive ? &*inductive : nullptr;
    DisciplineAudit audit(split);

    auto t0 = Clock::now();
    PretrainResult pr = tagged("pretrain", [&] {
      if (opts.checkpoint) {
        return PretrainResult{load_checkpoint(*opts.checkpoint, cfg.backbone, graph.d_n, graph.d_e, opts.force), {}};
      }
      PretrainOptions po;
      po.inductive = ind;
      po.audit = &audit;
      return pretrain(graph, split, cfg.backbone, pretrain_settings(cfg, seed), po);
    });
    r.seconds["pretrain"] = since(t0);
    r.pretrain_log = pr.log;
    r.trainable_scalars["pretrain"] = pr.log.trainable_scalars;
    r.metrics["pretrain_val_ap"] = pr.log.best_val;
    if (opts.write_outputs) {
      save_checkpoint(seed_dir / "checkpoint.tiglab", pr.artifacts, cfg.backbone, graph.d_n, graph.d_e,
                      "seed=" + std::to_string(seed));
    }

    Artifacts art = pr.artifacts.clone();
    t0 = Clock::now();
    const StageResult stage = tagged("prompt", [&] {
      StageOptions so;
      so.inductive = ind;
      so.audit = &audit;
      const TrainConfig tc = prompt_settings(cfg, seed);
      if (link) return run_paradigm(art, graph, split, cfg.paradigm, tc, so);
      const NcStrategy strategy = cfg.paradigm.nc_strategy.value_or(NcStrategy::Reinit);
      if (strategy == NcStrategy::Reinit) return run_nc_strategy(nullptr, art, graph, split, cfg.paradigm, tc, so);
      Artifacts lp = pr.artifacts.clone();
      ParadigmSpec lp_spec = cfg.paradigm;
      lp_spec.task = Task::LinkPrediction;
      lp_spec.nc_strategy.reset();
      run_paradigm(lp, graph, split, lp_spec, tc, so);
      return run_nc_strategy(&lp, art, graph, split, cfg.paradigm, tc, so);
    });
    r.seconds["prompt"] = since(t0);
    r.prompt_log = stage.log;
    r.trainable_scalars["prompt"] = stage.trainable_scalars;
    r.trainable_scalars["frozen"] = stage.frozen_scalars;

    t0 = Clock::now();
    std::vector<std::pair<std::string, std::pair<std::string, double>>> evaluated;  // (tprog, (setting, value))
    tagged("eval", [&] {
      EvalOptions eo;
      eo.inductive = ind;
      eo.negative_seed = seed * 7919ULL + 1;
      eo.batch_size = cfg.eval_batch;
      if (link) {
        std::vector<Setting> settings{Setting::Transductive};
        if (ind != nullptr) settings.push_back(Setting::Inductive);
        for (Setting s : settings) {
          eo.setting = s;
          eo.path = ScorePath::Prompted;
          const double ap = evaluate_link_prediction(art, graph, split, eo).ap;
          r.metrics[to_string(s) + "_ap"] = ap;
          evaluated.push_back({rep.tprog, {to_string(s), ap}});
          if (cfg.evaluate_baseline) {
            eo.path = ScorePath::Pretext;
            const double base = evaluate_link_prediction(pr.artifacts, graph, split, eo).ap;
            r.metrics["baseline_" + to_string(s) + "_ap"] = base;
            evaluated.push_back({"none", {to_string(s), base}});
          }
        }
      } else {
        const double a = evaluate_node_classification(art, graph, split, eo).auroc;
        r.metrics["auroc"] = a;
        evaluated.push_back({rep.tprog, {"node_classification", a}});
      }
      return 0;
    });
    r.seconds["eval"] = since(t0);

    for (const auto& [tprog, sv] : evaluated) {
      json rec = {{"dataset", rep.dataset}, {"backbone", rep.backbone}, {"tprog", tprog},
                  {"paradigm", tprog == "none" ? "frozen" : rep.paradigm}, {"setting", sv.first},
                  {"seed", seed}, {"wall_clock", r.seconds["pretrain"] + r.seconds["prompt"] + r.seconds["eval"]}};
      rec[link ? "ap" : "auroc"] = sv.second;
      records += rec.dump() + "\n";
    }

    if (opts.write_outputs) {
      Archive down;
      down.kind = "downstream";
      down.tag = rep.tprog;
      down.config_hash = backbone_config_hash(cfg.backbone, graph.d_n, graph.d_e);
      for (const ag::Parameter* p : art.downstream_parameters()) down.tensors.push_back({p->name, p->value});
      write_archive(seed_dir / "downstream.tiglab", down);
      if (cfg.paradigm.mode == Mode::PromptFinetune) {
        save_checkpoint(seed_dir / "checkpoint_tuned.tiglab", art, cfg.backbone, graph.d_n, graph.d_e,
                        "seed=" + std::to_string(seed));
      }
    }
    seed_manifest.push_back({{"seed", seed},
                             {"seconds", r.seconds},
                             {"discipline",
                              {{"gradient_events", audit.gradient_events()},
                               {"max_gradient_event", audit.max_gradient_event()},
                               {"early_stop_events", audit.early_stop_events()},
                               {"max_early_stop_event", audit.max_early_stop_event()}}}});
    rep.seeds.push_back(std::move(r));
  }

  std::set<std::string> keys;
  for (const SeedResult& r : rep.seeds) {
    for (const auto& [k, v] : r.metrics) keys.insert(k);
  }
  for (const std::string& k : keys) {
    std::vector<double> vals;
    for (const SeedResult& r : rep.seeds) {
      if (auto it = r.metrics.find(k); it != r.metrics.end()) vals.push_back(it->second);
    }
    rep.aggregate[k] = mean_std(vals);
  }

  if (opts.write_outputs) {
    write_text(out / "report.json", rep.to_json().dump(2) + "\n");
    write_text(out / "metrics.jsonl", records);
    const json manifest = {
        {"schema_version", 1},
        {"config", rep.config},
        {"seeds", cfg.seeds},
        {"dataset", {{"source", cfg.dataset_path ? cfg.dataset_path->string() : std::string("synthetic")},
                     {"content_hash", data_hash},
                     {"n_events", graph.n_events()},
                     {"n_nodes", graph.n_nodes}}},
        {"stage_boundaries", split.boundaries},
        {"runs", seed_manifest},
    };
    write_text(out / "manifest.json", manifest.dump(2) + "\n");
  }
  return rep;
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::PromptFraction: return "prompt_fraction";
    case SweepAxis::PromptDim: return "prompt_dim";
    case SweepAxis::PretrainFraction: return "pretrain_fraction";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& s) {
  for (SweepAxis a : {SweepAxis::PromptFraction, SweepAxis::PromptDim, SweepAxis::PretrainFraction}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("axis", "unknown sweep axis '" + s + "'");
}

ExperimentConfig sweep_point(const ExperimentConfig& base, SweepAxis axis, double value) {
  ExperimentConfig c = base;
  c.output_dir = base.output_dir / ("sweep_" + to_string(axis)) / number_label(value);
  switch (axis) {
    case SweepAxis::PromptFraction: {
      const double rest = 1.0 - base.split[0] - value;
      if (!(value > 0.0) || !(rest > 0.0)) {
        throw ConfigError("values", "prompt fraction " + number_label(value) + " leaves no room for val/test");
      }
      c.split = {base.split[0], value, rest / 2.0, rest / 2.0};
      break;
    }
    case SweepAxis::PromptDim:
      if (value < 1.0 || std::floor(value) != value) throw ConfigError("values", "prompt_dim must be a positive integer");
      c.paradigm.d_prompt = static_cast<int>(value);
      break;
    case SweepAxis::PretrainFraction: {
      const double prompt = 1.0 - value - base.split[2] - base.split[3];
      if (!(value > 0.0) || !(prompt > 0.0)) {
        throw ConfigError("values", "pretrain fraction " + number_label(value) + " leaves no prompt stage");
      }
      c.split = {value, prompt, base.split[2], base.split[3]};
      break;
    }
  }
  return c;
}

std::vector<MetricsReport> sweep(const ExperimentConfig& cfg, SweepAxis axis, std::vector<double> values,
                                 const RunOptions& opts) {
  if (values.empty()) throw ConfigError("values", "sweep needs at least one value");
  std::sort(values.begin(), values.end());
  std::vector<ExperimentConfig> points;
  for (double v : values) points.push_back(sweep_point(cfg, axis, v));  // validate everything before compute

  std::vector<MetricsReport> reports;
  for (std::size_t i = 0; i < points.size(); ++i) {
    RunOptions o = opts;
    o.sweep = {{"axis", to_string(axis)}, {"value", values[i]}};
    reports.push_back(run_experiment(points[i], o));
  }
  if (opts.write_outputs) {
    std::ostringstream csv;
    csv << "axis,value,metric,mean,std,n\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const MetricsReport& r = reports[i];
      const MeanStd& m = r.aggregate.at(r.primary_metric);
      csv << to_string(axis) << ',' << number_label(values[i]) << ',' << r.primary_metric << ','
          << number_label(m.mean) << ',' << (m.has_std ? number_label(m.std) : "n/a") << ',' << r.seeds.size()
          << '\n';
    }
    const fs::path dir = cfg.output_dir / ("sweep_" + to_string(axis));
    fs::create_directories(dir);
    write_text(dir / "sweep.csv", csv.str());
  }
  return reports;
}

json EfficiencyRecord::to_json() const {
  json entries_json = json::array();
  for (const auto& e : entries) {
    entries_json.push_back(
        {{"variant", e.variant}, {"stage", e.stage}, {"seconds", e.seconds}, {"trainable_scalars", e.trainable_scalars}});
  }
  json ratios = json::object();
  for (const auto& p : entries) {
    if (p.stage != "prompt") continue;
    for (const auto& f : entries) {
      if (f.variant == p.variant && f.stage == "prompt_finetune") {
        ratios[p.variant] = {{"seconds_ratio", p.seconds / f.seconds},
                             {"trainable_ratio", static_cast<double>(p.trainable_scalars) /
                                                     static_cast<double>(f.trainable_scalars)}};
      }
    }
  }
  return {{"entries", entries_json}, {"backbone_scalars", backbone_scalars}, {"ratios", ratios}};
}

EfficiencyRecord report_efficiency(const ExperimentConfig& cfg, const std::vector<PromptVariant>& variants) {
  const TemporalGraph graph = tagged("load", [&] { return load_dataset(cfg); });
  const SplitSpec split = chronological_split(graph, cfg.split);
  const std::uint64_t seed = cfg.seeds.empty() ? 0 : cfg.seeds.front();

  // Timing does not depend on trained values, so an untrained backbone stands in for the checkpoint.
  Artifacts base;
  base.backbone = make_backbone(cfg.backbone.name, cfg.backbone.config, graph.d_n, graph.d_e, seed);
  base.memory = init_state(graph.n_nodes, cfg.backbone.config.d_mem);

  EfficiencyRecord rec;
  rec.backbone_scalars = ag::count_scalars(base.backbone_parameters());
  TrainConfig tc = prompt_settings(cfg, seed);
  tc.max_epochs = 1;
  StageOptions so;
  so.skip_validation = true;
  for (PromptVariant v : variants) {
    for (Mode m : {Mode::Prompt, Mode::PromptFinetune}) {
      Artifacts a = base.clone();
      ParadigmSpec ps = cfg.paradigm;
      ps.task = Task::LinkPrediction;
      ps.nc_strategy.reset();
      ps.variant = v;
      ps.mode = m;
      if (!is_temporal_generator(v)) ps.d_prompt = 0;
      const StageResult r = tagged("efficiency", [&] { return run_paradigm(a, graph, split, ps, tc, so); });
      rec.entries.push_back({to_string(v), to_string(m), r.log.epochs.front().train_seconds, r.trainable_scalars});
    }
  }
  return rec;
}

PlotKind parse_plot_kind(const std::string& s) {
  if (s == "sweep") return PlotKind::Sweep;
  if (s == "comparison") return PlotKind::Comparison;
  throw ConfigError("kind", "unknown plot kind '" + s + "'");
}

std::vector<json> collect_reports(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "report.json") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<json> out;
  for (const fs::path& p : paths) {
    std::ifstream in(p);
    out.push_back(json::parse(in));
  }
  return out;
}

namespace {

struct Point {
  std::string group;
  std::string series;
  double x = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

double std_of(const json& agg) { return agg["std"].is_number() ? agg["std"].get<double>() : 0.0; }

constexpr double kW = 640, kH = 400, kL = 60, kR = 20, kT = 30, kB = 60;

double y_px(double v) { return kT + (1.0 - std::clamp(v, 0.0, 1.0)) * (kH - kT - kB); }

std::string svg_frame(const std::string& title, const std::string& ylabel) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n"
    << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    s << "<line x1=\"" << kL - 4 << "\" y1=\"" << y_px(v) << "\" x2=\"" << kL << "\" y2=\"" << y_px(v)
      << "\" stroke=\"black\"/><text x=\"" << kL - 8 << "\" y=\"" << y_px(v) + 4 << "\" text-anchor=\"end\">" << v
      << "</text>\n";
  }
  s << "<text x=\"16\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 16 " << kH / 2 << ")\" text-anchor=\"middle\">"
    << ylabel << "</text>\n";
  return s.str();
}

const char* kColors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};

}  // namespace

std::vector<fs::path> emit_plots(const std::vector<json>& reports, PlotKind kind, const fs::path& out_dir) {
  if (reports.empty()) throw ValidationError("no reports to plot");
  fs::create_directories(out_dir);
  std::vector<Point> pts;
  std::string metric = reports.front().value("primary_metric", "transductive_ap");
  for (const json& r : reports) {
    const std::string m = r.value("primary_metric", metric);
    if (!r.contains("aggregate") || !r["aggregate"].contains(m)) continue;
    const json& agg = r["aggregate"][m];
    if (kind == PlotKind::Sweep) {
      if (!r.contains("sweep")) continue;
      pts.push_back({r["sweep"]["axis"].get<std::string>(), r.value("tprog", ""), r["sweep"]["value"].get<double>(),
                     agg["mean"].get<double>(), std_of(agg)});
    } else {
      const std::string group = r.value("name", "run");
      pts.push_back({group, r.value("tprog", "") + "/" + r.value("paradigm", ""), 0.0, agg["mean"].get<double>(),
                     std_of(agg)});
      const std::string base = "baseline_" + m;
      if (r["aggregate"].contains(base)) {
        pts.push_back({group, "none/frozen", 0.0, r["aggregate"][base]["mean"].get<double>(),
                       std_of(r["aggregate"][base])});
      }
    }
  }
  if (pts.empty()) throw ValidationError("no plottable reports for this kind");

  std::vector<fs::path> written;
  std::ostringstream csv;
  std::ostringstream svg;
  if (kind == PlotKind::Sweep) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    csv << "axis,value,metric,mean,std\n";
    for (const Point& p : pts) {
      csv << p.group << ',' << number_label(p.x) << ',' << metric << ',' << number_label(p.mean) << ','
          << number_label(p.std) << '\n';
    }
    const double x0 = pts.front().x, x1 = pts.back().x;
    auto x_px = [&](double x) { return x1 > x0 ? kL + 20 + (x - x0) / (x1 - x0) * (kW - kL - kR - 40) : kW / 2; };
    svg << svg_frame("sweep over " + pts.front().group, metric);
    svg << "<polyline fill=\"none\" stroke=\"" << kColors[0] << "\" stroke-width=\"2\" points=\"";
    for (const Point& p : pts) svg << x_px(p.x) << ',' << y_px(p.mean) << ' ';
    svg << "\"/>\n";
    for (const Point& p : pts) {
      svg << "<line x1=\"" << x_px(p.x) << "\" y1=\"" << y_px(p.mean - p.std) << "\" x2=\"" << x_px(p.x)
          << "\" y2=\"" << y_px(p.mean + p.std) << "\" stroke=\"black\"/>\n"
          << "<circle cx=\"" << x_px(p.x) << "\" cy=\"" << y_px(p.mean) << "\" r=\"4\" fill=\"" << kColors[0]
          << "\"/>\n"
          << "<text x=\"" << x_px(p.x) << "\" y=\"" << kH - kB + 18 << "\" text-anchor=\"middle\">"
          << number_label(p.x) << "</text>\n";
    }
  } else {
    csv << "group,series,metric,mean,std\n";
    for (const Point& p : pts) {
      csv << p.group << ',' << p.series << ',' << metric << ',' << number_label(p.mean) << ','
          << number_label(p.std) << '\n';
    }
    std::vector<std::string> groups, series;
    for (const Point& p : pts) {
      if (std::find(groups.begin(), groups.end(), p.group) == groups.end()) groups.push_back(p.group);
      if (std::find(series.begin(), series.end(), p.series) == series.end()) series.push_back(p.series);
    }
    const double group_w = (kW - kL - kR) / static_cast<double>(groups.size());
    const double bar_w = group_w * 0.8 / static_cast<double>(series.size());
    svg << svg_frame("comparison", metric);
    for (const Point& p : pts) {
      const auto g = std::find(groups.begin(), groups.end(), p.group) - groups.begin();
      const auto s = std::find(series.begin(), series.end(), p.series) - series.begin();
      const double x = kL + g * group_w + group_w * 0.1 + s * bar_w;
      svg << "<rect x=\"" << x << "\" y=\"" << y_px(p.mean) << "\" width=\"" << bar_w * 0.9 << "\" height=\""
          << (kH - kB) - y_px(p.mean) << "\" fill=\"" << kColors[s % 6] << "\"/>\n"
          << "<line x1=\"" << x + bar_w * 0.45 << "\" y1=\"" << y_px(p.mean - p.std) << "\" x2=\"" << x + bar_w * 0.45
          << "\" y2=\"" << y_px(p.mean + p.std) << "\" stroke=\"black\"/>\n";
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      svg << "<text x=\"" << kL + (g + 0.5) * group_w << "\" y=\"" << kH - kB + 18 << "\" text-anchor=\"middle\">"
          << groups[g] << "</text>\n";
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
      svg << "<rect x=\"" << kL + 10 + 150 * s << "\" y=\"" << kH - 24 << "\" width=\"10\" height=\"10\" fill=\""
          << kColors[s % 6] << "\"/><text x=\"" << kL + 24 + 150 * s << "\" y=\"" << kH - 15 << "\">" << series[s]
          << "</text>\n";
    }
  }
  svg << "</svg>\n";
  const std::string stem = kind == PlotKind::Sweep ? "sweep" : "comparison";
  write_text(out_dir / (stem + ".csv"), csv.str());
  write_text(out_dir / (stem + ".svg"), svg.str());
  written.push_back(out_dir / (stem + ".csv"));
  written.push_back(out_dir / (stem + ".svg"));
  return written;
}

}  // namespace tiglab
