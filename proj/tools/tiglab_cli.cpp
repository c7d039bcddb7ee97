// Command-line front end: run, sweep, efficiency, plot.
#include "tiglab/errors.hpp"
#include "tiglab/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw tiglab::ConfigError("values", "'" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw tiglab::ConfigError("values", "empty value list");
  return out;
}

void print_summary(const tiglab::MetricsReport& r) {
  std::cout << r.name << " [" << r.dataset << ", " << r.tprog << ", " << r.paradigm << "]\n";
  for (const auto& [k, m] : r.aggregate) {
    std::cout << "  " << k << ": " << m.mean;
    if (m.has_std) {
      std::cout << " +- " << m.std;
    } else {
      std::cout << " (std n/a)";
    }
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tiglab: temporal interaction graph pre-training and prompt tuning"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis, values, in_dir, kind, checkpoint;
  std::vector<std::uint64_t> seeds;
  bool force = false;

  auto* run = app.add_subcommand("run", "pre-train, adapt and evaluate");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--seed", seeds, "override the config's seeds")->expected(1, -1);
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--checkpoint", checkpoint, "reuse a saved backbone instead of pre-training");
  run->add_flag("--force", force, "accept a checkpoint whose config hash differs");

  auto* sw = app.add_subcommand("sweep", "one run per axis value");
  sw->add_option("--config", config_path, "experiment config (JSON)")->required();
  sw->add_option("--axis", axis, "prompt_fraction, prompt_dim or pretrain_fraction")->required();
  sw->add_option("--values", values, "comma-separated values")->required();
  sw->add_option("--out", out_dir, "output directory");

  auto* eff = app.add_subcommand("efficiency", "per-epoch timing and trainable-scalar counts");
  eff->add_option("--config", config_path, "experiment config (JSON)")->required();
  eff->add_option("--out", out_dir, "output directory");

  auto* plot = app.add_subcommand("plot", "CSV and SVG from report directories");
  plot->add_option("--in", in_dir, "directory holding report.json files")->required();
  plot->add_option("--kind", kind, "sweep or comparison")->required()->check(CLI::IsMember({"sweep", "comparison"}));
  plot->add_option("--out", out_dir, "output directory (defaults to --in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run || *sw || *eff) {
      tiglab::ExperimentConfig cfg = tiglab::load_config(config_path);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (*run) {
        if (!seeds.empty()) cfg.seeds = seeds;
        tiglab::RunOptions opts;
        if (!checkpoint.empty()) opts.checkpoint = checkpoint;
        opts.force = force;
        const auto report = tiglab::run_experiment(cfg, opts);
        print_summary(report);
        std::cout << "outputs in " << cfg.output_dir.string() << '\n';
      } else if (*sw) {
        const auto ax = tiglab::parse_sweep_axis(axis);
        const auto reports = tiglab::sweep(cfg, ax, parse_values(values));
        for (const auto& r : reports) {
          std::cout << r.sweep.dump() << ' ';
          print_summary(r);
        }
        std::cout << "sweep table in " << (cfg.output_dir / ("sweep_" + axis) / "sweep.csv").string() << '\n';
      } else {
        const auto rec = tiglab::report_efficiency(cfg);
        const std::string text = rec.to_json().dump(2);
        std::filesystem::create_directories(cfg.output_dir);
        std::ofstream(cfg.output_dir / "efficiency.json") << text << '\n';
        std::cout << text << '\n';
      }
    } else if (*plot) {
      const auto reports = tiglab::collect_reports(in_dir);
      const auto files =
          tiglab::emit_plots(reports, tiglab::parse_plot_kind(kind), out_dir.empty() ? in_dir : out_dir);
      for (const auto& f : files) std::cout << f.string() << '\n';
    }
  } catch (const tiglab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const tiglab::StageFailure& e) {
    std::cerr << "error " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
