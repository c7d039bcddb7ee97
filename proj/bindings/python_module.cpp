// Thin Python surface: configs and reports cross the boundary as JSON text.
#include "tiglab/config.hpp"
#include "tiglab/experiment.hpp"
#include "tiglab/metrics.hpp"
#include "tiglab/synthetic.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

namespace py = pybind11;
using namespace tiglab;

namespace {

ExperimentConfig parse_config(const std::string& text) {
  return config_from_json(nlohmann::json::parse(text));
}

py::dict synthetic_events(const std::string& kind, std::int64_t n_users, std::int64_t n_items, std::int64_t n_events,
                          std::uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = parse_synthetic_kind(kind);
  spec.n_users = n_users;
  spec.n_items = n_items;
  spec.n_events = n_events;
  spec.seed = seed;
  const EventStream s = generate_synthetic_stream(spec);
  std::vector<std::int64_t> src, dst;
  std::vector<double> t;
  std::vector<int> label;
  for (const auto& e : s.events) {
    src.push_back(e.src);
    dst.push_back(e.dst);
    t.push_back(e.t);
    label.push_back(e.label);
  }
  py::dict out;
  out["src"] = src;
  out["dst"] = dst;
  out["t"] = t;
  out["label"] = label;
  out["n_users"] = s.n_users;
  out["n_items"] = s.n_items;
  return out;
}

}  // namespace

PYBIND11_MODULE(_tiglab, m) {
  m.doc() = "Prompt tuning on temporal interaction graphs";

  // Most recently registered translators are tried first.
  py::register_exception<Error>(m, "TiglabError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("average_precision", [](const std::vector<double>& pos, const std::vector<double>& neg) {
    return average_precision(pos, neg);
  }, py::arg("pos_scores"), py::arg("neg_scores"));
  m.def("auroc", [](const std::vector<double>& s, const std::vector<int>& y) { return auroc(s, y); },
        py::arg("scores"), py::arg("labels"));
  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman(x, y); });

  m.def("synthetic_events", &synthetic_events, py::arg("kind"), py::arg("n_users") = 100, py::arg("n_items") = 50,
        py::arg("n_events") = 4000, py::arg("seed") = 0);

  // Validates and fills defaults; returns the normalized config as JSON text.
  m.def("normalize_config", [](const std::string& text) { return config_to_json(parse_config(text)).dump(); });

  m.def("run", [](const std::string& text, bool write_outputs) {
    const ExperimentConfig cfg = parse_config(text);
    py::gil_scoped_release release;
    RunOptions opts;
    opts.write_outputs = write_outputs;
    return run_experiment(cfg, opts).to_json().dump();
  }, py::arg("config_json"), py::arg("write_outputs") = false);

  m.def("efficiency", [](const std::string& text) {
    const ExperimentConfig cfg = parse_config(text);
    py::gil_scoped_release release;
    return report_efficiency(cfg).to_json().dump();
  }, py::arg("config_json"));
}
