#include "tiglab/synthetic.hpp"

#include "tiglab/errors.hpp"

#include <random>

namespace tiglab {

std::string to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::PlantedRepeat: return "planted_repeat";
    case SyntheticKind::PlantedDrift: return "planted_drift";
    case SyntheticKind::HeteroNodes: return "hetero_nodes";
  }
  return "unknown";
}

SyntheticKind parse_synthetic_kind(const std::string& s) {
  for (SyntheticKind k : {SyntheticKind::PlantedRepeat, SyntheticKind::PlantedDrift, SyntheticKind::HeteroNodes})
    if (to_string(k) == s) return k;
  throw ConfigError("dataset.synthetic.generator", "unknown generator '" + s + "'");
}

EventStream generate_synthetic_stream(const SyntheticSpec& spec) {
  if (spec.n_users < 1 || spec.n_items < 1 || spec.n_events < 1) {
    throw ConfigError("dataset.synthetic", "n_users, n_items and n_events must be positive");
  }
  if (spec.d_e < 1) throw ConfigError("dataset.synthetic.d_e", "must be positive");
  if (!(spec.repeat_prob >= 0.0 && spec.repeat_prob <= 1.0)) {
    throw ConfigError("dataset.synthetic.repeat_prob", "must lie in [0, 1]");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::int64_t> pick_user(0, spec.n_users - 1);
  std::uniform_int_distribution<std::int64_t> pick_item(0, spec.n_items - 1);
  std::bernoulli_distribution repeat(spec.repeat_prob);
  std::exponential_distribution<double> gap(1.0 / spec.mean_gap);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<std::int64_t> favorite(static_cast<std::size_t>(spec.n_users));
  for (auto& f : favorite) f = pick_item(rng);
  std::vector<int> label(static_cast<std::size_t>(spec.n_users), 0);
  if (spec.kind == SyntheticKind::HeteroNodes) {
    std::bernoulli_distribution coin(0.5);
    for (auto& l : label) l = coin(rng) ? 1 : 0;
  }
  const auto drift_at = static_cast<std::int64_t>(spec.drift_point * static_cast<double>(spec.n_events));

  EventStream s;
  s.n_users = spec.n_users;
  s.n_items = spec.n_items;
  s.d_e = spec.d_e;
  s.edge_feats = FeatureTable(spec.n_events, spec.d_e);
  s.events.reserve(static_cast<std::size_t>(spec.n_events));
  double t = 0.0;
  for (std::int64_t i = 0; i < spec.n_events; ++i) {
    if (spec.kind == SyntheticKind::PlantedDrift && i == drift_at) {
      for (auto& f : favorite) {
        const std::int64_t old = f;
        do f = pick_item(rng);
        while (f == old && spec.n_items > 1);
      }
    }
    t += gap(rng);
    const std::int64_t u = pick_user(rng);
    const std::int64_t item = repeat(rng) ? favorite[static_cast<std::size_t>(u)] : pick_item(rng);
    InteractionEvent e;
    e.src = u;
    e.dst = spec.n_users + item;
    e.t = t;
    e.feat_row = i;
    for (int f = 0; f < spec.d_e; ++f) s.edge_feats(i, f) = static_cast<float>(noise(rng));
    if (spec.kind == SyntheticKind::HeteroNodes) {
      const int l = label[static_cast<std::size_t>(u)];
      e.label = static_cast<std::int8_t>(l);
      s.edge_feats(i, 0) += static_cast<float>((l == 1 ? 1.0 : -1.0) * spec.label_signal);
    } else {
      e.label = 0;
    }
    s.events.push_back(e);
  }
  return s;
}

TemporalGraph generate_synthetic(const SyntheticSpec& spec) {
  BuildOptions opts;
  opts.zero_feature_dim = spec.d_n;
  EventStream stream = generate_synthetic_stream(spec);
  if (!spec.random_node_features) return build_graph(std::move(stream), {}, opts);
  // Separate stream so the events do not depend on this switch.
  std::mt19937_64 rng(spec.seed ^ 0x6e0de5f0ULL);
  std::normal_distribution<double> noise(0.0, 1.0);
  FeatureTable x(stream.n_users + stream.n_items, spec.d_n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(noise(rng));
  return build_graph(std::move(stream), std::move(x), opts);
}

}  // namespace tiglab
