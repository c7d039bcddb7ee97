#pragma once

#include "tiglab/graph_store.hpp"

#include <random>
#include <tuple>
#include <vector>

namespace tiglab::testing {

/// Bipartite stream from (user, item, t) triples with seeded N(0,1) edge features.
/// Item ids are local (0-based) and get shifted by n_users, as the CSV loader does.
inline EventStream make_stream(std::int64_t n_users, std::int64_t n_items,
                               const std::vector<std::tuple<NodeId, NodeId, double>>& edges, int d_e = 3,
                               std::uint64_t seed = 3) {
  EventStream s;
  s.n_users = n_users;
  s.n_items = n_items;
  s.d_e = d_e;
  s.edge_feats = FeatureTable(static_cast<Eigen::Index>(edges.size()), d_e);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 1.0f);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [u, v, t] = edges[i];
    InteractionEvent e;
    e.src = u;
    e.dst = n_users + v;
    e.t = t;
    e.feat_row = static_cast<std::int64_t>(i);
    s.events.push_back(e);
    for (int f = 0; f < d_e; ++f) s.edge_feats(static_cast<Eigen::Index>(i), f) = n(rng);
  }
  return s;
}

/// A graph with n events cycling over users and items at t = 1, 2, ...
inline TemporalGraph cycle_graph(int n_events, std::int64_t n_users = 4, std::int64_t n_items = 3, int d_e = 3,
                                 int d_n = 2) {
  std::vector<std::tuple<NodeId, NodeId, double>> edges;
  for (int i = 0; i < n_events; ++i) edges.emplace_back(i % n_users, (i * 7 + i / n_users) % n_items, 1.0 + i);
  BuildOptions opts;
  opts.zero_feature_dim = d_n;
  return build_graph(make_stream(n_users, n_items, edges, d_e), {}, opts);
}

}  // namespace tiglab::testing
