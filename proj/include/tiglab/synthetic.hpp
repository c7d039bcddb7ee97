#pragma once

#include "tiglab/graph_store.hpp"

#include <cstdint>
#include <string>

namespace tiglab {

enum class SyntheticKind { PlantedRepeat, PlantedDrift, HeteroNodes };

std::string to_string(SyntheticKind k);
SyntheticKind parse_synthetic_kind(const std::string& s);

/// Desk-scale bipartite streams with known structure.
///
/// planted_repeat: each event picks a uniform user who returns to a personal
///   favorite item with probability `repeat_prob`, otherwise a uniform item.
/// planted_drift: as planted_repeat, but every favorite is redrawn once the
///   stream passes `drift_point` (a fraction of the events).
/// hetero_nodes: users carry a fixed binary label; every event's state label is
///   the user's label and feature 0 carries +-label_signal plus unit noise.
struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::PlantedRepeat;
  std::int64_t n_users = 100;
  std::int64_t n_items = 50;
  std::int64_t n_events = 4000;
  std::uint64_t seed = 0;
  double drift_point = 0.52;
  double repeat_prob = 0.8;
  int d_e = 8;
  int d_n = 8;
  double label_signal = 0.5;
  double mean_gap = 1.0;  // mean inter-event time
  bool random_node_features = true;  // N(0,1) identity features; zeros otherwise
};

EventStream generate_synthetic_stream(const SyntheticSpec& spec);
TemporalGraph generate_synthetic(const SyntheticSpec& spec);

}  // namespace tiglab
