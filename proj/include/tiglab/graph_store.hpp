#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace tiglab {

using NodeId = std::int64_t;
using FeatureTable = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Feature width used when a stream carries no node or edge features.
inline constexpr int kDefaultFeatureDim = 172;

/// One timestamped interaction. Its edge features live in row `feat_row` of the
/// owning feature table so that large streams stay contiguous.
struct InteractionEvent {
  NodeId src = 0;
  NodeId dst = 0;
  double t = 0.0;
  std::int8_t label = -1;  // dynamic state label of src at t; -1 when absent
  std::int64_t feat_row = 0;

  bool has_label() const { return label >= 0; }
};

struct EventStream {
  std::vector<InteractionEvent> events;
  FeatureTable edge_feats;  // one row per event, indexed by feat_row
  std::int64_t n_users = 0;
  std::int64_t n_items = 0;
  int d_e = 0;
};

/// Parses a Jodie-format CSV: header, then `user,item,timestamp,label,f1,...,fk`.
/// Item ids are shifted by n_users so users and items share one id space.
EventStream load_jodie_csv(const std::filesystem::path& path);

/// Writes a stream back in the same format; `load_jodie_csv` reproduces it exactly.
void write_jodie_csv(const std::filesystem::path& path, const EventStream& stream);

struct NeighborEntry {
  NodeId other;
  std::int64_t event_idx;
  double t;
};

/// Per-node adjacency in CSR form, each list ascending by (t, event index).
class NeighborIndex {
 public:
  NeighborIndex() = default;
  NeighborIndex(std::int64_t n_nodes, std::span<const InteractionEvent> events);

  std::span<const NeighborEntry> neighbors(NodeId v) const;
  std::int64_t n_nodes() const { return static_cast<std::int64_t>(offsets_.size()) - 1; }

  /// Up to K interactions of v strictly before t, newest first; ties favour the
  /// later event. Strictness keeps an event from seeing itself in batch processing.
  std::vector<NeighborEntry> recent(NodeId v, double t, int K) const;

 private:
  std::vector<std::int64_t> offsets_{0};
  std::vector<NeighborEntry> entries_;
};

struct TemporalGraph {
  std::vector<InteractionEvent> events;  // sorted by t, stable; feat_row == position
  FeatureTable edge_feats;
  FeatureTable node_feats;
  std::int64_t n_nodes = 0;
  std::int64_t n_users = 0;  // items occupy [n_users, n_nodes)
  int d_e = 0;
  int d_n = 0;
  NeighborIndex neighbors;

  std::int64_t n_events() const { return static_cast<std::int64_t>(events.size()); }
  double t_min() const { return events.empty() ? 0.0 : events.front().t; }
  bool bipartite() const { return n_users > 0 && n_users < n_nodes; }
};

struct BuildOptions {
  /// Width of the all-zero tables used when features are missing.
  int zero_feature_dim = kDefaultFeatureDim;
};

/// Sorts events stably by time, remaps feature rows, and builds the neighbor index.
/// `node_feats` may be empty, in which case an all-zero table is attached.
TemporalGraph build_graph(EventStream stream, FeatureTable node_feats = {}, const BuildOptions& opts = {});

inline std::vector<NeighborEntry> recent_neighbors(const NeighborIndex& index, NodeId v, double t, int K) {
  return index.recent(v, t, K);
}

enum class Stage { Pretrain = 0, Prompt = 1, Val = 2, Test = 3 };

struct EventRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  std::int64_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(std::int64_t i) const { return i >= begin && i < end; }
};

struct SplitSpec {
  std::array<double, 4> fractions{};
  std::array<std::int64_t, 4> boundaries{};  // end index of each stage

  EventRange range(Stage s) const;
  std::int64_t val_boundary() const { return boundaries[1]; }
};

enum class SplitMode {
  Prompt,    // four non-empty stages
  Baseline,  // prompt stage may be empty (70/15/15 protocol)
};

SplitSpec chronological_split(const TemporalGraph& graph, const std::array<double, 4>& fractions,
                              SplitMode mode = SplitMode::Prompt);

struct InductiveSpec {
  std::unordered_set<NodeId> unseen_nodes;
  std::uint64_t seed = 0;

  bool touches_unseen(const InteractionEvent& e) const {
    return unseen_nodes.contains(e.src) || unseen_nodes.contains(e.dst);
  }
};

/// Samples floor(node_fraction * |nodes in val/test|) nodes to hide from training.
InductiveSpec mask_inductive_nodes(const TemporalGraph& graph, const SplitSpec& split, double node_fraction,
                                   std::uint64_t seed);

/// Event indices in `range` whose endpoints are all visible. Throws when a
/// non-empty range becomes empty.
std::vector<std::int64_t> training_events(const TemporalGraph& graph, EventRange range,
                                          const InductiveSpec* inductive);

/// Events of `range` that touch at least one hidden node.
std::vector<std::int64_t> inductive_eval_events(const TemporalGraph& graph, EventRange range,
                                                const InductiveSpec& inductive);

/// Events of `range` whose endpoints both appear in `seen`.
std::vector<std::int64_t> transductive_eval_events(const TemporalGraph& graph, EventRange range,
                                                   const std::vector<bool>& seen);

/// Nodes touched by the given events.
std::vector<bool> nodes_seen(const TemporalGraph& graph, std::span<const std::int64_t> events);

/// Last interaction time per node, replayed event by event.
class LastInteractionTracker {
 public:
  explicit LastInteractionTracker(std::int64_t n_nodes = 0);

  void observe(const InteractionEvent& e);
  std::optional<double> last(NodeId v) const;
  void reset();

 private:
  std::vector<double> last_;
  std::vector<bool> seen_;
};

}  // namespace tiglab
