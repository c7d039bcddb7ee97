#pragma once

#include "tiglab/autograd.hpp"
#include "tiglab/graph_store.hpp"
#include "tiglab/nn.hpp"
#include "tiglab/time_encoder.hpp"

#include <functional>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tiglab {

struct BackboneConfig {
  int d_mem = 172;
  int d_emb = 172;  // embedding width; equals the prompt width d
  int d_t = 172;
  int n_heads = 2;
  int K = 10;
  double dropout = 0.1;
};

/// Raw interaction message waiting to be folded into a node's memory.
struct RawMessage {
  RowVec self_mem;
  RowVec other_mem;
  RowVec edge_feat;
  double t = 0.0;
  std::int64_t event_idx = 0;
};

struct MemoryState {
  Mat memory;                      // n_nodes x d_mem
  std::vector<double> last_update;  // per node
  std::vector<std::vector<RawMessage>> pending;
  std::vector<NodeId> dirty;  // nodes with a non-empty pending buffer

  std::int64_t n_nodes() const { return memory.rows(); }
};

MemoryState init_state(std::int64_t n_nodes, int d_mem);

/// Differentiable memory rows produced by folding pending messages.
struct MemoryUpdate {
  std::vector<NodeId> nodes;
  ag::Var memory;  // rows aligned with `nodes`; undefined when nothing was pending
  std::vector<double> times;

  bool empty() const { return nodes.empty(); }
};

/// Memory as seen by one batch: updated rows take precedence over the stored state.
class MemoryView {
 public:
  MemoryView(const MemoryState& state, const MemoryUpdate* update);
  ag::Var rows(std::span<const NodeId> nodes) const;

 private:
  const MemoryState* state_;
  const MemoryUpdate* update_;
  std::unordered_map<NodeId, Index> updated_row_;
};

struct NodeQuery {
  NodeId node = 0;
  double t = 0.0;
};

struct EmbedOptions {
  int K = 10;
  bool training = false;
  std::mt19937_64* rng = nullptr;
  /// Optional 1 x d_n offset added to every node input feature (input-style prompt).
  const ag::Var* input_offset = nullptr;
};

/// Interface of a memory-based TIG model f_Theta.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual std::string name() const = 0;
  virtual const BackboneConfig& config() const = 0;

  /// Folds each dirty node's most recent pending message into a new memory row.
  /// Does not modify `state`; see `commit`.
  virtual MemoryUpdate compute_memory_update(const MemoryState& state) = 0;

  /// Embeddings for (node, time) queries, one row per query in request order.
  virtual ag::Var embed(const TemporalGraph& graph, const MemoryView& memory, std::span<const NodeQuery> queries,
                        const EmbedOptions& opts) = 0;

  /// Pretext link logits for row-aligned source/destination embeddings (n x 1).
  virtual ag::Var link_logits(const ag::Var& z_src, const ag::Var& z_dst) = 0;

  virtual TimeEncoder& time_encoder() = 0;

  /// Theta: every trainable scalar except the shared time encoder.
  virtual ag::ParamList parameters() = 0;

  virtual std::unique_ptr<Backbone> clone() const = 0;
};

/// Writes the update into the state, advances last_update and clears the consumed buffers.
void commit(MemoryState& state, const MemoryUpdate& update);

/// Queues one message per endpoint for each event, using the current memory.
void store_messages(MemoryState& state, const TemporalGraph& graph, std::span<const std::int64_t> events);

/// No-grad flush: compute_memory_update followed by commit.
void flush_and_update_memory(MemoryState& state, Backbone& backbone);

/// Memory GRU over aggregated messages plus a single temporal attention layer.
class MemoryAttentionBackbone final : public Backbone {
 public:
  MemoryAttentionBackbone(const BackboneConfig& cfg, int d_n, int d_e, std::uint64_t seed);
  MemoryAttentionBackbone(const MemoryAttentionBackbone& other);
  MemoryAttentionBackbone& operator=(const MemoryAttentionBackbone&) = delete;

  std::string name() const override { return "memory_attention"; }
  const BackboneConfig& config() const override { return cfg_; }
  MemoryUpdate compute_memory_update(const MemoryState& state) override;
  ag::Var embed(const TemporalGraph& graph, const MemoryView& memory, std::span<const NodeQuery> queries,
                const EmbedOptions& opts) override;
  ag::Var link_logits(const ag::Var& z_src, const ag::Var& z_dst) override;
  TimeEncoder& time_encoder() override { return time_; }
  ag::ParamList parameters() override;
  std::unique_ptr<Backbone> clone() const override;

  // Exposed for hand-computed oracles in tests.
  nn::Mlp2 message_mlp;  // [self_mem, other_mem, phi(dt), e] -> d_mem
  nn::GruCell gru;
  nn::Linear query_proj;  // [mem, x, phi(0)] -> d_emb
  nn::Linear key_proj;    // [mem, x, e, phi(dt)] -> d_emb
  nn::Linear value_proj;
  ag::Parameter out_proj;  // d_emb x d_emb, no bias
  nn::Mlp2 merge;          // [attn, mem, x] -> d_emb
  nn::Mlp2 link_head;      // [z_src, z_dst] -> 1

 private:
  BackboneConfig cfg_;
  int d_n_;
  int d_e_;
  TimeEncoder time_;
};

using BackboneFactory =
    std::function<std::unique_ptr<Backbone>(const BackboneConfig&, int d_n, int d_e, std::uint64_t seed)>;

/// Registration point for alternate backbones; "memory_attention" is built in.
void register_backbone(const std::string& name, BackboneFactory factory);
std::unique_ptr<Backbone> make_backbone(const std::string& name, const BackboneConfig& cfg, int d_n, int d_e,
                                        std::uint64_t seed);
std::vector<std::string> registered_backbones();

/// Node features of `nodes` as a constant (float table widened to double).
Mat gather_features(const FeatureTable& table, std::span<const NodeId> rows);

}  // namespace tiglab
