#pragma once

#include "tiglab/autograd.hpp"
#include "tiglab/backbone.hpp"
#include "tiglab/graph_store.hpp"
#include "tiglab/nn.hpp"
#include "tiglab/time_encoder.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

namespace tiglab {

enum class PromptVariant { Vanilla, Transformer, Projection, StaticOutput, StaticInput };

std::string to_string(PromptVariant v);
PromptVariant parse_prompt_variant(const std::string& s);

/// Vanilla, Transformer and Projection generate per-node prompts; the static
/// variants apply one shared vector to every node.
inline bool is_temporal_generator(PromptVariant v) {
  return v == PromptVariant::Vanilla || v == PromptVariant::Transformer || v == PromptVariant::Projection;
}

struct PromptConfig {
  PromptVariant variant = PromptVariant::Projection;
  int d = 172;        // prompt width
  int d_z = 0;        // backbone embedding width; 0 means equal to d
  int K = 10;         // neighbor cap for the transformer generator
  int d_pos = 16;     // rank-position embedding width
  int n_heads = 2;
  std::int64_t n_nodes = 0;
  int d_e = 0;
  int d_t = 0;
  int d_n = 0;        // node-feature width (input-style static prompt)
};

/// Inputs a generator may need beyond the node ids themselves.
struct PromptContext {
  const TemporalGraph* graph = nullptr;
  TimeEncoder* time_encoder = nullptr;
  /// Backbone embeddings for arbitrary (node, time) queries (transformer tokens).
  std::function<ag::Var(std::span<const NodeQuery>)> embed;
  /// Per query: t minus the node's last interaction time (projection generator).
  std::span<const double> elapsed;
};

/// One transformer encoder layer (post-norm): self-attention then a feed-forward block.
struct EncoderLayer {
  nn::Linear q, k, v, o;
  ag::Parameter ln1_gamma, ln1_beta;
  nn::Mlp2 ffn;
  ag::Parameter ln2_gamma, ln2_beta;
  int n_heads = 2;

  EncoderLayer() = default;
  EncoderLayer(const std::string& name, int width, int n_heads, std::mt19937_64& rng);

  /// Tokens of segment s occupy rows [offsets[s], offsets[s+1]) and attend within the segment.
  ag::Var operator()(const ag::Var& tokens, std::span<const Index> offsets);
  void collect(ag::ParamList& out);
};

class PromptState {
 public:
  PromptState(const PromptConfig& cfg, std::uint64_t seed);

  PromptVariant variant() const { return cfg_.variant; }
  int embedding_width() const { return cfg_.d_z > 0 ? cfg_.d_z : cfg_.d; }
  const PromptConfig& config() const { return cfg_; }

  /// Rows of the per-node table.
  ag::Var vanilla(std::span<const NodeId> nodes);

  /// Tokens z_v | z_u | pos(rank) | e_uv | phi(t - t_uv) over v's K most recent
  /// neighbors (newest first), projected, encoded, mean-pooled and read out.
  /// `z_queries` holds z_v for each query row.
  ag::Var transformer(const PromptContext& ctx, std::span<const NodeQuery> queries, const ag::Var& z_queries);

  /// MLP(personal_v | phi(elapsed_v)).
  ag::Var projection(std::span<const NodeId> nodes, std::span<const double> elapsed, TimeEncoder& time_encoder);

  /// Dispatches to the per-node generator of this state's variant.
  ag::Var generate(const PromptContext& ctx, std::span<const NodeQuery> queries, const ag::Var& z_queries);

  /// Output-style: z + s on every row. Input-style: returns the 1 x d_n offset for the backbone read path.
  ag::Var static_output(const ag::Var& z);
  ag::Var static_input_offset();

  /// Token matrix (before projection) for one query, exposed for field-by-field checks.
  Mat transformer_tokens(const PromptContext& ctx, const NodeQuery& query, const RowVec& z_query);

  ag::ParamList parameters();
  std::int64_t count_parameters();

  // Vanilla
  ag::Parameter table;
  // Transformer
  ag::Parameter positions;  // K x d_pos
  nn::Linear token_proj;     // token -> d
  EncoderLayer encoder;
  nn::Linear readout;        // d -> d
  ag::Parameter no_history;  // 1 x d
  // Projection
  ag::Parameter personal;  // |V| x d
  nn::Mlp2 projection_mlp;  // d + d_t -> d -> d, final layer zero-initialized
  // Static
  ag::Parameter shared;  // 1 x d_z (output) or 1 x d_n (input)

 private:
  PromptConfig cfg_;
};

inline ag::Var static_prompt(PromptState& state, const ag::Var& z) { return state.static_output(z); }

std::int64_t count_prompt_parameters(PromptState& state);

}  // namespace tiglab
