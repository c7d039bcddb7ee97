#include "tiglab/tprog.hpp"

#include "tiglab/errors.hpp"

#include <cmath>

namespace tiglab {

namespace {

Mat uniform(Index rows, Index cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Mat m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace

std::string to_string(PromptVariant v) {
  switch (v) {
    case PromptVariant::Vanilla: return "vanilla";
    case PromptVariant::Transformer: return "transformer";
    case PromptVariant::Projection: return "projection";
    case PromptVariant::StaticOutput: return "static_output";
    case PromptVariant::StaticInput: return "static_input";
  }
  return "unknown";
}

PromptVariant parse_prompt_variant(const std::string& s) {
  for (PromptVariant v : {PromptVariant::Vanilla, PromptVariant::Transformer, PromptVariant::Projection,
                          PromptVariant::StaticOutput, PromptVariant::StaticInput}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("paradigm.tprog", "unknown prompt variant '" + s + "'");
}

EncoderLayer::EncoderLayer(const std::string& name, int width, int heads, std::mt19937_64& rng)
    : q(name + ".q", width, width, rng),
      k(name + ".k", width, width, rng),
      v(name + ".v", width, width, rng),
      o(name + ".o", width, width, rng),
      ln1_gamma(name + ".ln1.gamma", Mat::Ones(1, width)),
      ln1_beta(name + ".ln1.beta", Mat::Zero(1, width)),
      ffn(name + ".ffn", width, width, width, rng),
      ln2_gamma(name + ".ln2.gamma", Mat::Ones(1, width)),
      ln2_beta(name + ".ln2.beta", Mat::Zero(1, width)),
      n_heads(heads) {
  if (heads < 1 || width % heads != 0) throw ValidationError("encoder width must be divisible by the head count");
}

ag::Var EncoderLayer::operator()(const ag::Var& tokens, std::span<const Index> offsets) {
  const ag::Var attn = ag::segment_attention(q(tokens), k(tokens), v(tokens), offsets, offsets, n_heads);
  const ag::Var x1 = ag::layer_norm(ag::add(tokens, o(attn)), ag::leaf(ln1_gamma), ag::leaf(ln1_beta));
  return ag::layer_norm(ag::add(x1, ffn(x1)), ag::leaf(ln2_gamma), ag::leaf(ln2_beta));
}

void EncoderLayer::collect(ag::ParamList& out) {
  q.collect(out);
  k.collect(out);
  v.collect(out);
  o.collect(out);
  out.push_back(&ln1_gamma);
  out.push_back(&ln1_beta);
  ffn.collect(out);
  out.push_back(&ln2_gamma);
  out.push_back(&ln2_beta);
}

PromptState::PromptState(const PromptConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.d < 1) throw ValidationError("prompt width must be positive");
  std::mt19937_64 rng(seed);
  switch (cfg.variant) {
    case PromptVariant::Vanilla:
      if (cfg.n_nodes < 1) throw ValidationError("vanilla prompts need the node count");
      table = ag::Parameter("prompt.table", Mat::Zero(cfg.n_nodes, cfg.d));
      break;
    case PromptVariant::Transformer: {
      if (cfg.K < 1 || cfg.d_pos < 1 || cfg.d_t < 1) throw ValidationError("transformer prompt dimensions invalid");
      positions = ag::Parameter("prompt.positions", uniform(cfg.K, cfg.d_pos, 1.0 / std::sqrt(cfg.d_pos), rng));
      const int token_width = 2 * embedding_width() + cfg.d_pos + cfg.d_e + cfg.d_t;
      token_proj = nn::Linear("prompt.token_proj", token_width, cfg.d, rng);
      encoder = EncoderLayer("prompt.encoder", cfg.d, cfg.n_heads, rng);
      readout = nn::Linear("prompt.readout", cfg.d, cfg.d, rng);
      no_history = ag::Parameter("prompt.no_history", uniform(1, cfg.d, 1.0 / std::sqrt(cfg.d), rng));
      break;
    }
    case PromptVariant::Projection:
      if (cfg.n_nodes < 1 || cfg.d_t < 1) throw ValidationError("projection prompts need node count and time width");
      personal = ag::Parameter("prompt.personal", Mat::Zero(cfg.n_nodes, cfg.d));
      projection_mlp = nn::Mlp2("prompt.projection", cfg.d + cfg.d_t, cfg.d, cfg.d, rng);
      projection_mlp.fc2.zero_init();
      break;
    case PromptVariant::StaticOutput:
      shared = ag::Parameter("prompt.shared", Mat::Zero(1, embedding_width()));
      break;
    case PromptVariant::StaticInput:
      if (cfg.d_n < 1) throw ValidationError("input-style prompt needs the node-feature width");
      shared = ag::Parameter("prompt.shared", Mat::Zero(1, cfg.d_n));
      break;
  }
}

ag::Var PromptState::vanilla(std::span<const NodeId> nodes) {
  if (cfg_.variant != PromptVariant::Vanilla) throw ValidationError("not a vanilla prompt state");
  std::vector<Index> rows(nodes.begin(), nodes.end());
  return ag::gather_param_rows(table, rows);
}

ag::Var PromptState::transformer(const PromptContext& ctx, std::span<const NodeQuery> queries, const ag::Var& z_queries) {
  if (cfg_.variant != PromptVariant::Transformer) throw ValidationError("not a transformer prompt state");
  const int dz = embedding_width();
  if (z_queries.cols() != dz || z_queries.rows() != static_cast<Index>(queries.size())) {
    throw DimensionError("transformer prompt: embeddings are " + std::to_string(z_queries.rows()) + "x" +
                         std::to_string(z_queries.cols()) + ", expected " + std::to_string(queries.size()) + "x" +
                         std::to_string(dz));
  }
  if (ctx.graph == nullptr || ctx.time_encoder == nullptr) throw ValidationError("transformer prompt: missing context");
  const TemporalGraph& g = *ctx.graph;

  std::vector<Index> owner, rank;
  std::vector<NodeQuery> nbr_queries;
  std::vector<double> dts;
  std::vector<NodeId> feat_rows;
  std::vector<Index> count(queries.size(), 0);
  for (std::size_t r = 0; r < queries.size(); ++r) {
    const auto nbrs = g.neighbors.recent(queries[r].node, queries[r].t, cfg_.K);
    for (std::size_t j = 0; j < nbrs.size(); ++j) {
      owner.push_back(static_cast<Index>(r));
      rank.push_back(static_cast<Index>(j));
      nbr_queries.push_back({nbrs[j].other, queries[r].t});
      dts.push_back(queries[r].t - nbrs[j].t);
      feat_rows.push_back(g.events[static_cast<std::size_t>(nbrs[j].event_idx)].feat_row);
    }
    count[r] = static_cast<Index>(nbrs.size());
  }

  const auto n_tokens = static_cast<Index>(owner.size());
  std::vector<ag::Var> pool;
  if (n_tokens > 0) {
    const ag::Var z_u = ctx.embed(nbr_queries);
    if (z_u.cols() != dz) throw DimensionError("transformer prompt: neighbor embedding width mismatch");
    const ag::Var parts[] = {ag::gather_rows(z_queries, owner), z_u, ag::gather_rows(ag::leaf(positions), rank),
                             ag::constant(gather_features(g.edge_feats, feat_rows)), ctx.time_encoder->encode(dts)};
    pool.push_back(token_proj(ag::hcat(parts)));
  }
  pool.push_back(ag::leaf(no_history));
  const ag::Var all_tokens = pool.size() == 1 ? pool.front() : ag::vcat(pool);

  // Lay tokens out per query; a query without history gets the learned no-history token.
  std::vector<Index> order;
  std::vector<Index> offsets{0};
  Index cursor = 0;
  for (std::size_t r = 0; r < queries.size(); ++r) {
    if (count[r] == 0) {
      order.push_back(n_tokens);
    } else {
      for (Index j = 0; j < count[r]; ++j) order.push_back(cursor + j);
      cursor += count[r];
    }
    offsets.push_back(static_cast<Index>(order.size()));
  }
  const ag::Var seq = ag::gather_rows(all_tokens, order);
  const ag::Var encoded = encoder(seq, offsets);
  return readout(ag::segment_mean(encoded, offsets));
}

Mat PromptState::transformer_tokens(const PromptContext& ctx, const NodeQuery& query, const RowVec& z_query) {
  ag::NoGradGuard guard;
  const TemporalGraph& g = *ctx.graph;
  const auto nbrs = g.neighbors.recent(query.node, query.t, cfg_.K);
  const int width = 2 * embedding_width() + cfg_.d_pos + cfg_.d_e + cfg_.d_t;
  Mat tokens(static_cast<Index>(nbrs.size()), width);
  for (std::size_t j = 0; j < nbrs.size(); ++j) {
    const NodeQuery nq{nbrs[j].other, query.t};
    const RowVec z_u = ctx.embed(std::span<const NodeQuery>(&nq, 1)).value().row(0);
    const RowVec e = g.edge_feats.row(g.events[static_cast<std::size_t>(nbrs[j].event_idx)].feat_row).cast<double>();
    const RowVec phi = encode_delta(*ctx.time_encoder, query.t - nbrs[j].t);
    tokens.row(static_cast<Index>(j)) << z_query, z_u, positions.value.row(static_cast<Index>(j)), e, phi;
  }
  return tokens;
}

ag::Var PromptState::projection(std::span<const NodeId> nodes, std::span<const double> elapsed,
                                TimeEncoder& time_encoder) {
  if (cfg_.variant != PromptVariant::Projection) throw ValidationError("not a projection prompt state");
  if (nodes.size() != elapsed.size()) throw DimensionError("projection prompt: one elapsed time per node required");
  std::vector<Index> rows(nodes.begin(), nodes.end());
  const ag::Var parts[] = {ag::gather_param_rows(personal, rows), time_encoder.encode(elapsed)};
  return projection_mlp(ag::hcat(parts));
}

ag::Var PromptState::generate(const PromptContext& ctx, std::span<const NodeQuery> queries, const ag::Var& z_queries) {
  std::vector<NodeId> nodes;
  nodes.reserve(queries.size());
  for (const NodeQuery& q : queries) nodes.push_back(q.node);
  switch (cfg_.variant) {
    case PromptVariant::Vanilla: return vanilla(nodes);
    case PromptVariant::Transformer: return transformer(ctx, queries, z_queries);
    case PromptVariant::Projection:
      if (ctx.time_encoder == nullptr) throw ValidationError("projection prompt: missing time encoder");
      return projection(nodes, ctx.elapsed, *ctx.time_encoder);
    default: throw ValidationError("static prompt variants do not generate per-node prompts");
  }
}

ag::Var PromptState::static_output(const ag::Var& z) {
  if (cfg_.variant != PromptVariant::StaticOutput) throw ValidationError("not an output-style static prompt");
  return ag::add_row(z, ag::leaf(shared));
}

ag::Var PromptState::static_input_offset() {
  if (cfg_.variant != PromptVariant::StaticInput) throw ValidationError("not an input-style static prompt");
  return ag::leaf(shared);
}

ag::ParamList PromptState::parameters() {
  ag::ParamList out;
  switch (cfg_.variant) {
    case PromptVariant::Vanilla: out.push_back(&table); break;
    case PromptVariant::Transformer:
      out.push_back(&positions);
      token_proj.collect(out);
      encoder.collect(out);
      readout.collect(out);
      out.push_back(&no_history);
      break;
    case PromptVariant::Projection:
      out.push_back(&personal);
      projection_mlp.collect(out);
      break;
    case PromptVariant::StaticOutput:
    case PromptVariant::StaticInput: out.push_back(&shared); break;
  }
  return out;
}

std::int64_t PromptState::count_parameters() { return ag::count_scalars(parameters()); }

std::int64_t count_prompt_parameters(PromptState& state) { return state.count_parameters(); }

}  // namespace tiglab
