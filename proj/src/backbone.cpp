#include "tiglab/backbone.hpp"

#include "tiglab/errors.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

namespace tiglab {

MemoryState init_state(std::int64_t n_nodes, int d_mem) {
  if (n_nodes < 1) throw ValidationError("memory state needs at least one node");
  MemoryState s;
  s.memory = Mat::Zero(n_nodes, d_mem);
  s.last_update.assign(static_cast<std::size_t>(n_nodes), 0.0);
  s.pending.resize(static_cast<std::size_t>(n_nodes));
  return s;
}

MemoryView::MemoryView(const MemoryState& state, const MemoryUpdate* update) : state_(&state), update_(update) {
  if (update_ != nullptr) {
    for (std::size_t i = 0; i < update_->nodes.size(); ++i) updated_row_[update_->nodes[i]] = static_cast<Index>(i);
  }
}

ag::Var MemoryView::rows(std::span<const NodeId> nodes) const {
  Mat stored(static_cast<Index>(nodes.size()), state_->memory.cols());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] < 0 || nodes[i] >= state_->n_nodes()) {
      throw ValidationError("unknown node id " + std::to_string(nodes[i]));
    }
    stored.row(static_cast<Index>(i)) = state_->memory.row(nodes[i]);
  }
  if (update_ == nullptr || update_->empty()) return ag::constant(std::move(stored));

  bool any_updated = false;
  std::vector<Index> idx(nodes.size());
  const Index n_upd = static_cast<Index>(update_->nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto it = updated_row_.find(nodes[i]);
    if (it != updated_row_.end()) {
      idx[i] = it->second;
      any_updated = true;
    } else {
      idx[i] = n_upd + static_cast<Index>(i);
    }
  }
  if (!any_updated) return ag::constant(std::move(stored));
  const ag::Var parts[] = {update_->memory, ag::constant(std::move(stored))};
  return ag::gather_rows(ag::vcat(parts), idx);
}

void commit(MemoryState& state, const MemoryUpdate& update) {
  for (std::size_t i = 0; i < update.nodes.size(); ++i) {
    const auto v = static_cast<std::size_t>(update.nodes[i]);
    state.memory.row(update.nodes[i]) = update.memory.value().row(static_cast<Index>(i));
    state.last_update[v] = std::max(state.last_update[v], update.times[i]);
    state.pending[v].clear();
  }
  state.dirty.erase(std::remove_if(state.dirty.begin(), state.dirty.end(),
                                   [&](NodeId v) { return state.pending[static_cast<std::size_t>(v)].empty(); }),
                    state.dirty.end());
}

void store_messages(MemoryState& state, const TemporalGraph& graph, std::span<const std::int64_t> events) {
  for (std::int64_t idx : events) {
    const InteractionEvent& e = graph.events[static_cast<std::size_t>(idx)];
    const RowVec feat = graph.edge_feats.row(e.feat_row).cast<double>();
    const std::pair<NodeId, NodeId> ends[] = {{e.src, e.dst}, {e.dst, e.src}};
    for (auto [self, other] : ends) {
      auto& buf = state.pending[static_cast<std::size_t>(self)];
      if (buf.empty()) state.dirty.push_back(self);
      buf.push_back({state.memory.row(self), state.memory.row(other), feat, e.t, idx});
    }
  }
}

void flush_and_update_memory(MemoryState& state, Backbone& backbone) {
  ag::NoGradGuard guard;
  MemoryUpdate upd = backbone.compute_memory_update(state);
  commit(state, upd);
}

Mat gather_features(const FeatureTable& table, std::span<const NodeId> rows) {
  Mat out(static_cast<Index>(rows.size()), table.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = table.row(rows[i]).cast<double>();
  return out;
}

MemoryAttentionBackbone::MemoryAttentionBackbone(const BackboneConfig& cfg, int d_n, int d_e, std::uint64_t seed)
    : cfg_(cfg), d_n_(d_n), d_e_(d_e), time_(init_time_encoder(cfg.d_t, seed)) {
  if (cfg.d_mem < 1 || cfg.d_emb < 1 || cfg.d_t < 1) throw ValidationError("backbone dimensions must be positive");
  if (cfg.n_heads < 1 || cfg.d_emb % cfg.n_heads != 0) {
    throw ValidationError("embedding width must be divisible by the head count");
  }
  std::mt19937_64 rng(seed);
  const Index msg_in = 2 * cfg.d_mem + cfg.d_t + d_e;
  message_mlp = nn::Mlp2("backbone.message", msg_in, cfg.d_mem, cfg.d_mem, rng);
  gru = nn::GruCell("backbone.gru", cfg.d_mem, cfg.d_mem, rng);
  query_proj = nn::Linear("backbone.query", cfg.d_mem + d_n + cfg.d_t, cfg.d_emb, rng);
  key_proj = nn::Linear("backbone.key", cfg.d_mem + d_n + d_e + cfg.d_t, cfg.d_emb, rng);
  value_proj = nn::Linear("backbone.value", cfg.d_mem + d_n + d_e + cfg.d_t, cfg.d_emb, rng);
  {
    nn::Linear tmp("backbone.out", cfg.d_emb, cfg.d_emb, rng);
    out_proj = ag::Parameter("backbone.out.weight", tmp.weight.value);
  }
  merge = nn::Mlp2("backbone.merge", cfg.d_emb + cfg.d_mem + d_n, cfg.d_emb, cfg.d_emb, rng);
  link_head = nn::Mlp2("backbone.link_head", 2 * cfg.d_emb, cfg.d_emb, 1, rng);
}

MemoryAttentionBackbone::MemoryAttentionBackbone(const MemoryAttentionBackbone& other) = default;

std::unique_ptr<Backbone> MemoryAttentionBackbone::clone() const {
  return std::make_unique<MemoryAttentionBackbone>(*this);
}

MemoryUpdate MemoryAttentionBackbone::compute_memory_update(const MemoryState& state) {
  MemoryUpdate upd;
  if (state.dirty.empty()) return upd;
  upd.nodes = state.dirty;
  std::sort(upd.nodes.begin(), upd.nodes.end());
  const auto n = static_cast<Index>(upd.nodes.size());

  Mat self(n, cfg_.d_mem), other(n, cfg_.d_mem), feat(n, d_e_), hidden(n, cfg_.d_mem), dt(n, 1);
  upd.times.resize(upd.nodes.size());
  for (Index i = 0; i < n; ++i) {
    const NodeId v = upd.nodes[static_cast<std::size_t>(i)];
    const auto& buf = state.pending[static_cast<std::size_t>(v)];
    // Keep the most recent message; on equal time the later event wins.
    const RawMessage* latest = &buf.front();
    for (const RawMessage& m : buf)
      if (m.t > latest->t || (m.t == latest->t && m.event_idx > latest->event_idx)) latest = &m;
    self.row(i) = latest->self_mem;
    other.row(i) = latest->other_mem;
    feat.row(i) = latest->edge_feat;
    hidden.row(i) = state.memory.row(v);
    dt(i, 0) = latest->t - state.last_update[static_cast<std::size_t>(v)];
    upd.times[static_cast<std::size_t>(i)] = latest->t;
  }
  const ag::Var parts[] = {ag::constant(std::move(self)), ag::constant(std::move(other)),
                           time_.encode(ag::constant(std::move(dt))), ag::constant(std::move(feat))};
  ag::Var message = message_mlp(ag::hcat(parts));
  upd.memory = gru(message, ag::constant(std::move(hidden)));
  return upd;
}

ag::Var MemoryAttentionBackbone::embed(const TemporalGraph& graph, const MemoryView& memory,
                                       std::span<const NodeQuery> queries, const EmbedOptions& opts) {
  const auto n_q = static_cast<Index>(queries.size());
  std::vector<NodeId> q_nodes(queries.size());
  std::vector<NodeId> k_nodes;
  std::vector<Index> kv_offsets{0};
  std::vector<Index> q_offsets(queries.size() + 1);
  std::iota(q_offsets.begin(), q_offsets.end(), Index{0});
  std::vector<double> k_dt;
  std::vector<NodeId> k_feat_rows;
  for (std::size_t r = 0; r < queries.size(); ++r) {
    const NodeQuery& q = queries[r];
    if (q.node < 0 || q.node >= graph.n_nodes) throw ValidationError("unknown node id " + std::to_string(q.node));
    q_nodes[r] = q.node;
    for (const NeighborEntry& nb : graph.neighbors.recent(q.node, q.t, opts.K)) {
      k_nodes.push_back(nb.other);
      k_dt.push_back(q.t - nb.t);
      k_feat_rows.push_back(graph.events[static_cast<std::size_t>(nb.event_idx)].feat_row);
    }
    kv_offsets.push_back(static_cast<Index>(k_nodes.size()));
  }

  auto features = [&](std::span<const NodeId> nodes) {
    ag::Var x = ag::constant(gather_features(graph.node_feats, nodes));
    if (opts.input_offset != nullptr) x = ag::add_row(x, *opts.input_offset);
    return x;
  };

  const ag::Var q_mem = memory.rows(q_nodes);
  const ag::Var q_x = features(q_nodes);
  const std::vector<double> zeros(queries.size(), 0.0);
  const ag::Var q_parts[] = {q_mem, q_x, time_.encode(zeros)};
  const ag::Var Q = query_proj(ag::hcat(q_parts));

  const ag::Var k_parts[] = {memory.rows(k_nodes), features(k_nodes),
                             ag::constant(gather_features(graph.edge_feats, k_feat_rows)), time_.encode(k_dt)};
  const ag::Var k_in = ag::hcat(k_parts);
  const ag::Var attn = ag::segment_attention(Q, key_proj(k_in), value_proj(k_in), q_offsets, kv_offsets, cfg_.n_heads);
  ag::Var a = ag::matmul(attn, ag::leaf(out_proj));
  if (opts.training && opts.rng != nullptr) a = ag::dropout(a, cfg_.dropout, *opts.rng, true);

  const ag::Var m_parts[] = {a, q_mem, q_x};
  ag::Var z = merge(ag::hcat(m_parts));
  if (z.rows() != n_q) throw DimensionError("embedding row count mismatch");
  return z;
}

ag::Var MemoryAttentionBackbone::link_logits(const ag::Var& z_src, const ag::Var& z_dst) {
  const ag::Var parts[] = {z_src, z_dst};
  return link_head(ag::hcat(parts));
}

ag::ParamList MemoryAttentionBackbone::parameters() {
  ag::ParamList out;
  message_mlp.collect(out);
  gru.collect(out);
  query_proj.collect(out);
  key_proj.collect(out);
  value_proj.collect(out);
  out.push_back(&out_proj);
  merge.collect(out);
  link_head.collect(out);
  return out;
}

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, BackboneFactory>& registry() {
  static std::map<std::string, BackboneFactory> r{
      {"memory_attention", [](const BackboneConfig& cfg, int d_n, int d_e, std::uint64_t seed) {
         return std::unique_ptr<Backbone>(std::make_unique<MemoryAttentionBackbone>(cfg, d_n, d_e, seed));
       }}};
  return r;
}

}  // namespace

void register_backbone(const std::string& name, BackboneFactory factory) {
  std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(factory);
}

std::unique_ptr<Backbone> make_backbone(const std::string& name, const BackboneConfig& cfg, int d_n, int d_e,
                                        std::uint64_t seed) {
  BackboneFactory f;
  {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(name);
    if (it == registry().end()) throw ConfigError("model.backbone", "unknown backbone '" + name + "'");
    f = it->second;
  }
  return f(cfg, d_n, d_e, seed);
}

std::vector<std::string> registered_backbones() {
  std::lock_guard lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

}  // namespace tiglab
