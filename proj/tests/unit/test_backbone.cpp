#include "eigen_oracle.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "tiglab/backbone.hpp"
#include "tiglab/errors.hpp"
#include "tiglab/metrics.hpp"
#include "tiglab/synthetic.hpp"
#include "tiglab/training.hpp"

#include <doctest.h>

using namespace tiglab;
using namespace tiglab::testing;

namespace {

BackboneConfig small_config(int heads = 2) {
  BackboneConfig c;
  c.d_mem = 6;
  c.d_emb = 4;
  c.d_t = 4;
  c.n_heads = heads;
  c.K = 3;
  c.dropout = 0.0;
  return c;
}

Mat edge_row(const TemporalGraph& g, std::int64_t event) {
  return g.edge_feats.row(g.events[static_cast<std::size_t>(event)].feat_row).cast<double>();
}

}  // namespace

TEST_CASE("fresh state is zero and an empty flush is a no-op") {
  const TemporalGraph g = cycle_graph(10);
  MemoryAttentionBackbone bb(small_config(), g.d_n, g.d_e, 1);
  MemoryState s = init_state(g.n_nodes, 6);
  CHECK(s.memory.isZero());
  CHECK(s.dirty.empty());
  const MemoryState before = s;
  flush_and_update_memory(s, bb);
  CHECK(s.memory == before.memory);
  CHECK(s.last_update == before.last_update);
  CHECK_THROWS_AS(init_state(0, 4), ValidationError);
}

TEST_CASE("one message updates memory as the hand computation predicts") {
  const TemporalGraph g = cycle_graph(10);
  MemoryAttentionBackbone bb(small_config(), g.d_n, g.d_e, 2);
  MemoryState s = init_state(g.n_nodes, 6);
  s.memory = random_mat(g.n_nodes, 6, 5, 0.5);
  s.last_update[0] = 0.25;
  const Mat mem0 = s.memory;
  const std::int64_t ev[] = {0};
  const auto& e = g.events[0];
  store_messages(s, g, ev);
  flush_and_update_memory(s, bb);

  for (auto [self, other, last] : {std::tuple{e.src, e.dst, 0.25}, std::tuple{e.dst, e.src, 0.0}}) {
    const Mat in = row_cat({mem0.row(self), mem0.row(other), time_code(bb.time_encoder(), e.t - last), edge_row(g, 0)});
    const Mat expect = gru(mlp(in, bb.message_mlp), mem0.row(self), bb.gru);
    CHECK((s.memory.row(self) - expect).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(s.last_update[static_cast<std::size_t>(self)] == e.t);
  }
  // Untouched nodes keep their rows.
  for (NodeId v = 0; v < g.n_nodes; ++v)
    if (v != e.src && v != e.dst) CHECK(s.memory.row(v) == mem0.row(v));
}

TEST_CASE("only the most recent pending message is applied") {
  // Node 0 interacts at t = 1 and t = 2 before any flush.
  const TemporalGraph g = build_graph(make_stream(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}}), {}, {.zero_feature_dim = 2});
  MemoryAttentionBackbone bb(small_config(), g.d_n, g.d_e, 3);
  MemoryState both = init_state(g.n_nodes, 6);
  both.memory = random_mat(g.n_nodes, 6, 8, 0.5);
  MemoryState only_last = both;
  const std::int64_t ev_both[] = {0, 1}, ev_last[] = {1};
  store_messages(both, g, ev_both);
  store_messages(only_last, g, ev_last);
  flush_and_update_memory(both, bb);
  flush_and_update_memory(only_last, bb);
  CHECK(both.memory.row(0) == only_last.memory.row(0));
  CHECK(both.last_update[0] == 2.0);
}

TEST_CASE("embedding without history reduces to the merge bias path") {
  const TemporalGraph g = cycle_graph(10);  // zero node features
  MemoryAttentionBackbone bb(small_config(), g.d_n, g.d_e, 4);
  const MemoryState s = init_state(g.n_nodes, 6);
  const NodeQuery q[] = {{0, 0.5}};
  const Mat z = bb.embed(g, MemoryView(s, nullptr), q, {.K = 3}).value();
  const Mat expect = lin(lin(Mat::Zero(1, bb.merge.fc1.in_dim()), bb.merge.fc1).cwiseMax(0.0), bb.merge.fc2);
  CHECK((z - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("one neighbour: attention returns its value row") {
  const TemporalGraph g = build_graph(make_stream(2, 2, {{0, 0, 1.0}, {1, 1, 2.0}}), {}, {.zero_feature_dim = 2});
  MemoryAttentionBackbone bb(small_config(1), g.d_n, g.d_e, 5);
  MemoryState s = init_state(g.n_nodes, 6);
  s.memory = random_mat(g.n_nodes, 6, 9, 0.5);
  const double tq = 3.5;
  const NodeQuery q[] = {{0, tq}};
  const Mat z = bb.embed(g, MemoryView(s, nullptr), q, {.K = 3}).value();

  const NodeId other = g.events[0].dst;
  const Mat xk = Mat::Zero(1, 2);
  const Mat v = lin(row_cat({s.memory.row(other), xk, edge_row(g, 0), time_code(bb.time_encoder(), tq - 1.0)}),
                    bb.value_proj);
  const Mat a = v * bb.out_proj.value;
  const Mat expect = mlp(row_cat({a, s.memory.row(0), Mat::Zero(1, 2)}), bb.merge);
  CHECK((z - expect).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("embeddings ignore events at or after the query time") {
  std::vector<std::tuple<NodeId, NodeId, double>> edges;
  for (int i = 0; i < 30; ++i) edges.emplace_back(i % 3, i % 4, 1.0 + i);
  EventStream a = make_stream(3, 4, edges, 3, 1);
  EventStream b = a;
  const double tq = 15.0;
  for (std::size_t i = 0; i < b.events.size(); ++i) {
    if (b.events[i].t >= tq) b.edge_feats.row(static_cast<Index>(i)).setConstant(99.0f);
  }
  // Later events also gain extra interactions in b.
  const TemporalGraph ga = build_graph(a, {}, {.zero_feature_dim = 2});
  b.events.push_back({0, 3 + 1, tq, -1, static_cast<std::int64_t>(b.events.size())});
  b.edge_feats.conservativeResize(b.edge_feats.rows() + 1, Eigen::NoChange);
  b.edge_feats.row(b.edge_feats.rows() - 1).setConstant(5.0f);
  const TemporalGraph gb = build_graph(b, {}, {.zero_feature_dim = 2});

  MemoryAttentionBackbone bb(small_config(), ga.d_n, ga.d_e, 6);
  MemoryState s = init_state(ga.n_nodes, 6);
  s.memory = random_mat(ga.n_nodes, 6, 10, 0.5);
  const NodeQuery q[] = {{0, tq}, {4, tq}, {2, tq - 0.5}};
  const Mat za = bb.embed(ga, MemoryView(s, nullptr), q, {.K = 3}).value();
  const Mat zb = bb.embed(gb, MemoryView(s, nullptr), q, {.K = 3}).value();
  CHECK(za == zb);
}

TEST_CASE("last update never moves backwards") {
  const TemporalGraph g = cycle_graph(60);
  MemoryAttentionBackbone bb(small_config(), g.d_n, g.d_e, 7);
  MemoryState s = init_state(g.n_nodes, 6);
  std::vector<double> latest(static_cast<std::size_t>(g.n_nodes), 0.0);
  for (std::int64_t b = 0; b < 60; b += 7) {
    flush_and_update_memory(s, bb);
    const std::vector<double> prev = s.last_update;
    std::vector<std::int64_t> batch;
    for (std::int64_t i = b; i < std::min<std::int64_t>(b + 7, 60); ++i) batch.push_back(i);
    store_messages(s, g, batch);
    flush_and_update_memory(s, bb);
    for (std::int64_t i : batch) {
      const auto& e = g.events[static_cast<std::size_t>(i)];
      latest[static_cast<std::size_t>(e.src)] = e.t;
      latest[static_cast<std::size_t>(e.dst)] = e.t;
    }
    for (std::size_t v = 0; v < latest.size(); ++v) {
      CHECK(s.last_update[v] >= prev[v]);
      CHECK(s.last_update[v] == latest[v]);
    }
  }
}

TEST_CASE("backbone gradients through memory and attention") {
  const TemporalGraph g = cycle_graph(20, 4, 3, 3, 2);
  MemoryAttentionBackbone bb(small_config(), g.d_n, g.d_e, 8);
  MemoryState s = init_state(g.n_nodes, 6);
  s.memory = random_mat(g.n_nodes, 6, 11, 0.5);
  std::vector<std::int64_t> prior, batch;
  for (std::int64_t i = 0; i < 10; ++i) prior.push_back(i);
  for (std::int64_t i = 10; i < 20; ++i) batch.push_back(i);
  store_messages(s, g, prior);

  ag::ParamList params = bb.parameters();
  bb.time_encoder().collect(params);
  const std::vector<double> targets{1, 0, 1, 1, 0, 1, 0, 0, 1, 1};
  auto loss = [&] {
    MemoryUpdate upd = bb.compute_memory_update(s);
    MemoryView view(s, &upd);
    std::vector<NodeQuery> src, dst;
    for (std::int64_t i : batch) {
      const auto& e = g.events[static_cast<std::size_t>(i)];
      src.push_back({e.src, e.t});
      dst.push_back({e.dst, e.t});
    }
    const ag::Var zs = bb.embed(g, view, src, {.K = 3});
    const ag::Var zd = bb.embed(g, view, dst, {.K = 3});
    return ag::bce_with_logits(bb.link_logits(zs, zd), targets);
  };
  const auto r = grad_check(params, loss, 20, 3, 1e-6, 1e-6);
  INFO(r.worst);
  CHECK(r.max_rel < 1e-3);
}

TEST_CASE("repeated requests are pure and unknown nodes fail") {
  const TemporalGraph g = cycle_graph(20);
  MemoryAttentionBackbone bb(small_config(), g.d_n, g.d_e, 9);
  MemoryState s = init_state(g.n_nodes, 6);
  const std::int64_t ev[] = {0, 1, 2};
  store_messages(s, g, ev);
  const MemoryState before = s;
  const MemoryUpdate u1 = bb.compute_memory_update(s);
  const MemoryUpdate u2 = bb.compute_memory_update(s);
  CHECK(u1.memory.value() == u2.memory.value());
  CHECK(s.memory == before.memory);
  CHECK(s.dirty == before.dirty);
  const NodeQuery q[] = {{1, 10.0}, {5, 12.0}};
  CHECK(bb.embed(g, MemoryView(s, &u1), q, {.K = 3}).value() == bb.embed(g, MemoryView(s, &u1), q, {.K = 3}).value());
  const NodeQuery bad[] = {{g.n_nodes, 1.0}};
  CHECK_THROWS_AS(bb.embed(g, MemoryView(s, nullptr), bad, {.K = 3}), ValidationError);
  CHECK_THROWS_AS(make_backbone("nope", small_config(), 2, 3, 0), ConfigError);
  CHECK_THROWS_AS(MemoryAttentionBackbone(small_config(3), 2, 3, 0), ValidationError);
}

TEST_CASE("clones are independent") {
  MemoryAttentionBackbone bb(small_config(), 2, 3, 10);
  auto copy = bb.clone();
  bb.out_proj.value.setZero();
  CHECK_FALSE(copy->parameters()[0]->value.isZero());
  auto* typed = dynamic_cast<MemoryAttentionBackbone*>(copy.get());
  REQUIRE(typed != nullptr);
  CHECK_FALSE(typed->out_proj.value.isZero());
}

TEST_CASE("pre-training restarts memory each epoch and learns a planted repeat") {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::PlantedRepeat;
  spec.n_users = 6;
  spec.n_items = 12;
  spec.n_events = 400;
  spec.repeat_prob = 0.95;
  spec.d_e = 2;
  spec.d_n = 4;
  spec.seed = 3;
  const TemporalGraph g = generate_synthetic(spec);
  const SplitSpec split = chronological_split(g, {0.5, 0.2, 0.15, 0.15});
  BackboneSpec bs;
  bs.config = small_config();
  bs.config.d_mem = 16;
  bs.config.d_emb = 16;
  bs.config.d_t = 8;
  TrainConfig tc;
  tc.lr = 1e-2;
  tc.max_epochs = 15;
  tc.batch_size = 20;
  tc.patience = 15;
  int epochs_seen = 0;
  PretrainOptions po;
  po.on_epoch_start = [&](int, const StreamState& st) {
    ++epochs_seen;
    CHECK(st.memory.memory.isZero());
    CHECK(st.memory.dirty.empty());
    CHECK_FALSE(st.tracker.last(0).has_value());
  };
  const PretrainResult r = pretrain(g, split, bs, tc, po);
  CHECK(epochs_seen == static_cast<int>(r.log.epochs.size()));
  INFO("best val AP " << r.log.best_val);
  CHECK(r.log.best_val > 0.9);
}
