#include "eigen_oracle.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "tiglab/errors.hpp"
#include "tiglab/tprog.hpp"

#include <doctest.h>

using namespace tiglab;
using namespace tiglab::testing;

namespace {

PromptConfig config_for(PromptVariant v, const TemporalGraph& g, int d = 4) {
  PromptConfig c;
  c.variant = v;
  c.d = d;
  c.d_z = d;
  c.K = 3;
  c.d_pos = 2;
  c.n_heads = 2;
  c.n_nodes = g.n_nodes;
  c.d_e = g.d_e;
  c.d_t = 3;
  c.d_n = g.d_n;
  return c;
}

/// Stand-in backbone: a fixed embedding per node, ignoring time.
struct TableEmbed {
  Mat table;
  ag::Var operator()(std::span<const NodeQuery> qs) const {
    Mat out(static_cast<Index>(qs.size()), table.cols());
    for (std::size_t i = 0; i < qs.size(); ++i) out.row(static_cast<Index>(i)) = table.row(qs[i].node);
    return ag::constant(std::move(out));
  }
};

}  // namespace

TEST_CASE("vanilla prompt size and zero start") {
  TemporalGraph g;
  PromptConfig c;
  c.variant = PromptVariant::Vanilla;
  c.d = 172;
  c.n_nodes = 9227;
  PromptState s(c, 0);
  CHECK(s.count_parameters() == 1587044);
  CHECK(s.table.value.isZero());
  const NodeId nodes[] = {5, 9226};
  CHECK(s.vanilla(nodes).value().isZero());
}

TEST_CASE("projection prompt starts at zero and depends on elapsed time") {
  const TemporalGraph g = cycle_graph(10);
  PromptState s(config_for(PromptVariant::Projection, g), 1);
  TimeEncoder enc = init_time_encoder(3);
  const NodeId nodes[] = {0, 1, 2};
  const double elapsed[] = {0.0, 1.0, 100.0};
  CHECK(s.projection(nodes, elapsed, enc).value().isZero());
  CHECK(s.personal.value.isZero());

  s.projection_mlp.fc2.weight.value = random_mat(4, 4, 2);
  s.personal.value = random_mat(g.n_nodes, 4, 3);
  const Mat p = s.projection(nodes, elapsed, enc).value();
  for (int r = 0; r < 3; ++r) {
    const Mat in = row_cat({s.personal.value.row(nodes[r]), time_code(enc, elapsed[r])});
    CHECK((p.row(r) - mlp(in, s.projection_mlp)).cwiseAbs().maxCoeff() < 1e-12);
  }
  const double wrong[] = {1.0};
  CHECK_THROWS_AS(s.projection(nodes, wrong, enc), DimensionError);
}

TEST_CASE("transformer tokens are laid out field by field") {
  const TemporalGraph g = cycle_graph(20);
  PromptState s(config_for(PromptVariant::Transformer, g), 4);
  TimeEncoder enc = init_time_encoder(3);
  const TableEmbed embed{random_mat(g.n_nodes, 4, 5)};
  PromptContext ctx;
  ctx.graph = &g;
  ctx.time_encoder = &enc;
  ctx.embed = embed;

  const NodeQuery q{1, 14.0};
  const RowVec zq = random_mat(1, 4, 6).row(0);
  const Mat tokens = s.transformer_tokens(ctx, q, zq);
  // Oracle: scan for node 1's interactions strictly before t, newest first.
  std::vector<std::int64_t> hist;
  for (std::int64_t i = g.n_events() - 1; i >= 0 && hist.size() < 3; --i) {
    const auto& e = g.events[static_cast<std::size_t>(i)];
    if (e.t < q.t && (e.src == 1 || e.dst == 1)) hist.push_back(i);
  }
  REQUIRE(tokens.rows() == static_cast<Index>(hist.size()));
  CHECK(tokens.cols() == 4 + 4 + 2 + g.d_e + 3);
  for (std::size_t j = 0; j < hist.size(); ++j) {
    const auto& e = g.events[static_cast<std::size_t>(hist[j])];
    const NodeId other = e.src == 1 ? e.dst : e.src;
    const auto row = tokens.row(static_cast<Index>(j));
    CHECK(row.segment(0, 4) == zq);
    CHECK(row.segment(4, 4) == embed.table.row(other));
    CHECK(row.segment(8, 2) == s.positions.value.row(static_cast<Index>(j)));
    CHECK(row.segment(10, g.d_e) == g.edge_feats.row(e.feat_row).cast<double>());
    CHECK((row.segment(10 + g.d_e, 3) - time_code(enc, q.t - e.t)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("a query without history uses the no-history token") {
  const TemporalGraph g = cycle_graph(20);
  PromptState s(config_for(PromptVariant::Transformer, g), 7);
  TimeEncoder enc = init_time_encoder(3);
  PromptContext ctx;
  ctx.graph = &g;
  ctx.time_encoder = &enc;
  ctx.embed = TableEmbed{random_mat(g.n_nodes, 4, 8)};
  const NodeQuery q[] = {{2, 0.5}};
  const Mat a = s.transformer(ctx, q, ag::constant(random_mat(1, 4, 9))).value();
  const Mat b = s.transformer(ctx, q, ag::constant(random_mat(1, 4, 10))).value();
  CHECK(a == b);
  const Index off[] = {0, 1};
  const Mat expect = s.readout(s.encoder(ag::leaf(s.no_history), off)).value();
  CHECK((a - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(s.transformer(ctx, q, ag::constant(Mat::Zero(1, 5))), DimensionError);
}

TEST_CASE("prompt generator gradients") {
  const TemporalGraph g = cycle_graph(30);
  TimeEncoder enc = init_time_encoder(3);
  enc.phase.value = random_mat(1, 3, 1, 0.3);
  const std::vector<NodeQuery> qs{{0, 12.0}, {5, 20.0}, {1, 0.5}, {6, 29.5}};
  std::vector<NodeId> nodes;
  for (const auto& q : qs) nodes.push_back(q.node);
  const std::vector<double> elapsed{0.5, 3.0, 0.0, 7.5};

  SUBCASE("vanilla") {
    PromptState s(config_for(PromptVariant::Vanilla, g), 1);
    s.table.value = random_mat(g.n_nodes, 4, 2);
    const auto r = grad_check(s.parameters(), [&] { return weighted_sum(s.vanilla(nodes)); });
    CHECK(r.max_rel < 1e-5);
  }
  SUBCASE("projection") {
    PromptState s(config_for(PromptVariant::Projection, g), 1);
    s.personal.value = random_mat(g.n_nodes, 4, 3);
    s.projection_mlp.fc2.weight.value = random_mat(4, 4, 4);
    ag::ParamList ps = s.parameters();
    enc.collect(ps);
    const auto r = grad_check(ps, [&] { return weighted_sum(s.projection(nodes, elapsed, enc)); });
    INFO(r.worst);
    CHECK(r.max_rel < 1e-4);
  }
  SUBCASE("transformer") {
    PromptState s(config_for(PromptVariant::Transformer, g), 1);
    PromptContext ctx;
    ctx.graph = &g;
    ctx.time_encoder = &enc;
    ctx.embed = TableEmbed{random_mat(g.n_nodes, 4, 5)};
    ag::Parameter zq("zq", random_mat(4, 4, 6));
    ag::ParamList ps = s.parameters();
    ps.push_back(&zq);
    const auto r = grad_check(ps, [&] { return weighted_sum(s.transformer(ctx, qs, ag::leaf(zq))); });
    INFO(r.worst);
    CHECK(r.max_rel < 1e-4);
  }
  SUBCASE("static") {
    PromptState out(config_for(PromptVariant::StaticOutput, g), 1);
    PromptState in(config_for(PromptVariant::StaticInput, g), 1);
    CHECK(out.shared.value.cols() == 4);
    CHECK(in.shared.value.cols() == g.d_n);
    const Mat z = random_mat(4, 4, 7);
    CHECK(out.static_output(ag::constant(z)).value() == z);  // zero at start
    out.shared.value = random_mat(1, 4, 8);
    const auto r = grad_check(out.parameters(), [&] { return weighted_sum(out.static_output(ag::constant(z))); });
    CHECK(r.max_rel < 1e-5);
    CHECK_THROWS_AS(in.static_output(ag::constant(z)), ValidationError);
    CHECK_THROWS_AS(out.static_input_offset(), ValidationError);
  }
}

TEST_CASE("variant names and misuse") {
  for (auto v : {PromptVariant::Vanilla, PromptVariant::Transformer, PromptVariant::Projection,
                 PromptVariant::StaticOutput, PromptVariant::StaticInput}) {
    CHECK(parse_prompt_variant(to_string(v)) == v);
  }
  CHECK_THROWS_AS(parse_prompt_variant("fancy"), ConfigError);
  const TemporalGraph g = cycle_graph(10);
  PromptState s(config_for(PromptVariant::Vanilla, g), 1);
  const NodeId n[] = {0};
  TimeEncoder enc = init_time_encoder(3);
  const double el[] = {0.0};
  CHECK_THROWS_AS(s.projection(n, el, enc), ValidationError);
  PromptConfig bad = config_for(PromptVariant::Vanilla, g);
  bad.n_nodes = 0;
  CHECK_THROWS_AS(PromptState(bad, 0), ValidationError);
}
