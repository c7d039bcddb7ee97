#include "tiglab/graph_store.hpp"

#include "tiglab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace tiglab {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
  field = trim(field);
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(line, std::string("non-numeric ") + what + " '" + std::string(field) + "'");
  }
  return value;
}

std::int8_t parse_label(std::string_view field, std::size_t line) {
  const double v = parse_number<double>(field, line, "state_label");
  if (v != 0.0 && v != 1.0) throw ParseError(line, "state_label must be 0 or 1");
  return static_cast<std::int8_t>(v);
}

template <typename T>
void append_number(std::string& out, T value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

EventStream load_jodie_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ValidationError("empty stream");
  ++line_no;  // header

  struct Raw {
    std::int64_t user, item;
    double t;
    std::int8_t label;
  };
  std::vector<Raw> raw;
  std::vector<float> feats;
  int k = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split_fields(view);
    if (fields.size() < 4) {
      throw ParseError(line_no, "expected at least 4 fields, got " + std::to_string(fields.size()));
    }
    const int this_k = static_cast<int>(fields.size()) - 4;
    if (k < 0) {
      k = this_k;
    } else if (this_k != k) {
      throw DimensionError("line " + std::to_string(line_no) + ": expected " + std::to_string(k) +
                           " features, got " + std::to_string(this_k));
    }
    Raw r{parse_number<std::int64_t>(fields[0], line_no, "user_id"),
          parse_number<std::int64_t>(fields[1], line_no, "item_id"), parse_number<double>(fields[2], line_no, "timestamp"),
          parse_label(fields[3], line_no)};
    if (r.user < 0 || r.item < 0) throw ParseError(line_no, "negative node id");
    raw.push_back(r);
    for (std::size_t f = 4; f < fields.size(); ++f) feats.push_back(parse_number<float>(fields[f], line_no, "feature"));
  }
  if (raw.empty()) throw ValidationError("empty stream");

  EventStream s;
  s.d_e = k;
  for (const Raw& r : raw) {
    s.n_users = std::max(s.n_users, r.user + 1);
    s.n_items = std::max(s.n_items, r.item + 1);
  }
  s.events.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Raw& r = raw[i];
    s.events.push_back({r.user, s.n_users + r.item, r.t, r.label, static_cast<std::int64_t>(i)});
  }
  s.edge_feats = FeatureTable(static_cast<Eigen::Index>(raw.size()), k);
  if (k > 0) std::copy(feats.begin(), feats.end(), s.edge_feats.data());
  return s;
}

void write_jodie_csv(const std::filesystem::path& path, const EventStream& stream) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "user_id,item_id,timestamp,state_label,comma_separated_list_of_features\n";
  std::string row;
  for (const InteractionEvent& e : stream.events) {
    row.clear();
    append_number(row, e.src);
    row.push_back(',');
    append_number(row, e.dst - stream.n_users);
    row.push_back(',');
    append_number(row, e.t);
    row.push_back(',');
    append_number(row, static_cast<int>(e.has_label() ? e.label : 0));
    for (int f = 0; f < stream.d_e; ++f) {
      row.push_back(',');
      append_number(row, stream.edge_feats(e.feat_row, f));
    }
    row.push_back('\n');
    out << row;
  }
}

NeighborIndex::NeighborIndex(std::int64_t n_nodes, std::span<const InteractionEvent> events) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_nodes), 0);
  for (const InteractionEvent& e : events) {
    ++counts[static_cast<std::size_t>(e.src)];
    ++counts[static_cast<std::size_t>(e.dst)];
  }
  offsets_.assign(static_cast<std::size_t>(n_nodes) + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), offsets_.begin() + 1);
  entries_.resize(static_cast<std::size_t>(offsets_.back()));
  std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  // Events arrive sorted by (t, index), so appending keeps every list sorted.
  for (std::size_t i = 0; i < events.size(); ++i) {
    const InteractionEvent& e = events[i];
    const auto idx = static_cast<std::int64_t>(i);
    entries_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.src)]++)] = {e.dst, idx, e.t};
    entries_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.dst)]++)] = {e.src, idx, e.t};
  }
}

std::span<const NeighborEntry> NeighborIndex::neighbors(NodeId v) const {
  if (v < 0 || v >= n_nodes()) throw ValidationError("unknown node id " + std::to_string(v));
  const auto a = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(v)]);
  const auto b = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(v) + 1]);
  return std::span<const NeighborEntry>(entries_).subspan(a, b - a);
}

std::vector<NeighborEntry> NeighborIndex::recent(NodeId v, double t, int K) const {
  if (K < 1) throw ValidationError("recent_neighbors: K must be >= 1");
  const auto list = neighbors(v);
  const auto end = std::partition_point(list.begin(), list.end(), [t](const NeighborEntry& e) { return e.t < t; });
  const auto available = static_cast<std::size_t>(end - list.begin());
  const std::size_t take = std::min<std::size_t>(available, static_cast<std::size_t>(K));
  std::vector<NeighborEntry> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(list[available - 1 - i]);
  return out;
}

TemporalGraph build_graph(EventStream stream, FeatureTable node_feats, const BuildOptions& opts) {
  if (stream.events.empty()) throw ValidationError("empty stream");
  NodeId max_id = -1;
  for (const InteractionEvent& e : stream.events) {
    if (!(e.t >= 0.0) || !std::isfinite(e.t)) {
      throw ValidationError("negative or non-finite timestamp " + std::to_string(e.t));
    }
    if (e.src < 0 || e.dst < 0) throw ValidationError("negative node id");
    max_id = std::max({max_id, e.src, e.dst});
  }

  TemporalGraph g;
  g.n_nodes = std::max<std::int64_t>(max_id + 1, stream.n_users + stream.n_items);
  g.n_users = stream.n_users;

  std::vector<std::size_t> order(stream.events.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return stream.events[a].t < stream.events[b].t; });

  const bool has_edge_feats = stream.d_e > 0;
  g.d_e = has_edge_feats ? stream.d_e : opts.zero_feature_dim;
  g.edge_feats = FeatureTable::Zero(static_cast<Eigen::Index>(order.size()), g.d_e);
  g.events.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    InteractionEvent e = stream.events[order[pos]];
    if (has_edge_feats) g.edge_feats.row(static_cast<Eigen::Index>(pos)) = stream.edge_feats.row(e.feat_row);
    e.feat_row = static_cast<std::int64_t>(pos);
    g.events.push_back(e);
  }

  if (node_feats.size() == 0) {
    g.d_n = opts.zero_feature_dim;
    g.node_feats = FeatureTable::Zero(g.n_nodes, g.d_n);
  } else {
    if (node_feats.rows() != g.n_nodes) {
      throw DimensionError("node feature table has " + std::to_string(node_feats.rows()) + " rows, graph has " +
                           std::to_string(g.n_nodes) + " nodes");
    }
    g.d_n = static_cast<int>(node_feats.cols());
    g.node_feats = std::move(node_feats);
  }
  g.neighbors = NeighborIndex(g.n_nodes, g.events);
  return g;
}

EventRange SplitSpec::range(Stage s) const {
  const auto i = static_cast<std::size_t>(s);
  return {i == 0 ? 0 : boundaries[i - 1], boundaries[i]};
}

SplitSpec chronological_split(const TemporalGraph& graph, const std::array<double, 4>& fractions, SplitMode mode) {
  static constexpr const char* kNames[] = {"pretrain", "prompt", "val", "test"};
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const bool may_be_zero = mode == SplitMode::Baseline && i == 1;
    if (!std::isfinite(fractions[i]) || fractions[i] < 0.0 || (!may_be_zero && fractions[i] == 0.0)) {
      throw ConfigError(std::string("split.") + kNames[i], "fraction must be positive");
    }
    total += fractions[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split", "fractions must sum to 1");

  SplitSpec s;
  s.fractions = fractions;
  const auto n = static_cast<double>(graph.n_events());
  double cumulative = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    cumulative += fractions[i];
    s.boundaries[i] = std::llround(n * cumulative);
  }
  s.boundaries[3] = graph.n_events();
  for (std::size_t i = 0; i < 4; ++i) {
    const EventRange r = s.range(static_cast<Stage>(i));
    const bool may_be_empty = mode == SplitMode::Baseline && i == 1;
    if (r.end < r.begin || (r.empty() && !may_be_empty)) {
      throw ConfigError(std::string("split.") + kNames[i], "stage is empty for " + std::to_string(graph.n_events()) +
                                                               " events");
    }
  }
  return s;
}

InductiveSpec mask_inductive_nodes(const TemporalGraph& graph, const SplitSpec& split, double node_fraction,
                                   std::uint64_t seed) {
  if (!(node_fraction > 0.0 && node_fraction < 1.0)) {
    throw ConfigError("inductive.node_fraction", "must lie in (0, 1)");
  }
  std::vector<bool> in_eval(static_cast<std::size_t>(graph.n_nodes), false);
  for (std::int64_t i = split.range(Stage::Val).begin; i < graph.n_events(); ++i) {
    in_eval[static_cast<std::size_t>(graph.events[static_cast<std::size_t>(i)].src)] = true;
    in_eval[static_cast<std::size_t>(graph.events[static_cast<std::size_t>(i)].dst)] = true;
  }
  std::vector<NodeId> candidates;
  for (NodeId v = 0; v < graph.n_nodes; ++v)
    if (in_eval[static_cast<std::size_t>(v)]) candidates.push_back(v);

  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  const auto n_mask = static_cast<std::size_t>(std::floor(node_fraction * static_cast<double>(candidates.size())));

  InductiveSpec spec;
  spec.seed = seed;
  spec.unseen_nodes.insert(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n_mask));
  training_events(graph, split.range(Stage::Pretrain), &spec);  // throws if masking empties pretraining
  return spec;
}

std::vector<std::int64_t> training_events(const TemporalGraph& graph, EventRange range,
                                          const InductiveSpec* inductive) {
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(range.size(), 0)));
  for (std::int64_t i = range.begin; i < range.end; ++i) {
    if (inductive == nullptr || !inductive->touches_unseen(graph.events[static_cast<std::size_t>(i)])) out.push_back(i);
  }
  if (out.empty() && !range.empty()) throw ValidationError("inductive masking removed every training event");
  return out;
}

std::vector<std::int64_t> inductive_eval_events(const TemporalGraph& graph, EventRange range,
                                                const InductiveSpec& inductive) {
  std::vector<std::int64_t> out;
  for (std::int64_t i = range.begin; i < range.end; ++i)
    if (inductive.touches_unseen(graph.events[static_cast<std::size_t>(i)])) out.push_back(i);
  return out;
}

std::vector<std::int64_t> transductive_eval_events(const TemporalGraph& graph, EventRange range,
                                                   const std::vector<bool>& seen) {
  std::vector<std::int64_t> out;
  for (std::int64_t i = range.begin; i < range.end; ++i) {
    const InteractionEvent& e = graph.events[static_cast<std::size_t>(i)];
    if (seen[static_cast<std::size_t>(e.src)] && seen[static_cast<std::size_t>(e.dst)]) out.push_back(i);
  }
  return out;
}

std::vector<bool> nodes_seen(const TemporalGraph& graph, std::span<const std::int64_t> events) {
  std::vector<bool> seen(static_cast<std::size_t>(graph.n_nodes), false);
  for (std::int64_t i : events) {
    const InteractionEvent& e = graph.events[static_cast<std::size_t>(i)];
    seen[static_cast<std::size_t>(e.src)] = true;
    seen[static_cast<std::size_t>(e.dst)] = true;
  }
  return seen;
}

LastInteractionTracker::LastInteractionTracker(std::int64_t n_nodes)
    : last_(static_cast<std::size_t>(n_nodes), 0.0), seen_(static_cast<std::size_t>(n_nodes), false) {}

void LastInteractionTracker::observe(const InteractionEvent& e) {
  for (NodeId v : {e.src, e.dst}) {
    auto i = static_cast<std::size_t>(v);
    last_[i] = seen_[i] ? std::max(last_[i], e.t) : e.t;
    seen_[i] = true;
  }
}

std::optional<double> LastInteractionTracker::last(NodeId v) const {
  auto i = static_cast<std::size_t>(v);
  if (i >= seen_.size()) throw ValidationError("unknown node id " + std::to_string(v));
  if (!seen_[i]) return std::nullopt;
  return last_[i];
}

void LastInteractionTracker::reset() {
  std::fill(last_.begin(), last_.end(), 0.0);
  std::fill(seen_.begin(), seen_.end(), false);
}

}  // namespace tiglab
