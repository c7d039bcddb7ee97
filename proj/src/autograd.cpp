#include "tiglab/autograd.hpp"

#include "tiglab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace tiglab::ag {

namespace {

thread_local bool g_grad_enabled = true;

bool any_requires(std::initializer_list<const Var*> inputs) {
  if (!g_grad_enabled) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Var* v) { return v->requires_grad(); });
}

Var make_node(Mat value, std::initializer_list<const Var*> inputs,
              std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->own = std::move(value);
  if (any_requires(inputs)) {
    node->requires_grad = true;
    for (const Var* v : inputs) node->parents.push_back(v->node());
    node->backward = std::move(backward);
  }
  return Var(std::move(node));
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
}

Node& parent(Node& n, std::size_t i) { return *n.parents[i]; }

}  // namespace

Parameter::Parameter(std::string n, Mat v) : name(std::move(n)), value(std::move(v)) {
  grad = Mat::Zero(value.rows(), value.cols());
}

std::int64_t count_scalars(const ParamList& params) {
  std::int64_t total = 0;
  for (const Parameter* p : params) total += static_cast<std::int64_t>(p->size());
  return total;
}

void zero_grad(const ParamList& params) {
  for (Parameter* p : params) p->zero_grad();
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Mat& Node::grad_buffer() {
  if (grad.size() == 0) grad = Mat::Zero(value().rows(), value().cols());
  return grad;
}

void Node::accumulate(const Mat& g) {
  if (param != nullptr) {
    if (param->grad.size() == 0) param->zero_grad();
    param->grad += g;
    return;
  }
  grad_buffer() += g;
}

void Var::backward() const {
  if (!node_) throw Error("backward on undefined Var");
  if (rows() != 1 || cols() != 1) throw DimensionError("backward requires a 1x1 value");
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
      continue;
    }
    order.push_back(n);
    stack.pop_back();
  }

  node_->accumulate(Mat::Constant(1, 1, 1.0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && n->grad.size() != 0) n->backward(*n);
  }
}

Var constant(Mat value) {
  auto node = std::make_shared<Node>();
  node->own = std::move(value);
  return Var(std::move(node));
}

Var leaf(Parameter& p) {
  auto node = std::make_shared<Node>();
  node->ref = &p.value;
  node->param = &p;
  node->requires_grad = g_grad_enabled;
  return Var(std::move(node));
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + ")");
  }
  Mat out = a.value() * b.value();
  return make_node(std::move(out), {&a, &b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) pa.accumulate(n.grad * pb.value().transpose());
    if (pb.requires_grad) pb.accumulate(pa.value().transpose() * n.grad);
  });
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  return make_node(a.value() + b.value(), {&a, &b}, [](Node& n) {
    for (auto& p : n.parents)
      if (p->requires_grad) p->accumulate(n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  return make_node(a.value() - b.value(), {&a, &b}, [](Node& n) {
    if (parent(n, 0).requires_grad) parent(n, 0).accumulate(n.grad);
    if (parent(n, 1).requires_grad) parent(n, 1).accumulate(-n.grad);
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  return make_node(a.value().cwiseProduct(b.value()), {&a, &b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) pa.accumulate(n.grad.cwiseProduct(pb.value()));
    if (pb.requires_grad) pb.accumulate(n.grad.cwiseProduct(pa.value()));
  });
}

Var scale(const Var& a, double s) {
  return make_node(a.value() * s, {&a}, [s](Node& n) { parent(n, 0).accumulate(n.grad * s); });
}

Var affine(const Var& x, double a, double b) {
  Mat out = (x.value().array() * a + b).matrix();
  return make_node(std::move(out), {&x}, [a](Node& n) { parent(n, 0).accumulate(n.grad * a); });
}

Var add_row(const Var& x, const Var& row) {
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw DimensionError("add_row: expected 1x" + std::to_string(x.cols()) + " row, got " +
                         std::to_string(row.rows()) + "x" + std::to_string(row.cols()));
  }
  Mat out = x.value().rowwise() + row.value().row(0);
  return make_node(std::move(out), {&x, &row}, [](Node& n) {
    if (parent(n, 0).requires_grad) parent(n, 0).accumulate(n.grad);
    if (parent(n, 1).requires_grad) parent(n, 1).accumulate(n.grad.colwise().sum());
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  if (x.cols() != w.rows()) {
    throw DimensionError("linear: input has " + std::to_string(x.cols()) + " columns, weight expects " +
                         std::to_string(w.rows()));
  }
  if (b.rows() != 1 || b.cols() != w.cols()) throw DimensionError("linear: bias shape mismatch");
  Mat out = x.value() * w.value();
  out.rowwise() += b.value().row(0);
  return make_node(std::move(out), {&x, &w, &b}, [](Node& n) {
    Node& px = parent(n, 0);
    Node& pw = parent(n, 1);
    Node& pb = parent(n, 2);
    if (px.requires_grad) px.accumulate(n.grad * pw.value().transpose());
    if (pw.requires_grad) pw.accumulate(px.value().transpose() * n.grad);
    if (pb.requires_grad) pb.accumulate(n.grad.colwise().sum());
  });
}

Var relu(const Var& x) {
  Mat out = x.value().cwiseMax(0.0);
  return make_node(std::move(out), {&x}, [](Node& n) {
    Node& px = parent(n, 0);
    px.accumulate((px.value().array() > 0.0).cast<double>().matrix().cwiseProduct(n.grad));
  });
}

Var sigmoid(const Var& x) {
  Mat out = x.value().unaryExpr([](double v) {
    return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  });
  return make_node(std::move(out), {&x}, [](Node& n) {
    const Mat& y = n.value();
    parent(n, 0).accumulate((y.array() * (1.0 - y.array()) * n.grad.array()).matrix());
  });
}

Var tanh(const Var& x) {
  Mat out = x.value().array().tanh().matrix();
  return make_node(std::move(out), {&x}, [](Node& n) {
    const Mat& y = n.value();
    parent(n, 0).accumulate(((1.0 - y.array().square()) * n.grad.array()).matrix());
  });
}

Var cos(const Var& x) {
  Mat out = x.value().array().cos().matrix();
  return make_node(std::move(out), {&x}, [](Node& n) {
    Node& px = parent(n, 0);
    px.accumulate((-px.value().array().sin() * n.grad.array()).matrix());
  });
}

Var hcat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("hcat: no inputs");
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw DimensionError("hcat: row count mismatch");
    cols += p.cols();
  }
  Mat out(rows, cols);
  Index c = 0;
  bool req = false;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
    req = req || p.requires_grad();
  }
  auto node = std::make_shared<Node>();
  node->own = std::move(out);
  if (g_grad_enabled && req) {
    node->requires_grad = true;
    for (const Var& p : parts) node->parents.push_back(p.node());
    node->backward = [](Node& n) {
      Index off = 0;
      for (auto& p : n.parents) {
        const Index w = p->value().cols();
        if (p->requires_grad) p->accumulate(n.grad.middleCols(off, w));
        off += w;
      }
    };
  }
  return Var(std::move(node));
}

Var vcat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("vcat: no inputs");
  const Index cols = parts[0].cols();
  Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw DimensionError("vcat: column count mismatch");
    rows += p.rows();
  }
  Mat out(rows, cols);
  Index r = 0;
  bool req = false;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
    req = req || p.requires_grad();
  }
  auto node = std::make_shared<Node>();
  node->own = std::move(out);
  if (g_grad_enabled && req) {
    node->requires_grad = true;
    for (const Var& p : parts) node->parents.push_back(p.node());
    node->backward = [](Node& n) {
      Index off = 0;
      for (auto& p : n.parents) {
        const Index h = p->value().rows();
        if (p->requires_grad) p->accumulate(n.grad.middleRows(off, h));
        off += h;
      }
    };
  }
  return Var(std::move(node));
}

Var col_slice(const Var& x, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > x.cols()) throw DimensionError("col_slice: out of range");
  Mat out = x.value().middleCols(start, count);
  return make_node(std::move(out), {&x}, [start, count](Node& n) {
    Node& px = parent(n, 0);
    Mat g = Mat::Zero(px.value().rows(), px.value().cols());
    g.middleCols(start, count) = n.grad;
    px.accumulate(g);
  });
}

Var gather_rows(const Var& x, std::span<const Index> idx) {
  const Index n_rows = x.rows();
  Mat out(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= n_rows) throw DimensionError("gather_rows: index out of range");
    out.row(static_cast<Index>(i)) = x.value().row(idx[i]);
  }
  std::vector<Index> saved(idx.begin(), idx.end());
  return make_node(std::move(out), {&x}, [saved = std::move(saved)](Node& n) {
    Node& px = parent(n, 0);
    Mat g = Mat::Zero(px.value().rows(), px.value().cols());
    for (std::size_t i = 0; i < saved.size(); ++i) g.row(saved[i]) += n.grad.row(static_cast<Index>(i));
    px.accumulate(g);
  });
}

Var gather_param_rows(Parameter& table, std::span<const Index> idx) {
  Mat out(static_cast<Index>(idx.size()), table.value.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= table.value.rows()) {
      throw DimensionError("gather_param_rows: row " + std::to_string(idx[i]) + " out of range for " +
                           table.name);
    }
    out.row(static_cast<Index>(i)) = table.value.row(idx[i]);
  }
  auto node = std::make_shared<Node>();
  node->own = std::move(out);
  if (g_grad_enabled) {
    node->requires_grad = true;
    std::vector<Index> saved(idx.begin(), idx.end());
    Parameter* tp = &table;
    node->backward = [tp, saved = std::move(saved)](Node& n) {
      if (tp->grad.size() == 0) tp->zero_grad();
      for (std::size_t i = 0; i < saved.size(); ++i) tp->grad.row(saved[i]) += n.grad.row(static_cast<Index>(i));
    };
  }
  return Var(std::move(node));
}

Var repeat_row(const Var& row, Index n) {
  if (row.rows() != 1) throw DimensionError("repeat_row: expected a single row");
  Mat out = row.value().replicate(n, 1);
  return make_node(std::move(out), {&row}, [](Node& nd) { parent(nd, 0).accumulate(nd.grad.colwise().sum()); });
}

Var sum(const Var& x) {
  return make_node(Mat::Constant(1, 1, x.value().sum()), {&x}, [](Node& n) {
    Node& px = parent(n, 0);
    px.accumulate(Mat::Constant(px.value().rows(), px.value().cols(), n.grad(0, 0)));
  });
}

Var mean(const Var& x) {
  const double count = static_cast<double>(x.value().size());
  return make_node(Mat::Constant(1, 1, x.value().sum() / count), {&x}, [count](Node& n) {
    Node& px = parent(n, 0);
    px.accumulate(Mat::Constant(px.value().rows(), px.value().cols(), n.grad(0, 0) / count));
  });
}

Var sum_squares(const Var& x) {
  return make_node(Mat::Constant(1, 1, x.value().squaredNorm()), {&x}, [](Node& n) {
    Node& px = parent(n, 0);
    px.accumulate(px.value() * (2.0 * n.grad(0, 0)));
  });
}

Var segment_mean(const Var& x, std::span<const Index> offsets) {
  if (offsets.empty()) throw DimensionError("segment_mean: offsets must have at least one entry");
  const Index n_seg = static_cast<Index>(offsets.size()) - 1;
  if (offsets.back() != x.rows()) throw DimensionError("segment_mean: offsets do not cover input rows");
  Mat out = Mat::Zero(n_seg, x.cols());
  for (Index s = 0; s < n_seg; ++s) {
    const Index a = offsets[s], b = offsets[s + 1];
    if (b > a) out.row(s) = x.value().middleRows(a, b - a).colwise().mean();
  }
  std::vector<Index> saved(offsets.begin(), offsets.end());
  return make_node(std::move(out), {&x}, [saved = std::move(saved)](Node& n) {
    Node& px = parent(n, 0);
    Mat g = Mat::Zero(px.value().rows(), px.value().cols());
    for (std::size_t s = 0; s + 1 < saved.size(); ++s) {
      const Index a = saved[s], b = saved[s + 1];
      if (b <= a) continue;
      const RowVec share = n.grad.row(static_cast<Index>(s)) / static_cast<double>(b - a);
      for (Index r = a; r < b; ++r) g.row(r) = share;
    }
    px.accumulate(g);
  });
}

Var segment_attention(const Var& q, const Var& k, const Var& v, std::span<const Index> q_offsets,
                      std::span<const Index> kv_offsets, int n_heads) {
  if (q_offsets.size() != kv_offsets.size() || q_offsets.empty()) {
    throw DimensionError("segment_attention: offset arrays must have equal, non-zero length");
  }
  if (q.cols() != k.cols() || k.cols() != v.cols() || k.rows() != v.rows()) {
    throw DimensionError("segment_attention: q/k/v widths or k/v rows differ");
  }
  if (n_heads < 1 || q.cols() % n_heads != 0) {
    throw DimensionError("segment_attention: model width not divisible by head count");
  }
  if (q_offsets.back() != q.rows() || kv_offsets.back() != k.rows()) {
    throw DimensionError("segment_attention: offsets do not cover inputs");
  }
  const Index dh = q.cols() / n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  const std::size_t n_seg = q_offsets.size() - 1;

  auto probs = std::make_shared<std::vector<Mat>>(n_seg * static_cast<std::size_t>(n_heads));
  Mat out = Mat::Zero(q.rows(), q.cols());
  const Mat& Q = q.value();
  const Mat& K = k.value();
  const Mat& V = v.value();
  for (std::size_t s = 0; s < n_seg; ++s) {
    const Index qa = q_offsets[s], nq = q_offsets[s + 1] - qa;
    const Index ka = kv_offsets[s], nk = kv_offsets[s + 1] - ka;
    if (nq == 0 || nk == 0) continue;
    for (int h = 0; h < n_heads; ++h) {
      const Index c = h * dh;
      Mat scores = Q.block(qa, c, nq, dh) * K.block(ka, c, nk, dh).transpose() * inv_sqrt;
      Mat p = softmax_rows(scores);
      out.block(qa, c, nq, dh) = p * V.block(ka, c, nk, dh);
      (*probs)[s * static_cast<std::size_t>(n_heads) + static_cast<std::size_t>(h)] = std::move(p);
    }
  }

  std::vector<Index> qo(q_offsets.begin(), q_offsets.end());
  std::vector<Index> ko(kv_offsets.begin(), kv_offsets.end());
  return make_node(std::move(out), {&q, &k, &v},
                   [probs, qo = std::move(qo), ko = std::move(ko), n_heads, dh, inv_sqrt](Node& n) {
                     Node& pq = parent(n, 0);
                     Node& pk = parent(n, 1);
                     Node& pv = parent(n, 2);
                     const Mat& Q = pq.value();
                     const Mat& K = pk.value();
                     const Mat& V = pv.value();
                     Mat gq = Mat::Zero(Q.rows(), Q.cols());
                     Mat gk = Mat::Zero(K.rows(), K.cols());
                     Mat gv = Mat::Zero(V.rows(), V.cols());
                     for (std::size_t s = 0; s + 1 < qo.size(); ++s) {
                       const Index qa = qo[s], nq = qo[s + 1] - qa;
                       const Index ka = ko[s], nk = ko[s + 1] - ka;
                       if (nq == 0 || nk == 0) continue;
                       for (int h = 0; h < n_heads; ++h) {
                         const Index c = h * dh;
                         const Mat& p = (*probs)[s * static_cast<std::size_t>(n_heads) + static_cast<std::size_t>(h)];
                         const Mat go = n.grad.block(qa, c, nq, dh);
                         gv.block(ka, c, nk, dh) += p.transpose() * go;
                         Mat dp = go * V.block(ka, c, nk, dh).transpose();
                         Eigen::VectorXd row_dot = (dp.cwiseProduct(p)).rowwise().sum();
                         Mat ds = p.cwiseProduct(dp.colwise() - row_dot);
                         gq.block(qa, c, nq, dh) += ds * K.block(ka, c, nk, dh) * inv_sqrt;
                         gk.block(ka, c, nk, dh) += ds.transpose() * Q.block(qa, c, nq, dh) * inv_sqrt;
                       }
                     }
                     if (pq.requires_grad) pq.accumulate(gq);
                     if (pk.requires_grad) pk.accumulate(gk);
                     if (pv.requires_grad) pv.accumulate(gv);
                   });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const Index n = x.rows(), d = x.cols();
  if (gamma.rows() != 1 || gamma.cols() != d || beta.rows() != 1 || beta.cols() != d) {
    throw DimensionError("layer_norm: gamma/beta must be 1 x width");
  }
  Mat xhat(n, d);
  Eigen::VectorXd inv_std(n);
  for (Index r = 0; r < n; ++r) {
    const double mu = x.value().row(r).mean();
    const double var = (x.value().row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.value().row(r).array() - mu) * inv_std(r);
  }
  Mat out = (xhat.array().rowwise() * gamma.value().row(0).array()).matrix();
  out.rowwise() += beta.value().row(0);
  auto saved = std::make_shared<std::pair<Mat, Eigen::VectorXd>>(std::move(xhat), std::move(inv_std));
  return make_node(std::move(out), {&x, &gamma, &beta}, [saved](Node& nd) {
    const Mat& xh = saved->first;
    const Eigen::VectorXd& is = saved->second;
    Node& px = parent(nd, 0);
    Node& pg = parent(nd, 1);
    Node& pb = parent(nd, 2);
    if (pg.requires_grad) pg.accumulate(nd.grad.cwiseProduct(xh).colwise().sum());
    if (pb.requires_grad) pb.accumulate(nd.grad.colwise().sum());
    if (px.requires_grad) {
      const Mat dxh = (nd.grad.array().rowwise() * pg.value().row(0).array()).matrix();
      const double d = static_cast<double>(xh.cols());
      Mat gx(xh.rows(), xh.cols());
      for (Index r = 0; r < xh.rows(); ++r) {
        const double m1 = dxh.row(r).sum() / d;
        const double m2 = dxh.row(r).dot(xh.row(r)) / d;
        gx.row(r) = (dxh.row(r).array() - m1 - xh.row(r).array() * m2) * is(r);
      }
      px.accumulate(gx);
    }
  });
}

Var dropout(const Var& x, double p, std::mt19937_64& rng, bool training) {
  if (!training || p <= 0.0) return x;
  if (p >= 1.0) throw ValidationError("dropout: probability must be < 1");
  std::bernoulli_distribution keep(1.0 - p);
  const double s = 1.0 / (1.0 - p);
  Mat mask(x.rows(), x.cols());
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? s : 0.0;
  Mat out = x.value().cwiseProduct(mask);
  return make_node(std::move(out), {&x}, [mask = std::move(mask)](Node& n) {
    parent(n, 0).accumulate(n.grad.cwiseProduct(mask));
  });
}

Var bce_with_logits(const Var& logits, std::span<const double> targets) {
  if (logits.cols() != 1 || static_cast<std::size_t>(logits.rows()) != targets.size() || targets.empty()) {
    throw DimensionError("bce_with_logits: expected n x 1 logits matching targets");
  }
  const Mat& z = logits.value();
  double total = 0.0;
  for (Index i = 0; i < z.rows(); ++i) {
    const double x = z(i, 0), y = targets[static_cast<std::size_t>(i)];
    total += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
  }
  const double n_rows = static_cast<double>(z.rows());
  std::vector<double> saved(targets.begin(), targets.end());
  return make_node(Mat::Constant(1, 1, total / n_rows), {&logits}, [saved = std::move(saved), n_rows](Node& n) {
    Node& pz = parent(n, 0);
    Mat g(pz.value().rows(), 1);
    for (Index i = 0; i < g.rows(); ++i) {
      const double x = pz.value()(i, 0);
      const double sig = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      g(i, 0) = (sig - saved[static_cast<std::size_t>(i)]) * n.grad(0, 0) / n_rows;
    }
    pz.accumulate(g);
  });
}

Var softmax_cross_entropy(const Var& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size() || labels.empty()) {
    throw DimensionError("softmax_cross_entropy: logits rows must match labels");
  }
  Mat p = softmax_rows(logits.value());
  double total = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= p.cols()) throw DimensionError("softmax_cross_entropy: label out of range");
    const double m = logits.value().row(i).maxCoeff();
    const double lse = m + std::log((logits.value().row(i).array() - m).exp().sum());
    total += lse - logits.value()(i, y);
  }
  const double n_rows = static_cast<double>(p.rows());
  std::vector<int> saved(labels.begin(), labels.end());
  return make_node(Mat::Constant(1, 1, total / n_rows), {&logits},
                   [p = std::move(p), saved = std::move(saved), n_rows](Node& n) {
                     Mat g = p;
                     for (Index i = 0; i < g.rows(); ++i) g(i, saved[static_cast<std::size_t>(i)]) -= 1.0;
                     parent(n, 0).accumulate(g * (n.grad(0, 0) / n_rows));
                   });
}

Mat softmax_rows(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

}  // namespace tiglab::ag
