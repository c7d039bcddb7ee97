#pragma once

// Minimal reverse-mode automatic differentiation over row-major Eigen matrices.
//
// A Var is a handle to a node in a dynamically built tape. Every op computes its
// value eagerly and, when gradient recording is enabled and at least one input
// requires a gradient, records a closure that propagates the output gradient to
// its inputs. Parameters are leaves whose gradients accumulate in place.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace tiglab {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using Index = Eigen::Index;

}  // namespace tiglab

namespace tiglab::ag {

struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  Parameter() = default;
  Parameter(std::string n, Mat v);

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  Index size() const { return value.size(); }
};

using ParamList = std::vector<Parameter*>;

/// Total number of scalars across a parameter list.
std::int64_t count_scalars(const ParamList& params);

void zero_grad(const ParamList& params);

bool grad_enabled();

/// Disables tape recording for its lifetime (values are still computed).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

struct Node {
  Mat own;
  const Mat* ref = nullptr;  // parameter leaves alias the parameter value
  Mat grad;
  Parameter* param = nullptr;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  const Mat& value() const { return ref ? *ref : own; }
  void accumulate(const Mat& g);
  /// Gradient buffer of this node, allocated lazily.
  Mat& grad_buffer();
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Mat& value() const { return node_->value(); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool defined() const { return static_cast<bool>(node_); }
  double scalar() const { return value()(0, 0); }

  /// Runs backpropagation from this 1x1 value.
  void backward() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Leaves.
Var constant(Mat value);
Var leaf(Parameter& p);

// Elementwise / linear algebra.
Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
/// a * x + b, elementwise with scalars.
Var affine(const Var& x, double a, double b);
/// x (n x m) + row (1 x m) broadcast over rows.
Var add_row(const Var& x, const Var& row);
/// x W + b with W (in x out) and b (1 x out).
Var linear(const Var& x, const Var& w, const Var& b);
Var relu(const Var& x);
Var sigmoid(const Var& x);
Var tanh(const Var& x);
Var cos(const Var& x);

// Shape ops.
Var hcat(std::span<const Var> parts);
Var vcat(std::span<const Var> parts);
Var col_slice(const Var& x, Index start, Index count);
Var gather_rows(const Var& x, std::span<const Index> idx);
/// Rows of a parameter table without materializing the whole table on the tape.
Var gather_param_rows(Parameter& table, std::span<const Index> idx);
/// Repeats a 1 x m row n times.
Var repeat_row(const Var& row, Index n);

// Reductions.
Var sum(const Var& x);
Var mean(const Var& x);
Var sum_squares(const Var& x);
/// Mean over each contiguous row segment [offsets[s], offsets[s+1]); empty segments give zeros.
Var segment_mean(const Var& x, std::span<const Index> offsets);

/// Multi-head scaled dot-product attention restricted to segments: query rows in
/// [q_off[s], q_off[s+1]) attend only to key/value rows in [kv_off[s], kv_off[s+1]).
/// Queries whose key segment is empty produce zero rows.
Var segment_attention(const Var& q, const Var& k, const Var& v, std::span<const Index> q_offsets,
                      std::span<const Index> kv_offsets, int n_heads);

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);
Var dropout(const Var& x, double p, std::mt19937_64& rng, bool training);

// Losses (mean over rows).
/// logits n x 1, targets in {0,1}.
Var bce_with_logits(const Var& logits, std::span<const double> targets);
/// logits n x c, labels in [0, c).
Var softmax_cross_entropy(const Var& logits, std::span<const int> labels);

/// Row-wise softmax of a plain matrix.
Mat softmax_rows(const Mat& logits);

}  // namespace tiglab::ag
