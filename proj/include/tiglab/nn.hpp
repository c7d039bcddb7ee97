#pragma once

#include "tiglab/autograd.hpp"

#include <random>
#include <string>
#include <vector>

namespace tiglab::nn {

/// y = x W + b. Weights are stored input-major (in x out) so rows are samples.
struct Linear {
  ag::Parameter weight;
  ag::Parameter bias;

  Linear() = default;
  /// Uniform(-1/sqrt(in), 1/sqrt(in)) init, same family as the usual default.
  Linear(const std::string& name, Index in, Index out, std::mt19937_64& rng);

  ag::Var operator()(const ag::Var& x);
  void zero_init();
  void collect(ag::ParamList& out);
  Index in_dim() const { return weight.value.rows(); }
  Index out_dim() const { return weight.value.cols(); }
};

/// Two linear layers with a ReLU in between.
struct Mlp2 {
  Linear fc1;
  Linear fc2;
  double dropout = 0.0;

  Mlp2() = default;
  Mlp2(const std::string& name, Index in, Index hidden, Index out, std::mt19937_64& rng);

  /// `rng` is only consulted when training with dropout > 0.
  ag::Var operator()(const ag::Var& x, std::mt19937_64* rng = nullptr, bool training = false);
  void collect(ag::ParamList& out);
};

/// Standard GRU cell; gates ordered (reset, update, candidate).
struct GruCell {
  Linear input;   // in -> 3H
  Linear hidden;  // H -> 3H

  GruCell() = default;
  GruCell(const std::string& name, Index in, Index hidden_dim, std::mt19937_64& rng);

  ag::Var operator()(const ag::Var& x, const ag::Var& h);
  void collect(ag::ParamList& out);
  Index hidden_dim() const { return hidden.in_dim(); }
};

class Adam {
 public:
  Adam(ag::ParamList params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step();
  void zero_grad();
  const ag::ParamList& params() const { return params_; }
  long steps() const { return t_; }

 private:
  ag::ParamList params_;
  std::vector<Mat> m_;
  std::vector<Mat> v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

/// Deep copy of parameter values (for best-epoch snapshots).
std::vector<Mat> snapshot(const ag::ParamList& params);
void restore(const ag::ParamList& params, const std::vector<Mat>& values);

}  // namespace tiglab::nn
