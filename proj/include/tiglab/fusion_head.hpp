#pragma once

#include "tiglab/autograd.hpp"
#include "tiglab/nn.hpp"

#include <cstdint>
#include <random>

namespace tiglab {

/// MLP over [z | p] back to the embedding width (ReLU hidden).
struct FusionParams {
  nn::Mlp2 mlp;
  int d = 0;         // embedding width
  int d_prompt = 0;  // prompt width

  FusionParams() = default;
  /// `d_prompt` of 0 means equal to `d`.
  FusionParams(int d, std::uint64_t seed, int d_prompt = 0);
  void collect(ag::ParamList& out) { mlp.collect(out); }
};

ag::Var fuse(FusionParams& rho, const ag::Var& z, const ag::Var& p);

/// Link head over [z_u | z_v] (2d -> d -> 1).
struct LinkHead {
  nn::Mlp2 mlp;

  LinkHead() = default;
  LinkHead(int d, std::uint64_t seed);
  ag::Var logits(const ag::Var& z_u, const ag::Var& z_v);
  void collect(ag::ParamList& out) { mlp.collect(out); }
};

/// Node-class head (d -> d/2 -> n_classes) with dropout on the hidden layer.
struct NodeHead {
  nn::Mlp2 mlp;
  int n_classes = 2;

  NodeHead() = default;
  NodeHead(int d, int n_classes, std::uint64_t seed, double dropout = 0.1);
  ag::Var logits(const ag::Var& z, std::mt19937_64* rng = nullptr, bool training = false);
  void collect(ag::ParamList& out) { mlp.collect(out); }
};

/// sigmoid(head(z_u | z_v)) per row.
Eigen::VectorXd predict_link(LinkHead& head, const ag::Var& z_u, const ag::Var& z_v);

/// Row-wise softmax of the node head.
Mat classify_node(NodeHead& head, const ag::Var& z);

}  // namespace tiglab
