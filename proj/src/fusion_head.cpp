#include "tiglab/fusion_head.hpp"

#include "tiglab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tiglab {

FusionParams::FusionParams(int width, std::uint64_t seed, int prompt_width)
    : d(width), d_prompt(prompt_width > 0 ? prompt_width : width) {
  std::mt19937_64 rng(seed);
  mlp = nn::Mlp2("fusion", width + d_prompt, width, width, rng);
}

ag::Var fuse(FusionParams& rho, const ag::Var& z, const ag::Var& p) {
  if (z.cols() != rho.d || p.cols() != rho.d_prompt || z.rows() != p.rows()) {
    throw DimensionError("fuse: expected n x " + std::to_string(rho.d) + " and n x " + std::to_string(rho.d_prompt) +
                         " inputs, got " +
                         std::to_string(z.rows()) + "x" + std::to_string(z.cols()) + " and " +
                         std::to_string(p.rows()) + "x" + std::to_string(p.cols()));
  }
  const ag::Var parts[] = {z, p};
  return rho.mlp(ag::hcat(parts));
}

LinkHead::LinkHead(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  mlp = nn::Mlp2("link_head", 2 * d, d, 1, rng);
}

ag::Var LinkHead::logits(const ag::Var& z_u, const ag::Var& z_v) {
  const ag::Var parts[] = {z_u, z_v};
  return mlp(ag::hcat(parts));
}

NodeHead::NodeHead(int d, int classes, std::uint64_t seed, double dropout) : n_classes(classes) {
  if (classes < 2) throw ValidationError("node classification needs at least two classes");
  std::mt19937_64 rng(seed);
  mlp = nn::Mlp2("node_head", d, std::max(1, d / 2), classes, rng);
  mlp.dropout = dropout;
}

ag::Var NodeHead::logits(const ag::Var& z, std::mt19937_64* rng, bool training) { return mlp(z, rng, training); }

Eigen::VectorXd predict_link(LinkHead& head, const ag::Var& z_u, const ag::Var& z_v) {
  ag::NoGradGuard guard;
  const Mat l = head.logits(z_u, z_v).value();
  Eigen::VectorXd out(l.rows());
  for (Index i = 0; i < l.rows(); ++i) out(i) = 1.0 / (1.0 + std::exp(-l(i, 0)));
  return out;
}

Mat classify_node(NodeHead& head, const ag::Var& z) {
  ag::NoGradGuard guard;
  return ag::softmax_rows(head.logits(z).value());
}

}  // namespace tiglab
