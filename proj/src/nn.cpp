#include "tiglab/nn.hpp"

#include "tiglab/errors.hpp"

#include <cmath>

namespace tiglab::nn {

namespace {

Mat uniform(Index rows, Index cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Mat m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace

Linear::Linear(const std::string& name, Index in, Index out, std::mt19937_64& rng) {
  if (in < 1 || out < 1) throw DimensionError("Linear " + name + ": dimensions must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = ag::Parameter(name + ".weight", uniform(in, out, bound, rng));
  bias = ag::Parameter(name + ".bias", uniform(1, out, bound, rng));
}

ag::Var Linear::operator()(const ag::Var& x) { return ag::linear(x, ag::leaf(weight), ag::leaf(bias)); }

void Linear::zero_init() {
  weight.value.setZero();
  bias.value.setZero();
}

void Linear::collect(ag::ParamList& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

Mlp2::Mlp2(const std::string& name, Index in, Index hidden, Index out, std::mt19937_64& rng)
    : fc1(name + ".fc1", in, hidden, rng), fc2(name + ".fc2", hidden, out, rng) {}

ag::Var Mlp2::operator()(const ag::Var& x, std::mt19937_64* rng, bool training) {
  ag::Var h = ag::relu(fc1(x));
  if (training && dropout > 0.0 && rng != nullptr) h = ag::dropout(h, dropout, *rng, true);
  return fc2(h);
}

void Mlp2::collect(ag::ParamList& out) {
  fc1.collect(out);
  fc2.collect(out);
}

GruCell::GruCell(const std::string& name, Index in, Index hidden_dim, std::mt19937_64& rng)
    : input(name + ".input", in, 3 * hidden_dim, rng), hidden(name + ".hidden", hidden_dim, 3 * hidden_dim, rng) {}

ag::Var GruCell::operator()(const ag::Var& x, const ag::Var& h) {
  const Index H = hidden_dim();
  ag::Var gi = input(x);
  ag::Var gh = hidden(h);
  ag::Var r = ag::sigmoid(ag::add(ag::col_slice(gi, 0, H), ag::col_slice(gh, 0, H)));
  ag::Var z = ag::sigmoid(ag::add(ag::col_slice(gi, H, H), ag::col_slice(gh, H, H)));
  ag::Var n = ag::tanh(ag::add(ag::col_slice(gi, 2 * H, H), ag::mul(r, ag::col_slice(gh, 2 * H, H))));
  // h' = (1 - z) * n + z * h
  return ag::add(ag::mul(ag::affine(z, -1.0, 1.0), n), ag::mul(z, h));
}

void GruCell::collect(ag::ParamList& out) {
  input.collect(out);
  hidden.collect(out);
}

Adam::Adam(ag::ParamList params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const ag::Parameter* p : params_) {
    m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ag::Parameter& p = *params_[i];
    if (p.grad.size() == 0) continue;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseAbs2();
    p.value.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

void Adam::zero_grad() { ag::zero_grad(params_); }

std::vector<Mat> snapshot(const ag::ParamList& params) {
  std::vector<Mat> out;
  out.reserve(params.size());
  for (const ag::Parameter* p : params) out.push_back(p->value);
  return out;
}

void restore(const ag::ParamList& params, const std::vector<Mat>& values) {
  if (params.size() != values.size()) throw DimensionError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace tiglab::nn
