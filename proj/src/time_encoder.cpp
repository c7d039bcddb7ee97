#include "tiglab/time_encoder.hpp"

#include "tiglab/errors.hpp"

#include <cmath>

namespace tiglab {

TimeEncoder init_time_encoder(int d_t, std::uint64_t /*seed*/) {
  if (d_t < 1) throw ValidationError("time encoder dimension must be >= 1");
  Mat omega(1, d_t);
  for (int i = 0; i < d_t; ++i) omega(0, i) = std::pow(10.0, -9.0 * i / d_t);
  TimeEncoder enc;
  enc.omega = ag::Parameter("time.omega", std::move(omega));
  enc.phase = ag::Parameter("time.phase", Mat::Zero(1, d_t));
  return enc;
}

ag::Var TimeEncoder::encode(const ag::Var& deltas) {
  if (deltas.cols() != 1) throw DimensionError("time encoder expects an n x 1 column of deltas");
  for (Index i = 0; i < deltas.rows(); ++i) {
    if (!std::isfinite(deltas.value()(i, 0))) throw ValidationError("non-finite time delta");
  }
  return ag::cos(ag::add_row(ag::matmul(deltas, ag::leaf(omega)), ag::leaf(phase)));
}

ag::Var TimeEncoder::encode(std::span<const double> deltas) {
  Mat column(static_cast<Index>(deltas.size()), 1);
  for (std::size_t i = 0; i < deltas.size(); ++i) column(static_cast<Index>(i), 0) = deltas[i];
  return encode(ag::constant(std::move(column)));
}

void TimeEncoder::collect(ag::ParamList& out) {
  out.push_back(&omega);
  out.push_back(&phase);
}

RowVec encode_delta(TimeEncoder& enc, double dt) {
  ag::NoGradGuard guard;
  const double d[] = {dt};
  return enc.encode(d).value().row(0);
}

}  // namespace tiglab
