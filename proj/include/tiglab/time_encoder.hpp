#pragma once

#include "tiglab/autograd.hpp"

#include <cstdint>
#include <span>

namespace tiglab {

/// Harmonic time code phi(dt)_i = cos(omega_i * dt + phase_i).
///
/// Frequencies start on a geometric ladder omega_i = 10^(-9 i / d) so one code
/// covers roughly ten decades of raw seconds. Both vectors are trainable.
struct TimeEncoder {
  ag::Parameter omega;  // 1 x d
  ag::Parameter phase;  // 1 x d

  int dim() const { return static_cast<int>(omega.value.cols()); }

  /// Batched code for an n x 1 column of deltas (a Var so gradients reach dt too).
  ag::Var encode(const ag::Var& deltas);
  ag::Var encode(std::span<const double> deltas);

  void collect(ag::ParamList& out);
};

/// `seed` is accepted for API stability; the initialization is deterministic.
TimeEncoder init_time_encoder(int d_t, std::uint64_t seed = 0);

/// Single-delta convenience returning a plain 1 x d row.
RowVec encode_delta(TimeEncoder& enc, double dt);

}  // namespace tiglab
