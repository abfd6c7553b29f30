#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mjls/matrix.hpp"

namespace mjls {

/// One realization of the switching signal r_t on [start, horizon].
/// Modes are 0-based. jump_times[0] == start and the chain is in modes[k]
/// on [jump_times[k], jump_times[k+1]).
struct MarkovPath {
  std::vector<double> jump_times;
  std::vector<std::size_t> modes;
  double start = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;

  /// Mode in force at time t (right-continuous).
  std::size_t mode_at(double t) const;
};

/// Samples a path of the chain with generator Pi starting in r0. Sojourns in
/// mode i are exponential with rate -Pi_ii and the next mode j != i is drawn
/// with probability Pi_ij / (-Pi_ii); modes with Pi_ii = 0 are absorbing.
/// Deterministic in `seed`. Throws InvalidModelError for an invalid generator.
MarkovPath sample_markov_path(const Matrix& generator, std::size_t r0, double horizon,
                              std::uint64_t seed, double start = 0.0);

}  // namespace mjls
