#include "mjls/markov.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "mjls/model.hpp"

namespace mjls {

std::size_t MarkovPath::mode_at(double t) const {
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  if (it == jump_times.begin()) return modes.front();
  return modes[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

MarkovPath sample_markov_path(const Matrix& generator, std::size_t r0, double horizon,
                              std::uint64_t seed, double start) {
  const auto violations = validate_generator(generator);
  if (!violations.empty()) {
    throw InvalidModelError("invalid generator: " + violations.front());
  }
  if (r0 >= generator.rows()) {
    throw std::invalid_argument("initial mode out of range");
  }
  if (!(horizon > start)) {
    throw std::invalid_argument("horizon must exceed the start time");
  }

  MarkovPath path;
  path.start = start;
  path.horizon = horizon;
  path.seed = seed;
  path.jump_times.push_back(start);
  path.modes.push_back(r0);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double t = start;
  std::size_t mode = r0;
  while (true) {
    const double rate = -generator(mode, mode);
    if (rate <= 0.0) break;
    std::exponential_distribution<double> sojourn(rate);
    t += sojourn(rng);
    if (t >= horizon) break;

    const double target = uniform(rng) * rate;
    double cumulative = 0.0;
    std::size_t next = mode;
    for (std::size_t j = 0; j < generator.cols(); ++j) {
      if (j == mode || generator(mode, j) <= 0.0) continue;
      cumulative += generator(mode, j);
      next = j;
      if (target < cumulative) break;
    }
    mode = next;
    path.jump_times.push_back(t);
    path.modes.push_back(mode);
  }
  return path;
}

}  // namespace mjls
