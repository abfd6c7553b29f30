#include <cmath>

#include "doctest.h"
#include "mjls/markov.hpp"
#include "mjls/model.hpp"
#include "oracles.hpp"

using namespace mjls;

TEST_CASE("absorbing chain never jumps") {
  const MarkovPath p = sample_markov_path(Matrix{{0}}, 0, 10.0, 1);
  CHECK(p.jump_times.size() == 1);
  CHECK(p.modes == std::vector<std::size_t>{0});
  CHECK(p.mode_at(9.99) == 0);

  const MarkovPath q = sample_markov_path(Matrix{{-1, 1}, {0, 0}}, 1, 10.0, 3);
  CHECK(q.modes == std::vector<std::size_t>{1});
}

TEST_CASE("mode_at is right-continuous") {
  MarkovPath p;
  p.jump_times = {0.0, 1.0, 2.5};
  p.modes = {0, 1, 0};
  p.horizon = 3.0;
  CHECK(p.mode_at(0.0) == 0);
  CHECK(p.mode_at(0.999) == 0);
  CHECK(p.mode_at(1.0) == 1);
  CHECK(p.mode_at(2.4) == 1);
  CHECK(p.mode_at(2.5) == 0);
}

TEST_CASE("paths are deterministic in the seed") {
  const Matrix pi{{-2, 2}, {2, -2}};
  const MarkovPath a = sample_markov_path(pi, 0, 50.0, 17);
  const MarkovPath b = sample_markov_path(pi, 0, 50.0, 17);
  const MarkovPath c = sample_markov_path(pi, 0, 50.0, 18);
  CHECK(a.jump_times == b.jump_times);
  CHECK(a.modes == b.modes);
  CHECK(a.jump_times != c.jump_times);
  for (std::size_t k = 1; k < a.modes.size(); ++k) CHECK(a.modes[k] != a.modes[k - 1]);
  CHECK(a.jump_times.back() < 50.0);
}

TEST_CASE("mean sojourn matches the exponential rate") {
  const MarkovPath p = sample_markov_path(Matrix{{-2, 2}, {2, -2}}, 0, 5001.0, 2024);
  REQUIRE(p.jump_times.size() > 10001);
  double sum = 0.0;
  const std::size_t count = 10000;
  for (std::size_t k = 1; k <= count; ++k) sum += p.jump_times[k] - p.jump_times[k - 1];
  const double mean = sum / static_cast<double>(count);
  const double sigma = 0.5 / std::sqrt(static_cast<double>(count));
  CHECK(std::abs(mean - 0.5) <= 3.0 * sigma);
}

TEST_CASE("occupancy matches the transition matrix") {
  const Matrix pi{{-1.5, 1.5}, {0.3, -0.3}};
  const double t = 2.0;
  const Matrix P = oracle::two_state_transition(1.5, 0.3, t);
  for (std::size_t r0 = 0; r0 < 2; ++r0) {
    std::vector<double> counts(2, 0.0);
    const int paths = 10000;
    for (int s = 0; s < paths; ++s) {
      counts[sample_markov_path(pi, r0, t + 1.0, static_cast<std::uint64_t>(s)).mode_at(t)] += 1.0;
    }
    double tv = 0.0;
    for (std::size_t j = 0; j < 2; ++j) tv += std::abs(counts[j] / paths - P(r0, j));
    CHECK(tv / 2.0 <= 0.02);
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(sample_markov_path(Matrix{{-1, 2}, {0, 0}}, 0, 1.0, 1), InvalidModelError);
  CHECK_THROWS_AS(sample_markov_path(Matrix{{0}}, 1, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_markov_path(Matrix{{0}}, 0, 0.0, 1), std::invalid_argument);
}
