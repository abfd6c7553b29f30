#include <benchmark/benchmark.h>

#include "mjls/io.hpp"
#include "mjls/markov.hpp"
#include "mjls/simulation.hpp"
#include "mjls/synthesis.hpp"

namespace {

void BM_SamplePath(benchmark::State& state) {
  const mjls::Matrix pi{{-2, 2}, {2, -2}};
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(mjls::sample_markov_path(pi, 0, 100.0, seed++));
}

void BM_SimulateExample(benchmark::State& state, const char* name) {
  const mjls::io::Fixture fx = mjls::io::load_fixture(std::string(MJLS_FIXTURE_DIR) + "/" + name);
  mjls::StructuralConstraints sc;
  sc.entry_bound = fx.entry_bound;
  const auto design = mjls::synthesize_l1(fx.model, mjls::Matrix::identity(fx.model.state_dim()), sc);
  const mjls::io::SimConfig cfg = fx.simulation ? *fx.simulation : mjls::io::SimConfig{};
  const auto dist = cfg.disturbance_or_default(fx.model.disturbance_dim());
  const auto init = cfg.initial_state(fx.model.state_dim());
  const double dt = mjls::default_time_step(fx.model, design.gains);
  const mjls::MarkovPath path = mjls::sample_markov_path(fx.model.generator, cfg.r0, cfg.T, cfg.seed);
  for (auto _ : state) benchmark::DoNotOptimize(mjls::simulate(fx.model, design.gains, dist, path, init, dt));
  state.counters["steps"] = cfg.T / dt;
}

}  // namespace

BENCHMARK(BM_SamplePath);
BENCHMARK_CAPTURE(BM_SimulateExample, ex1, "ex1.json")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SimulateExample, ex2, "ex2.json")->Unit(benchmark::kMillisecond);
