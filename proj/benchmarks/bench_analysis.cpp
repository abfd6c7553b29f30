#include <benchmark/benchmark.h>

#include "mjls/analysis.hpp"
#include "mjls/io.hpp"
#include "mjls/synthesis.hpp"

namespace {

mjls::io::Fixture fixture(const char* name) {
  return mjls::io::load_fixture(std::string(MJLS_FIXTURE_DIR) + "/" + name);
}

mjls::AnalysisOptions design_tolerance() {
  mjls::AnalysisOptions opts;
  opts.positivity_tolerance = 1e-9;
  return opts;
}

void BM_SynthesizeL1(benchmark::State& state, const char* name) {
  const mjls::io::Fixture fx = fixture(name);
  mjls::StructuralConstraints sc;
  sc.entry_bound = fx.entry_bound;
  const mjls::Matrix I = mjls::Matrix::identity(fx.model.state_dim());
  for (auto _ : state) benchmark::DoNotOptimize(mjls::synthesize_l1(fx.model, I, sc));
}

void BM_L1GainLp(benchmark::State& state, const char* name) {
  const mjls::io::Fixture fx = fixture(name);
  mjls::StructuralConstraints sc;
  sc.entry_bound = fx.entry_bound;
  const auto design = mjls::synthesize_l1(fx.model, mjls::Matrix::identity(fx.model.state_dim()), sc);
  const mjls::MjlsModel err = mjls::build_error_model(fx.model, design.gains).system;
  for (auto _ : state) benchmark::DoNotOptimize(mjls::l1_gain_lp(err, design_tolerance()));
}

void BM_L1GainStatic(benchmark::State& state, const char* name) {
  const mjls::io::Fixture fx = fixture(name);
  mjls::StructuralConstraints sc;
  sc.entry_bound = fx.entry_bound;
  const auto design = mjls::synthesize_l1(fx.model, mjls::Matrix::identity(fx.model.state_dim()), sc);
  const mjls::MjlsModel err = mjls::build_error_model(fx.model, design.gains).system;
  for (auto _ : state) benchmark::DoNotOptimize(mjls::l1_gain_static(err, design_tolerance()));
}

void BM_Expm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  mjls::Matrix pi(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) pi.set(i, j, 0.5 + static_cast<double>((i + 2 * j) % 3));
    }
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += pi(i, j);
    pi.set(i, i, -row);
  }
  for (auto _ : state) benchmark::DoNotOptimize(mjls::expm(pi * 0.5));
}

}  // namespace

BENCHMARK_CAPTURE(BM_SynthesizeL1, ex1, "ex1.json");
BENCHMARK_CAPTURE(BM_SynthesizeL1, ex2, "ex2.json");
BENCHMARK_CAPTURE(BM_L1GainLp, ex2, "ex2.json");
BENCHMARK_CAPTURE(BM_L1GainStatic, ex2, "ex2.json");
BENCHMARK(BM_Expm)->RangeMultiplier(2)->Range(2, 32);
