#include <benchmark/benchmark.h>

#include "mjls/io.hpp"
#include "mjls/lp.hpp"
#include "mjls/synthesis.hpp"

namespace {

mjls::lp::Problem synthesis_problem(const char* fixture) {
  const mjls::io::Fixture fx = mjls::io::load_fixture(std::string(MJLS_FIXTURE_DIR) + "/" + fixture);
  mjls::StructuralConstraints sc;
  sc.entry_bound = fx.entry_bound;
  return mjls::build_synthesis_lp(fx.model, mjls::GainKind::L1, mjls::Matrix::identity(fx.model.state_dim()),
                                  sc, {});
}

void BM_SolveSynthesisLp(benchmark::State& state, const char* fixture) {
  const mjls::lp::Problem p = synthesis_problem(fixture);
  for (auto _ : state) benchmark::DoNotOptimize(mjls::lp::solve(p));
  state.counters["variables"] = static_cast<double>(p.variable_count());
  state.counters["rows"] = static_cast<double>(p.row_count());
}

void BM_DenseLp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  mjls::lp::Problem p;
  for (std::size_t j = 0; j < n; ++j) p.add_variable("x" + std::to_string(j), 0.0, mjls::lp::kInfinity, -1.0);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<mjls::lp::Term> terms;
    for (std::size_t j = 0; j < n; ++j) terms.push_back({j, 1.0 + static_cast<double>((r * 7 + j * 3) % 5)});
    p.add_row(std::move(terms), mjls::lp::Relation::LessEqual, 10.0 + static_cast<double>(r));
  }
  for (auto _ : state) benchmark::DoNotOptimize(mjls::lp::solve(p));
}

}  // namespace

BENCHMARK_CAPTURE(BM_SolveSynthesisLp, ex1, "ex1.json");
BENCHMARK_CAPTURE(BM_SolveSynthesisLp, ex2, "ex2.json");
BENCHMARK(BM_DenseLp)->RangeMultiplier(2)->Range(8, 64);
