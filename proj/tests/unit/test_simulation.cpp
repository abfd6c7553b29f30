#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "examples.hpp"
#include "mjls/simulation.hpp"
#include "mjls/synthesis.hpp"

using namespace mjls;

namespace {

DisturbanceSpec exact_disturbance(std::size_t count) {
  DisturbanceSpec d = phased_sinusoids(count);
  d.lower = d.w;
  d.upper = d.w;
  return d;
}

InitialState equal_initial(std::size_t n, double value) {
  InitialState s;
  s.x0 = Vector::Constant(static_cast<Eigen::Index>(n), value);
  s.x0_upper = s.x0;
  s.x0_lower = s.x0;
  return s;
}

TraceBundle ex1_run(std::uint64_t seed, double T = 5.0) {
  const MjlsModel plant = examples::ex1();
  const MarkovPath path = sample_markov_path(plant.generator, 0, T, seed);
  return simulate(plant, examples::ex1_gains(), phased_sinusoids(2), path, default_initial_state(2),
                  default_time_step(plant, examples::ex1_gains()));
}

}  // namespace

TEST_CASE("signals") {
  CHECK(evaluate(Sinusoid{2.0, 3.0, 0.5, 1.0}, 0.25) == doctest::Approx(1.0 + 2.0 * std::sin(0.75 + 0.5)));
  CHECK(evaluate(Constant{4.0}, 100.0) == 4.0);
  const Piecewise p{{1.0, 2.0}, {5.0, 6.0}};
  CHECK(evaluate(p, 0.0) == 5.0);
  CHECK(evaluate(p, 1.5) == 5.0);
  CHECK(evaluate(p, 2.0) == 6.0);

  const DisturbanceSpec d = phased_sinusoids(2);
  CHECK(evaluate(d.w[1], 0.0) == doctest::Approx(1.0));
  CHECK_NOTHROW(check_disturbance(d, 2, {0.0, 1.0, 2.0}));
  CHECK_THROWS_AS(check_disturbance(d, 3, {0.0}), std::invalid_argument);
  DisturbanceSpec bad = d;
  bad.upper[0] = Constant{0.5};
  CHECK_THROWS_AS(check_disturbance(bad, 2, {0.0, 1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("zero gaps give identical observers and plant") {
  const MjlsModel plant = examples::ex2();
  StructuralConstraints sc;
  sc.entry_bound = 20.0;
  const ObserverDesign d = synthesize_l1(plant, Matrix::identity(3), sc);
  const MarkovPath path = sample_markov_path(plant.generator, 0, 3.0, 5);
  const TraceBundle tb = simulate(plant, d, exact_disturbance(2), path, equal_initial(3, 0.3), 0.0025);
  CHECK((tb.x_upper - tb.x).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((tb.x_lower - tb.x).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(check_enclosure(tb, 1e-9).passed);
}

TEST_CASE("example enclosure and error positivity") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const TraceBundle tb = ex1_run(seed);
    const EnclosureReport rep = check_enclosure(tb, 1e-6);
    CHECK(rep.passed);
    CHECK(rep.min_gap >= -1e-9);
    CHECK((tb.x_upper - tb.x).minCoeff() >= -1e-9);
    CHECK((tb.x - tb.x_lower).minCoeff() >= -1e-9);
    CHECK((tb.x_upper - tb.x_lower).cwiseAbs().maxCoeff() < 10.0);
  }
}

TEST_CASE("upper error follows the open-loop error system") {
  // e+ = x+ - x obeys de+/dt = A e+ + Ah e+(t-h) + E (w+ - w) when L = 0.
  const MjlsModel plant = examples::ex2();
  const std::vector<Matrix> zero(2, Matrix(3, 2));
  DisturbanceSpec dist;
  dist.w = {Constant{0.0}, Constant{0.0}};
  dist.upper = {Constant{0.5}, Constant{0.25}};
  dist.lower = {Constant{-1.0}, Constant{-1.0}};
  InitialState init = equal_initial(3, 0.0);
  init.x0_upper = Vector::Constant(3, 0.2);
  const double dt = 0.0025;
  const MarkovPath path = sample_markov_path(plant.generator, 0, 4.0, 9);
  const TraceBundle tb = simulate(plant, zero, dist, path, init, dt);

  const auto delay_steps = static_cast<Eigen::Index>(std::llround(plant.delay / dt));
  Eigen::MatrixXd e(tb.x.rows(), 3);
  e.row(0) = init.x0_upper.transpose();
  const Eigen::Vector2d gap(0.5, 0.25);
  for (Eigen::Index k = 0; k + 1 < e.rows(); ++k) {
    const Mode& m = plant.modes[path.mode_at(tb.time[static_cast<std::size_t>(k)])];
    const Eigen::VectorXd ek = e.row(k).transpose();
    const Eigen::VectorXd ed = k >= delay_steps ? Eigen::VectorXd(e.row(k - delay_steps).transpose())
                                                : Eigen::VectorXd(init.x0_upper);
    const Eigen::VectorXd de = m.A.dense() * ek + m.Ah.dense() * ed + m.E.dense() * gap;
    e.row(k + 1) = (ek + dt * de).transpose();
  }
  CHECK(((tb.x_upper - tb.x) - e).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("step halving converges at first order") {
  const MjlsModel plant = examples::ex1();
  const MarkovPath path = sample_markov_path(plant.generator, 0, 2.0, 4);
  const auto terminal = [&](double dt) {
    const TraceBundle tb = simulate(plant, examples::ex1_gains(), phased_sinusoids(2), path,
                                    default_initial_state(2), dt);
    return Eigen::VectorXd(tb.x.row(tb.x.rows() - 1).transpose());
  };
  const Eigen::VectorXd a = terminal(1e-3), b = terminal(5e-4), c = terminal(2.5e-4);
  const double d1 = (a - b).norm(), d2 = (b - c).norm();
  CHECK(d2 <= 0.75 * d1 + 1e-12);
}

TEST_CASE("delayed model with a history function") {
  const MjlsModel plant = examples::ex2();
  StructuralConstraints sc;
  sc.entry_bound = 20.0;
  const ObserverDesign d = synthesize_l1(plant, Matrix::identity(3), sc);
  InitialState init = default_initial_state(3);
  init.history = [](double t) { return Vector::Constant(3, 0.5 * std::cos(t)); };
  init.x0 = Vector::Constant(3, 0.5);
  init.x0_upper = Vector::Constant(3, 1.0);
  init.x0_lower = Vector::Constant(3, 0.0);
  init.history_upper = [](double) { return Vector::Constant(3, 1.0); };
  init.history_lower = [](double) { return Vector::Constant(3, 0.0); };
  const MarkovPath path = sample_markov_path(plant.generator, 1, 5.0, 12);
  const TraceBundle tb = simulate(plant, d, phased_sinusoids(2), path, init, 0.0025);
  CHECK(check_enclosure(tb, 1e-6).passed);
}

TEST_CASE("simulation input checks") {
  const MjlsModel plant = examples::ex2();
  const std::vector<Matrix> gains(2, Matrix(3, 2));
  const MarkovPath path = sample_markov_path(plant.generator, 0, 1.0, 1);
  CHECK_THROWS_AS(simulate(plant, gains, phased_sinusoids(2), path, default_initial_state(3), 0.003),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate(plant, gains, phased_sinusoids(1), path, default_initial_state(3), 0.0025),
                  std::invalid_argument);
  InitialState swapped = default_initial_state(3);
  std::swap(swapped.x0_upper, swapped.x0_lower);
  CHECK_THROWS_AS(simulate(plant, gains, phased_sinusoids(2), path, swapped, 0.0025), std::invalid_argument);
}

TEST_CASE("divergence is reported with its time") {
  std::vector<Mode> modes{{Matrix{{50}}, {}, Matrix{{1}}, Matrix{{1}}, {}, {}}};
  const MjlsModel plant = make_model(std::move(modes), Matrix{{0}});
  const MarkovPath path = sample_markov_path(plant.generator, 0, 10.0, 1);
  InitialState init = equal_initial(1, 1.0);
  try {
    simulate(plant, {Matrix(1, 1)}, phased_sinusoids(1), path, init, 1e-3);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() < 1.0);
  }
}

TEST_CASE("simulation is deterministic") {
  const TraceBundle a = ex1_run(21, 2.0);
  const TraceBundle b = ex1_run(21, 2.0);
  CHECK(a.x == b.x);
  CHECK(a.x_upper == b.x_upper);
  CHECK(a.mode == b.mode);
}

TEST_CASE("corrupted trace fails at the corrupted node") {
  TraceBundle tb = ex1_run(3, 1.0);
  REQUIRE(check_enclosure(tb, 1e-6).passed);
  tb.x_upper(42, 1) = tb.x(42, 1) - 0.1;
  const EnclosureReport rep = check_enclosure(tb, 1e-6);
  CHECK_FALSE(rep.passed);
  REQUIRE(rep.first);
  CHECK(rep.first->node == 42);
  CHECK(rep.first->component == 1);
  CHECK(rep.first->upper);
}

TEST_CASE("trace export") {
  const auto dir = std::filesystem::temp_directory_path() / "mjls_trace_test";
  std::filesystem::create_directories(dir);
  TraceBundle tb = ex1_run(8, 1.0);

  SUBCASE("three nodes give four lines") {
    TraceBundle small;
    small.time = {0.0, 0.1, 0.2};
    small.mode = {0, 0, 1};
    small.x = Eigen::MatrixXd::Random(3, 2);
    small.x_upper = small.x;
    small.x_lower = small.x;
    small.w = Eigen::MatrixXd::Zero(3, 2);
    std::ostringstream os;
    export_traces(small, os);
    const std::string text = os.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK(text.rfind("t,mode,x1,x2,x_plus1,x_plus2,x_minus1,x_minus2,w1,w2\n", 0) == 0);
  }
  SUBCASE("round trip is exact") {
    const auto file = dir / "trace.csv";
    export_traces(tb, file);
    const TraceBundle back = read_traces(file);
    CHECK(back.time == tb.time);
    CHECK(back.mode == tb.mode);
    CHECK(back.x == tb.x);
    CHECK(back.x_upper == tb.x_upper);
    CHECK(back.x_lower == tb.x_lower);
    CHECK(back.w == tb.w);
  }
  SUBCASE("unwritable destination") {
    CHECK_THROWS_AS(export_traces(tb, dir / "missing" / "trace.csv"), Error);
  }
}

TEST_CASE("batch runner") {
  const MjlsModel plant = examples::ex1();
  const auto runs = run_enclosure_batch(plant, examples::ex1_gains(), phased_sinusoids(2),
                                        default_initial_state(2), 0, 2.0, 1e-3, {1, 2, 3}, 1e-6);
  REQUIRE(runs.size() == 3);
  for (const auto& r : runs) CHECK(r.report.passed);
  CHECK(runs[2].seed == 3);
}
