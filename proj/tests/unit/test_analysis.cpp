#include <cmath>
#include <random>

#include "doctest.h"
#include "examples.hpp"
#include "mjls/analysis.hpp"
#include "oracles.hpp"

using namespace mjls;

namespace {

MjlsModel scalar(double a, double e, double c, double f = 0.0) {
  std::vector<Mode> modes{{Matrix{{a}}, {}, Matrix{{e}}, Matrix{{c}}, {}, Matrix{{f}}}};
  return make_model(std::move(modes), Matrix{{0}});
}

double equivalence_tol(double gamma, double eps) { return 1e-5 * (1.0 + gamma) + 10.0 * eps; }

MjlsModel ex1_error() { return build_error_model(examples::ex1(), examples::ex1_gains()).system; }

}  // namespace

TEST_CASE("L1 gain of the example error system") {
  const GainCertificate cert = l1_gain_lp(ex1_error());
  CHECK(cert.kind == GainKind::L1);
  CHECK(std::abs(cert.gamma - 1.0426) <= 1e-3);
  CHECK(std::abs(l1_gain_static(ex1_error()) - 1.0426) <= 1e-3);
  CHECK(cert.lambdas.size() == 2);
  CHECK(cert.min_margin() >= cert.epsilon / 2.0);
}

TEST_CASE("L-infinity bound of the example error system") {
  const GainCertificate cert = linf_gain_lp(ex1_error());
  CHECK(std::abs(cert.gamma - 1.1383) <= 1e-3);
  CHECK(std::abs(linf_gain_static(ex1_error()) - 1.1383) <= 1e-3);
  CHECK(cert.min_margin() >= cert.epsilon / 2.0);
}

TEST_CASE("scalar systems") {
  CHECK(l1_gain_lp(scalar(-1, 1, 1)).gamma == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(l1_gain_static(scalar(-1, 1, 1)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(linf_gain_lp(scalar(-2, 1, 1)).gamma == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(linf_gain_static(scalar(-2, 1, 1)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(l1_gain_static(scalar(-4, 2, 3, 0.25)) == doctest::Approx(1.75).epsilon(1e-12));
}

TEST_CASE("feedthrough-only systems") {
  std::vector<Mode> modes{
      {Matrix{{-1, 0}, {0, -2}}, {}, Matrix{{1, 0}, {0, 1}}, Matrix(2, 2), {}, Matrix{{1, 2}, {0.5, 0.25}}},
      {Matrix{{-3, 1}, {0, -1}}, {}, Matrix{{1, 0}, {0, 1}}, Matrix(2, 2), {}, Matrix{{0.1, 0}, {3, 0}}},
  };
  const MjlsModel m = make_model(std::move(modes), Matrix{{-1, 1}, {1, -1}});
  const Matrix Fbar = block_diag({m.modes[0].F, m.modes[1].F});
  CHECK(l1_gain_static(m) == doctest::Approx(induced_norm_1(Fbar)).epsilon(1e-12));
  CHECK(l1_gain_lp(m).gamma == doctest::Approx(induced_norm_1(Fbar)).epsilon(1e-5));
}

TEST_CASE("unstable systems are reported infeasible") {
  const MjlsModel m = scalar(1, 1, 1);
  CHECK_THROWS_AS(l1_gain_lp(m), InfeasibleError);
  CHECK_THROWS_AS(l1_gain_static(m), InfeasibleError);
  CHECK_THROWS_AS(linf_gain_lp(m), InfeasibleError);
  CHECK_THROWS_AS(linf_gain_static(m), InfeasibleError);
  CHECK_FALSE(is_moment_stable(m, GainKind::L1));
  CHECK(is_moment_stable(scalar(-1, 1, 1), GainKind::L1));

  // Each mode is stable on its own, the jumps make the mean unstable.
  std::vector<Mode> modes{{Matrix{{-1, 0}, {3, -1}}, {}, Matrix{{1}, {0}}, Matrix{{1, 1}}, {}, {}},
                          {Matrix{{-1, 3}, {0, -1}}, {}, Matrix{{1}, {0}}, Matrix{{1, 1}}, {}, {}}};
  const MjlsModel jumpy = make_model(std::move(modes), Matrix{{-50, 50}, {50, -50}});
  CHECK_THROWS_WITH_AS(l1_gain_lp(jumpy), "not stochastically stable in the L1-sense", InfeasibleError);
}

TEST_CASE("scope and positivity") {
  CHECK_THROWS_AS(linf_gain_lp(examples::ex2()), ScopeError);
  CHECK_THROWS_AS(linf_gain_static(examples::ex2()), ScopeError);
  MjlsModel m = ex1_error();
  m.modes[0].E = Matrix{{-1, 0}, {0, 1}};
  CHECK_THROWS_AS(l1_gain_lp(m), NotPositiveError);
}

TEST_CASE("LP and static formulas agree on random instances") {
  std::mt19937_64 rng(31);
  AnalysisOptions opts;
  for (int trial = 0; trial < 40; ++trial) {
    const MjlsModel m = oracle::random_positive_model(rng);
    CAPTURE(trial);
    const double gs = l1_gain_static(m, opts);
    const GainCertificate c = l1_gain_lp(m, opts);
    CHECK(std::abs(c.gamma - gs) <= equivalence_tol(gs, opts.epsilon));
    CHECK(c.min_margin() >= opts.epsilon / 2.0);
    const double ref = induced_norm_1(Matrix(DenseMatrix(oracle::moment_static_gain(m))));
    CHECK(std::abs(gs - ref) <= 1e-9 * (1.0 + ref));
  }
  oracle::RandomModelOptions delay_free;
  delay_free.with_delay_terms = false;
  for (int trial = 0; trial < 40; ++trial) {
    const MjlsModel m = oracle::random_positive_model(rng, delay_free);
    CAPTURE(trial);
    const double gs = linf_gain_static(m, opts);
    const GainCertificate c = linf_gain_lp(m, opts);
    CHECK(std::abs(c.gamma - gs) <= equivalence_tol(gs, opts.epsilon));
    CHECK(c.min_margin() >= opts.epsilon / 2.0);
  }
}

TEST_CASE("gains scale linearly with the input matrices") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    MjlsModel m = oracle::random_positive_model(rng);
    for (auto& mode : m.modes) mode.F = Matrix(mode.F.rows(), mode.F.cols());
    MjlsModel scaled = m;
    const double k = 3.5;
    for (auto& mode : scaled.modes) mode.E = mode.E * k;
    const double g1 = l1_gain_lp(m).gamma;
    const double gk = l1_gain_lp(scaled).gamma;
    CHECK(std::abs(gk - k * g1) <= 1e-6 * (k * g1) + 1e-6);
  }
}

TEST_CASE("certificate margins recompute the strict conditions") {
  const MjlsModel m = ex1_error();
  const GainCertificate c = l1_gain_lp(m);
  const auto margins = certificate_margins(m, GainKind::L1, c.gamma, c.lambdas);
  CHECK(margins == c.margins);
  const auto worse = certificate_margins(m, GainKind::L1, c.gamma - 0.1, c.lambdas);
  double min_worse = worse.front();
  for (double v : worse) min_worse = std::min(min_worse, v);
  CHECK(min_worse < 0.0);
}
