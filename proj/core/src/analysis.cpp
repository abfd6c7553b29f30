#include "mjls/analysis.hpp"

#include <algorithm>
#include <limits>

namespace mjls {

std::string to_string(GainKind kind) { return kind == GainKind::L1 ? "L1" : "Linf"; }

double GainCertificate::min_margin() const {
  return margins.empty() ? 0.0 : *std::min_element(margins.begin(), margins.end());
}

namespace {

// Row r of the condition set reads
//   lambda_coef.row(r) * lambda + gamma_coef[r] * gamma + constant[r] < 0
// with lambda stacked mode-major.
struct ConditionSystem {
  DenseMatrix lambda_coef;
  Vector gamma_coef;
  Vector constant;
  std::vector<std::string> names;
};

ConditionSystem l1_conditions(const MjlsModel& model) {
  const std::size_t N = model.mode_count();
  const std::size_t n = model.state_dim();
  const std::size_t nw = model.disturbance_dim();
  const std::size_t ny = model.output_dim();
  const Matrix ph = transition_matrix(model.generator, model.delay);
  const Matrix& pi = model.generator;
  const auto idx = [n](std::size_t mode, std::size_t k) { return static_cast<Eigen::Index>(mode * n + k); };

  const auto rows = static_cast<Eigen::Index>(N * n + N * nw);
  ConditionSystem cs{DenseMatrix::Zero(rows, static_cast<Eigen::Index>(N * n)),
                     Vector::Zero(rows), Vector::Zero(rows), {}};
  for (std::size_t i = 0; i < N; ++i) {
    const Mode& mi = model.modes[i];
    for (std::size_t k = 0; k < n; ++k) {
      const Eigen::Index r = idx(i, k);
      for (std::size_t m = 0; m < n; ++m) cs.lambda_coef(r, idx(i, m)) += mi.A(m, k);
      double c = 0.0;
      for (std::size_t q = 0; q < ny; ++q) c += mi.C(q, k);
      for (std::size_t j = 0; j < N; ++j) {
        const Mode& mj = model.modes[j];
        cs.lambda_coef(r, idx(j, k)) += pi(i, j);
        for (std::size_t m = 0; m < n; ++m) cs.lambda_coef(r, idx(j, m)) += ph(i, j) * mj.Ah(m, k);
        for (std::size_t q = 0; q < mj.Ch.rows(); ++q) c += ph(i, j) * mj.Ch(q, k);
      }
      cs.constant[r] = c;
      cs.names.push_back("state[" + std::to_string(i + 1) + "," + std::to_string(k + 1) + "]");
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    const Mode& mi = model.modes[i];
    for (std::size_t c = 0; c < nw; ++c) {
      const auto r = static_cast<Eigen::Index>(N * n + i * nw + c);
      for (std::size_t m = 0; m < n; ++m) cs.lambda_coef(r, idx(i, m)) = mi.E(m, c);
      cs.gamma_coef[r] = -1.0;
      double f = 0.0;
      for (std::size_t q = 0; q < ny; ++q) f += mi.F(q, c);
      cs.constant[r] = f;
      cs.names.push_back("gain[" + std::to_string(i + 1) + "," + std::to_string(c + 1) + "]");
    }
  }
  return cs;
}

ConditionSystem linf_conditions(const MjlsModel& model) {
  const std::size_t N = model.mode_count();
  const std::size_t n = model.state_dim();
  const std::size_t nw = model.disturbance_dim();
  const std::size_t ny = model.output_dim();
  const Matrix& pi = model.generator;
  const auto idx = [n](std::size_t mode, std::size_t k) { return static_cast<Eigen::Index>(mode * n + k); };

  const auto rows = static_cast<Eigen::Index>(N * n + N * ny);
  ConditionSystem cs{DenseMatrix::Zero(rows, static_cast<Eigen::Index>(N * n)),
                     Vector::Zero(rows), Vector::Zero(rows), {}};
  for (std::size_t i = 0; i < N; ++i) {
    const Mode& mi = model.modes[i];
    for (std::size_t k = 0; k < n; ++k) {
      const Eigen::Index r = idx(i, k);
      for (std::size_t m = 0; m < n; ++m) cs.lambda_coef(r, idx(i, m)) += mi.A(k, m);
      for (std::size_t j = 0; j < N; ++j) cs.lambda_coef(r, idx(j, k)) += pi(j, i);
      double e = 0.0;
      for (std::size_t c = 0; c < nw; ++c) e += mi.E(k, c);
      cs.constant[r] = e;
      cs.names.push_back("state[" + std::to_string(i + 1) + "," + std::to_string(k + 1) + "]");
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    const Mode& mi = model.modes[i];
    for (std::size_t q = 0; q < ny; ++q) {
      const auto r = static_cast<Eigen::Index>(N * n + i * ny + q);
      for (std::size_t m = 0; m < n; ++m) cs.lambda_coef(r, idx(i, m)) = mi.C(q, m);
      cs.gamma_coef[r] = -1.0;
      double f = 0.0;
      for (std::size_t c = 0; c < nw; ++c) f += mi.F(q, c);
      cs.constant[r] = f;
      cs.names.push_back("gain[" + std::to_string(i + 1) + "," + std::to_string(q + 1) + "]");
    }
  }
  return cs;
}

ConditionSystem conditions(const MjlsModel& model, GainKind kind) {
  return kind == GainKind::L1 ? l1_conditions(model) : linf_conditions(model);
}

void require_positive(const MjlsModel& model, double tol) {
  const PositivityReport report = check_internal_positivity(model, tol);
  if (report.positive) return;
  std::string msg = "model is not internally positive:";
  for (const auto& f : report.failures()) {
    msg += " " + f.name + " not " + f.property + ";";
  }
  throw NotPositiveError(msg);
}

void require_in_scope(const MjlsModel& model, GainKind kind, double tol) {
  require_valid(model);
  require_positive(model, tol);
  if (kind == GainKind::Linf && !model.is_delay_free()) {
    throw ScopeError(
        "L-infinity analysis covers only delay-free models (all Ah_i and Ch_i must be zero)");
  }
}

const char* unstable_message(GainKind kind) {
  return kind == GainKind::L1 ? "not stochastically stable in the L1-sense"
                              : "not stochastically stable in the L-infinity-sense";
}

GainCertificate solve_gain(const MjlsModel& model, GainKind kind, const AnalysisOptions& options) {
  require_in_scope(model, kind, options.positivity_tolerance);
  const lp::Problem problem = build_gain_lp(model, kind, options.epsilon);
  const lp::Solution sol = lp::solve(problem, options.solver);
  if (sol.status == lp::Status::Infeasible) {
    throw InfeasibleError(unstable_message(kind));
  }
  if (!sol.optimal()) {
    throw SolverError(to_string(kind) + " gain LP: " + lp::to_string(sol.status) + " (" +
                      sol.message + ")");
  }

  const std::size_t N = model.mode_count();
  const std::size_t n = model.state_dim();
  GainCertificate cert;
  cert.kind = kind;
  cert.epsilon = options.epsilon;
  cert.iterations = sol.iterations;
  cert.gamma = sol.values[N * n];
  for (std::size_t i = 0; i < N; ++i) {
    Vector l(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) l[static_cast<Eigen::Index>(k)] = sol.values[i * n + k];
    cert.lambdas.push_back(std::move(l));
  }
  cert.margins = certificate_margins(model, kind, cert.gamma, cert.lambdas);
  return cert;
}

double static_norm(const MjlsModel& model, GainKind kind, const AnalysisOptions& options) {
  require_in_scope(model, kind, options.positivity_tolerance);
  if (!is_moment_stable(model, kind, options.solver)) {
    throw InfeasibleError(unstable_message(kind));
  }
  const Matrix g = static_gain(build_moment_system(model));
  return kind == GainKind::L1 ? induced_norm_1(g) : induced_norm_inf(g);
}

}  // namespace

lp::Problem build_gain_lp(const MjlsModel& model, GainKind kind, double epsilon) {
  const ConditionSystem cs = conditions(model, kind);
  const std::size_t N = model.mode_count();
  const std::size_t n = model.state_dim();

  lp::Problem p;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      p.add_variable("lambda[" + std::to_string(i + 1) + "," + std::to_string(k + 1) + "]",
                     epsilon);
    }
  }
  const std::size_t gamma = p.add_variable("gamma", epsilon, lp::kInfinity, 1.0);

  std::vector<lp::Row> rows;
  for (Eigen::Index r = 0; r < cs.lambda_coef.rows(); ++r) {
    lp::Row row;
    row.name = cs.names[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < cs.lambda_coef.cols(); ++c) {
      if (cs.lambda_coef(r, c) != 0.0) {
        row.terms.push_back({static_cast<std::size_t>(c), cs.lambda_coef(r, c)});
      }
    }
    if (cs.gamma_coef[r] != 0.0) row.terms.push_back({gamma, cs.gamma_coef[r]});
    row.relation = lp::Relation::Less;
    row.rhs = -cs.constant[r];
    rows.push_back(std::move(row));
  }
  for (auto& row : lp::strictify(std::move(rows), epsilon)) p.add_row(std::move(row));
  return p;
}

std::vector<double> certificate_margins(const MjlsModel& model, GainKind kind, double gamma,
                                        const std::vector<Vector>& lambdas) {
  const ConditionSystem cs = conditions(model, kind);
  const std::size_t n = model.state_dim();
  if (lambdas.size() != model.mode_count()) {
    throw DimensionError("expected one lambda per mode");
  }
  Vector stacked(static_cast<Eigen::Index>(lambdas.size() * n));
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (static_cast<std::size_t>(lambdas[i].size()) != n) {
      throw DimensionError("lambda_" + std::to_string(i + 1) + " must have n entries");
    }
    stacked.segment(static_cast<Eigen::Index>(i * n), static_cast<Eigen::Index>(n)) = lambdas[i];
  }
  const Vector value = cs.lambda_coef * stacked + cs.gamma_coef * gamma + cs.constant;
  std::vector<double> margins(static_cast<std::size_t>(value.size()));
  for (Eigen::Index r = 0; r < value.size(); ++r) margins[static_cast<std::size_t>(r)] = -value[r];
  return margins;
}

bool is_moment_stable(const MjlsModel& model, GainKind kind, const lp::SolverOptions& solver) {
  // Feasibility is scale invariant in lambda, so unit margins suffice.
  const ConditionSystem cs = conditions(model, kind);
  const std::size_t state_rows = model.mode_count() * model.state_dim();
  lp::Problem p;
  for (Eigen::Index c = 0; c < cs.lambda_coef.cols(); ++c) {
    p.add_variable("lambda" + std::to_string(c), 1.0);
  }
  for (std::size_t r = 0; r < state_rows; ++r) {
    std::vector<lp::Term> terms;
    for (Eigen::Index c = 0; c < cs.lambda_coef.cols(); ++c) {
      const double v = cs.lambda_coef(static_cast<Eigen::Index>(r), c);
      if (v != 0.0) terms.push_back({static_cast<std::size_t>(c), v});
    }
    p.add_row(std::move(terms), lp::Relation::LessEqual, -1.0, cs.names[r]);
  }
  const lp::Solution sol = lp::solve(p, solver);
  if (sol.status == lp::Status::Stalled) {
    throw SolverError("stability pre-check LP stalled: " + sol.message);
  }
  return sol.optimal();
}

GainCertificate l1_gain_lp(const MjlsModel& model, const AnalysisOptions& options) {
  return solve_gain(model, GainKind::L1, options);
}

double l1_gain_static(const MjlsModel& model, const AnalysisOptions& options) {
  return static_norm(model, GainKind::L1, options);
}

GainCertificate linf_gain_lp(const MjlsModel& model, const AnalysisOptions& options) {
  return solve_gain(model, GainKind::Linf, options);
}

double linf_gain_static(const MjlsModel& model, const AnalysisOptions& options) {
  return static_norm(model, GainKind::Linf, options);
}

}  // namespace mjls
