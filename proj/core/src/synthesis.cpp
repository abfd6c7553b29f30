#include "mjls/synthesis.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mjls {

namespace {

// Index layout of the synthesis LP variables.
struct Layout {
  std::size_t modes;
  std::size_t n;
  std::size_t ny;

  std::size_t x(std::size_t row) const { return row; }  // row = mode * n + k
  std::size_t u(std::size_t row, std::size_t l) const { return modes * n + row * ny + l; }
  std::size_t alpha() const { return modes * n * (1 + ny); }
  std::size_t gamma() const { return alpha() + 1; }
};

// Sparse linear expression accumulated by variable index.
using Expr = std::map<std::size_t, double>;

void add(Expr& into, const Expr& e, double scale = 1.0) {
  for (const auto& [var, coef] : e) into[var] += scale * coef;
}

std::vector<lp::Term> terms_of(const Expr& e) {
  std::vector<lp::Term> out;
  for (const auto& [var, coef] : e) {
    if (coef != 0.0) out.push_back({var, coef});
  }
  return out;
}

// (Xbar B - Ubar Bc)[r, c] where Xbar = diag(x), Ubar = blockdiag(U_i).
Expr scaled_entry(const Layout& lay, const Matrix& B, const Matrix& Bc, std::size_t r,
                  std::size_t c) {
  Expr e;
  if (B(r, c) != 0.0) e[lay.x(r)] += B(r, c);
  const std::size_t mode = r / lay.n;
  for (std::size_t l = 0; l < lay.ny; ++l) {
    const double v = Bc(mode * lay.ny + l, c);
    if (v != 0.0) e[lay.u(r, l)] -= v;
  }
  return e;
}

// A ">= 0" row whose every term has a nonnegative coefficient on a variable
// with a nonnegative lower bound holds automatically.
bool trivially_nonnegative(const Expr& e, const lp::Problem& p) {
  for (const auto& [var, coef] : e) {
    if (coef == 0.0) continue;
    if (coef < 0.0 || p.variables()[var].lower < 0.0) return false;
  }
  return true;
}

std::string entry_label(const char* what, std::size_t r, std::size_t c) {
  return std::string(what) + "[" + std::to_string(r + 1) + "," + std::to_string(c + 1) + "]";
}

}  // namespace

void check_constraints(const StructuralConstraints& sc, const MjlsModel& model) {
  const std::size_t N = model.mode_count();
  const std::size_t n = model.state_dim();
  const std::size_t ny = model.output_dim();
  std::vector<std::string> problems;

  if (sc.entry_bound && !(std::isfinite(*sc.entry_bound) && *sc.entry_bound > 0.0)) {
    problems.push_back("entry bound must be a positive finite number");
  }
  if (!sc.zero_pattern.empty()) {
    if (sc.zero_pattern.size() != N) {
      problems.push_back("zero pattern needs one mask per mode (" + std::to_string(N) + "), got " +
                         std::to_string(sc.zero_pattern.size()));
    } else {
      for (std::size_t i = 0; i < N; ++i) {
        if (sc.zero_pattern[i].rows() != n || sc.zero_pattern[i].cols() != ny) {
          problems.push_back("zero-pattern mask " + std::to_string(i + 1) + " must be " +
                             std::to_string(n) + "x" + std::to_string(ny) + ", got " +
                             shape_of(sc.zero_pattern[i]));
        }
      }
    }
  }
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> seen;
  for (const auto& f : sc.fixed) {
    std::ostringstream label;
    label << "fixed entry L_" << f.mode + 1 << "(" << f.row + 1 << "," << f.col + 1 << ")";
    if (f.mode >= N || f.row >= n || f.col >= ny) {
      problems.push_back(label.str() + " is out of range");
      continue;
    }
    if (!std::isfinite(f.value)) problems.push_back(label.str() + " is not finite");
    if (sc.entry_bound && std::abs(f.value) > *sc.entry_bound) {
      problems.push_back(label.str() + " exceeds the entry bound");
    }
    if (sc.zero_pattern.size() == N && sc.zero_pattern[f.mode].rows() == n &&
        sc.zero_pattern[f.mode].cols() == ny && sc.zero_pattern[f.mode](f.row, f.col) != 0.0 &&
        f.value != 0.0) {
      problems.push_back(label.str() + " conflicts with the zero pattern");
    }
    const auto key = std::make_tuple(f.mode, f.row, f.col);
    if (auto it = seen.find(key); it != seen.end() && it->second != f.value) {
      problems.push_back(label.str() + " is fixed to two different values");
    }
    seen[key] = f.value;
  }

  if (!problems.empty()) {
    std::string msg = "inconsistent structural constraints:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw std::invalid_argument(msg);
  }
}

lp::Problem build_synthesis_lp(const MjlsModel& model, GainKind objective, const Matrix& M,
                               const StructuralConstraints& sc, const SynthesisOptions& options) {
  require_valid(model);
  check_constraints(sc, model);
  const double eps = options.epsilon;
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const Layout lay{model.mode_count(), model.state_dim(), model.output_dim()};
  const std::size_t N = lay.modes;
  const std::size_t n = lay.n;
  const std::size_t Nn = N * n;
  const std::size_t Nw = N * model.disturbance_dim();

  const MomentSystem ms = build_moment_system(model);

  lp::Problem p;
  for (std::size_t r = 0; r < Nn; ++r) {
    p.add_variable("X" + entry_label("", r / n, r % n), eps);
  }
  for (std::size_t r = 0; r < Nn; ++r) {
    for (std::size_t l = 0; l < lay.ny; ++l) {
      const std::size_t mode = r / n;
      const bool zero = !sc.zero_pattern.empty() && sc.zero_pattern[mode](r % n, l) != 0.0;
      const double lo = zero ? 0.0 : -lp::kInfinity;
      const double hi = zero ? 0.0 : lp::kInfinity;
      p.add_variable("U" + std::to_string(mode + 1) + entry_label("", r % n, l), lo, hi);
    }
  }
  p.add_variable("alpha", eps, options.alpha_cap);
  p.add_variable("gamma", eps, lp::kInfinity, 1.0);

  std::vector<lp::Row> strict_rows;

  // Metzler: X A - U C + alpha I >= 0 entrywise.
  for (std::size_t r = 0; r < Nn; ++r) {
    for (std::size_t c = 0; c < Nn; ++c) {
      Expr e = scaled_entry(lay, ms.Abar, ms.Cbar, r, c);
      if (r == c) e[lay.alpha()] += 1.0;
      if (trivially_nonnegative(e, p)) continue;
      p.add_row(terms_of(e), lp::Relation::GreaterEqual, 0.0, entry_label("metzler", r, c));
    }
  }
  if (objective == GainKind::L1) {
    for (std::size_t r = 0; r < Nn; ++r) {
      for (std::size_t c = 0; c < Nn; ++c) {
        const Expr e = scaled_entry(lay, ms.Ahbar, ms.Chbar, r, c);
        if (trivially_nonnegative(e, p)) continue;
        p.add_row(terms_of(e), lp::Relation::GreaterEqual, 0.0, entry_label("delayed", r, c));
      }
    }
  }
  for (std::size_t r = 0; r < Nn; ++r) {
    for (std::size_t c = 0; c < Nw; ++c) {
      const Expr e = scaled_entry(lay, ms.Ebar, ms.Fbar, r, c);
      if (trivially_nonnegative(e, p)) continue;
      p.add_row(terms_of(e), lp::Relation::GreaterEqual, 0.0, entry_label("input", r, c));
    }
  }

  // Column sums of the state block.
  const Matrix output = objective == GainKind::L1
                            ? kron(Matrix::identity(N), M)
                            : Matrix::ones(1, Nn);
  for (std::size_t c = 0; c < Nn; ++c) {
    Expr e;
    for (std::size_t r = 0; r < Nn; ++r) {
      add(e, scaled_entry(lay, ms.Abar, ms.Cbar, r, c));
      if (objective == GainKind::L1) add(e, scaled_entry(lay, ms.Ahbar, ms.Chbar, r, c));
    }
    double out_sum = 0.0;
    for (std::size_t q = 0; q < output.rows(); ++q) out_sum += output(q, c);
    strict_rows.push_back({terms_of(e), lp::Relation::Less, -out_sum, "column[" + std::to_string(c + 1) + "]"});
  }

  // Gain block.
  const bool columnwise =
      objective == GainKind::L1 || options.linf_reading == LinfGammaReading::Columnwise;
  if (columnwise) {
    for (std::size_t c = 0; c < Nw; ++c) {
      Expr e;
      for (std::size_t r = 0; r < Nn; ++r) add(e, scaled_entry(lay, ms.Ebar, ms.Fbar, r, c));
      e[lay.gamma()] -= 1.0;
      strict_rows.push_back({terms_of(e), lp::Relation::Less, 0.0, "gain[" + std::to_string(c + 1) + "]"});
    }
  } else {
    Expr e;
    for (std::size_t c = 0; c < Nw; ++c) {
      for (std::size_t r = 0; r < Nn; ++r) add(e, scaled_entry(lay, ms.Ebar, ms.Fbar, r, c));
    }
    e[lay.gamma()] -= 1.0;
    strict_rows.push_back({terms_of(e), lp::Relation::Less, 0.0, "gain"});
  }
  for (auto& row : lp::strictify(std::move(strict_rows), eps)) p.add_row(std::move(row));

  // Structural constraints, linear in (X, U) because X_i is diagonal positive.
  if (sc.entry_bound) {
    const double beta = *sc.entry_bound;
    for (std::size_t r = 0; r < Nn; ++r) {
      for (std::size_t l = 0; l < lay.ny; ++l) {
        const std::string label = "bound" + entry_label("", r, l);
        p.add_row({{lay.u(r, l), 1.0}, {lay.x(r), -beta}}, lp::Relation::LessEqual, 0.0, label + "+");
        p.add_row({{lay.u(r, l), -1.0}, {lay.x(r), -beta}}, lp::Relation::LessEqual, 0.0, label + "-");
      }
    }
  }
  for (const auto& f : sc.fixed) {
    const std::size_t r = f.mode * n + f.row;
    p.add_row({{lay.u(r, f.col), 1.0}, {lay.x(r), -f.value}}, lp::Relation::Equal, 0.0,
              "fixed" + entry_label("", r, f.col));
  }
  return p;
}

namespace {

ObserverDesign solve_synthesis(const MjlsModel& model, GainKind objective, const Matrix& M,
                               const StructuralConstraints& sc, const SynthesisOptions& options) {
  const lp::Problem problem = build_synthesis_lp(model, objective, M, sc, options);
  const lp::Solution sol = lp::solve(problem, options.solver);
  if (sol.status == lp::Status::Infeasible) {
    throw InfeasibleError("no observer in this class (synthesis LP infeasible: " + sol.message +
                          ")");
  }
  if (!sol.optimal()) {
    throw SolverError("synthesis LP: " + lp::to_string(sol.status) + " (" + sol.message +
                      ", iterations " + std::to_string(sol.iterations) + ")");
  }

  const Layout lay{model.mode_count(), model.state_dim(), model.output_dim()};
  ObserverDesign design;
  design.objective = objective;
  design.iterations = sol.iterations;
  design.certificate.alpha = sol.values[lay.alpha()];
  design.certificate.gamma = sol.values[lay.gamma()];
  for (std::size_t i = 0; i < lay.modes; ++i) {
    Vector x(static_cast<Eigen::Index>(lay.n));
    Matrix U(lay.n, lay.ny);
    Matrix L(lay.n, lay.ny);
    for (std::size_t k = 0; k < lay.n; ++k) {
      const std::size_t r = i * lay.n + k;
      x[static_cast<Eigen::Index>(k)] = sol.values[lay.x(r)];
      for (std::size_t l = 0; l < lay.ny; ++l) {
        const double u = sol.values[lay.u(r, l)];
        U.set(k, l, u);
        L.set(k, l, u / sol.values[lay.x(r)]);
      }
    }
    design.certificate.X.push_back(std::move(x));
    design.certificate.U.push_back(std::move(U));
    design.gains.push_back(std::move(L));
  }

  AnalysisOptions analysis;
  analysis.epsilon = options.epsilon;
  analysis.positivity_tolerance = 1e-9;
  analysis.solver = options.solver;
  const ObserverErrorModel err = build_error_model(model, design.gains, M);
  design.verified_gamma = objective == GainKind::L1 ? l1_gain_lp(err.system, analysis).gamma
                                                    : linf_gain_lp(err.system, analysis).gamma;
  return design;
}

}  // namespace

ObserverDesign synthesize_l1(const MjlsModel& model, const Matrix& M,
                             const StructuralConstraints& sc, const SynthesisOptions& options) {
  require_valid(model);
  if (M.cols() != model.state_dim() || M.rows() == 0 || !is_nonnegative(M) || M.max_abs() == 0.0) {
    throw std::invalid_argument("M must be a nonnegative, nonzero q x n matrix");
  }
  return solve_synthesis(model, GainKind::L1, M, sc, options);
}

ObserverDesign synthesize_linf(const MjlsModel& model, const StructuralConstraints& sc,
                               const SynthesisOptions& options) {
  require_valid(model);
  if (!model.is_delay_free()) {
    throw ScopeError(
        "L-infinity observer synthesis covers only delay-free models (all Ah_i and Ch_i must be "
        "zero)");
  }
  return solve_synthesis(model, GainKind::Linf, Matrix::identity(model.state_dim()), sc, options);
}

VerificationReport verify_design(const MjlsModel& model, const ObserverDesign& design,
                                 const Matrix& M, double tol, const AnalysisOptions& analysis) {
  VerificationReport report;
  report.objective = design.objective;

  ObserverErrorModel err;
  try {
    err = build_error_model(model, design.gains, M);
  } catch (const std::exception& e) {
    report.violations.push_back(e.what());
    return report;
  }

  const auto describe = [](const std::string& what, std::size_t mode, std::size_t r,
                           std::size_t c, double v, const char* property) {
    std::ostringstream os;
    os << what << " for mode " << mode + 1 << " entry (" << r + 1 << "," << c + 1
       << ") = " << v << " violates " << property;
    return os.str();
  };
  for (std::size_t i = 0; i < model.mode_count(); ++i) {
    const Mode& m = err.system.modes[i];
    for (std::size_t r = 0; r < m.A.rows(); ++r) {
      for (std::size_t c = 0; c < m.A.cols(); ++c) {
        if (r != c && m.A(r, c) < -tol) {
          report.violations.push_back(describe("A - L C", i, r, c, m.A(r, c), "Metzler"));
        }
        if (design.objective == GainKind::L1 && m.Ah(r, c) < -tol) {
          report.violations.push_back(describe("Ah - L Ch", i, r, c, m.Ah(r, c), "nonnegativity"));
        }
      }
      for (std::size_t c = 0; c < m.E.cols(); ++c) {
        if (m.E(r, c) < -tol) {
          report.violations.push_back(describe("E - L F", i, r, c, m.E(r, c), "nonnegativity"));
        }
      }
    }
  }
  if (!report.violations.empty()) return report;

  AnalysisOptions opts = analysis;
  opts.positivity_tolerance = std::max(opts.positivity_tolerance, tol);
  try {
    report.certified_gamma = design.objective == GainKind::L1
                                 ? l1_gain_lp(err.system, opts).gamma
                                 : linf_gain_lp(err.system, opts).gamma;
  } catch (const Error& e) {
    report.violations.push_back(std::string("closed-loop analysis failed: ") + e.what());
    return report;
  }
  report.accepted = true;
  return report;
}

}  // namespace mjls
