#include "mjls/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mjls {

namespace {

std::string mode_name(const char* symbol, std::size_t i) {
  return std::string(symbol) + "_" + std::to_string(i + 1);
}

void check_shape(std::vector<std::string>& out, const Matrix& m, const std::string& name,
                 std::size_t rows, const char* rows_sym, std::size_t cols, const char* cols_sym) {
  if (m.rows() != rows) {
    out.push_back(name + " must have " + rows_sym + " rows (" + std::to_string(rows) +
                  "), got " + std::to_string(m.rows()));
  }
  if (m.cols() != cols) {
    out.push_back(name + " must have " + cols_sym + " columns (" + std::to_string(cols) +
                  "), got " + std::to_string(m.cols()));
  }
}

// B - L Bc with entries below the rounding level of their own terms set to zero.
Matrix closed_loop(const Matrix& B, const Matrix& L, const Matrix& Bc) {
  const DenseMatrix value = B.dense() - L.dense() * Bc.dense();
  const DenseMatrix scale = B.dense().cwiseAbs() + L.dense().cwiseAbs() * Bc.dense().cwiseAbs();
  const double unit = 8.0 * static_cast<double>(L.cols() + 1) * std::numeric_limits<double>::epsilon();
  return Matrix(DenseMatrix((value.cwiseAbs().array() <= unit * scale.array()).select(0.0, value)));
}

MatrixCheck metzler_check(const Matrix& m, std::string name, double tol) {
  MatrixCheck check{std::move(name), "Metzler"};
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (i != j && m(i, j) < -tol && m(i, j) < worst) {
        worst = m(i, j);
        check = {check.name, check.property, false, i, j, worst};
      }
    }
  }
  return check;
}

MatrixCheck nonnegative_check(const Matrix& m, std::string name, double tol) {
  MatrixCheck check{std::move(name), "nonnegative"};
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j) < -tol && m(i, j) < worst) {
        worst = m(i, j);
        check = {check.name, check.property, false, i, j, worst};
      }
    }
  }
  return check;
}

}  // namespace

bool MjlsModel::is_delay_free() const {
  for (const auto& m : modes) {
    if (!m.Ah.is_zero() || !m.Ch.is_zero()) {
      return false;
    }
  }
  return true;
}

MjlsModel make_model(std::vector<Mode> modes, Matrix generator, double delay) {
  MjlsModel model;
  model.dims.modes = modes.size();
  if (!modes.empty()) {
    const Mode& first = modes.front();
    model.dims.states = first.A.rows();
    model.dims.disturbances = first.E.cols();
    model.dims.outputs = first.C.rows();
  }
  const auto& d = model.dims;
  for (auto& m : modes) {
    if (m.Ah.empty()) m.Ah = Matrix(d.states, d.states);
    if (m.Ch.empty()) m.Ch = Matrix(d.outputs, d.states);
    if (m.F.empty()) m.F = Matrix(d.outputs, d.disturbances);
  }
  model.modes = std::move(modes);
  model.generator = std::move(generator);
  model.delay = delay;
  return model;
}

std::vector<std::string> validate_generator(const Matrix& pi) {
  std::vector<std::string> out;
  if (!pi.is_square()) {
    out.push_back("generator Pi must be square, got " + shape_of(pi));
    return out;
  }
  for (std::size_t i = 0; i < pi.rows(); ++i) {
    double row_sum = 0.0;
    double row_scale = 0.0;
    for (std::size_t j = 0; j < pi.cols(); ++j) {
      row_sum += pi(i, j);
      row_scale = std::max(row_scale, std::abs(pi(i, j)));
      if (i != j && pi(i, j) < 0.0) {
        out.push_back("generator must be Metzler: Pi row " + std::to_string(i + 1) +
                      " has negative off-diagonal entry in column " + std::to_string(j + 1));
      }
    }
    if (std::abs(row_sum) > 1e-12 * std::max(1.0, row_scale)) {
      std::ostringstream os;
      os << "generator rows must sum to 0: Pi row " << i + 1 << " sums to " << row_sum;
      out.push_back(os.str());
    }
  }
  return out;
}

std::vector<std::string> validate(const MjlsModel& model) {
  std::vector<std::string> out;
  const auto& d = model.dims;
  if (d.modes == 0) out.push_back("model must have at least one mode (N >= 1)");
  if (d.states == 0) out.push_back("state dimension n must be positive");
  if (model.modes.size() != d.modes) {
    out.push_back("expected N = " + std::to_string(d.modes) + " modes, got " +
                  std::to_string(model.modes.size()));
  }
  if (!std::isfinite(model.delay) || model.delay < 0.0) {
    out.push_back("delay h must be finite and nonnegative");
  }

  for (std::size_t i = 0; i < model.modes.size(); ++i) {
    const Mode& m = model.modes[i];
    check_shape(out, m.A, mode_name("A", i), d.states, "n", d.states, "n");
    check_shape(out, m.Ah, mode_name("Ah", i), d.states, "n", d.states, "n");
    check_shape(out, m.E, mode_name("E", i), d.states, "n", d.disturbances, "n_w");
    check_shape(out, m.C, mode_name("C", i), d.outputs, "n_y", d.states, "n");
    check_shape(out, m.Ch, mode_name("Ch", i), d.outputs, "n_y", d.states, "n");
    check_shape(out, m.F, mode_name("F", i), d.outputs, "n_y", d.disturbances, "n_w");
  }

  const Matrix& pi = model.generator;
  if (pi.rows() != d.modes || pi.cols() != d.modes) {
    out.push_back("generator Pi must be N x N (" + std::to_string(d.modes) + "x" +
                  std::to_string(d.modes) + "), got " + shape_of(pi));
    return out;
  }
  for (auto& v : validate_generator(pi)) out.push_back(std::move(v));
  return out;
}

void require_valid(const MjlsModel& model) {
  const auto violations = validate(model);
  if (violations.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& v : violations) msg += "\n  - " + v;
  throw InvalidModelError(msg);
}

std::vector<MatrixCheck> PositivityReport::failures() const {
  std::vector<MatrixCheck> out;
  for (const auto& c : checks) {
    if (!c.ok) out.push_back(c);
  }
  return out;
}

PositivityReport check_internal_positivity(const MjlsModel& model, double tol) {
  PositivityReport report;
  for (std::size_t i = 0; i < model.modes.size(); ++i) {
    const Mode& m = model.modes[i];
    report.checks.push_back(metzler_check(m.A, mode_name("A", i), tol));
    report.checks.push_back(nonnegative_check(m.Ah, mode_name("Ah", i), tol));
    report.checks.push_back(nonnegative_check(m.E, mode_name("E", i), tol));
    report.checks.push_back(nonnegative_check(m.C, mode_name("C", i), tol));
    report.checks.push_back(nonnegative_check(m.Ch, mode_name("Ch", i), tol));
    report.checks.push_back(nonnegative_check(m.F, mode_name("F", i), tol));
  }
  for (const auto& c : report.checks) {
    report.positive = report.positive && c.ok;
  }
  return report;
}

Matrix transition_matrix(const Matrix& generator, double tau) {
  if (tau == 0.0) return Matrix::identity(generator.rows());
  return expm(generator * tau);
}

MomentSystem build_moment_system(const MjlsModel& model) {
  require_valid(model);
  const std::size_t n = model.state_dim();
  std::vector<Matrix> a, ah, c, ch, e, f;
  for (const auto& m : model.modes) {
    a.push_back(m.A);
    ah.push_back(m.Ah);
    c.push_back(m.C);
    ch.push_back(m.Ch);
    e.push_back(m.E);
    f.push_back(m.F);
  }
  MomentSystem ms;
  ms.Ph = transition_matrix(model.generator, model.delay);
  const Matrix mixing = kron(ms.Ph.transpose(), Matrix::identity(n));
  ms.Abar = block_diag(a) + kron(model.generator.transpose(), Matrix::identity(n));
  ms.Ahbar = block_diag(ah) * mixing;
  ms.Cbar = block_diag(c);
  ms.Chbar = block_diag(ch) * mixing;
  ms.Ebar = block_diag(e);
  ms.Fbar = block_diag(f);
  return ms;
}

Matrix static_gain(const MomentSystem& ms) {
  const Matrix minus_a = (ms.Abar + ms.Ahbar) * -1.0;
  Matrix resolvent_e;
  try {
    resolvent_e = solve_linear(minus_a, ms.Ebar);
  } catch (const SingularMatrixError&) {
    throw SingularMatrixError("moment system not invertible at s=0");
  }
  return (ms.Cbar + ms.Chbar) * resolvent_e + ms.Fbar;
}

ObserverErrorModel build_error_model(const MjlsModel& model, const std::vector<Matrix>& gains,
                                     const Matrix& M) {
  require_valid(model);
  const auto& d = model.dims;
  if (gains.size() != d.modes) {
    throw DimensionError("expected " + std::to_string(d.modes) + " gains, got " +
                         std::to_string(gains.size()));
  }
  if (M.cols() != d.states || M.rows() == 0) {
    throw DimensionError("M must be q x n with n = " + std::to_string(d.states) + ", got " +
                         shape_of(M));
  }
  if (!is_nonnegative(M) || M.max_abs() == 0.0) {
    throw std::invalid_argument("M must be nonnegative with at least one positive entry");
  }

  std::vector<Mode> modes;
  for (std::size_t i = 0; i < d.modes; ++i) {
    const Matrix& L = gains[i];
    if (L.rows() != d.states || L.cols() != d.outputs) {
      throw DimensionError("L_" + std::to_string(i + 1) + " must be " +
                           std::to_string(d.states) + "x" + std::to_string(d.outputs) +
                           ", got " + shape_of(L));
    }
    const Mode& m = model.modes[i];
    modes.push_back(Mode{closed_loop(m.A, L, m.C), closed_loop(m.Ah, L, m.Ch), closed_loop(m.E, L, m.F), M,
                         Matrix(M.rows(), d.states), Matrix(M.rows(), d.disturbances)});
  }
  return ObserverErrorModel{make_model(std::move(modes), model.generator, model.delay), M};
}

ObserverErrorModel build_error_model(const MjlsModel& model, const std::vector<Matrix>& gains) {
  return build_error_model(model, gains, Matrix::identity(model.state_dim()));
}

}  // namespace mjls
