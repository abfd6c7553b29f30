#include "mjls/matrix.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace mjls {

namespace {

void require_finite(const DenseMatrix& m) {
  if (!m.allFinite()) {
    throw std::invalid_argument("matrix entries must be finite");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_of(a) + " vs " +
                         shape_of(b));
  }
}

void require_square(const Matrix& a, const char* op) {
  if (!a.is_square()) {
    throw DimensionError(std::string(op) + ": expected a square matrix, got " + shape_of(a));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : m_(DenseMatrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols))) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major) {
  if (row_major.size() != rows * cols) {
    throw DimensionError("matrix data has " + std::to_string(row_major.size()) +
                         " entries, expected " + std::to_string(rows * cols));
  }
  m_ = Eigen::Map<const DenseMatrix>(row_major.data(), static_cast<Eigen::Index>(rows),
                                     static_cast<Eigen::Index>(cols));
  require_finite(m_);
}

Matrix::Matrix(DenseMatrix values) : m_(std::move(values)) { require_finite(m_); }

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  m_.resize(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) {
      throw DimensionError("ragged initializer list");
    }
    Eigen::Index j = 0;
    for (double v : row) {
      m_(i, j++) = v;
    }
    ++i;
  }
  require_finite(m_);
}

Matrix Matrix::identity(std::size_t n) {
  return Matrix(DenseMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
}

Matrix Matrix::diagonal(const std::vector<double>& d) {
  Matrix out(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    out.set(i, i, d[i]);
  }
  return out;
}

Matrix Matrix::column(const std::vector<double>& v) { return Matrix(v.size(), 1, v); }

Matrix Matrix::ones(std::size_t rows, std::size_t cols) {
  return Matrix(DenseMatrix::Ones(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
}

double Matrix::operator()(std::size_t r, std::size_t c) const {
  if (r >= rows() || c >= cols()) {
    throw DimensionError("index (" + std::to_string(r) + "," + std::to_string(c) +
                         ") out of range for " + shape_of(*this));
  }
  return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

void Matrix::set(std::size_t r, std::size_t c, double value) {
  if (r >= rows() || c >= cols()) {
    throw DimensionError("index (" + std::to_string(r) + "," + std::to_string(c) +
                         ") out of range for " + shape_of(*this));
  }
  if (!std::isfinite(value)) {
    throw std::invalid_argument("matrix entries must be finite");
  }
  m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = value;
}

std::vector<double> Matrix::entries() const {
  return std::vector<double>(m_.data(), m_.data() + m_.size());
}

Matrix Matrix::transpose() const { return Matrix(DenseMatrix(m_.transpose())); }

double Matrix::max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+");
  m_ += other.m_;
  require_finite(m_);
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-");
  m_ -= other.m_;
  require_finite(m_);
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  m_ *= s;
  require_finite(m_);
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("operator*: inner dimensions differ " + shape_of(a) + " * " +
                         shape_of(b));
  }
  return Matrix(DenseMatrix(a.m_ * b.m_));
}

std::string shape_of(const Matrix& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

bool is_metzler(const Matrix& a, double tol) {
  require_square(a, "is_metzler");
  const auto& m = a.dense();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && m(i, j) < -tol) {
        return false;
      }
    }
  }
  return true;
}

bool is_nonnegative(const Matrix& a, double tol) {
  return a.empty() || a.dense().minCoeff() >= -tol;
}

Matrix expm(const Matrix& a) {
  require_square(a, "expm");
  if (a.empty()) {
    return a;
  }
  // MatrixFunctions operates on column-major storage.
  const Eigen::MatrixXd col_major = a.dense();
  Eigen::MatrixXd result = col_major.exp();
  return Matrix(DenseMatrix(result));
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  require_square(a, "solve_linear");
  if (b.rows() != a.rows()) {
    throw DimensionError("solve_linear: right-hand side has " + std::to_string(b.rows()) +
                         " rows, expected " + std::to_string(a.rows()));
  }
  if (a.empty()) {
    return Matrix(0, b.cols());
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a.dense());
  const double threshold = 1e-12 * induced_norm_inf(a);
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  if (pivots.minCoeff() <= threshold) {
    throw SingularMatrixError("solve_linear: matrix is singular or ill-conditioned (pivot " +
                              std::to_string(pivots.minCoeff()) + ")");
  }
  const Eigen::MatrixXd x = lu.solve(Eigen::MatrixXd(b.dense()));
  return Matrix(DenseMatrix(x));
}

double induced_norm_1(const Matrix& a) {
  return a.empty() ? 0.0 : a.dense().cwiseAbs().colwise().sum().maxCoeff();
}

double induced_norm_inf(const Matrix& a) {
  return a.empty() ? 0.0 : a.dense().cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  DenseMatrix out(a.dense().rows() * b.dense().rows(), a.dense().cols() * b.dense().cols());
  for (Eigen::Index i = 0; i < a.dense().rows(); ++i) {
    for (Eigen::Index j = 0; j < a.dense().cols(); ++j) {
      out.block(i * b.dense().rows(), j * b.dense().cols(), b.dense().rows(), b.dense().cols()) =
          a.dense()(i, j) * b.dense();
    }
  }
  return Matrix(std::move(out));
}

Matrix block_diag(const std::vector<Matrix>& blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.dense().rows();
    cols += b.dense().cols();
  }
  DenseMatrix out = DenseMatrix::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.dense().rows(), b.dense().cols()) = b.dense();
    r += b.dense().rows();
    c += b.dense().cols();
  }
  return Matrix(std::move(out));
}

}  // namespace mjls
