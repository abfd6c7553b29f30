#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mjls {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Dense real matrix with shape-checked arithmetic. Entries are row-major and
/// always finite: every constructor rejects NaN/Inf.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  explicit Matrix(DenseMatrix values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zero(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix identity(std::size_t n);
  static Matrix diagonal(const std::vector<double>& d);
  static Matrix column(const std::vector<double>& v);
  static Matrix ones(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(m_.cols()); }
  bool empty() const { return m_.size() == 0; }
  bool is_square() const { return m_.rows() == m_.cols(); }

  double operator()(std::size_t r, std::size_t c) const;
  void set(std::size_t r, std::size_t c, double value);

  const DenseMatrix& dense() const { return m_; }
  std::vector<double> entries() const;

  Matrix transpose() const;
  double max_abs() const;
  bool is_zero() const { return m_.isZero(0.0); }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.m_ == b.m_;
  }

 private:
  DenseMatrix m_;
};

std::string shape_of(const Matrix& a);

/// Off-diagonal entries all >= -tol.
bool is_metzler(const Matrix& a, double tol = 0.0);
/// All entries >= -tol.
bool is_nonnegative(const Matrix& a, double tol = 0.0);

/// Matrix exponential (scaling and squaring, Padé degree 13).
Matrix expm(const Matrix& a);

/// Solves A X = B. Throws SingularMatrixError when a pivot of the full-pivot
/// LU falls below 1e-12 * ||A||_inf.
Matrix solve_linear(const Matrix& a, const Matrix& b);

/// Max absolute column sum.
double induced_norm_1(const Matrix& a);
/// Max absolute row sum.
double induced_norm_inf(const Matrix& a);

Matrix kron(const Matrix& a, const Matrix& b);
Matrix block_diag(const std::vector<Matrix>& blocks);

}  // namespace mjls
