#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mjls/matrix.hpp"

namespace mjls {

class InvalidModelError : public Error {
 public:
  using Error::Error;
};

struct Dimensions {
  std::size_t modes = 0;         // N
  std::size_t states = 0;        // n
  std::size_t disturbances = 0;  // n_w
  std::size_t outputs = 0;       // n_y (or n_z)
};

/// Per-mode matrices of
///   dx/dt = A x(t) + Ah x(t-h) + E w(t)
///   y     = C x(t) + Ch x(t-h) + F w(t)
struct Mode {
  Matrix A;
  Matrix Ah;
  Matrix E;
  Matrix C;
  Matrix Ch;
  Matrix F;
};

/// Markov jump linear system with a constant discrete delay. The switching
/// signal is a continuous-time Markov chain with generator `generator`.
///
/// A model may be constructed in an invalid state (e.g. straight from a file);
/// call validate() before handing it to the analysis routines, which re-check
/// and throw InvalidModelError otherwise.
struct MjlsModel {
  Dimensions dims;
  std::vector<Mode> modes;
  Matrix generator;  // Pi, N x N
  double delay = 0.0;

  std::size_t mode_count() const { return dims.modes; }
  std::size_t state_dim() const { return dims.states; }
  std::size_t disturbance_dim() const { return dims.disturbances; }
  std::size_t output_dim() const { return dims.outputs; }

  /// True when every Ah and Ch is zero.
  bool is_delay_free() const;
};

/// Builds a model from per-mode matrices, inferring dimensions from the first
/// mode. Empty Ah/Ch/F are replaced by zero matrices of the right shape.
MjlsModel make_model(std::vector<Mode> modes, Matrix generator, double delay = 0.0);

/// Violations of the generator conditions: square, Metzler, rows summing to
/// zero (within 1e-12 relative to the largest entry of the row).
std::vector<std::string> validate_generator(const Matrix& generator);

/// Empty iff dimensions are consistent, the generator is a valid (Metzler,
/// zero row sum) generator, and the delay is finite and nonnegative.
std::vector<std::string> validate(const MjlsModel& model);

/// Throws InvalidModelError listing every violation.
void require_valid(const MjlsModel& model);

/// One line of a positivity report.
struct MatrixCheck {
  std::string name;      // e.g. "A_1", "E_2" (1-based mode)
  std::string property;  // "Metzler" or "nonnegative"
  bool ok = true;
  // Worst offending entry when !ok.
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

struct PositivityReport {
  bool positive = true;
  std::vector<MatrixCheck> checks;

  std::vector<MatrixCheck> failures() const;
};

/// Internal positivity: every A_i Metzler and every Ah_i, E_i, C_i, Ch_i, F_i
/// nonnegative.
PositivityReport check_internal_positivity(const MjlsModel& model, double tol = 0.0);

/// Stacked matrices of the moment system for x_i(t) = E[x(t) 1{r_t = i}].
struct MomentSystem {
  Matrix Abar;   // blockdiag(A_i) + Pi^T (x) I_n
  Matrix Ahbar;  // blockdiag(Ah_i) (P(h)^T (x) I_n)
  Matrix Cbar;   // blockdiag(C_i)
  Matrix Chbar;  // blockdiag(Ch_i) (P(h)^T (x) I_n)
  Matrix Ebar;   // blockdiag(E_i)
  Matrix Fbar;   // blockdiag(F_i)
  Matrix Ph;     // P(h) = expm(Pi h)
};

/// P(h) = expm(Pi * h): transition probabilities over one delay.
Matrix transition_matrix(const Matrix& generator, double tau);

MomentSystem build_moment_system(const MjlsModel& model);

/// Transfer function of the moment system at s = 0:
///   G(0) = (Cbar + Chbar)(-Abar - Ahbar)^{-1} Ebar + Fbar.
Matrix static_gain(const MomentSystem& ms);

/// Dynamics of the estimation errors e+ = x+ - x and e- = x - x- for the
/// observer gains L_i. `system` has A_i - L_i C_i, Ah_i - L_i Ch_i,
/// E_i - L_i F_i and output matrix M in place of C (Ch = 0, F = 0).
struct ObserverErrorModel {
  MjlsModel system;
  Matrix M;
};

/// Entries whose magnitude is within rounding of their own terms are stored
/// as zero. Throws DimensionError on shape mismatch and std::invalid_argument
/// when M is negative somewhere or identically zero.
ObserverErrorModel build_error_model(const MjlsModel& model, const std::vector<Matrix>& gains,
                                     const Matrix& M);

/// Convenience: the error model with M = I_n.
ObserverErrorModel build_error_model(const MjlsModel& model, const std::vector<Matrix>& gains);

}  // namespace mjls
