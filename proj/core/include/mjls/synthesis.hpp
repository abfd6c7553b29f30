#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mjls/analysis.hpp"
#include "mjls/lp.hpp"
#include "mjls/matrix.hpp"
#include "mjls/model.hpp"

namespace mjls {

struct FixedGainEntry {
  std::size_t mode = 0;  // 0-based
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Linear restrictions on the observer gains L_i.
struct StructuralConstraints {
  // |(L_i)_kl| <= entry_bound for every mode and entry.
  std::optional<double> entry_bound;
  // One n x n_y mask per mode; nonzero entries force (L_i)_kl = 0. Empty
  // means no zero pattern.
  std::vector<Matrix> zero_pattern;
  std::vector<FixedGainEntry> fixed;
};

/// Throws std::invalid_argument describing every inconsistency (bad bound,
/// mask shape, fixed entry out of range or clashing with the mask/bound).
void check_constraints(const StructuralConstraints& sc, const MjlsModel& model);

/// How the gamma block of the L-infinity synthesis LP is read.
enum class LinfGammaReading {
  // 1^T (X E - U F) 1 - gamma < 0
  Scalar,
  // 1^T (X E - U F) - gamma 1^T < 0, column by column
  Columnwise,
};

struct SynthesisOptions {
  double epsilon = 1e-7;
  // Upper bound on the shared Metzler-shift scalar alpha.
  double alpha_cap = 1e6;
  LinfGammaReading linf_reading = LinfGammaReading::Scalar;
  lp::SolverOptions solver;
};

/// Feasible point of the synthesis LP. X_i is diagonal; only its diagonal is
/// stored.
struct SynthesisCertificate {
  std::vector<Vector> X;
  std::vector<Matrix> U;
  double alpha = 0.0;
  double gamma = 0.0;
};

struct ObserverDesign {
  GainKind objective = GainKind::L1;
  std::vector<Matrix> gains;  // L_i = X_i^{-1} U_i
  SynthesisCertificate certificate;
  // Gain of the closed-loop error system recomputed by the analysis LP.
  double verified_gamma = 0.0;
  std::size_t iterations = 0;
};

/// Interval observer minimizing the L1 gain from the disturbance gap to
/// M e, over X_i (diagonal, >= eps), U_i, alpha, gamma:
///   X A - U C + alpha I >= 0,  X Ah - U Ch >= 0,  X E - U F >= 0
///   1^T [(X A - U C) + (X Ah - U Ch)] + 1^T (I_N (x) M) < 0
///   1^T (X E - U F) - gamma 1^T < 0
/// (barred block matrices). Throws InfeasibleError ("no observer in this
/// class") and std::invalid_argument on inconsistent constraints.
ObserverDesign synthesize_l1(const MjlsModel& model, const Matrix& M,
                             const StructuralConstraints& sc = {},
                             const SynthesisOptions& options = {});

/// L-infinity variant for delay-free models. The returned verified_gamma is
/// the analysis bound of the closed loop with M = I_n.
ObserverDesign synthesize_linf(const MjlsModel& model, const StructuralConstraints& sc = {},
                               const SynthesisOptions& options = {});

/// The synthesis LP as solved, for dumping. Variables are ordered X (mode-major
/// diagonal entries), U (mode, row, col), alpha, gamma.
lp::Problem build_synthesis_lp(const MjlsModel& model, GainKind objective, const Matrix& M,
                               const StructuralConstraints& sc, const SynthesisOptions& options);

struct VerificationReport {
  bool accepted = false;
  GainKind objective = GainKind::L1;
  std::vector<std::string> violations;
  std::optional<double> certified_gamma;
};

/// Checks the closed-loop positivity conditions (A_i - L_i C_i Metzler,
/// E_i - L_i F_i >= 0 and, for L1 designs, Ah_i - L_i Ch_i >= 0) with
/// tolerance `tol`, then re-solves the analysis LP on the error system.
VerificationReport verify_design(const MjlsModel& model, const ObserverDesign& design,
                                 const Matrix& M, double tol = 1e-9,
                                 const AnalysisOptions& analysis = {});

}  // namespace mjls
