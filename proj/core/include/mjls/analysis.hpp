#pragma once

#include <string>
#include <vector>

#include "mjls/lp.hpp"
#include "mjls/matrix.hpp"
#include "mjls/model.hpp"

namespace mjls {

/// The LP has no solution: the system is not stable in the requested sense,
/// or no observer of the requested class exists.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class NotPositiveError : public Error {
 public:
  using Error::Error;
};

/// The request falls outside what the method covers (e.g. L-infinity
/// analysis of a delayed model).
class ScopeError : public Error {
 public:
  using Error::Error;
};

/// The LP solver stalled or returned an unexpected status.
class SolverError : public Error {
 public:
  using Error::Error;
};

enum class GainKind { L1, Linf };

std::string to_string(GainKind kind);

struct AnalysisOptions {
  // Strictness margin for "< 0" and "> 0" conditions.
  double epsilon = 1e-7;
  // Slack allowed in the positivity pre-check (0 = exact).
  double positivity_tolerance = 0.0;
  lp::SolverOptions solver;
};

/// LP certificate of a stochastic L1 or L-infinity gain bound.
///
/// For L1, `margins` holds one entry per state condition (mode-major) followed
/// by one per input column; for L-infinity, the state conditions are followed
/// by one per output row. Each margin is how far the strict condition sits
/// below zero.
struct GainCertificate {
  GainKind kind = GainKind::L1;
  double gamma = 0.0;
  std::vector<Vector> lambdas;
  std::vector<double> margins;
  double epsilon = 0.0;
  std::size_t iterations = 0;

  double min_margin() const;
};

/// Minimal L1 gain of a positive (possibly delayed) MJLS from the linear
/// program over (gamma, lambda_1..lambda_N):
///   A_i^T l_i + sum_j (pi_ij l_j + p_ij(h) Ah_j^T l_j)
///       + sum_j p_ij(h) Ch_j^T 1 + C_i^T 1 < 0
///   E_i^T l_i - gamma 1 + F_i^T 1 < 0
/// Throws NotPositiveError, InfeasibleError ("not stochastically stable in the
/// L1-sense") or SolverError.
GainCertificate l1_gain_lp(const MjlsModel& model, const AnalysisOptions& options = {});

/// ||G(0)||_1 of the moment system, after an LP stability pre-check.
double l1_gain_static(const MjlsModel& model, const AnalysisOptions& options = {});

/// Upper bound on the L-infinity gain of a delay-free positive MJLS:
///   A_i l_i + sum_j pi_ji l_j + E_i 1 < 0
///   C_i l_i - gamma 1 + F_i 1 < 0
/// The true gain of the jump system is at most gamma; the bound is not tight
/// in general. Throws ScopeError on delayed models.
GainCertificate linf_gain_lp(const MjlsModel& model, const AnalysisOptions& options = {});

/// ||G(0)||_inf of the moment system of a delay-free positive model.
double linf_gain_static(const MjlsModel& model, const AnalysisOptions& options = {});

/// The analysis LP exactly as solved, for dumping or inspection.
lp::Problem build_gain_lp(const MjlsModel& model, GainKind kind, double epsilon);

/// Re-evaluates the strict conditions at (gamma, lambdas) from the model
/// matrices; same layout as GainCertificate::margins.
std::vector<double> certificate_margins(const MjlsModel& model, GainKind kind, double gamma,
                                        const std::vector<Vector>& lambdas);

/// Existence of lambda > 0 with lambda^T (Abar + Ahbar) < 0 (L1) or
/// Abar lambda < 0 (L-infinity), decided by LP feasibility.
bool is_moment_stable(const MjlsModel& model, GainKind kind,
                      const lp::SolverOptions& solver = {});

}  // namespace mjls
