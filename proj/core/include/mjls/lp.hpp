#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace mjls::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Strict relations (Less, Greater) are allowed while building condition rows
/// but must go through strictify() before a Problem accepts them.
enum class Relation { Less, LessEqual, Equal, GreaterEqual, Greater };

struct Term {
  std::size_t var;
  double coef;
};

struct Row {
  std::vector<Term> terms;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
  std::string name;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  double cost = 0.0;
};

/// Minimize c^T x subject to linear rows and per-variable bounds.
class Problem {
 public:
  std::size_t add_variable(std::string name, double lower = 0.0, double upper = kInfinity,
                           double cost = 0.0);
  void set_cost(std::size_t var, double cost);
  void set_bounds(std::size_t var, double lower, double upper);

  std::size_t add_row(Row row);
  std::size_t add_row(std::vector<Term> terms, Relation relation, double rhs,
                      std::string name = {});

  std::size_t variable_count() const { return vars_.size(); }
  std::size_t row_count() const { return rows_.size(); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }

  /// Throws std::invalid_argument if a coefficient or bound is malformed,
  /// an index is out of range, or a strict relation slipped through.
  void check() const;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
};

enum class Status { Optimal, Infeasible, Unbounded, Stalled };

std::string to_string(Status status);

struct Solution {
  Status status = Status::Stalled;
  double objective = 0.0;
  std::vector<double> values;
  // activity - rhs for every row, in row order.
  std::vector<double> residuals;
  std::size_t iterations = 0;
  std::string message;

  bool optimal() const { return status == Status::Optimal; }
};

struct SolverOptions {
  // Phase-1 objective above this means infeasible.
  double infeasibility_threshold = 1e-9;
  double pivot_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  // Accepted row violation is feasibility_tolerance * (1 + |rhs|).
  double feasibility_tolerance = 1e-8;
  // 0 selects 50 * (rows + columns) + 1000.
  std::size_t max_iterations = 0;
  std::size_t refactor_period = 50;
};

/// Dense revised simplex (two phases, Bland's rule). Deterministic: the same
/// problem always yields the same result.
Solution solve(const Problem& problem, const SolverOptions& options = {});

/// "expr < b" becomes "expr <= b - epsilon" and "expr > b" becomes
/// "expr >= b + epsilon". Non-strict rows pass through unchanged.
std::vector<Row> strictify(std::vector<Row> rows, double epsilon);

/// Writes the problem in CPLEX LP text format, for cross-checking against
/// external solvers.
void write_cplex_lp(const Problem& problem, std::ostream& out);

}  // namespace mjls::lp
