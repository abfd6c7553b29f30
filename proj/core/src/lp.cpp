#include "mjls/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace mjls::lp {

std::size_t Problem::add_variable(std::string name, double lower, double upper, double cost) {
  vars_.push_back(Variable{std::move(name), lower, upper, cost});
  return vars_.size() - 1;
}

void Problem::set_cost(std::size_t var, double cost) { vars_.at(var).cost = cost; }

void Problem::set_bounds(std::size_t var, double lower, double upper) {
  vars_.at(var).lower = lower;
  vars_.at(var).upper = upper;
}

std::size_t Problem::add_row(Row row) {
  rows_.push_back(std::move(row));
  return rows_.size() - 1;
}

std::size_t Problem::add_row(std::vector<Term> terms, Relation relation, double rhs,
                             std::string name) {
  return add_row(Row{std::move(terms), relation, rhs, std::move(name)});
}

void Problem::check() const {
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const auto& v = vars_[j];
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower == kInfinity ||
        v.upper == -kInfinity || v.lower > v.upper) {
      throw std::invalid_argument("variable '" + v.name + "' has invalid bounds");
    }
    if (!std::isfinite(v.cost)) {
      throw std::invalid_argument("variable '" + v.name + "' has a non-finite cost");
    }
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    const std::string label = r.name.empty() ? "row " + std::to_string(i) : "row '" + r.name + "'";
    if (r.relation == Relation::Less || r.relation == Relation::Greater) {
      throw std::invalid_argument(label + " uses a strict relation; strictify it first");
    }
    if (!std::isfinite(r.rhs)) {
      throw std::invalid_argument(label + " has a non-finite right-hand side");
    }
    for (const auto& t : r.terms) {
      if (t.var >= vars_.size()) {
        throw std::invalid_argument(label + " references unknown variable " +
                                    std::to_string(t.var));
      }
      if (!std::isfinite(t.coef)) {
        throw std::invalid_argument(label + " has a non-finite coefficient");
      }
    }
  }
}

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::Stalled: return "solver stalled";
  }
  return "unknown";
}

std::vector<Row> strictify(std::vector<Row> rows, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("strictify: epsilon must be positive");
  }
  for (auto& r : rows) {
    if (r.relation == Relation::Less) {
      r.relation = Relation::LessEqual;
      r.rhs -= epsilon;
    } else if (r.relation == Relation::Greater) {
      r.relation = Relation::GreaterEqual;
      r.rhs += epsilon;
    }
  }
  return rows;
}

namespace {

// How an original variable x maps onto nonnegative standard-form columns.
enum class MapKind { Shifted, Mirrored, Free };

struct VarMap {
  MapKind kind;
  Eigen::Index col;
  Eigen::Index col_neg;  // Free only
  double offset;         // lower (Shifted) or upper (Mirrored)
};

// min cost^T z  s.t.  a z = b, z >= 0, b >= 0.
struct StandardForm {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd cost;
  double cost_offset = 0.0;
  Eigen::Index first_artificial = 0;
  std::vector<Eigen::Index> initial_basis;
  std::vector<VarMap> maps;
};

StandardForm to_standard_form(const Problem& p) {
  StandardForm sf;
  Eigen::Index ncols = 0;
  struct BoundRow {
    Eigen::Index col;
    double rhs;
  };
  std::vector<BoundRow> bound_rows;
  for (const auto& v : p.variables()) {
    if (std::isfinite(v.lower)) {
      sf.maps.push_back({MapKind::Shifted, ncols, -1, v.lower});
      if (std::isfinite(v.upper)) bound_rows.push_back({ncols, v.upper - v.lower});
      ++ncols;
    } else if (std::isfinite(v.upper)) {
      sf.maps.push_back({MapKind::Mirrored, ncols++, -1, v.upper});
    } else {
      sf.maps.push_back({MapKind::Free, ncols, ncols + 1, 0.0});
      ncols += 2;
    }
  }
  const Eigen::Index structural = ncols;

  struct DenseRow {
    Eigen::VectorXd coef;
    Relation rel;
    double rhs;
  };
  std::vector<DenseRow> rows;
  rows.reserve(p.row_count() + bound_rows.size());
  for (const auto& r : p.rows()) {
    DenseRow d{Eigen::VectorXd::Zero(structural), r.relation, r.rhs};
    for (const auto& t : r.terms) {
      const VarMap& m = sf.maps[t.var];
      switch (m.kind) {
        case MapKind::Shifted:
          d.coef[m.col] += t.coef;
          d.rhs -= t.coef * m.offset;
          break;
        case MapKind::Mirrored:
          d.coef[m.col] -= t.coef;
          d.rhs -= t.coef * m.offset;
          break;
        case MapKind::Free:
          d.coef[m.col] += t.coef;
          d.coef[m.col_neg] -= t.coef;
          break;
      }
    }
    rows.push_back(std::move(d));
  }
  for (const auto& br : bound_rows) {
    DenseRow d{Eigen::VectorXd::Zero(structural), Relation::LessEqual, br.rhs};
    d.coef[br.col] = 1.0;
    rows.push_back(std::move(d));
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::Index slacks = 0;
  for (const auto& r : rows) {
    if (r.rel != Relation::Equal) ++slacks;
  }

  // Sign-normalize so b >= 0 and decide which rows need an artificial.
  std::vector<double> slack_sign(rows.size(), 0.0);
  Eigen::Index artificials = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    double s = r.rel == Relation::LessEqual ? 1.0 : (r.rel == Relation::GreaterEqual ? -1.0 : 0.0);
    if (r.rhs < 0.0) {
      r.coef = -r.coef;
      r.rhs = -r.rhs;
      s = -s;
    }
    slack_sign[i] = s;
    if (s != 1.0) ++artificials;
  }

  sf.first_artificial = structural + slacks;
  sf.a = Eigen::MatrixXd::Zero(m, structural + slacks + artificials);
  sf.b.resize(m);
  sf.initial_basis.resize(rows.size());
  Eigen::Index slack_col = structural;
  Eigen::Index art_col = sf.first_artificial;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    sf.a.row(row).head(structural) = rows[i].coef.transpose();
    sf.b[row] = rows[i].rhs;
    if (rows[i].rel != Relation::Equal) {
      sf.a(row, slack_col) = slack_sign[i];
      if (slack_sign[i] == 1.0) sf.initial_basis[i] = slack_col;
      ++slack_col;
    }
    if (slack_sign[i] != 1.0) {
      sf.a(row, art_col) = 1.0;
      sf.initial_basis[i] = art_col++;
    }
  }

  sf.cost = Eigen::VectorXd::Zero(sf.a.cols());
  const auto& vars = p.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const VarMap& mp = sf.maps[j];
    const double c = vars[j].cost;
    switch (mp.kind) {
      case MapKind::Shifted:
        sf.cost[mp.col] = c;
        sf.cost_offset += c * mp.offset;
        break;
      case MapKind::Mirrored:
        sf.cost[mp.col] = -c;
        sf.cost_offset += c * mp.offset;
        break;
      case MapKind::Free:
        sf.cost[mp.col] = c;
        sf.cost[mp.col_neg] = -c;
        break;
    }
  }
  return sf;
}

enum class PhaseResult { Optimal, Unbounded, IterationLimit };

class RevisedSimplex {
 public:
  RevisedSimplex(const StandardForm& sf, const SolverOptions& opt, std::size_t max_iterations)
      : sf_(sf), opt_(opt), max_iterations_(max_iterations), basis_(sf.initial_basis),
        is_basic_(static_cast<std::size_t>(sf.a.cols()), 0) {
    for (auto c : basis_) is_basic_[static_cast<std::size_t>(c)] = 1;
    refactor();
  }

  PhaseResult run(const Eigen::VectorXd& cost, bool allow_artificial) {
    const Eigen::Index m = sf_.a.rows();
    const Eigen::Index ncols = allow_artificial ? sf_.a.cols() : sf_.first_artificial;
    Eigen::VectorXd cb(m);
    std::size_t since_refactor = 0;
    while (true) {
      if (iterations_ >= max_iterations_) return PhaseResult::IterationLimit;

      for (Eigen::Index i = 0; i < m; ++i) cb[i] = cost[basis_[static_cast<std::size_t>(i)]];
      const Eigen::VectorXd y = binv_.transpose() * cb;

      // Bland: lowest-index improving column.
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < ncols; ++j) {
        if (is_basic_[static_cast<std::size_t>(j)]) continue;
        const double reduced = cost[j] - y.dot(sf_.a.col(j));
        if (reduced < -opt_.optimality_tolerance) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return PhaseResult::Optimal;

      const Eigen::VectorXd column = binv_ * sf_.a.col(entering);
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (column[i] > opt_.pivot_tolerance) {
          best = std::min(best, std::max(xb_[i], 0.0) / column[i]);
        }
      }
      if (!std::isfinite(best)) return PhaseResult::Unbounded;
      Eigen::Index leaving = -1;
      const double tie = best + 1e-12 * (1.0 + best);
      for (Eigen::Index i = 0; i < m; ++i) {
        if (column[i] > opt_.pivot_tolerance && std::max(xb_[i], 0.0) / column[i] <= tie) {
          if (leaving < 0 || basis_[static_cast<std::size_t>(i)] <
                                 basis_[static_cast<std::size_t>(leaving)]) {
            leaving = i;
          }
        }
      }
      pivot(entering, leaving, column);
      ++iterations_;
      if (++since_refactor >= opt_.refactor_period) {
        refactor();
        since_refactor = 0;
      }
    }
  }

  // Pivots zero-level artificial variables out of the basis where possible.
  void expel_artificials() {
    const Eigen::Index m = sf_.a.rows();
    for (Eigen::Index r = 0; r < m; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < sf_.first_artificial) continue;
      const Eigen::RowVectorXd binv_row = binv_.row(r);
      for (Eigen::Index j = 0; j < sf_.first_artificial; ++j) {
        if (is_basic_[static_cast<std::size_t>(j)]) continue;
        if (std::abs(binv_row.dot(sf_.a.col(j))) > opt_.pivot_tolerance) {
          const Eigen::VectorXd column = binv_ * sf_.a.col(j);
          pivot(j, r, column);
          break;
        }
      }
    }
    refactor();
  }

  void refactor() {
    const Eigen::Index m = sf_.a.rows();
    if (m == 0) {
      binv_.resize(0, 0);
      xb_.resize(0);
      return;
    }
    Eigen::MatrixXd basis_matrix(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      basis_matrix.col(i) = sf_.a.col(basis_[static_cast<std::size_t>(i)]);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
    binv_ = lu.inverse();
    xb_ = lu.solve(sf_.b);
    for (int k = 0; k < 2; ++k) xb_ += lu.solve(sf_.b - basis_matrix * xb_);
  }

  double objective(const Eigen::VectorXd& cost) const {
    double v = 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      v += cost[basis_[i]] * xb_[static_cast<Eigen::Index>(i)];
    }
    return v;
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(sf_.a.cols());
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      z[basis_[i]] = std::max(xb_[static_cast<Eigen::Index>(i)], 0.0);
    }
    return z;
  }

  std::size_t iterations() const { return iterations_; }

 private:
  void pivot(Eigen::Index entering, Eigen::Index leaving, const Eigen::VectorXd& column) {
    const double p = column[leaving];
    const double step = xb_[leaving] / p;
    xb_ -= step * column;
    xb_[leaving] = step;
    binv_.row(leaving) /= p;
    for (Eigen::Index i = 0; i < binv_.rows(); ++i) {
      if (i != leaving && column[i] != 0.0) {
        binv_.row(i) -= column[i] * binv_.row(leaving);
      }
    }
    is_basic_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(leaving)])] = 0;
    basis_[static_cast<std::size_t>(leaving)] = entering;
    is_basic_[static_cast<std::size_t>(entering)] = 1;
  }

  const StandardForm& sf_;
  const SolverOptions& opt_;
  std::size_t max_iterations_;
  std::size_t iterations_ = 0;
  std::vector<Eigen::Index> basis_;
  std::vector<char> is_basic_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
};

std::vector<double> recover(const StandardForm& sf, const Eigen::VectorXd& z) {
  std::vector<double> x(sf.maps.size());
  for (std::size_t j = 0; j < sf.maps.size(); ++j) {
    const VarMap& m = sf.maps[j];
    switch (m.kind) {
      case MapKind::Shifted: x[j] = m.offset + z[m.col]; break;
      case MapKind::Mirrored: x[j] = m.offset - z[m.col]; break;
      case MapKind::Free: x[j] = z[m.col] - z[m.col_neg]; break;
    }
  }
  return x;
}

}  // namespace

Solution solve(const Problem& problem, const SolverOptions& options) {
  problem.check();
  const StandardForm sf = to_standard_form(problem);
  const std::size_t max_iterations =
      options.max_iterations != 0
          ? options.max_iterations
          : 50 * static_cast<std::size_t>(sf.a.rows() + sf.a.cols()) + 1000;

  Solution sol;
  RevisedSimplex simplex(sf, options, max_iterations);

  if (sf.first_artificial < sf.a.cols()) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(sf.a.cols());
    phase1.tail(sf.a.cols() - sf.first_artificial).setOnes();
    const PhaseResult r1 = simplex.run(phase1, true);
    sol.iterations = simplex.iterations();
    if (r1 == PhaseResult::IterationLimit) {
      sol.status = Status::Stalled;
      sol.message = "iteration limit reached in phase 1";
      return sol;
    }
    simplex.refactor();
    if (simplex.objective(phase1) > options.infeasibility_threshold) {
      sol.status = Status::Infeasible;
      sol.message = "phase-1 objective " + std::to_string(simplex.objective(phase1));
      return sol;
    }
    simplex.expel_artificials();
  }

  const PhaseResult r2 = simplex.run(sf.cost, false);
  sol.iterations = simplex.iterations();
  if (r2 == PhaseResult::IterationLimit) {
    sol.status = Status::Stalled;
    sol.message = "iteration limit reached in phase 2";
    return sol;
  }
  if (r2 == PhaseResult::Unbounded) {
    sol.status = Status::Unbounded;
    sol.message = "objective unbounded below";
    return sol;
  }

  simplex.refactor();
  sol.values = recover(sf, simplex.primal());
  const auto& vars = problem.variables();
  sol.objective = 0.0;
  for (std::size_t j = 0; j < vars.size(); ++j) sol.objective += vars[j].cost * sol.values[j];

  bool feasible = true;
  sol.residuals.reserve(problem.row_count());
  for (const auto& r : problem.rows()) {
    double activity = 0.0;
    for (const auto& t : r.terms) activity += t.coef * sol.values[t.var];
    const double res = activity - r.rhs;
    sol.residuals.push_back(res);
    const double tol = options.feasibility_tolerance * (1.0 + std::abs(r.rhs));
    if ((r.relation == Relation::LessEqual && res > tol) ||
        (r.relation == Relation::GreaterEqual && res < -tol) ||
        (r.relation == Relation::Equal && std::abs(res) > tol)) {
      feasible = false;
      sol.message = "row '" + r.name + "' violated by " + std::to_string(std::abs(res));
    }
  }
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const double tol = options.feasibility_tolerance;
    if (sol.values[j] < vars[j].lower - tol * (1.0 + std::abs(vars[j].lower)) ||
        sol.values[j] > vars[j].upper + tol * (1.0 + std::abs(vars[j].upper))) {
      feasible = false;
      sol.message = "bound of '" + vars[j].name + "' violated";
    }
  }
  sol.status = feasible ? Status::Optimal : Status::Stalled;
  return sol;
}

}  // namespace mjls::lp
