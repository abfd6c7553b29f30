#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

namespace mjls::oracle {

namespace {

struct Halfspace {
  Eigen::VectorXd a;
  double b = 0.0;
  bool equality = false;
};

std::vector<Halfspace> constraint_set(const lp::Problem& p, double big) {
  const auto n = static_cast<Eigen::Index>(p.variable_count());
  std::vector<Halfspace> out;
  for (const auto& row : p.rows()) {
    Halfspace h{Eigen::VectorXd::Zero(n), row.rhs};
    for (const auto& t : row.terms) h.a(static_cast<Eigen::Index>(t.var)) += t.coef;
    if (row.relation == lp::Relation::GreaterEqual) {
      h.a = -h.a;
      h.b = -h.b;
    }
    h.equality = row.relation == lp::Relation::Equal;
    out.push_back(std::move(h));
  }
  Halfspace sum{Eigen::VectorXd::Ones(n), big * static_cast<double>(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& v = p.variables()[static_cast<std::size_t>(j)];
    Halfspace lo{Eigen::VectorXd::Zero(n), 0.0};
    lo.a(j) = -1.0;
    lo.b = std::isfinite(v.lower) ? -v.lower : big;
    out.push_back(lo);
    if (std::isfinite(v.upper)) {
      Halfspace up{Eigen::VectorXd::Zero(n), v.upper};
      up.a(j) = 1.0;
      out.push_back(up);
    }
  }
  out.push_back(sum);
  return out;
}

bool next_combination(std::vector<std::size_t>& idx, std::size_t pool) {
  const std::size_t k = idx.size();
  for (std::size_t pos = k; pos-- > 0;) {
    if (idx[pos] < pool - k + pos) {
      ++idx[pos];
      for (std::size_t q = pos + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

namespace {

// Minimum over the basic points of the constraint set boxed at `big`.
VertexResult boxed_minimum(const lp::Problem& problem, double big) {
  const std::size_t n = problem.variable_count();
  const auto N = static_cast<Eigen::Index>(n);
  const std::vector<Halfspace> cons = constraint_set(problem, big);
  Eigen::VectorXd c(N);
  for (std::size_t j = 0; j < n; ++j) c(static_cast<Eigen::Index>(j)) = problem.variables()[j].cost;

  std::vector<std::size_t> eq, ineq;
  Eigen::MatrixXd eq_rows(0, N);
  for (std::size_t k = 0; k < cons.size(); ++k) {
    if (!cons[k].equality) {
      ineq.push_back(k);
      continue;
    }
    Eigen::MatrixXd trial(eq_rows.rows() + 1, N);
    trial << eq_rows, cons[k].a.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> rank_lu(trial);
    rank_lu.setThreshold(1e-11);
    if (rank_lu.rank() == trial.rows()) {
      eq_rows = trial;
      eq.push_back(k);
    }
  }
  VertexResult result;
  const std::size_t free_slots = n - eq.size();
  if (free_slots > ineq.size()) return result;

  Eigen::MatrixXd A(N, N);
  Eigen::VectorXd b(N);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(N, N);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  std::vector<std::size_t> idx(free_slots);
  for (std::size_t k = 0; k < free_slots; ++k) idx[k] = k;
  do {
    Eigen::Index r = 0;
    for (const std::size_t k : eq) {
      A.row(r) = cons[k].a.transpose();
      b(r++) = cons[k].b;
    }
    for (const std::size_t k : idx) {
      A.row(r) = cons[ineq[k]].a.transpose();
      b(r++) = cons[ineq[k]].b;
    }
    lu.compute(A);
    lu.setThreshold(1e-11);
    if (lu.rank() < N) continue;
    const Eigen::VectorXd x = lu.solve(b);

    bool feasible = true;
    for (const auto& h : cons) {
      const double act = h.a.dot(x);
      const double tol = 1e-9 * (1.0 + std::abs(h.b) + h.a.cwiseAbs().dot(x.cwiseAbs()));
      if (h.equality ? std::abs(act - h.b) > tol : act > h.b + tol) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    const double obj = c.dot(x);
    if (obj < best) {
      best = obj;
      best_x = x;
    }
  } while (next_combination(idx, ineq.size()));

  if (!std::isfinite(best)) return result;
  result.status = VertexStatus::Optimal;
  result.objective = best;
  result.x.assign(best_x.data(), best_x.data() + best_x.size());
  return result;
}

}  // namespace

VertexResult vertex_enumeration(const lp::Problem& problem, double big) {
  VertexResult small = boxed_minimum(problem, big);
  if (small.status != VertexStatus::Optimal) return small;
  const VertexResult large = boxed_minimum(problem, 2.0 * big);
  if (large.status != VertexStatus::Optimal ||
      std::abs(large.objective - small.objective) > 1e-7 * (1.0 + std::abs(small.objective))) {
    VertexResult unbounded;
    unbounded.status = VertexStatus::Unbounded;
    return unbounded;
  }
  return small;
}

lp::Problem random_lp(std::mt19937_64& rng, std::size_t max_vars, std::size_t max_rows) {
  std::uniform_int_distribution<std::size_t> nvars(1, max_vars);
  std::uniform_int_distribution<std::size_t> nrows(1, max_rows);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> cont(-5.0, 5.0);
  std::uniform_int_distribution<int> small_int(-3, 3);

  const bool integer = unit(rng) < 0.3;
  const bool planted = unit(rng) < 0.9;
  const auto coef = [&] { return integer ? static_cast<double>(small_int(rng)) : cont(rng); };
  const std::size_t n = nvars(rng);
  const std::size_t m = nrows(rng);

  lp::Problem p;
  std::vector<double> x0(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double u = unit(rng);
    double lower = 0.0;
    if (u > 0.9) {
      lower = -lp::kInfinity;
    } else if (u > 0.75) {
      lower = integer ? -static_cast<double>(1 + (rng() % 3)) : -3.0 * unit(rng);
    }
    double upper = lp::kInfinity;
    if (unit(rng) < 0.35) {
      const double base = std::isfinite(lower) ? lower : 0.0;
      upper = base + (integer ? static_cast<double>(1 + (rng() % 5)) : 0.5 + 4.5 * unit(rng));
    }
    p.add_variable("x" + std::to_string(j), lower, upper, coef());
    const double lo = std::isfinite(lower) ? lower : -2.0;
    const double hi = std::isfinite(upper) ? upper : lo + 4.0;
    x0[j] = integer ? std::round(lo + (hi - lo) * unit(rng)) : lo + (hi - lo) * unit(rng);
    x0[j] = std::clamp(x0[j], lo, hi);
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<lp::Term> terms;
    double act = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (unit(rng) < 0.7) {
        const double a = coef();
        terms.push_back({j, a});
        act += a * x0[j];
      }
    }
    if (terms.empty()) {
      terms.push_back({i % n, 1.0});
      act = x0[i % n];
    }
    const double u = unit(rng);
    const double slack = integer ? static_cast<double>(rng() % 4) : 3.0 * unit(rng);
    lp::Relation rel = lp::Relation::LessEqual;
    double rhs = act + slack;
    if (u > 0.5 && (integer || u < 0.8)) {
      rel = lp::Relation::GreaterEqual;
      rhs = act - slack;
    } else if (u >= 0.8 && !integer) {
      rel = lp::Relation::Equal;
      rhs = act;
    }
    if (!planted) rhs = coef();
    p.add_row(std::move(terms), rel, rhs, "r" + std::to_string(i));
  }
  return p;
}

Matrix random_generator(std::mt19937_64& rng, std::size_t modes) {
  std::uniform_real_distribution<double> rate(0.1, 3.0);
  Matrix pi(modes, modes);
  for (std::size_t i = 0; i < modes; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < modes; ++j) {
      if (i == j) continue;
      const double r = rate(rng);
      pi.set(i, j, r);
      sum += r;
    }
    pi.set(i, i, -sum);
  }
  return pi;
}

MjlsModel random_positive_model(std::mt19937_64& rng, const RandomModelOptions& o) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto pick = [&](std::size_t hi) { return 1 + static_cast<std::size_t>(rng() % hi); };
  const std::size_t N = pick(o.max_modes);
  const std::size_t n = pick(o.max_states);
  const std::size_t nw = pick(o.max_inputs);
  const std::size_t ny = pick(o.max_outputs);
  const double h = o.delays[rng() % o.delays.size()];
  const Matrix pi = random_generator(rng, N);

  const auto random_nonneg = [&](std::size_t r, std::size_t c, double scale, double density) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        if (unit(rng) < density) m.set(i, j, scale * unit(rng));
      }
    }
    return m;
  };

  std::vector<Mode> modes(N);
  double ah_max = 0.0;
  for (auto& m : modes) {
    m.Ah = (o.with_delay_terms && unit(rng) < 0.7) ? random_nonneg(n, n, 0.5, 0.7) : Matrix(n, n);
    m.E = random_nonneg(n, nw, 1.0, 0.8);
    m.C = random_nonneg(ny, n, 1.0, 0.8);
    m.Ch = (o.with_delay_terms && unit(rng) < 0.5) ? random_nonneg(ny, n, 0.3, 0.7) : Matrix(ny, n);
    m.F = unit(rng) < 0.5 ? random_nonneg(ny, nw, 0.5, 0.7) : Matrix(ny, nw);
    for (std::size_t k = 0; k < n; ++k) {
      double row = 0.0, col = 0.0;
      for (std::size_t l = 0; l < n; ++l) {
        row += m.Ah(k, l);
        col += m.Ah(l, k);
      }
      ah_max = std::max({ah_max, row, col});
    }
  }
  double pi_max = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double inflow = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      if (j != i) inflow += pi(j, i);
    }
    pi_max = std::max(pi_max, inflow);
  }
  for (auto& m : modes) {
    m.A = random_nonneg(n, n, 1.0, 0.7);
    for (std::size_t k = 0; k < n; ++k) {
      double row = 0.0, col = 0.0;
      for (std::size_t l = 0; l < n; ++l) {
        if (l == k) continue;
        row += m.A(k, l);
        col += m.A(l, k);
      }
      m.A.set(k, k, -(std::max(row, col) + ah_max + pi_max + 0.05 + 2.0 * unit(rng)));
    }
  }
  return make_model(std::move(modes), pi, h);
}

SynthesizableInstance random_synthesizable(std::mt19937_64& rng, bool delayed) {
  RandomModelOptions o;
  o.max_outputs = 3;
  o.delays = {delayed ? 0.5 : 0.0};
  o.with_delay_terms = delayed;
  const MjlsModel base = random_positive_model(rng, o);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const std::size_t n = base.state_dim();
  const std::size_t ny = base.output_dim();
  const std::size_t nw = base.disturbance_dim();
  const auto random = [&](std::size_t r, std::size_t c, double scale) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) m.set(i, j, scale * sym(rng));
    }
    return m;
  };

  SynthesizableInstance inst;
  std::vector<Mode> modes;
  for (const auto& m0 : base.modes) {
    const Matrix L0 = random(n, ny, 2.0);
    const Matrix C = random(ny, n, 1.0);
    const Matrix Ch = delayed ? random(ny, n, 0.3) : Matrix(ny, n);
    const Matrix F = random(ny, nw, 0.5);
    modes.push_back(Mode{m0.A + L0 * C, m0.Ah + L0 * Ch, m0.E + L0 * F, C, Ch, F});
    inst.seed_gains.push_back(L0);
  }
  inst.plant = make_model(std::move(modes), base.generator, base.delay);
  return inst;
}

namespace {

Eigen::MatrixXd taylor_expm(const Eigen::MatrixXd& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const Eigen::MatrixXd scaled = a / std::pow(2.0, squarings);
  const auto n = a.rows();
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace

Eigen::MatrixXd moment_static_gain(const MjlsModel& model) {
  const auto N = static_cast<Eigen::Index>(model.mode_count());
  const auto n = static_cast<Eigen::Index>(model.state_dim());
  const auto nw = static_cast<Eigen::Index>(model.disturbance_dim());
  const auto ny = static_cast<Eigen::Index>(model.output_dim());
  Eigen::MatrixXd pi(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      pi(i, j) = model.generator(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  const Eigen::MatrixXd P = taylor_expm(pi * model.delay);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N * n, N * n);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(N * ny, N * n);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(N * n, N * nw);
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(N * ny, N * nw);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Mode& mi = model.modes[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < N; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        A(j * n + k, i * n + k) += pi(i, j);
        for (Eigen::Index l = 0; l < n; ++l) {
          const auto uk = static_cast<std::size_t>(k), ul = static_cast<std::size_t>(l);
          if (i == j) A(i * n + k, i * n + l) += mi.A(uk, ul);
          // Delayed state of mode j at t-h feeds mode i with probability p_ji.
          A(i * n + k, j * n + l) += mi.Ah(uk, ul) * P(j, i);
        }
      }
      for (Eigen::Index q = 0; q < ny; ++q) {
        for (Eigen::Index l = 0; l < n; ++l) {
          const auto uq = static_cast<std::size_t>(q), ul = static_cast<std::size_t>(l);
          if (i == j) C(i * ny + q, i * n + l) += mi.C(uq, ul);
          C(i * ny + q, j * n + l) += mi.Ch(uq, ul) * P(j, i);
        }
      }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index c = 0; c < nw; ++c) {
        E(i * n + k, i * nw + c) = mi.E(static_cast<std::size_t>(k), static_cast<std::size_t>(c));
      }
    }
    for (Eigen::Index q = 0; q < ny; ++q) {
      for (Eigen::Index c = 0; c < nw; ++c) {
        F(i * ny + q, i * nw + c) = mi.F(static_cast<std::size_t>(q), static_cast<std::size_t>(c));
      }
    }
  }
  return C * (-A).partialPivLu().solve(E) + F;
}

Matrix two_state_transition(double a, double b, double t) {
  const double s = a + b;
  const double e = std::exp(-s * t);
  return Matrix{{(b + a * e) / s, (a - a * e) / s}, {(b - b * e) / s, (a + b * e) / s}};
}

}  // namespace mjls::oracle
