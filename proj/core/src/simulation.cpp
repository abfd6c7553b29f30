#include "mjls/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mjls/synthesis.hpp"

namespace mjls {

namespace {

constexpr double kBlowUp = 1e12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Eigen copies of one mode's matrices, closed with its observer gain.
struct ModeKernel {
  Eigen::MatrixXd A, Ah, E, C, Ch, F, L;
};

Eigen::MatrixXd eig(const Matrix& m) { return m.dense(); }

}  // namespace

double evaluate(const Signal& signal, double t) {
  return std::visit(
      Overloaded{
          [t](const Sinusoid& s) { return s.offset + s.amplitude * std::sin(s.frequency * t + s.phase); },
          [](const Constant& c) { return c.value; },
          [t](const Piecewise& p) {
            if (p.values.empty()) return 0.0;
            const auto it = std::upper_bound(p.times.begin(), p.times.end(), t);
            if (it == p.times.begin()) return p.values.front();
            const auto k = static_cast<std::size_t>(it - p.times.begin()) - 1;
            return p.values[std::min(k, p.values.size() - 1)];
          },
      },
      signal);
}

DisturbanceSpec phased_sinusoids(std::size_t count) {
  DisturbanceSpec d;
  for (std::size_t k = 0; k < count; ++k) {
    d.w.push_back(Sinusoid{1.0, 1.0, static_cast<double>(k) * std::numbers::pi / 2.0, 0.0});
    d.lower.push_back(Constant{-1.0});
    d.upper.push_back(Constant{1.0});
  }
  return d;
}

void check_disturbance(const DisturbanceSpec& dist, std::size_t n_w,
                       const std::vector<double>& grid) {
  if (dist.w.size() != n_w || dist.lower.size() != n_w || dist.upper.size() != n_w) {
    throw std::invalid_argument("disturbance needs " + std::to_string(n_w) +
                                " components for w, its lower and its upper bound");
  }
  for (double t : grid) {
    for (std::size_t c = 0; c < n_w; ++c) {
      const double w = evaluate(dist.w[c], t);
      if (evaluate(dist.lower[c], t) > w || w > evaluate(dist.upper[c], t)) {
        std::ostringstream os;
        os << "disturbance bounds violated for component " << c + 1 << " at t = " << t;
        throw std::invalid_argument(os.str());
      }
    }
  }
}

InitialState default_initial_state(std::size_t n) {
  InitialState s;
  s.x0 = Vector::Zero(static_cast<Eigen::Index>(n));
  s.x0_upper = s.x0 + Vector::Ones(static_cast<Eigen::Index>(n));
  s.x0_lower = s.x0 - Vector::Ones(static_cast<Eigen::Index>(n));
  return s;
}

double default_time_step(const MjlsModel& model, const std::vector<Matrix>& gains) {
  double rate = 0.0;
  for (std::size_t i = 0; i < model.mode_count(); ++i) {
    const Mode& m = model.modes[i];
    Matrix closed = m.A;
    if (i < gains.size()) closed = m.A - gains[i] * m.C;
    for (std::size_t k = 0; k < model.state_dim(); ++k) {
      rate = std::max({rate, std::abs(m.A(k, k)), std::abs(closed(k, k))});
    }
    rate = std::max(rate, std::abs(model.generator(i, i)));
  }
  rate = std::max(rate, 1e-9);
  if (model.delay > 0.0) {
    const double steps = std::max(200.0, std::ceil(2.0 * model.delay * rate));
    return model.delay / steps;
  }
  return 1e-3 / rate;
}

TraceBundle simulate(const MjlsModel& model, const std::vector<Matrix>& gains,
                     const DisturbanceSpec& dist, const MarkovPath& path,
                     const InitialState& init, double dt) {
  require_valid(model);
  const std::size_t N = model.mode_count();
  const auto n = static_cast<Eigen::Index>(model.state_dim());
  const auto nw = static_cast<Eigen::Index>(model.disturbance_dim());
  const auto ny = static_cast<Eigen::Index>(model.output_dim());
  if (gains.size() != N) throw DimensionError("expected one observer gain per mode");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (init.x0.size() != n || init.x0_upper.size() != n || init.x0_lower.size() != n) {
    throw DimensionError("initial states must have n entries");
  }
  if ((init.x0_lower.array() > init.x0.array()).any() ||
      (init.x0.array() > init.x0_upper.array()).any()) {
    throw std::invalid_argument("initial states must satisfy x0- <= x0 <= x0+");
  }

  std::size_t delay_steps = 0;
  if (model.delay > 0.0) {
    const double ratio = model.delay / dt;
    delay_steps = static_cast<std::size_t>(std::llround(ratio));
    if (delay_steps == 0 || std::abs(ratio - static_cast<double>(delay_steps)) > 1e-9 * ratio) {
      throw std::invalid_argument("time step must divide the delay h exactly");
    }
  }
  const double span = path.horizon - path.start;
  const auto steps = static_cast<std::size_t>(std::llround(span / dt));
  if (steps == 0) throw std::invalid_argument("horizon shorter than one time step");

  std::vector<ModeKernel> kernels;
  for (std::size_t i = 0; i < N; ++i) {
    const Mode& m = model.modes[i];
    if (gains[i].rows() != model.state_dim() || gains[i].cols() != model.output_dim()) {
      throw DimensionError("L_" + std::to_string(i + 1) + " must be n x n_y");
    }
    kernels.push_back({eig(m.A), eig(m.Ah), eig(m.E), eig(m.C), eig(m.Ch), eig(m.F), eig(gains[i])});
  }

  const std::size_t nodes = steps + 1;
  const auto rows = static_cast<Eigen::Index>(nodes);
  TraceBundle tb;
  tb.time.resize(nodes);
  tb.mode.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) tb.time[k] = path.start + static_cast<double>(k) * dt;
  check_disturbance(dist, static_cast<std::size_t>(nw), tb.time);

  tb.x.resize(rows, n);
  tb.x_upper.resize(rows, n);
  tb.x_lower.resize(rows, n);
  tb.w.resize(rows, nw);
  tb.w_upper.resize(rows, nw);
  tb.w_lower.resize(rows, nw);
  tb.y.resize(rows, ny);
  for (std::size_t k = 0; k < nodes; ++k) {
    for (Eigen::Index c = 0; c < nw; ++c) {
      const auto r = static_cast<Eigen::Index>(k);
      tb.w(r, c) = evaluate(dist.w[static_cast<std::size_t>(c)], tb.time[k]);
      tb.w_lower(r, c) = evaluate(dist.lower[static_cast<std::size_t>(c)], tb.time[k]);
      tb.w_upper(r, c) = evaluate(dist.upper[static_cast<std::size_t>(c)], tb.time[k]);
    }
  }
  tb.x.row(0) = init.x0.transpose();
  tb.x_upper.row(0) = init.x0_upper.transpose();
  tb.x_lower.row(0) = init.x0_lower.transpose();

  const auto delayed = [&](const Eigen::MatrixXd& traj, std::size_t k, const History& hist,
                           const Vector& x0) -> Vector {
    if (k >= delay_steps) return traj.row(static_cast<Eigen::Index>(k - delay_steps)).transpose();
    const double t = tb.time[k] - model.delay;
    if (hist) {
      Vector v = hist(t);
      if (v.size() != x0.size()) throw DimensionError("history function returned wrong size");
      return v;
    }
    return x0;
  };

  Vector x(n), xd(n), y(ny), w(nw);
  Vector xb(n), xbd(n), yb(ny), wb(nw);
  Vector dx(n);
  for (std::size_t k = 0; k < nodes; ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    const std::size_t mode = path.mode_at(tb.time[k]);
    if (mode >= N) throw std::invalid_argument("Markov path visits an unknown mode");
    tb.mode[k] = mode;
    const ModeKernel& K = kernels[mode];

    x = tb.x.row(r).transpose();
    xd = delayed(tb.x, k, init.history, init.x0);
    w = tb.w.row(r).transpose();
    y.noalias() = K.C * x;
    y.noalias() += K.Ch * xd;
    y.noalias() += K.F * w;
    tb.y.row(r) = y.transpose();
    if (k + 1 == nodes) break;

    dx.noalias() = K.A * x;
    dx.noalias() += K.Ah * xd;
    dx.noalias() += K.E * w;
    tb.x.row(r + 1) = (x + dt * dx).transpose();

    for (int side = 0; side < 2; ++side) {
      Eigen::MatrixXd& traj = side == 0 ? tb.x_upper : tb.x_lower;
      const Eigen::MatrixXd& wtraj = side == 0 ? tb.w_upper : tb.w_lower;
      const History& hist = side == 0 ? init.history_upper : init.history_lower;
      const Vector& x0 = side == 0 ? init.x0_upper : init.x0_lower;
      xb = traj.row(r).transpose();
      xbd = delayed(traj, k, hist, x0);
      wb = wtraj.row(r).transpose();
      yb.noalias() = K.C * xb;
      yb.noalias() += K.Ch * xbd;
      yb.noalias() += K.F * wb;
      yb = y - yb;
      dx.noalias() = K.A * xb;
      dx.noalias() += K.Ah * xbd;
      dx.noalias() += K.E * wb;
      dx.noalias() += K.L * yb;
      traj.row(r + 1) = (xb + dt * dx).transpose();
    }

    const double peak = std::max({tb.x.row(r + 1).cwiseAbs().maxCoeff(),
                                  tb.x_upper.row(r + 1).cwiseAbs().maxCoeff(),
                                  tb.x_lower.row(r + 1).cwiseAbs().maxCoeff()});
    if (!(peak <= kBlowUp)) {
      std::ostringstream os;
      os << "simulation diverged at t = " << tb.time[k + 1] << " (|state| > 1e12)";
      throw DivergenceError(os.str(), tb.time[k + 1]);
    }
  }
  return tb;
}

TraceBundle simulate(const MjlsModel& model, const ObserverDesign& design,
                     const DisturbanceSpec& dist, const MarkovPath& path,
                     const InitialState& init, double dt) {
  return simulate(model, design.gains, dist, path, init, dt);
}

EnclosureReport check_enclosure(const TraceBundle& traces, double tol) {
  EnclosureReport report;
  report.min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < traces.x.rows(); ++k) {
    for (Eigen::Index c = 0; c < traces.x.cols(); ++c) {
      const double x = traces.x(k, c);
      const double up = traces.x_upper(k, c);
      const double lo = traces.x_lower(k, c);
      report.min_gap = std::min({report.min_gap, up - x, x - lo});
      if (report.passed && (x < lo - tol || x > up + tol)) {
        report.passed = false;
        const bool upper = x > up + tol;
        report.first = EnclosureViolation{static_cast<std::size_t>(k),
                                          traces.time[static_cast<std::size_t>(k)],
                                          static_cast<std::size_t>(c), upper, x,
                                          upper ? up : lo};
      }
    }
  }
  if (traces.x.size() == 0) report.min_gap = 0.0;
  return report;
}

void export_traces(const TraceBundle& traces, std::ostream& out) {
  const Eigen::Index n = traces.x.cols();
  const Eigen::Index nw = traces.w.cols();
  out << "t,mode";
  for (Eigen::Index c = 0; c < n; ++c) out << ",x" << c + 1;
  for (Eigen::Index c = 0; c < n; ++c) out << ",x_plus" << c + 1;
  for (Eigen::Index c = 0; c < n; ++c) out << ",x_minus" << c + 1;
  for (Eigen::Index c = 0; c < nw; ++c) out << ",w" << c + 1;
  out << "\n" << std::setprecision(17);
  for (std::size_t k = 0; k < traces.nodes(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    out << traces.time[k] << "," << traces.mode[k] + 1;
    for (Eigen::Index c = 0; c < n; ++c) out << "," << traces.x(r, c);
    for (Eigen::Index c = 0; c < n; ++c) out << "," << traces.x_upper(r, c);
    for (Eigen::Index c = 0; c < n; ++c) out << "," << traces.x_lower(r, c);
    for (Eigen::Index c = 0; c < nw; ++c) out << "," << traces.w(r, c);
    out << "\n";
  }
}

void export_traces(const TraceBundle& traces, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  export_traces(traces, out);
  out.flush();
  if (!out) throw Error("failed writing " + file.string());
}

TraceBundle read_traces(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(file.string() + ": empty trace file");

  Eigen::Index n = 0;
  Eigen::Index nw = 0;
  {
    std::istringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) {
      if (name.size() > 1 && name[0] == 'x' && std::isdigit(static_cast<unsigned char>(name[1]))) ++n;
      if (name.size() > 1 && name[0] == 'w' && std::isdigit(static_cast<unsigned char>(name[1]))) ++nw;
    }
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != static_cast<std::size_t>(2 + 3 * n + nw)) {
      throw Error(file.string() + ": malformed row " + std::to_string(rows.size() + 2));
    }
    rows.push_back(std::move(values));
  }

  TraceBundle tb;
  const auto count = static_cast<Eigen::Index>(rows.size());
  tb.x.resize(count, n);
  tb.x_upper.resize(count, n);
  tb.x_lower.resize(count, n);
  tb.w.resize(count, nw);
  for (Eigen::Index k = 0; k < count; ++k) {
    const auto& v = rows[static_cast<std::size_t>(k)];
    tb.time.push_back(v[0]);
    tb.mode.push_back(static_cast<std::size_t>(v[1]) - 1);
    for (Eigen::Index c = 0; c < n; ++c) {
      tb.x(k, c) = v[static_cast<std::size_t>(2 + c)];
      tb.x_upper(k, c) = v[static_cast<std::size_t>(2 + n + c)];
      tb.x_lower(k, c) = v[static_cast<std::size_t>(2 + 2 * n + c)];
    }
    for (Eigen::Index c = 0; c < nw; ++c) tb.w(k, c) = v[static_cast<std::size_t>(2 + 3 * n + c)];
  }
  return tb;
}

std::vector<EnclosureRun> run_enclosure_batch(const MjlsModel& model,
                                              const std::vector<Matrix>& gains,
                                              const DisturbanceSpec& dist,
                                              const InitialState& init, std::size_t r0,
                                              double horizon, double dt,
                                              const std::vector<std::uint64_t>& seeds,
                                              double tol) {
  std::vector<EnclosureRun> runs;
  runs.reserve(seeds.size());
  for (const auto seed : seeds) {
    const MarkovPath path = sample_markov_path(model.generator, r0, horizon, seed);
    const TraceBundle tb = simulate(model, gains, dist, path, init, dt);
    runs.push_back({seed, check_enclosure(tb, tol)});
  }
  return runs;
}

}  // namespace mjls
