#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "mjls/markov.hpp"
#include "mjls/matrix.hpp"
#include "mjls/model.hpp"

namespace mjls {

struct ObserverDesign;

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Deterministic scalar signals.
struct Sinusoid {
  double amplitude = 1.0;
  double frequency = 1.0;  // rad per time unit
  double phase = 0.0;
  double offset = 0.0;
};
struct Constant {
  double value = 0.0;
};
// Piecewise constant: values[k] on [times[k], times[k+1]); values.front()
// before times.front().
struct Piecewise {
  std::vector<double> times;
  std::vector<double> values;
};
using Signal = std::variant<Sinusoid, Constant, Piecewise>;

double evaluate(const Signal& signal, double t);

/// The disturbance w and the known bounds w- <= w <= w+, one signal per
/// component.
struct DisturbanceSpec {
  std::vector<Signal> w;
  std::vector<Signal> lower;
  std::vector<Signal> upper;
};

/// w_k(t) = sin(t + k pi/2) for k = 0..count-1 with bounds [-1, 1].
DisturbanceSpec phased_sinusoids(std::size_t count);

/// Throws std::invalid_argument unless the disturbance has n_w components and the
/// ordering w- <= w <= w+ holds at every time in `grid`.
void check_disturbance(const DisturbanceSpec& dist, std::size_t n_w,
                       const std::vector<double>& grid);

using History = std::function<Vector(double)>;

/// Initial data for the plant and both observers. Empty histories mean
/// constant initial functions on [-h, 0].
struct InitialState {
  Vector x0;
  Vector x0_upper;
  Vector x0_lower;
  History history;
  History history_upper;
  History history_lower;
};

/// x0 = 0, x0+ = x0 + 1, x0- = x0 - 1.
InitialState default_initial_state(std::size_t n);

/// Sampled trajectories on the uniform grid t_k = start + k dt. Rows are grid
/// nodes; modes are 0-based.
struct TraceBundle {
  std::vector<double> time;
  std::vector<std::size_t> mode;
  Eigen::MatrixXd x;
  Eigen::MatrixXd x_upper;
  Eigen::MatrixXd x_lower;
  Eigen::MatrixXd w;
  Eigen::MatrixXd w_upper;
  Eigen::MatrixXd w_lower;
  Eigen::MatrixXd y;

  std::size_t nodes() const { return time.size(); }
};

/// Default grid step. Delayed models use dt = h/K with the smallest K >= 200
/// keeping dt * rate <= 0.5; delay-free models use 1e-3 times the fastest time
/// constant. `rate` is the largest |diagonal| over A_i, A_i - L_i C_i and Pi.
double default_time_step(const MjlsModel& model, const std::vector<Matrix>& gains);

/// Explicit Euler integration of the plant
///   dx/dt = A x + Ah x(t-h) + E w,   y = C x + Ch x(t-h) + F w
/// and of the observer pair
///   dx*/dt = A x* + Ah x*(t-h) + E w* + L (y - y*),
///   y* = C x* + Ch x*(t-h) + F w*,   * in {+, -},
/// with the mode held at path.mode_at(t_k) over step k. `dt` must divide h.
/// Throws DivergenceError when any state exceeds 1e12 in magnitude.
TraceBundle simulate(const MjlsModel& model, const std::vector<Matrix>& gains,
                     const DisturbanceSpec& dist, const MarkovPath& path,
                     const InitialState& init, double dt);

TraceBundle simulate(const MjlsModel& model, const ObserverDesign& design,
                     const DisturbanceSpec& dist, const MarkovPath& path,
                     const InitialState& init, double dt);

struct EnclosureViolation {
  std::size_t node = 0;
  double time = 0.0;
  std::size_t component = 0;
  bool upper = false;  // true: x > x+ + tol, false: x < x- - tol
  double state = 0.0;
  double bound = 0.0;
};

struct EnclosureReport {
  bool passed = true;
  std::optional<EnclosureViolation> first;
  // Smallest of (x+ - x) and (x - x-) over the trace.
  double min_gap = 0.0;
};

/// Passes iff x- - tol <= x <= x+ + tol at every node and component.
EnclosureReport check_enclosure(const TraceBundle& traces, double tol);

/// Delimited text: a header, then one row per node with t, mode (1-based),
/// x..., x_plus..., x_minus..., w... at 17 significant digits.
void export_traces(const TraceBundle& traces, std::ostream& out);
void export_traces(const TraceBundle& traces, const std::filesystem::path& file);

/// Reads a file written by export_traces (time, mode, x, x+, x-, w only).
TraceBundle read_traces(const std::filesystem::path& file);

struct EnclosureRun {
  std::uint64_t seed = 0;
  EnclosureReport report;
};

/// Samples one path per seed, simulates, and checks enclosure.
std::vector<EnclosureRun> run_enclosure_batch(const MjlsModel& model,
                                              const std::vector<Matrix>& gains,
                                              const DisturbanceSpec& dist,
                                              const InitialState& init, std::size_t r0,
                                              double horizon, double dt,
                                              const std::vector<std::uint64_t>& seeds,
                                              double tol);

}  // namespace mjls
