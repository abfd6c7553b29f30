#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mjls/analysis.hpp"
#include "mjls/matrix.hpp"
#include "mjls/model.hpp"
#include "mjls/simulation.hpp"
#include "mjls/synthesis.hpp"

namespace mjls::io {

/// Malformed document. line/column are 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Missing or unreadable file.
class IoError : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, const std::string& text);

/// Model document: {N, n, n_w, n_y, h, Pi, modes:[{A, Ah, E, C, Ch, F}]} with
/// row-major nested arrays. Ah, Ch and F may be omitted; unknown keys are
/// ignored; comments are allowed. The result is not validated.
MjlsModel parse_model(std::string_view text, const std::string& source = "<input>");
MjlsModel load_model(const std::filesystem::path& file);
std::string dump_model(const MjlsModel& model);

/// A single matrix as a nested array.
Matrix parse_matrix(std::string_view text, const std::string& source = "<input>");
Matrix load_matrix(const std::filesystem::path& file);

/// Zero-pattern masks: one matrix (shared by all modes) or a list of N.
std::vector<Matrix> load_zero_pattern(const std::filesystem::path& file, std::size_t modes);

/// {objective, gains, certificate:{X, U, alpha, gamma}, verified_gamma,
/// iterations, constraints}.
std::string dump_design(const ObserverDesign& design, const StructuralConstraints& sc = {});
ObserverDesign parse_design(std::string_view text, const std::string& source = "<input>");
ObserverDesign load_design(const std::filesystem::path& file);

/// Serialized gain result.
struct GainRecord {
  GainKind kind = GainKind::L1;
  std::string method = "lp";  // "lp" or "static"
  double gamma = 0.0;
  std::optional<double> gamma_lp;
  std::optional<double> gamma_static;
  std::vector<Vector> lambdas;
  std::vector<double> margins;
};
std::string dump_gain_record(const GainRecord& record);

/// Simulation settings: {T, dt, seed, r0 (1-based), x0, x0_plus, x0_minus,
/// disturbance}. The disturbance is either {"preset": "phased_sinusoids"} or
/// {w, lower, upper}, each a list of signals; a signal is a number or
/// {type: sin|constant|piecewise, ...}.
struct SimConfig {
  double T = 10.0;
  std::optional<double> dt;
  std::uint64_t seed = 1;
  std::size_t r0 = 0;  // 0-based
  std::optional<Vector> x0;
  std::optional<Vector> x0_plus;
  std::optional<Vector> x0_minus;
  std::optional<DisturbanceSpec> disturbance;

  /// Initial state with x0 = 0 and x0 +/- 1 filling the gaps.
  InitialState initial_state(std::size_t n) const;
  /// The configured disturbance, or phased sinusoids when absent.
  DisturbanceSpec disturbance_or_default(std::size_t n_w) const;
};
SimConfig parse_sim_config(std::string_view text, const std::string& source = "<input>");
SimConfig load_sim_config(const std::filesystem::path& file);

/// A model file with optional extra blocks used by the bundled examples:
/// "reference" (named target values), "synthesis" ({objective, entry_bound})
/// and "simulation" (a SimConfig).
struct Fixture {
  MjlsModel model;
  std::map<std::string, double> reference;
  std::optional<double> entry_bound;
  std::optional<SimConfig> simulation;
};
Fixture load_fixture(const std::filesystem::path& file);

}  // namespace mjls::io
