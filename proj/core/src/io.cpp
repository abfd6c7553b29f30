#include "mjls/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace mjls::io {

namespace {

using json = nlohmann::json;

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t k = 0; k < end; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream os;
    os << source << ":" << line << ":" << column << ": parse error: " << e.what();
    throw ParseError(os.str(), line, column);
  }
}

[[noreturn]] void fail(const std::string& source, const std::string& where, const std::string& what) {
  throw ParseError(source + ": " + where + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& source,
                    const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(source, where, std::string("missing field '") + key + "'");
  return j.at(key);
}

double to_number(const json& j, const std::string& source, const std::string& where) {
  if (!j.is_number()) fail(source, where, "expected a number");
  return j.get<double>();
}

std::size_t to_count(const json& j, const std::string& source, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(source, where, "expected an integer");
  const auto v = j.get<long long>();
  if (v < 0) fail(source, where, "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

Matrix to_matrix(const json& j, const std::string& source, const std::string& where) {
  if (!j.is_array()) fail(source, where, "expected a nested array");
  const std::size_t rows = j.size();
  if (rows == 0) return Matrix();
  if (!j[0].is_array()) fail(source, where, "expected a nested array");
  const std::size_t cols = j[0].size();
  std::vector<double> data;
  data.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      fail(source, where, "row " + std::to_string(r + 1) + " has the wrong length");
    }
    for (const auto& v : j[r]) data.push_back(to_number(v, source, where));
  }
  try {
    return Matrix(rows, cols, std::move(data));
  } catch (const Error& e) {
    fail(source, where, e.what());
  }
}

Vector to_vector(const json& j, const std::string& source, const std::string& where) {
  if (!j.is_array()) fail(source, where, "expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    v(static_cast<Eigen::Index>(k)) = to_number(j[k], source, where);
  }
  return v;
}

json from_matrix(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json from_vector(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

Signal to_signal(const json& j, const std::string& source, const std::string& where) {
  if (j.is_number()) return Constant{j.get<double>()};
  if (!j.is_object()) fail(source, where, "expected a number or a signal object");
  const std::string type = require(j, "type", source, where).get<std::string>();
  const auto num = [&](const char* key, double fallback) {
    return j.contains(key) ? to_number(j.at(key), source, where + "." + key) : fallback;
  };
  if (type == "sin") {
    return Sinusoid{num("amplitude", 1.0), num("frequency", 1.0), num("phase", 0.0),
                    num("offset", 0.0)};
  }
  if (type == "constant") return Constant{num("value", 0.0)};
  if (type == "piecewise") {
    Piecewise p;
    const Vector t = to_vector(require(j, "times", source, where), source, where + ".times");
    const Vector v = to_vector(require(j, "values", source, where), source, where + ".values");
    if (t.size() != v.size()) fail(source, where, "times and values differ in length");
    p.times.assign(t.data(), t.data() + t.size());
    p.values.assign(v.data(), v.data() + v.size());
    return p;
  }
  fail(source, where, "unknown signal type '" + type + "'");
}

DisturbanceSpec to_disturbance(const json& j, const std::string& source) {
  const std::string where = "disturbance";
  if (!j.is_object()) fail(source, where, "expected an object");
  if (j.contains("preset")) {
    const std::string preset = j.at("preset").get<std::string>();
    if (preset != "phased_sinusoids") fail(source, where, "unknown preset '" + preset + "'");
    return phased_sinusoids(to_count(require(j, "count", source, where), source, where + ".count"));
  }
  DisturbanceSpec d;
  for (const char* key : {"w", "lower", "upper"}) {
    const json& list = require(j, key, source, where);
    if (!list.is_array()) fail(source, where + "." + key, "expected an array");
    auto& target = std::string(key) == "w" ? d.w : std::string(key) == "lower" ? d.lower : d.upper;
    for (std::size_t k = 0; k < list.size(); ++k) {
      target.push_back(to_signal(list[k], source, where + "." + key + "[" + std::to_string(k) + "]"));
    }
  }
  return d;
}

SimConfig to_sim_config(const json& j, const std::string& source) {
  const std::string where = "simulation";
  if (!j.is_object()) fail(source, where, "expected an object");
  SimConfig c;
  if (j.contains("T")) c.T = to_number(j.at("T"), source, "T");
  if (j.contains("dt")) c.dt = to_number(j.at("dt"), source, "dt");
  if (j.contains("seed")) c.seed = to_count(j.at("seed"), source, "seed");
  if (j.contains("r0")) {
    const std::size_t r0 = to_count(j.at("r0"), source, "r0");
    if (r0 == 0) fail(source, "r0", "modes are numbered from 1");
    c.r0 = r0 - 1;
  }
  if (j.contains("x0")) c.x0 = to_vector(j.at("x0"), source, "x0");
  if (j.contains("x0_plus")) c.x0_plus = to_vector(j.at("x0_plus"), source, "x0_plus");
  if (j.contains("x0_minus")) c.x0_minus = to_vector(j.at("x0_minus"), source, "x0_minus");
  if (j.contains("disturbance")) c.disturbance = to_disturbance(j.at("disturbance"), source);
  if (!(c.T > 0.0)) fail(source, "T", "must be positive");
  if (c.dt && !(*c.dt > 0.0)) fail(source, "dt", "must be positive");
  return c;
}

MjlsModel to_model(const json& j, const std::string& source) {
  if (!j.is_object()) fail(source, "model", "expected an object");
  MjlsModel model;
  auto& d = model.dims;
  d.modes = to_count(require(j, "N", source, "model"), source, "N");
  d.states = to_count(require(j, "n", source, "model"), source, "n");
  d.disturbances = to_count(require(j, "n_w", source, "model"), source, "n_w");
  d.outputs = to_count(require(j, "n_y", source, "model"), source, "n_y");
  model.delay = j.contains("h") ? to_number(j.at("h"), source, "h") : 0.0;
  model.generator = to_matrix(require(j, "Pi", source, "model"), source, "Pi");
  const json& modes = require(j, "modes", source, "model");
  if (!modes.is_array()) fail(source, "modes", "expected an array");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const json& m = modes[i];
    const std::string where = "modes[" + std::to_string(i) + "]";
    const auto get = [&](const char* key, std::size_t r, std::size_t c) {
      if (m.is_object() && m.contains(key)) return to_matrix(m.at(key), source, where + "." + key);
      return Matrix(r, c);
    };
    Mode mode;
    mode.A = to_matrix(require(m, "A", source, where), source, where + ".A");
    mode.E = to_matrix(require(m, "E", source, where), source, where + ".E");
    mode.C = to_matrix(require(m, "C", source, where), source, where + ".C");
    mode.Ah = get("Ah", d.states, d.states);
    mode.Ch = get("Ch", d.outputs, d.states);
    mode.F = get("F", d.outputs, d.disturbances);
    model.modes.push_back(std::move(mode));
  }
  return model;
}

GainKind to_kind(const json& j, const std::string& source) {
  const std::string s = j.is_string() ? j.get<std::string>() : "";
  if (s == "L1" || s == "l1") return GainKind::L1;
  if (s == "Linf" || s == "linf") return GainKind::Linf;
  fail(source, "objective", "expected L1 or Linf");
}

json constraints_json(const StructuralConstraints& sc) {
  json c = json::object();
  c["entry_bound"] = sc.entry_bound ? json(*sc.entry_bound) : json(nullptr);
  json masks = json::array();
  for (const auto& m : sc.zero_pattern) masks.push_back(from_matrix(m));
  c["zero_pattern"] = masks;
  json fixed = json::array();
  for (const auto& f : sc.fixed) {
    fixed.push_back({{"mode", f.mode + 1}, {"row", f.row + 1}, {"col", f.col + 1}, {"value", f.value}});
  }
  c["fixed"] = fixed;
  return c;
}

template <class F>
auto guarded(const std::string& source, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source + ": " + e.what());
  }
}

}  // namespace

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + file.string());
  return os.str();
}

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + file.string());
}

MjlsModel parse_model(std::string_view text, const std::string& source) {
  return guarded(source, [&] { return to_model(parse_json(text, source), source); });
}

MjlsModel load_model(const std::filesystem::path& file) {
  return parse_model(read_file(file), file.string());
}

std::string dump_model(const MjlsModel& model) {
  json j;
  j["N"] = model.dims.modes;
  j["n"] = model.dims.states;
  j["n_w"] = model.dims.disturbances;
  j["n_y"] = model.dims.outputs;
  j["h"] = model.delay;
  j["Pi"] = from_matrix(model.generator);
  json modes = json::array();
  for (const auto& m : model.modes) {
    modes.push_back({{"A", from_matrix(m.A)},
                     {"Ah", from_matrix(m.Ah)},
                     {"E", from_matrix(m.E)},
                     {"C", from_matrix(m.C)},
                     {"Ch", from_matrix(m.Ch)},
                     {"F", from_matrix(m.F)}});
  }
  j["modes"] = modes;
  return j.dump(2) + "\n";
}

Matrix parse_matrix(std::string_view text, const std::string& source) {
  return guarded(source, [&] { return to_matrix(parse_json(text, source), source, "matrix"); });
}

Matrix load_matrix(const std::filesystem::path& file) {
  return parse_matrix(read_file(file), file.string());
}

std::vector<Matrix> load_zero_pattern(const std::filesystem::path& file, std::size_t modes) {
  const std::string source = file.string();
  return guarded(source, [&] {
  const json j = parse_json(read_file(file), source);
  if (!j.is_array() || j.empty()) fail(source, "zero pattern", "expected a matrix or a list of matrices");
  const bool list = j[0].is_array() && !j[0].empty() && j[0][0].is_array();
  std::vector<Matrix> masks;
  if (!list) {
    masks.assign(modes, to_matrix(j, source, "zero pattern"));
    return masks;
  }
  if (j.size() != modes) {
    fail(source, "zero pattern", "expected " + std::to_string(modes) + " masks, got " + std::to_string(j.size()));
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    masks.push_back(to_matrix(j[i], source, "zero pattern[" + std::to_string(i) + "]"));
  }
  return masks;
  });
}

std::string dump_design(const ObserverDesign& design, const StructuralConstraints& sc) {
  json j;
  j["objective"] = to_string(design.objective);
  json gains = json::array();
  for (const auto& L : design.gains) gains.push_back(from_matrix(L));
  j["gains"] = gains;
  json X = json::array();
  for (const auto& x : design.certificate.X) X.push_back(from_vector(x));
  json U = json::array();
  for (const auto& u : design.certificate.U) U.push_back(from_matrix(u));
  j["certificate"] = {{"X", X},
                      {"U", U},
                      {"alpha", design.certificate.alpha},
                      {"gamma", design.certificate.gamma}};
  j["verified_gamma"] = design.verified_gamma;
  j["iterations"] = design.iterations;
  j["constraints"] = constraints_json(sc);
  return j.dump(2) + "\n";
}

ObserverDesign parse_design(std::string_view text, const std::string& source) {
  return guarded(source, [&] {
  const json j = parse_json(text, source);
  ObserverDesign d;
  d.objective = j.contains("objective") ? to_kind(j.at("objective"), source) : GainKind::L1;
  const json& gains = require(j, "gains", source, "design");
  if (!gains.is_array() || gains.empty()) fail(source, "gains", "expected a non-empty list of matrices");
  for (std::size_t i = 0; i < gains.size(); ++i) {
    d.gains.push_back(to_matrix(gains[i], source, "gains[" + std::to_string(i) + "]"));
  }
  if (j.contains("certificate")) {
    const json& c = j.at("certificate");
    if (c.contains("X")) {
      for (const auto& x : c.at("X")) d.certificate.X.push_back(to_vector(x, source, "certificate.X"));
    }
    if (c.contains("U")) {
      for (const auto& u : c.at("U")) d.certificate.U.push_back(to_matrix(u, source, "certificate.U"));
    }
    if (c.contains("alpha")) d.certificate.alpha = to_number(c.at("alpha"), source, "certificate.alpha");
    if (c.contains("gamma")) d.certificate.gamma = to_number(c.at("gamma"), source, "certificate.gamma");
  }
  if (j.contains("verified_gamma")) d.verified_gamma = to_number(j.at("verified_gamma"), source, "verified_gamma");
  if (j.contains("iterations")) d.iterations = to_count(j.at("iterations"), source, "iterations");
  return d;
  });
}

ObserverDesign load_design(const std::filesystem::path& file) {
  return parse_design(read_file(file), file.string());
}

std::string dump_gain_record(const GainRecord& record) {
  json j;
  j["kind"] = to_string(record.kind);
  j["method"] = record.method;
  j["gamma"] = record.gamma;
  j["gamma_lp"] = record.gamma_lp ? json(*record.gamma_lp) : json(nullptr);
  j["gamma_static"] = record.gamma_static ? json(*record.gamma_static) : json(nullptr);
  json lambdas = json::array();
  for (const auto& l : record.lambdas) lambdas.push_back(from_vector(l));
  j["lambdas"] = lambdas;
  j["margins"] = record.margins;
  j["bound"] = record.kind == GainKind::L1
                   ? "the stochastic L1 gain equals gamma"
                   : "the stochastic Linf gain is at most gamma";
  return j.dump(2) + "\n";
}

InitialState SimConfig::initial_state(std::size_t n) const {
  InitialState s = default_initial_state(n);
  if (x0) {
    s.x0 = *x0;
    s.x0_upper = *x0 + Vector::Ones(x0->size());
    s.x0_lower = *x0 - Vector::Ones(x0->size());
  }
  if (x0_plus) s.x0_upper = *x0_plus;
  if (x0_minus) s.x0_lower = *x0_minus;
  const auto size = static_cast<Eigen::Index>(n);
  if (s.x0.size() != size || s.x0_upper.size() != size || s.x0_lower.size() != size) {
    throw DimensionError("initial states must have " + std::to_string(n) + " entries");
  }
  return s;
}

DisturbanceSpec SimConfig::disturbance_or_default(std::size_t n_w) const {
  return disturbance ? *disturbance : phased_sinusoids(n_w);
}

SimConfig parse_sim_config(std::string_view text, const std::string& source) {
  return guarded(source, [&] { return to_sim_config(parse_json(text, source), source); });
}

SimConfig load_sim_config(const std::filesystem::path& file) {
  return parse_sim_config(read_file(file), file.string());
}

Fixture load_fixture(const std::filesystem::path& file) {
  const std::string source = file.string();
  return guarded(source, [&] {
  const json j = parse_json(read_file(file), source);
  Fixture f;
  f.model = to_model(j, source);
  if (j.contains("reference")) {
    for (const auto& [key, value] : j.at("reference").items()) {
      f.reference[key] = to_number(value, source, "reference." + key);
    }
  }
  if (j.contains("synthesis") && j.at("synthesis").contains("entry_bound")) {
    const json& b = j.at("synthesis").at("entry_bound");
    if (!b.is_null()) f.entry_bound = to_number(b, source, "synthesis.entry_bound");
  }
  if (j.contains("simulation")) f.simulation = to_sim_config(j.at("simulation"), source);
  return f;
  });
}

}  // namespace mjls::io
