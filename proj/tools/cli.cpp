#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mjls/analysis.hpp"
#include "mjls/io.hpp"
#include "mjls/lp.hpp"
#include "mjls/markov.hpp"
#include "mjls/model.hpp"
#include "mjls/simulation.hpp"
#include "mjls/synthesis.hpp"

#ifndef MJLS_FIXTURE_DIR
#define MJLS_FIXTURE_DIR "data"
#endif

namespace mjls::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kEnclosureTol = 1e-6;
constexpr double kTargetTol = 1e-3;

struct Options {
  std::string model;
  std::string objective = "l1";
  std::string design;
  std::string sim_config;
  std::string M;
  std::string zero_pattern;
  std::string dump_lp;
  std::string out;
  std::string fixtures = MJLS_FIXTURE_DIR;
  std::string example;
  double bound = 0.0;
  double epsilon = 1e-7;
  double T = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 1;
  std::size_t paths = 1;
  bool force = false;

  bool has_bound = false;
  bool has_T = false;
  bool has_dt = false;
  bool has_seed = false;
};

// Exceptions that mean bad input rather than a negative answer.
class UsageError : public Error {
 public:
  using Error::Error;
};

GainKind parse_kind(const std::string& s) {
  if (s == "l1" || s == "L1") return GainKind::L1;
  if (s == "linf" || s == "Linf") return GainKind::Linf;
  throw UsageError("--objective must be l1 or linf");
}

MjlsModel load_valid_model(const std::string& path) {
  if (path.empty()) throw UsageError("--model is required");
  MjlsModel model = io::load_model(path);
  require_valid(model);
  return model;
}

Matrix load_M(const Options& o, const MjlsModel& model) {
  if (o.M.empty()) return Matrix::identity(model.state_dim());
  Matrix M = io::load_matrix(o.M);
  if (M.cols() != model.state_dim() || M.rows() == 0) {
    throw UsageError("--M must have n = " + std::to_string(model.state_dim()) + " columns, got " +
                     shape_of(M));
  }
  return M;
}

StructuralConstraints load_constraints(const Options& o, const MjlsModel& model) {
  StructuralConstraints sc;
  if (o.has_bound) sc.entry_bound = o.bound;
  if (!o.zero_pattern.empty()) sc.zero_pattern = io::load_zero_pattern(o.zero_pattern, model.mode_count());
  return sc;
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw io::IoError("cannot create directory " + dir + ": " + ec.message());
  return p;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

void print_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
  out << "  " << name << " =";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << (r == 0 ? " [" : "; ");
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? " " : "") << fmt(m(r, c));
  }
  out << "]\n";
}

double max_abs_gain(const std::vector<Matrix>& gains) {
  double v = 0.0;
  for (const auto& L : gains) v = std::max(v, L.max_abs());
  return v;
}

// check

int cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.model.empty()) throw UsageError("--model is required");
  const MjlsModel model = io::load_model(o.model);
  const auto& d = model.dims;
  out << "model: " << o.model << "\n";
  out << "dimensions: N=" << d.modes << " n=" << d.states << " n_w=" << d.disturbances
      << " n_y=" << d.outputs << " h=" << model.delay << "\n";
  const auto violations = validate(model);
  if (!violations.empty()) {
    err << "invalid model:\n";
    for (const auto& v : violations) err << "  - " << v << "\n";
    out << "valid: no\n";
    return kDomainFailure;
  }
  out << "valid: yes\n";
  out << "delay-free: " << (model.is_delay_free() ? "yes" : "no") << "\n";
  const PositivityReport report = check_internal_positivity(model);
  out << "internally positive: " << (report.positive ? "yes" : "no") << "\n";
  for (const auto& c : report.checks) {
    out << "  " << c.name << " " << c.property << ": ";
    if (c.ok) {
      out << "ok\n";
    } else {
      out << "fails at (" << c.row + 1 << "," << c.col + 1 << ") = " << c.value << "\n";
    }
  }
  return kSuccess;
}

// analyze

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  const MjlsModel model = load_valid_model(o.model);
  const GainKind kind = parse_kind(o.objective);
  AnalysisOptions opts;
  opts.epsilon = o.epsilon;

  MjlsModel target = model;
  if (!o.design.empty()) {
    const ObserverDesign design = io::load_design(o.design);
    target = build_error_model(model, design.gains, load_M(o, model)).system;
    opts.positivity_tolerance = 1e-9;
    out << "analyzing the observer error system of " << o.design << "\n";
  }
  if (!o.dump_lp.empty()) {
    std::ofstream lp_out(o.dump_lp);
    if (!lp_out) throw io::IoError("cannot open " + o.dump_lp + " for writing");
    lp::write_cplex_lp(build_gain_lp(target, kind, opts.epsilon), lp_out);
  }

  io::GainRecord record;
  record.kind = kind;
  try {
    const GainCertificate cert =
        kind == GainKind::L1 ? l1_gain_lp(target, opts) : linf_gain_lp(target, opts);
    record.gamma = cert.gamma;
    record.gamma_lp = cert.gamma;
    record.lambdas = cert.lambdas;
    record.margins = cert.margins;
  } catch (const InfeasibleError& e) {
    out << "verdict: unstable\n";
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
  try {
    record.gamma_static =
        kind == GainKind::L1 ? l1_gain_static(target, opts) : linf_gain_static(target, opts);
  } catch (const Error& e) {
    err << "warning: static gain unavailable: " << e.what() << "\n";
  }

  out << "verdict: stable\n";
  out << to_string(kind) << " gain (lp): " << fmt(*record.gamma_lp, 10) << "\n";
  if (record.gamma_static) out << to_string(kind) << " gain (static): " << fmt(*record.gamma_static, 10) << "\n";
  if (kind == GainKind::Linf) out << "note: the L-infinity value is an upper bound\n";
  if (!o.out.empty()) {
    const fs::path file = prepare_out(o.out) / ("gain_" + to_string(kind) + ".json");
    io::write_file(file, io::dump_gain_record(record));
    out << "wrote " << file.string() << "\n";
  } else {
    out << io::dump_gain_record(record);
  }
  return kSuccess;
}

// synthesize

void print_design(std::ostream& out, const ObserverDesign& design) {
  out << "objective: " << to_string(design.objective) << "\n";
  for (std::size_t i = 0; i < design.gains.size(); ++i) {
    print_matrix(out, "L_" + std::to_string(i + 1), design.gains[i]);
  }
  out << "synthesis gamma: " << fmt(design.certificate.gamma, 10) << "\n";
  out << "verified gamma: " << fmt(design.verified_gamma, 10) << "\n";
}

int cmd_synthesize(const Options& o, std::ostream& out, std::ostream& err) {
  const MjlsModel model = load_valid_model(o.model);
  const GainKind kind = parse_kind(o.objective);
  const StructuralConstraints sc = load_constraints(o, model);
  const Matrix M = load_M(o, model);
  SynthesisOptions opts;
  opts.epsilon = o.epsilon;

  if (!o.dump_lp.empty()) {
    std::ofstream lp_out(o.dump_lp);
    if (!lp_out) throw io::IoError("cannot open " + o.dump_lp + " for writing");
    lp::write_cplex_lp(build_synthesis_lp(model, kind, M, sc, opts), lp_out);
  }

  ObserverDesign design;
  try {
    design = kind == GainKind::L1 ? synthesize_l1(model, M, sc, opts) : synthesize_linf(model, sc, opts);
  } catch (const InfeasibleError& e) {
    const lp::Problem p = build_synthesis_lp(model, kind, M, sc, opts);
    err << "error: " << e.what() << "\n";
    err << "  LP: " << p.variable_count() << " variables, " << p.row_count()
        << " rows, epsilon " << opts.epsilon << "\n";
    if (sc.entry_bound) err << "  entry bound: " << *sc.entry_bound << "\n";
    if (!sc.zero_pattern.empty()) err << "  zero pattern: " << o.zero_pattern << "\n";
    return kDomainFailure;
  }

  const VerificationReport v = verify_design(model, design, kind == GainKind::L1 ? M : Matrix::identity(model.state_dim()));
  print_design(out, design);
  if (sc.entry_bound) out << "entry bound: " << *sc.entry_bound << " (max |L| = " << fmt(max_abs_gain(design.gains)) << ")\n";
  out << "verification: " << (v.accepted ? "accepted" : "rejected") << "\n";
  for (const auto& msg : v.violations) out << "  - " << msg << "\n";

  if (!o.out.empty()) {
    const fs::path file = prepare_out(o.out) / "design.json";
    io::write_file(file, io::dump_design(design, sc));
    out << "wrote " << file.string() << "\n";
  } else {
    out << io::dump_design(design, sc);
  }
  return v.accepted ? kSuccess : kDomainFailure;
}

// simulate

struct PathOutcome {
  std::uint64_t seed = 0;
  bool passed = false;
  std::string detail;
};

std::vector<PathOutcome> simulate_paths(const MjlsModel& model, const std::vector<Matrix>& gains,
                                        const io::SimConfig& cfg, std::size_t paths,
                                        const std::optional<fs::path>& out_dir,
                                        const std::string& prefix) {
  const double dt = cfg.dt ? *cfg.dt : default_time_step(model, gains);
  const InitialState init = cfg.initial_state(model.state_dim());
  const DisturbanceSpec dist = cfg.disturbance_or_default(model.disturbance_dim());
  std::vector<PathOutcome> outcomes;
  for (std::size_t p = 0; p < paths; ++p) {
    PathOutcome po;
    po.seed = cfg.seed + p;
    const MarkovPath path = sample_markov_path(model.generator, cfg.r0, cfg.T, po.seed);
    try {
      const TraceBundle tb = simulate(model, gains, dist, path, init, dt);
      const EnclosureReport rep = check_enclosure(tb, kEnclosureTol);
      po.passed = rep.passed;
      if (rep.first) {
        const auto& f = *rep.first;
        po.detail = "x" + std::to_string(f.component + 1) + (f.upper ? " above x+" : " below x-") +
                    " at t = " + fmt(f.time);
      } else {
        po.detail = "min gap " + fmt(rep.min_gap);
      }
      if (out_dir) export_traces(tb, *out_dir / (prefix + std::to_string(po.seed) + ".csv"));
    } catch (const DivergenceError& e) {
      po.passed = false;
      po.detail = "diverged at t = " + fmt(e.time());
    }
    outcomes.push_back(std::move(po));
  }
  return outcomes;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const MjlsModel model = load_valid_model(o.model);
  if (o.design.empty()) throw UsageError("--design is required");
  const ObserverDesign design = io::load_design(o.design);
  io::SimConfig cfg = o.sim_config.empty() ? io::SimConfig{} : io::load_sim_config(o.sim_config);
  if (o.has_seed) cfg.seed = o.seed;
  if (o.has_T) cfg.T = o.T;
  if (o.has_dt) cfg.dt = o.dt;
  if (!(cfg.T > 0.0)) throw UsageError("--T must be positive");
  if (cfg.dt && !(*cfg.dt > 0.0)) throw UsageError("--dt must be positive");
  if (o.paths == 0) throw UsageError("--paths must be at least 1");

  const VerificationReport v = verify_design(model, design, Matrix::identity(model.state_dim()));
  if (!v.accepted) {
    err << (o.force ? "warning" : "error") << ": design failed verification\n";
    for (const auto& msg : v.violations) err << "  - " << msg << "\n";
    if (!o.force) {
      err << "  (use --force to simulate anyway)\n";
      return kDomainFailure;
    }
  }

  std::optional<fs::path> out_dir;
  if (!o.out.empty()) out_dir = prepare_out(o.out);
  const auto outcomes = simulate_paths(model, design.gains, cfg, o.paths, out_dir, "traces_seed");
  std::size_t failures = 0;
  json report = json::array();
  for (const auto& po : outcomes) {
    out << "seed " << po.seed << ": enclosure " << (po.passed ? "pass" : "FAIL") << " (" << po.detail << ")\n";
    failures += po.passed ? 0 : 1;
    report.push_back({{"seed", po.seed}, {"passed", po.passed}, {"detail", po.detail}});
  }
  out << outcomes.size() - failures << "/" << outcomes.size() << " paths enclosed\n";
  if (out_dir) io::write_file(*out_dir / "enclosure.json", report.dump(2) + "\n");
  return failures == 0 ? kSuccess : kDomainFailure;
}

// reproduce

class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what) {}
};

template <class F>
auto stage(const std::string& name, json& timings, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
      auto r = f();
      timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return r;
    }
  } catch (const io::IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

int cmd_reproduce(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.example != "ex1" && o.example != "ex2") throw UsageError("example must be ex1 or ex2");
  const fs::path fixture_path = fs::path(o.fixtures) / (o.example + ".json");
  if (!fs::exists(fixture_path)) throw io::IoError("fixture not found: " + fixture_path.string());
  const io::Fixture fx = io::load_fixture(fixture_path);
  const MjlsModel& model = fx.model;
  const fs::path out_dir = prepare_out(o.out.empty() ? "results/" + o.example : o.out);

  json timings = json::object();
  json targets = json::array();
  json checks = json::array();
  bool all_met = true;
  const auto add_target = [&](const std::string& name, double computed) {
    const auto it = fx.reference.find(name);
    if (it == fx.reference.end()) return;
    const bool met = std::abs(computed - it->second) <= kTargetTol;
    all_met = all_met && met;
    targets.push_back({{"name", name}, {"target", it->second}, {"computed", computed},
                       {"tolerance", kTargetTol}, {"met", met}});
  };
  const auto add_check = [&](const std::string& name, bool ok, const std::string& detail) {
    all_met = all_met && ok;
    checks.push_back({{"name", name}, {"passed", ok}, {"detail", detail}});
  };

  stage("check", timings, [&] { require_valid(model); });

  StructuralConstraints sc;
  sc.entry_bound = fx.entry_bound;
  const Matrix I = Matrix::identity(model.state_dim());
  const ObserverDesign l1 = stage("synthesize", timings, [&] { return synthesize_l1(model, I, sc); });
  io::write_file(out_dir / "design_L1.json", io::dump_design(l1, sc));

  json analysis = json::object();
  stage("analyze", timings, [&] {
    const MjlsModel err_model = build_error_model(model, l1.gains).system;
    AnalysisOptions opts;
    opts.positivity_tolerance = 1e-9;
    analysis["l1_lp"] = l1_gain_lp(err_model, opts).gamma;
    analysis["l1_static"] = l1_gain_static(err_model, opts);
    const VerificationReport v = verify_design(model, l1, I);
    add_check("L1 design verified", v.accepted,
              v.accepted ? "positivity and re-analysis pass" : v.violations.front());
  });
  add_target("l1_gain", l1.verified_gamma);
  if (sc.entry_bound) {
    const double m = max_abs_gain(l1.gains);
    add_check("entry bound", m <= *sc.entry_bound + 1e-9,
              "max |L| = " + fmt(m, 10) + " <= " + fmt(*sc.entry_bound));
  }

  if (fx.reference.count("linf_bound") != 0) {
    const ObserverDesign linf = stage("synthesize_linf", timings, [&] { return synthesize_linf(model, sc); });
    io::write_file(out_dir / "design_Linf.json", io::dump_design(linf, sc));
    const VerificationReport v = verify_design(model, linf, I);
    add_check("Linf design verified", v.accepted,
              v.accepted ? "positivity and re-analysis pass" : v.violations.front());
    add_target("linf_bound", linf.verified_gamma);
  }

  const io::SimConfig cfg = fx.simulation ? *fx.simulation : io::SimConfig{};
  const std::size_t paths = std::max<std::size_t>(o.paths, 1);
  const auto outcomes = stage("simulate", timings, [&] {
    auto r = simulate_paths(model, l1.gains, cfg, paths, std::nullopt, "");
    simulate_paths(model, l1.gains, cfg, 1, out_dir, "traces_seed");
    return r;
  });
  std::size_t enclosed = 0;
  for (const auto& po : outcomes) enclosed += po.passed ? 1 : 0;
  add_check("enclosure", enclosed == outcomes.size(),
            std::to_string(enclosed) + "/" + std::to_string(outcomes.size()) + " paths");

  json summary = {{"example", o.example}, {"targets", targets}, {"checks", checks},
                  {"analysis", analysis}, {"timings", timings}, {"all_met", all_met}};
  json gains = json::array();
  for (const auto& L : l1.gains) {
    json rows = json::array();
    for (std::size_t r = 0; r < L.rows(); ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < L.cols(); ++c) row.push_back(L(r, c));
      rows.push_back(row);
    }
    gains.push_back(rows);
  }
  summary["l1_gains"] = gains;
  io::write_file(out_dir / "summary.json", summary.dump(2) + "\n");

  std::ostringstream text;
  text << "example " << o.example << "\n";
  for (const auto& t : targets) {
    text << "  " << t["name"].get<std::string>() << ": computed " << fmt(t["computed"].get<double>(), 8)
         << ", target " << fmt(t["target"].get<double>(), 8) << " -> "
         << (t["met"].get<bool>() ? "met" : "MISSED") << "\n";
  }
  for (const auto& c : checks) {
    text << "  " << c["name"].get<std::string>() << ": " << (c["passed"].get<bool>() ? "pass" : "FAIL")
         << " (" << c["detail"].get<std::string>() << ")\n";
  }
  text << "  result: " << (all_met ? "all targets met" : "targets missed") << "\n";
  io::write_file(out_dir / "summary.txt", text.str());
  out << text.str() << "wrote " << (out_dir / "summary.json").string() << "\n";
  if (!all_met) err << "reproduce " << o.example << ": some targets were missed\n";
  return all_met ? kSuccess : kDomainFailure;
}

int dispatch(const std::string& command, const Options& o, std::ostream& out, std::ostream& err) {
  try {
    if (command == "check") return cmd_check(o, out, err);
    if (command == "analyze") return cmd_analyze(o, out, err);
    if (command == "synthesize") return cmd_synthesize(o, out, err);
    if (command == "simulate") return cmd_simulate(o, out, err);
    if (command == "reproduce") return cmd_reproduce(o, out, err);
    err << "error: unknown command\n";
    return kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analysis, interval-observer synthesis and simulation for positive Markov jump linear systems", "mjls"};
  app.require_subcommand(1);
  Options o;

  const auto add_model = [&](CLI::App* sub) { sub->add_option("--model", o.model, "Model file")->required(); };
  const auto add_objective = [&](CLI::App* sub) {
    sub->add_option("--objective", o.objective, "Gain objective")
        ->check(CLI::IsMember({"l1", "linf", "L1", "Linf"}));
  };
  const auto add_epsilon = [&](CLI::App* sub) {
    sub->add_option("--epsilon", o.epsilon, "Strictness margin for strict inequalities")
        ->check(CLI::Range(1e-15, 1e-1));
  };

  auto* check = app.add_subcommand("check", "Validate a model and report positivity");
  add_model(check);

  auto* analyze = app.add_subcommand("analyze", "Compute the L1 or L-infinity gain");
  add_model(analyze);
  add_objective(analyze);
  add_epsilon(analyze);
  analyze->add_option("--design", o.design, "Analyze the error system of this observer design");
  analyze->add_option("--M", o.M, "Error output matrix file (default identity)");
  analyze->add_option("--dump-lp", o.dump_lp, "Write the analysis LP in CPLEX LP format");
  analyze->add_option("--out", o.out, "Output directory");

  auto* synth = app.add_subcommand("synthesize", "Design interval-observer gains");
  add_model(synth);
  add_objective(synth);
  add_epsilon(synth);
  synth->add_option("--bound", o.bound, "Entry bound on the gains")->check(CLI::PositiveNumber);
  synth->add_option("--zero-pattern", o.zero_pattern, "Zero-pattern mask file");
  synth->add_option("--M", o.M, "Error output matrix file (default identity)");
  synth->add_option("--dump-lp", o.dump_lp, "Write the synthesis LP in CPLEX LP format");
  synth->add_option("--out", o.out, "Output directory");

  auto* sim = app.add_subcommand("simulate", "Simulate the plant and observers and check enclosure");
  add_model(sim);
  sim->add_option("--design", o.design, "Observer design file")->required();
  sim->add_option("--sim-config", o.sim_config, "Simulation config file");
  sim->add_option("--seed", o.seed, "First path seed");
  sim->add_option("--T", o.T, "Horizon")->check(CLI::PositiveNumber);
  sim->add_option("--dt", o.dt, "Time step")->check(CLI::PositiveNumber);
  sim->add_option("--paths", o.paths, "Number of seeded paths")->check(CLI::Range(1, 100000));
  sim->add_option("--out", o.out, "Output directory for traces");
  sim->add_flag("--force", o.force, "Simulate even if the design fails verification");

  auto* repro = app.add_subcommand("reproduce", "Run the bundled example end to end");
  repro->add_option("example", o.example, "ex1 or ex2")->required()->check(CLI::IsMember({"ex1", "ex2"}));
  repro->add_option("--fixtures", o.fixtures, "Fixture directory");
  repro->add_option("--out", o.out, "Output directory");
  repro->add_option("--paths", o.paths, "Number of seeded paths")->check(CLI::Range(1, 100000));
  o.paths = 1;

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  o.has_bound = synth->count("--bound") > 0;
  o.has_T = sim->count("--T") > 0;
  o.has_dt = sim->count("--dt") > 0;
  o.has_seed = sim->count("--seed") > 0;
  if (repro->parsed() && repro->count("--paths") == 0) o.paths = 10;

  for (auto* sub : app.get_subcommands()) return dispatch(sub->get_name(), o, out, err);
  return kUsageError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args, std::cout, std::cerr);
}

}  // namespace mjls::cli
