#include "sampled_pmp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sampled_pmp/builtins.hpp"
#include "sampled_pmp/certificate.hpp"
#include "sampled_pmp/errors.hpp"
#include "sampled_pmp/io.hpp"
#include "sampled_pmp/parking.hpp"
#include "sampled_pmp/simulate.hpp"
#include "sampled_pmp/solver.hpp"
#include "sampled_pmp/svg.hpp"

namespace sampled_pmp::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;
using Clock = std::chrono::steady_clock;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double parse_number(const std::string& text, const std::string& flag) {
  const auto v = io::parse_double(trim(text));
  if (!v || !std::isfinite(*v)) {
    throw InvalidArgument(flag + ": expected a decimal number, got '" + text + "'");
  }
  return *v;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, flag));
  if (out.empty()) throw InvalidArgument(flag + ": empty list");
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector json_vector(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidArgument(where + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidArgument(where + ": expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

std::string short_number(double v) { return io::format_general(v); }

int substeps_from_env() {
  const char* raw = std::getenv(kSubstepsEnv);
  if (raw == nullptr) return kDefaultSubsteps;
  const std::string text = trim(raw);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 2 || value % 2 != 0) {
    throw InvalidArgument(std::string(kSubstepsEnv) +
                          ": expected an even integer >= 2, got '" + text + "'");
  }
  return value;
}

Json read_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot write " + path.string());
  os << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InvalidArgument("cannot create output directory " + dir.string());
  }
}

// ---------------------------------------------------------------------------
// Problem selection shared by solve and check.

struct ProblemOptions {
  std::string problem;
  std::string spec;
  std::string M;
  std::string tf;
  std::string T;
  std::vector<std::string> params;
};

void add_problem_options(CLI::App* app, ProblemOptions& o) {
  app->add_option("--problem", o.problem, "Built-in problem name");
  app->add_option("--spec", o.spec, "Problem file (JSON)");
  app->add_option("--M", o.M, "Parking distance");
  app->add_option("--tf", o.tf, "Final time (guess when free)");
  app->add_option("--T", o.T, "Sampling period");
  app->add_option("--param", o.params, "Built-in parameter key=value (repeatable)");
}

struct ResolvedProblem {
  io::ProblemSpec spec;
  std::string source;
};

ResolvedProblem resolve_problem(const ProblemOptions& o) {
  if (o.problem.empty() == o.spec.empty()) {
    throw InvalidArgument("exactly one of --problem or --spec is required");
  }
  std::map<std::string, double> params;
  if (!o.M.empty()) params["M"] = parse_number(o.M, "--M");
  for (const auto& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InvalidArgument("--param: expected key=value, got '" + kv + "'");
    }
    params[trim(kv.substr(0, eq))] = parse_number(kv.substr(eq + 1), "--param " + kv);
  }

  ResolvedProblem out;
  if (!o.problem.empty()) {
    if (o.tf.empty() || o.T.empty()) throw InvalidArgument("--tf and --T are required");
    BuiltinRequest req{o.problem, params, parse_number(o.tf, "--tf")};
    out.spec = io::ProblemSpec{make_builtin(req), req.tf, parse_number(o.T, "--T"),
                               builtin_adjoint_guess(req), req};
    out.source = "builtin";
    return out;
  }

  out.spec = io::load_problem_spec(o.spec);
  out.source = "spec";
  if (!o.T.empty()) out.spec.T = parse_number(o.T, "--T");
  if (!params.empty() || !o.tf.empty()) {
    if (!out.spec.builtin) {
      throw InvalidArgument("--tf, --M and --param only override built-in problem files");
    }
    BuiltinRequest req = *out.spec.builtin;
    for (const auto& [k, v] : params) req.params[k] = v;
    if (!o.tf.empty()) req.tf = parse_number(o.tf, "--tf");
    out.spec.problem = make_builtin(req);
    out.spec.tf = req.tf;
    out.spec.adjoint_guess = builtin_adjoint_guess(req);
    out.spec.builtin = req;
  }
  return out;
}

bool is_parking(const io::ProblemSpec& spec) {
  return spec.builtin && spec.builtin->name == "parking";
}

Json problem_to_json(const ResolvedProblem& rp) {
  Json j;
  j["name"] = rp.spec.problem.name;
  j["source"] = rp.source;
  j["terminal"] = terminal_variant_name(rp.spec.problem.terminal);
  j["free_final_time"] = rp.spec.problem.free_final_time();
  Json params = Json::object();
  if (rp.spec.builtin) {
    for (const auto& [k, v] : rp.spec.builtin->params) params[k] = v;
  }
  j["params"] = params;
  return j;
}

Json config_to_json(const SolverConfig& c) {
  Json j;
  j["inner_step"] = c.inner_step ? Json(*c.inner_step) : Json(nullptr);
  j["inner_tol"] = c.inner_tol;
  j["inner_max_iter"] = c.inner_max_iter;
  j["outer_tol"] = c.outer_tol;
  j["outer_max_iter"] = c.outer_max_iter;
  j["fd_relative_step"] = c.fd_relative_step;
  j["max_halvings"] = c.max_halvings;
  j["substeps"] = c.substeps;
  j["use_broyden"] = c.use_broyden;
  j["certificate_tol"] = c.certificate_tol;
  return j;
}

Json grid_to_json(const SamplingGrid& g) {
  return Json{{"T", g.period()}, {"tf", g.final_time()}, {"K", g.size()}};
}

void finish_manifest(Json& manifest, const fs::path& dir, std::vector<std::string> outputs,
                     Clock::time_point start) {
  outputs.push_back("manifest.json");
  manifest["outputs"] = outputs;
  manifest["wall_time_s"] = std::chrono::duration<double>(Clock::now() - start).count();
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

void print_certificate(std::ostream& out, const Certificate& cert) {
  out << "certificate: " << (cert.pass ? "pass" : "fail")
      << " (max interval residual " << io::format_double(cert.max_interval_residual())
      << ", transversality " << io::format_double(cert.transversality)
      << ", feasibility " << io::format_double(cert.feasibility) << ")\n";
  for (const auto& v : cert.violations) out << "  violation: " << v << '\n';
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const NonConvergence& e) {
    err << "error: solver did not converge: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const IntegrationBlowUp& e) {
    err << "error: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const InternalInconsistency& e) {
    err << "error: " << e.what() << '\n';
    return kCertificateFailure;
  } catch (const Infeasible& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }
}

// ---------------------------------------------------------------------------
// solve

struct SolveOptions {
  ProblemOptions problem;
  std::string out = ".";
  std::string tol;
  bool broyden = false;
};

int cmd_solve(const SolveOptions& o, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const auto start = Clock::now();
    const ResolvedProblem rp = resolve_problem(o.problem);
    const io::ProblemSpec& spec = rp.spec;

    SolverConfig config;
    config.substeps = substeps_from_env();
    config.use_broyden = o.broyden;
    if (!o.tol.empty()) config.certificate_tol = parse_number(o.tol, "--tol");
    config.validate();

    Extremal extremal;
    Certificate cert;
    ShootingUnknowns unknowns;
    NewtonReport report;
    Json parking_block;
    if (is_parking(spec)) {
      const double M = spec.builtin->params.at("M");
      parking::Solution sol = parking::solve(M, spec.tf, spec.T, config);
      unknowns.p_init = parking::adjoint_at_zero(sol.multipliers, spec.tf);
      parking_block = {{"M", M},
                       {"tf", spec.tf},
                       {"T", spec.T},
                       {"p1", sol.multipliers.p1},
                       {"p2f", sol.multipliers.p2f},
                       {"closed_form", sol.closed_form}};
      extremal = std::move(sol.extremal);
      cert = std::move(sol.certificate);
      report = std::move(sol.report);
    } else {
      const SamplingGrid grid = build_grid(spec.tf, spec.T);
      SolveResult res = solve(spec.problem, grid,
                              ShootingUnknowns::initial_for(spec.problem, spec.adjoint_guess),
                              config);
      extremal = std::move(res.extremal);
      cert = std::move(res.certificate);
      unknowns = std::move(res.unknowns);
      report = std::move(res.report);
    }

    const fs::path dir = o.out;
    ensure_dir(dir);
    {
      std::ofstream os(dir / "controls.csv", std::ios::binary);
      io::write_controls_csv(os, extremal, cert);
    }
    {
      std::ofstream os(dir / "trajectory.csv", std::ios::binary);
      io::write_trajectory_csv(os, extremal);
    }
    write_text(dir / "certificate.json", io::certificate_to_json(cert).dump(2) + "\n");

    Json manifest;
    manifest["command"] = "solve";
    manifest["args"] = args;
    manifest["problem"] = problem_to_json(rp);
    manifest["config"] = config_to_json(config);
    Json inputs = Json::object();
    if (!o.problem.spec.empty()) inputs[o.problem.spec] = io::file_digest(o.problem.spec);
    manifest["inputs"] = inputs;
    manifest["grid"] = grid_to_json(extremal.grid);
    manifest["unknowns"] = {
        {"adjoint_init", to_json(unknowns.p_init)},
        {"tf", unknowns.tf ? Json(*unknowns.tf) : Json(nullptr)},
        {"q_init", unknowns.q_init ? to_json(*unknowns.q_init) : Json(nullptr)}};
    manifest["p0"] = extremal.adjoint.p0;
    manifest["solver"] = {{"iterations", report.iterations},
                          {"evaluations", report.evaluations},
                          {"terminal_residual", report.residual.norm()},
                          {"residual_history", report.residual_history}};
    manifest["cost"] = extremal.trajectory.cost;
    manifest["certificate_pass"] = cert.pass;
    if (!parking_block.is_null()) manifest["parking"] = parking_block;
    finish_manifest(manifest, dir,
                    {"controls.csv", "trajectory.csv", "certificate.json"}, start);

    out << spec.problem.name << ": K = " << extremal.grid.size() << ", "
        << report.iterations << " Newton iterations, cost "
        << io::format_double(extremal.trajectory.cost) << '\n';
    print_certificate(out, cert);
    return cert.pass ? kOk : kCertificateFailure;
  });
}

// ---------------------------------------------------------------------------
// check

struct CheckOptions {
  ProblemOptions problem;
  std::string controls;
  std::string adjoint_init;
  std::string multipliers;
  std::string q_init;
  std::string p0;
  std::string tol;
  std::string out = ".";
};

int cmd_check(const CheckOptions& o, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const auto start = Clock::now();
    const ResolvedProblem rp = resolve_problem(o.problem);
    const io::ProblemSpec& spec = rp.spec;
    const ProblemDefinition& problem = spec.problem;

    if (o.controls.empty()) throw InvalidArgument("--controls is required");
    if (o.adjoint_init.empty() == o.multipliers.empty()) {
      throw InvalidArgument("exactly one of --adjoint-init or --multipliers is required");
    }

    Vector p_init;
    double p0 = -1.0;
    double tf = spec.tf;
    std::optional<Vector> q_init = fixed_initial_state(problem.terminal);
    if (!o.multipliers.empty()) {
      const Json m = read_json_file(o.multipliers);
      try {
        const Json& u = m.at("unknowns");
        p_init = json_vector(u.at("adjoint_init"), "unknowns.adjoint_init");
        if (u.contains("tf") && !u["tf"].is_null()) tf = u["tf"].get<double>();
        if (!q_init && u.contains("q_init") && !u["q_init"].is_null()) {
          q_init = json_vector(u["q_init"], "unknowns.q_init");
        }
        if (m.contains("p0")) p0 = m["p0"].get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(o.multipliers + ": " + e.what());
      }
    } else {
      p_init = to_vector(parse_list(o.adjoint_init, "--adjoint-init"));
    }
    if (!o.q_init.empty()) q_init = to_vector(parse_list(o.q_init, "--q-init"));
    if (!o.p0.empty()) p0 = parse_number(o.p0, "--p0");
    if (p0 != 0.0 && p0 != -1.0) throw InvalidArgument("--p0 must be 0 or -1");
    if (p_init.size() != problem.state_dim) {
      throw InvalidArgument("adjoint has " + std::to_string(p_init.size()) +
                            " components, expected " + std::to_string(problem.state_dim));
    }
    if (!q_init) throw InvalidArgument("initial state unknown: pass --q-init");
    if (q_init->size() != problem.state_dim) {
      throw InvalidArgument("initial state has the wrong dimension");
    }

    std::ifstream is(o.controls);
    if (!is) throw InvalidArgument("cannot open " + o.controls);
    const io::ControlsTable table = io::read_controls_csv(is);
    const SamplingGrid grid = build_grid(tf, spec.T);
    if (static_cast<int>(table.u.size()) != grid.size()) {
      throw InvalidArgument("controls CSV has " + std::to_string(table.u.size()) +
                            " rows, the grid has " + std::to_string(grid.size()) +
                            " intervals");
    }
    for (std::size_t k = 0; k < table.u.size(); ++k) {
      if (table.u[k].size() != problem.control_dim) {
        throw InvalidArgument("controls CSV row " + std::to_string(k + 2) +
                              ": expected " + std::to_string(problem.control_dim) +
                              " control components");
      }
    }

    SolverConfig config;
    config.substeps = substeps_from_env();
    const double tol = o.tol.empty() ? kDefaultCertificateTol : parse_number(o.tol, "--tol");

    Certificate cert;
    try {
      const Extremal extremal =
          integrate_extremal_forward(problem, grid, table.u, *q_init, p_init, p0,
                                     config.substeps, MembershipCheck::kSkip);
      cert = check_certificate(problem, extremal, tol);
    } catch (const IntegrationBlowUp& e) {
      err << "error: " << e.what() << '\n';
      return static_cast<int>(kCertificateFailure);
    }

    const fs::path dir = o.out;
    ensure_dir(dir);
    write_text(dir / "certificate.json", io::certificate_to_json(cert).dump(2) + "\n");
    Json manifest;
    manifest["command"] = "check";
    manifest["args"] = args;
    manifest["problem"] = problem_to_json(rp);
    Json inputs = Json::object();
    inputs[o.controls] = io::file_digest(o.controls);
    if (!o.multipliers.empty()) inputs[o.multipliers] = io::file_digest(o.multipliers);
    if (!o.problem.spec.empty()) inputs[o.problem.spec] = io::file_digest(o.problem.spec);
    manifest["inputs"] = inputs;
    manifest["grid"] = grid_to_json(grid);
    manifest["config"] = {{"substeps", config.substeps}, {"certificate_tol", tol}};
    manifest["certificate_pass"] = cert.pass;
    finish_manifest(manifest, dir, {"certificate.json"}, start);

    print_certificate(out, cert);
    return cert.pass ? static_cast<int>(kOk) : static_cast<int>(kCertificateFailure);
  });
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::string problem = "parking";
  std::string M;
  std::string tf;
  std::string periods;
  std::string out = ".";
};

std::vector<double> permanent_samples(double M, double tf, std::vector<double>& t) {
  constexpr int kSamples = 1000;
  std::vector<double> u(kSamples);
  t.resize(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    t[i] = i == kSamples - 1 ? tf : tf * i / (kSamples - 1);
    u[i] = parking::permanent_control(M, tf, t[i]);
  }
  return u;
}

int cmd_sweep(const SweepOptions& o, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const auto start = Clock::now();
    if (o.problem != "parking") {
      throw InvalidArgument("sweep supports only --problem parking");
    }
    if (o.M.empty() || o.tf.empty() || o.periods.empty()) {
      throw InvalidArgument("--M, --tf and --T-list are required");
    }
    const double M = parse_number(o.M, "--M");
    const double tf = parse_number(o.tf, "--tf");
    const std::vector<double> periods = parse_list(o.periods, "--T-list");
    parking::classify(M, tf);
    for (double T : periods) {
      if (!(T > 0.0)) throw InvalidArgument("--T-list: periods must be positive");
    }

    SolverConfig config;
    config.substeps = substeps_from_env();
    const std::vector<parking::SweepRow> rows = parking::sweep(M, tf, periods, config);

    const fs::path dir = o.out;
    ensure_dir(dir);
    {
      std::ofstream os(dir / "sweep.csv", std::ios::binary);
      io::write_sweep_csv(os, rows);
    }
    std::vector<std::string> outputs{"sweep.csv"};

    std::vector<double> curve_t;
    const std::vector<double> curve_u = permanent_samples(M, tf, curve_t);
    int ok = 0;
    for (const auto& row : rows) {
      out << "T = " << short_number(row.T) << ": " << row.status;
      if (row.status == "ok") {
        ++ok;
        out << ", sup_dev " << io::format_double(row.sup_dev);
        svg::Plot plot("sampled control vs permanent control, M = " + short_number(M) +
                           ", tf = " + short_number(tf) + ", T = " + short_number(row.T),
                       "t", "u");
        plot.add_curve(curve_t, curve_u, "red");
        std::vector<double> xs, ys;
        for (int k = 0; k < row.K; ++k) {
          xs.push_back(k * row.T);
          ys.push_back(row.controls[k][0]);
        }
        plot.add_crosses(xs, ys, "blue");
        const std::string name = "sweep_T" + short_number(row.T) + ".svg";
        write_text(dir / name, plot.render());
        outputs.push_back(name);
      }
      out << '\n';
    }

    Json manifest;
    manifest["command"] = "sweep";
    manifest["args"] = args;
    manifest["problem"] = {{"name", "parking"}, {"params", {{"M", M}}}, {"tf", tf}};
    manifest["config"] = config_to_json(config);
    manifest["inputs"] = Json::object();
    Json table = Json::array();
    for (const auto& row : rows) {
      table.push_back({{"T", row.T},
                       {"K", row.K},
                       {"sup_dev", row.sup_dev},
                       {"terminal_residual", row.terminal_residual},
                       {"status", row.status}});
    }
    manifest["rows"] = table;
    finish_manifest(manifest, dir, outputs, start);

    if (ok == 0) {
      err << "error: every solve in the sweep failed\n";
      return static_cast<int>(kNonConvergence);
    }
    return static_cast<int>(kOk);
  });
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
  std::string run;
  std::string out;
};

int cmd_compare(const CompareOptions& o, const std::vector<std::string>& args,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = Clock::now();
    const fs::path run = o.run;
    if (o.run.empty() || !fs::is_directory(run)) {
      throw InvalidArgument("run directory not found: " + o.run);
    }
    const Json manifest = read_json_file(run / "manifest.json");
    if (!manifest.contains("parking")) {
      throw InvalidArgument("compare needs a parking run (no parking block in manifest)");
    }
    double M = 0.0, tf = 0.0, T = 0.0;
    try {
      const Json& pk = manifest["parking"];
      M = pk.at("M").get<double>();
      tf = pk.at("tf").get<double>();
      T = pk.at("T").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("manifest.json: " + std::string(e.what()));
    }
    parking::classify(M, tf);
    const SamplingGrid grid = build_grid(tf, T);

    std::ifstream is(run / "controls.csv");
    if (!is) throw InvalidArgument("cannot open " + (run / "controls.csv").string());
    const io::ControlsTable table = io::read_controls_csv(is);
    if (static_cast<int>(table.u.size()) != grid.size()) {
      throw InvalidArgument("controls.csv has " + std::to_string(table.u.size()) +
                            " rows, the grid has " + std::to_string(grid.size()));
    }

    constexpr int kPoints = 1001;
    const int kf = final_control_index(tf, T);
    std::vector<double> t(kPoints), hold(kPoints), star(kPoints);
    std::ostringstream csv;
    csv << "t,u_hold,u_star\n";
    for (int i = 0; i < kPoints; ++i) {
      t[i] = i == kPoints - 1 ? tf : tf * i / (kPoints - 1);
      const int k = i == kPoints - 1 ? kf : std::min(floor_index(t[i], T), kf);
      hold[i] = table.u[k][0];
      star[i] = parking::permanent_control(M, tf, t[i]);
      csv << io::format_double(t[i]) << ',' << io::format_double(hold[i]) << ','
          << io::format_double(star[i]) << '\n';
    }

    const fs::path dir = o.out.empty() ? run : fs::path(o.out);
    ensure_dir(dir);
    write_text(dir / "compare.csv", csv.str());

    std::vector<double> edges, levels;
    for (int k = 0; k < grid.size(); ++k) {
      edges.push_back(grid.start(k));
      levels.push_back(table.u[k][0]);
    }
    edges.push_back(tf);
    svg::Plot plot("sample-and-hold control vs permanent control, T = " + short_number(T),
                   "t", "u");
    std::vector<double> curve_t;
    const std::vector<double> curve_u = permanent_samples(M, tf, curve_t);
    plot.add_curve(curve_t, curve_u, "red");
    plot.add_steps(edges, levels, "blue");
    write_text(dir / "compare.svg", plot.render());

    Json m;
    m["command"] = "compare";
    m["args"] = args;
    m["inputs"] = {{(run / "manifest.json").string(), io::file_digest(run / "manifest.json")},
                   {(run / "controls.csv").string(), io::file_digest(run / "controls.csv")}};
    m["parking"] = manifest["parking"];
    m["steps"] = grid.size();
    // A compare written into the run directory must not clobber the run's manifest.
    if (dir == run) {
      m["outputs"] = {"compare.csv", "compare.svg"};
      m["wall_time_s"] = std::chrono::duration<double>(Clock::now() - start).count();
      write_text(dir / "compare_manifest.json", m.dump(2) + "\n");
    } else {
      finish_manifest(m, dir, {"compare.csv", "compare.svg"}, start);
    }

    out << "staircase with " << grid.size() << " steps\n";
    return static_cast<int>(kOk);
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampled-data optimal control via the maximum principle", "sampled-pmp"};
  app.require_subcommand(1);

  SolveOptions solve_opts;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a problem by indirect shooting");
  add_problem_options(solve_cmd, solve_opts.problem);
  solve_cmd->add_option("--out", solve_opts.out, "Output directory");
  solve_cmd->add_option("--tol", solve_opts.tol, "Certificate tolerance");
  solve_cmd->add_flag("--broyden", solve_opts.broyden, "Broyden updates in the outer solve");

  CheckOptions check_opts;
  CLI::App* check_cmd = app.add_subcommand("check", "Certify given controls and adjoint");
  add_problem_options(check_cmd, check_opts.problem);
  check_cmd->add_option("--controls", check_opts.controls, "Controls CSV");
  check_cmd->add_option("--adjoint-init", check_opts.adjoint_init, "p(0) as a,b,...");
  check_cmd->add_option("--multipliers", check_opts.multipliers, "manifest.json of a solve");
  check_cmd->add_option("--q-init", check_opts.q_init, "q(0) for periodic problems");
  check_cmd->add_option("--p0", check_opts.p0, "Cost multiplier (-1 or 0)");
  check_cmd->add_option("--tol", check_opts.tol, "Certificate tolerance");
  check_cmd->add_option("--out", check_opts.out, "Output directory");

  SweepOptions sweep_opts;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Parking solves over several periods");
  sweep_cmd->add_option("--problem", sweep_opts.problem, "Problem (parking)");
  sweep_cmd->add_option("--M", sweep_opts.M, "Parking distance");
  sweep_cmd->add_option("--tf", sweep_opts.tf, "Final time");
  sweep_cmd->add_option("--T-list", sweep_opts.periods, "Comma-separated periods");
  sweep_cmd->add_option("--out", sweep_opts.out, "Output directory");

  CompareOptions compare_opts;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Sample-and-hold control against the permanent one");
  compare_cmd->add_option("--run", compare_opts.run, "Directory of a parking solve");
  compare_cmd->add_option("--out", compare_opts.out, "Output directory (default: the run)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kBadInput;
  }

  if (solve_cmd->parsed()) return cmd_solve(solve_opts, args, out, err);
  if (check_cmd->parsed()) return cmd_check(check_opts, args, out, err);
  if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, args, out, err);
  return cmd_compare(compare_opts, args, out, err);
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace sampled_pmp::cli
