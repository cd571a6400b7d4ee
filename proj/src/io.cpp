#include "sampled_pmp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "sampled_pmp/errors.hpp"

namespace sampled_pmp::io {

namespace {

void reject_unknown_fields(const Json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
  if (!obj.is_object()) throw InvalidArgument(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw InvalidArgument(where + ": unknown field '" + key + "'");
    }
  }
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw InvalidArgument(where + ": expected a number");
  return v.get<double>();
}

Vector vector_of(const Json& v, const std::string& where) {
  if (!v.is_array()) throw InvalidArgument(where + ": expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = number(v[i], where + "[" + std::to_string(i) + "]");
  }
  return out;
}

Matrix matrix_of(const Json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw InvalidArgument(where + ": expected rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Matrix out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) {
      throw InvalidArgument(where + ": ragged or malformed row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          number(v[i][j], where);
    }
  }
  return out;
}

const Json& required(const Json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InvalidArgument(where + ": missing field '" + key + "'");
  return *it;
}

ControlSet parse_control_set(const Json& j) {
  const std::string where = "control_set";
  if (!j.is_object()) throw InvalidArgument(where + ": expected an object");
  const std::string kind = required(j, "kind", where).get<std::string>();
  if (kind == "box") {
    reject_unknown_fields(j, {"kind", "lower", "upper"}, where);
    return ConvexSet::box(vector_of(required(j, "lower", where), where + ".lower"),
                          vector_of(required(j, "upper", where), where + ".upper"));
  }
  if (kind == "ball") {
    reject_unknown_fields(j, {"kind", "center", "radius"}, where);
    return ConvexSet::ball(vector_of(required(j, "center", where), where + ".center"),
                           number(required(j, "radius", where), where + ".radius"));
  }
  throw InvalidArgument(where + ": unknown kind '" + kind + "'");
}

TerminalCondition parse_terminal(const Json& j) {
  const std::string where = "terminal";
  if (!j.is_object()) throw InvalidArgument(where + ": expected an object");
  const std::string variant = required(j, "variant", where).get<std::string>();
  if (variant == "fixed_endpoints") {
    reject_unknown_fields(j, {"variant", "q0", "qf"}, where);
    return FixedEndpoints{vector_of(required(j, "q0", where), "terminal.q0"),
                          vector_of(required(j, "qf", where), "terminal.qf")};
  }
  if (variant == "fixed_initial_free_final") {
    reject_unknown_fields(j, {"variant", "q0"}, where);
    return FixedInitialFreeFinal{vector_of(required(j, "q0", where), "terminal.q0")};
  }
  if (variant == "periodic") {
    reject_unknown_fields(j, {"variant", "q0_guess"}, where);
    return Periodic{vector_of(required(j, "q0_guess", where), "terminal.q0_guess")};
  }
  throw InvalidArgument(where + ": unknown variant '" + variant + "'");
}

void apply_quadratic_cost(ProblemDefinition& p, const Json* cost) {
  const int n = p.state_dim, m = p.control_dim;
  Matrix Q = Matrix::Zero(n, n);
  Matrix R = Matrix::Identity(m, m);
  double c = 0.0;
  if (cost) {
    reject_unknown_fields(*cost, {"Q", "R", "constant"}, "cost");
    if (cost->contains("Q")) Q = matrix_of((*cost)["Q"], "cost.Q");
    if (cost->contains("R")) R = matrix_of((*cost)["R"], "cost.R");
    if (cost->contains("constant")) c = number((*cost)["constant"], "cost.constant");
  }
  if (Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m) {
    throw InvalidArgument("cost: Q must be n x n and R m x m");
  }
  const Matrix Qs = Q + Q.transpose(), Rs = R + R.transpose();
  p.running_cost = [Q, R, c](double, const Vector& q, const Vector& u) {
    return c + q.dot(Q * q) + u.dot(R * u);
  };
  p.cost_grad_q = [Qs](double, const Vector& q, const Vector&) -> Vector { return Qs * q; };
  p.cost_grad_u = [Rs](double, const Vector&, const Vector& u) -> Vector { return Rs * u; };
}

ProblemSpec parse_inline(const Json& doc) {
  reject_unknown_fields(doc,
                        {"name", "n", "m", "dynamics", "A", "B", "cost", "control_set",
                         "terminal", "tf", "free_final_time", "T", "adjoint_guess"},
                        "spec");
  const int n = required(doc, "n", "spec").get<int>();
  const int m = required(doc, "m", "spec").get<int>();
  const std::string dyn = required(doc, "dynamics", "spec").get<std::string>();
  const double tf = number(required(doc, "tf", "spec"), "tf");
  const double T = number(required(doc, "T", "spec"), "T");
  const bool free_tf = doc.value("free_final_time", false);
  const FinalTimeMode mode =
      free_tf ? FinalTimeMode{FreeFinalTime{tf}} : FinalTimeMode{FixedFinalTime{tf}};
  ControlSet omega = parse_control_set(required(doc, "control_set", "spec"));
  TerminalCondition terminal = parse_terminal(required(doc, "terminal", "spec"));

  ProblemDefinition p;
  if (dyn == "lti") {
    LtiData data;
    data.A = matrix_of(required(doc, "A", "spec"), "A");
    data.B = matrix_of(required(doc, "B", "spec"), "B");
    data.Q = Matrix::Zero(data.A.rows(), data.A.rows());
    data.R = Matrix::Identity(data.B.cols(), data.B.cols());
    p = make_lti("lti", data, omega, terminal, mode);
  } else if (dyn == "double_integrator" || dyn == "pendulum") {
    if (doc.contains("A") || doc.contains("B")) {
      throw InvalidArgument("spec: A and B are only allowed with \"lti\" dynamics");
    }
    if (n != 2 || m != 1) throw InvalidArgument("spec: " + dyn + " has n = 2, m = 1");
    p = dyn == "pendulum" ? make_pendulum(Vector::Zero(2), Vector::Zero(2), 1.0, 1.0)
                          : make_parking(1.0, 1.0);
    p.control_set = omega;
    p.terminal = terminal;
    p.final_time_mode = mode;
  } else {
    throw InvalidArgument("spec: unknown dynamics '" + dyn + "'");
  }
  if (p.state_dim != n || p.control_dim != m) {
    throw InvalidArgument("spec: n/m disagree with the dynamics");
  }
  p.name = doc.value("name", dyn);
  apply_quadratic_cost(p, doc.contains("cost") ? &doc["cost"] : nullptr);
  p.validate();

  ProblemSpec spec{std::move(p), tf, T, std::nullopt, std::nullopt};
  if (doc.contains("adjoint_guess")) {
    spec.adjoint_guess = vector_of(doc["adjoint_guess"], "adjoint_guess");
  }
  return spec;
}

}  // namespace

ProblemSpec parse_problem_spec(const Json& doc) {
  try {
    if (!doc.is_object()) throw InvalidArgument("spec: expected a JSON object");
    if (!doc.contains("problem")) return parse_inline(doc);
    reject_unknown_fields(doc, {"problem", "params", "tf", "T", "adjoint_guess"}, "spec");
    BuiltinRequest req;
    req.name = doc["problem"].get<std::string>();
    req.tf = number(required(doc, "tf", "spec"), "tf");
    if (doc.contains("params")) {
      if (!doc["params"].is_object()) throw InvalidArgument("params: expected an object");
      for (const auto& [key, value] : doc["params"].items()) {
        req.params[key] = number(value, "params." + key);
      }
    }
    ProblemSpec spec{make_builtin(req), req.tf, number(required(doc, "T", "spec"), "T"),
                     builtin_adjoint_guess(req), req};
    if (doc.contains("adjoint_guess")) {
      spec.adjoint_guess = vector_of(doc["adjoint_guess"], "adjoint_guess");
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("spec: ") + e.what());
  }
}

ProblemSpec load_problem_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open spec file " + path.string());
  Json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("spec file " + path.string() + ": " + e.what());
  }
  return parse_problem_spec(doc);
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, 12);
  return std::string(buf, res.ptr);
}

std::string format_general(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view token) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) {
    token.remove_prefix(1);
  }
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' ||
                            token.back() == '\r')) {
    token.remove_suffix(1);
  }
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

void write_trajectory_csv(std::ostream& os, const Extremal& ex) {
  const auto n = ex.trajectory.initial_state().size();
  const auto m = ex.controls.front().size();
  os << "t";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",q_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) os << ",p_" << i;
  os << ",k";
  for (Eigen::Index i = 1; i <= m; ++i) os << ",u_" << i;
  os << '\n';
  for (int k = 0; k < ex.grid.size(); ++k) {
    const IntervalNodes& nodes = ex.trajectory.intervals[k];
    for (std::size_t j = 0; j < nodes.t.size(); ++j) {
      os << format_double(nodes.t[j]);
      for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(nodes.q[j][i]);
      for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(ex.adjoint.p[k][j][i]);
      os << ',' << k;
      for (Eigen::Index i = 0; i < m; ++i) os << ',' << format_double(ex.controls[k][i]);
      os << '\n';
    }
  }
}

void write_controls_csv(std::ostream& os, const Extremal& ex, const Certificate& cert) {
  const auto m = ex.controls.front().size();
  os << "k,t_k,delta_k";
  for (Eigen::Index i = 1; i <= m; ++i) os << ",u_" << i;
  os << ",residual_k\n";
  for (int k = 0; k < ex.grid.size(); ++k) {
    os << k << ',' << format_double(ex.grid.start(k)) << ','
       << format_double(ex.grid.length(k));
    for (Eigen::Index i = 0; i < m; ++i) os << ',' << format_double(ex.controls[k][i]);
    os << ',' << format_double(cert.intervals.at(k).r) << '\n';
  }
}

ControlsTable read_controls_csv(std::istream& is) {
  auto fail = [](std::size_t row, std::size_t col, const std::string& what) {
    throw InvalidArgument("controls CSV row " + std::to_string(row) + ", column " +
                          std::to_string(col) + ": " + what);
  };
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  auto trim = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    while (!s.empty() && s.front() == ' ') s.erase(s.begin());
    return s;
  };

  std::string line;
  if (!std::getline(is, line)) fail(1, 1, "missing header row");
  const auto header = split(line);
  if (header.size() < 5 || trim(header[0]) != "k" || trim(header[1]) != "t_k" ||
      trim(header[2]) != "delta_k" || trim(header.back()) != "residual_k") {
    fail(1, 1, "expected header k,t_k,delta_k,u_1..u_m,residual_k");
  }
  const std::size_t m = header.size() - 4;
  for (std::size_t i = 0; i < m; ++i) {
    if (trim(header[3 + i]) != "u_" + std::to_string(i + 1)) {
      fail(1, 4 + i, "expected column u_" + std::to_string(i + 1));
    }
  }

  ControlsTable table;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      fail(row, std::min(cells.size(), header.size()) + 1,
           "expected " + std::to_string(header.size()) + " columns, got " +
               std::to_string(cells.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v) fail(row, c + 1, "not a number: '" + cells[c] + "'");
      values[c] = *v;
    }
    if (values[0] != std::floor(values[0]) ||
        static_cast<int>(values[0]) != static_cast<int>(table.k.size())) {
      fail(row, 1, "interval indices must be 0, 1, 2, ... in order");
    }
    table.k.push_back(static_cast<int>(values[0]));
    table.t.push_back(values[1]);
    table.delta.push_back(values[2]);
    Vector u(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) u[static_cast<Eigen::Index>(i)] = values[3 + i];
    table.u.push_back(std::move(u));
  }
  if (table.u.empty()) fail(2, 1, "no data rows");
  return table;
}

Json certificate_to_json(const Certificate& cert) {
  Json intervals = Json::array();
  for (const auto& iv : cert.intervals) {
    intervals.push_back({{"k", iv.k},
                         {"t", iv.t},
                         {"r", iv.r},
                         {"r_raw", iv.raw_r},
                         {"admissible", iv.control_admissible}});
  }
  Json doc = {{"verdict", cert.pass ? "pass" : "fail"},
              {"tol", cert.tol},
              {"intervals", intervals},
              {"transversality", cert.transversality},
              {"free_time", cert.free_time ? Json(*cert.free_time) : Json(nullptr)},
              {"nontrivial", cert.nontrivial},
              {"feasibility", cert.feasibility},
              {"normalization", cert.normalization},
              {"max_interval_residual", cert.max_interval_residual()},
              {"violations", cert.violations}};
  return doc;
}

void write_sweep_csv(std::ostream& os, const std::vector<parking::SweepRow>& rows) {
  os << "T,K,sup_dev,terminal_residual,max_pmp_residual,cost_sampled,cost_permanent,"
        "status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& ch : status) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
    }
    os << format_double(r.T) << ',' << r.K << ',' << format_double(r.sup_dev) << ','
       << format_double(r.terminal_residual) << ',' << format_double(r.max_pmp_residual)
       << ',' << format_double(r.cost_sampled) << ',' << format_double(r.cost_permanent)
       << ',' << status << '\n';
  }
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::uint64_t h = 14695981039346656037ULL;
  char ch;
  while (in.get(ch)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sampled_pmp::io
