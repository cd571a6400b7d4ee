#include "sampled_pmp/parking.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "sampled_pmp/builtins.hpp"
#include "sampled_pmp/errors.hpp"

namespace sampled_pmp::parking {

namespace {

void require_existence(double M, double tf) {
  if (!(M > 0.0)) throw InvalidArgument("parking: M must be positive");
  if (!(tf > 0.0)) throw InvalidArgument("parking: tf must be positive");
  if (!(tf * tf > 4.0 * M)) {
    throw InvalidArgument("parking: tf^2 > 4M is required (got tf^2 = " +
                          std::to_string(tf * tf) + ", 4M = " + std::to_string(4.0 * M) +
                          ")");
  }
}

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

Vector initial_state(double M) {
  Vector q0(2);
  q0 << M, 0.0;
  return q0;
}

}  // namespace

Instance::Instance(double M, double tf, double T) : M_(M), tf_(tf), T_(T) {
  require_existence(M, tf);
  if (!(T > 0.0)) throw InvalidArgument("parking: T must be positive");
}

Regime Instance::regime() const { return classify(M_, tf_); }

Regime classify(double M, double tf) {
  require_existence(M, tf);
  return tf * tf < 6.0 * M ? Regime::kConstrained : Regime::kUnconstrained;
}

double permanent_control(double M, double tf, double t) {
  require_existence(M, tf);
  if (t < -1e-12 || t > tf + 1e-12) {
    throw InvalidArgument("permanent_control: t must lie in [0, tf]");
  }
  if (classify(M, tf) == Regime::kUnconstrained) {
    return 6.0 * M / (tf * tf * tf) * (2.0 * t - tf);
  }
  const double s = std::sqrt(3.0 * (tf * tf - 4.0 * M));
  const double t1 = 0.5 * (tf - s);
  if (t <= t1) return -1.0;
  if (t >= tf - t1) return 1.0;
  return (2.0 * t - tf) / s;
}

double switching_time(double M, double tf) {
  if (classify(M, tf) != Regime::kConstrained) {
    throw InvalidArgument("switching_time: requires 4M < tf^2 < 6M");
  }
  return 0.5 * (tf - std::sqrt(3.0 * (tf * tf - 4.0 * M)));
}

double permanent_cost(double M, double tf) {
  if (classify(M, tf) == Regime::kUnconstrained) return 12.0 * M * M / (tf * tf * tf);
  // Two saturated arcs of length t1 plus the linear middle piece, which
  // integrates to s / 3 with s = tf - 2 t1.
  const double s = std::sqrt(3.0 * (tf * tf - 4.0 * M));
  return (tf - s) + s / 3.0;
}

Multipliers permanent_multipliers(double M, double tf) {
  return {-24.0 * M / (tf * tf * tf), 12.0 * M / (tf * tf)};
}

Vector adjoint_at_zero(const Multipliers& mult, double tf) {
  Vector p(2);
  p << mult.p1, mult.p1 * tf + mult.p2f;
  return p;
}

double gamma(int k, double x, double p1, double p2f, double tf, double T) {
  return -2.0 * x + p1 * (tf - k * T - 0.5 * T) + p2f;
}

ControlSequence sampled_control_from_multipliers(double p1, double p2f,
                                                 const SamplingGrid& grid) {
  ControlSequence out;
  out.reserve(grid.size());
  const double tf = grid.final_time();
  for (int k = 0; k < grid.size(); ++k) {
    const double c = tf - grid.start(k) - 0.5 * grid.length(k);
    out.push_back(Vector::Constant(1, clamp_unit(0.5 * (p1 * c + p2f))));
  }
  return out;
}

Vector shooting_map(double p1, double p2f, double M, const SamplingGrid& grid) {
  const ControlSequence u = sampled_control_from_multipliers(p1, p2f, grid);
  const double tf = grid.final_time();
  double q1 = M, q2 = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    const double d = grid.length(k);
    q2 += d * u[k][0];
    q1 += d * u[k][0] * (tf - grid.start(k) - 0.5 * d);
  }
  Vector out(2);
  out << q1, q2;
  return out;
}

double sup_deviation(double M, double tf, const SamplingGrid& grid,
                     const ControlSequence& controls) {
  double out = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    const double mid = grid.start(k) + 0.5 * grid.length(k);
    out = std::max(out, std::abs(controls.at(k)[0] - permanent_control(M, tf, mid)));
  }
  return out;
}

Solution solve(double M, double tf, double T, const SolverConfig& config) {
  const Instance inst(M, tf, T);
  config.validate();
  const SamplingGrid grid = inst.grid();
  const ProblemDefinition problem = make_parking(M, tf);
  const Multipliers guess = permanent_multipliers(M, tf);

  Solution sol;
  if (!grid.uniform()) {
    SolveResult res = sampled_pmp::solve(
        problem, grid,
        ShootingUnknowns::initial_for(problem, adjoint_at_zero(guess, tf)), config);
    const Vector& p_init = res.unknowns.p_init;
    sol.multipliers = {p_init[0], p_init[1] - p_init[0] * tf};
    sol.controls = res.extremal.controls;
    sol.terminal_residual = res.report.residual.norm();
    sol.cost = res.extremal.trajectory.cost;
    sol.extremal = std::move(res.extremal);
    sol.certificate = std::move(res.certificate);
    sol.report = std::move(res.report);
    sol.closed_form = false;
    return sol;
  }

  NewtonOptions opts;
  opts.tol = config.outer_tol;
  opts.max_iter = config.outer_max_iter;
  opts.fd_relative_step = config.fd_relative_step;
  opts.max_halvings = config.max_halvings;
  opts.use_broyden = config.use_broyden;
  opts.describe = [&](const Vector& x) {
    return active_set_signature(problem.control_set,
                                sampled_control_from_multipliers(x[0], x[1], grid));
  };
  Vector x0(2);
  x0 << guess.p1, guess.p2f;
  sol.report = newton_solve(
      [&](const Vector& x) { return shooting_map(x[0], x[1], M, grid); }, x0, opts);

  sol.multipliers = {sol.report.solution[0], sol.report.solution[1]};
  sol.controls =
      sampled_control_from_multipliers(sol.multipliers.p1, sol.multipliers.p2f, grid);
  sol.terminal_residual = sol.report.residual.norm();
  sol.extremal = integrate_extremal_forward(problem, grid, sol.controls, initial_state(M),
                                            adjoint_at_zero(sol.multipliers, tf), -1.0,
                                            config.substeps);
  sol.cost = sol.extremal.trajectory.cost;
  sol.certificate = check_certificate(problem, sol.extremal, config.certificate_tol);
  if (!sol.certificate.pass) {
    std::string what = "parking: converged multipliers fail the certificate:";
    for (const auto& v : sol.certificate.violations) what += " [" + v + "]";
    throw InternalInconsistency(what);
  }
  return sol;
}

QpResult qp_oracle(double M, double tf, double T, bool box) {
  if (!(M > 0.0) || !(tf > 0.0) || !(T > 0.0)) {
    throw InvalidArgument("qp_oracle: M, tf and T must be positive");
  }
  const double ratio = tf / T;
  const int K = static_cast<int>(std::lround(ratio));
  if (K < 1 || std::abs(ratio - K) > kIndexSnap) {
    throw InvalidArgument("qp_oracle: tf must be an integer multiple of T");
  }
  if (box && M > tf * tf / 4.0) {
    throw Infeasible("qp_oracle: M = " + std::to_string(M) +
                     " exceeds the reachable distance tf^2/4 = " +
                     std::to_string(tf * tf / 4.0));
  }
  if (box && K > 12) throw InvalidArgument("qp_oracle: enumeration limited to K <= 12");

  // Constraints: sum T u_k = 0 and sum T c_k u_k = -M.
  std::vector<double> c(K);
  for (int k = 0; k < K; ++k) c[k] = tf - k * T - 0.5 * T;
  const double feas_tol = 1e-9 * (1.0 + M);

  // Least-norm solution of the constraints over the index set `free` with
  // right-hand side (r1, r2); false when no solution exists.
  auto least_norm = [&](const std::vector<int>& free, double r1, double r2,
                        std::vector<double>& u) {
    u.assign(free.size(), 0.0);
    if (free.empty()) return std::abs(r1) <= feas_tol && std::abs(r2) <= feas_tol;
    if (free.size() == 1) {
      const double v = r1 / T;
      u[0] = v;
      return std::abs(T * c[free[0]] * v - r2) <= feas_tol;
    }
    double g11 = 0.0, g12 = 0.0, g22 = 0.0;
    for (int i : free) {
      g11 += T * T;
      g12 += T * T * c[i];
      g22 += T * T * c[i] * c[i];
    }
    const double det = g11 * g22 - g12 * g12;
    const double l1 = (g22 * r1 - g12 * r2) / det;
    const double l2 = (g11 * r2 - g12 * r1) / det;
    for (std::size_t j = 0; j < free.size(); ++j) u[j] = T * l1 + T * c[free[j]] * l2;
    return true;
  };

  QpResult best;
  best.cost = std::numeric_limits<double>::infinity();
  if (!box) {
    std::vector<int> all(K);
    for (int k = 0; k < K; ++k) all[k] = k;
    std::vector<double> u;
    if (!least_norm(all, 0.0, -M, u)) throw Infeasible("qp_oracle: constraints unsatisfiable");
    best.controls = u;
    best.cost = 0.0;
    for (double v : u) best.cost += T * v * v;
    return best;
  }

  std::vector<int> state(K, 0);  // 0 free, 1 lower, 2 upper
  std::vector<int> free;
  std::vector<double> u_free;
  long long total = 1;
  for (int k = 0; k < K; ++k) total *= 3;
  for (long long code = 0; code < total; ++code) {
    long long rest = code;
    free.clear();
    double r1 = 0.0, r2 = -M;
    for (int k = 0; k < K; ++k) {
      state[k] = static_cast<int>(rest % 3);
      rest /= 3;
      if (state[k] == 0) {
        free.push_back(k);
      } else {
        const double v = state[k] == 1 ? -1.0 : 1.0;
        r1 -= T * v;
        r2 -= T * c[k] * v;
      }
    }
    if (!least_norm(free, r1, r2, u_free)) continue;
    bool inside = true;
    for (double v : u_free) inside = inside && std::abs(v) <= 1.0 + 1e-12;
    if (!inside) continue;
    double cost = T * static_cast<double>(K - free.size());
    for (double v : u_free) cost += T * v * v;
    if (cost < best.cost) {
      best.cost = cost;
      best.controls.assign(K, 0.0);
      std::size_t j = 0;
      for (int k = 0; k < K; ++k) {
        best.controls[k] = state[k] == 0 ? std::clamp(u_free[j++], -1.0, 1.0)
                                         : (state[k] == 1 ? -1.0 : 1.0);
      }
    }
  }
  if (best.controls.empty()) {
    throw Infeasible("qp_oracle: no admissible control meets both terminal constraints");
  }
  return best;
}

std::vector<SweepRow> sweep(double M, double tf, const std::vector<double>& periods,
                            const SolverConfig& config) {
  std::vector<SweepRow> rows(periods.size());
  auto work = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.T = periods[i];
    try {
      const Instance inst(M, tf, row.T);
      row.K = inst.grid().size();
      row.cost_permanent = permanent_cost(M, tf);
      Solution sol = solve(M, tf, row.T, config);
      row.sup_dev = sup_deviation(M, tf, sol.extremal.grid, sol.controls);
      row.terminal_residual = sol.terminal_residual;
      row.max_pmp_residual = sol.certificate.max_interval_residual();
      row.cost_sampled = sol.cost;
      row.controls = std::move(sol.controls);
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(std::thread::hardware_concurrency(), periods.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < periods.size(); i = next++) work(i);
    });
  }
  pool.clear();
  return rows;
}

}  // namespace sampled_pmp::parking
