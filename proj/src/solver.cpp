#include "sampled_pmp/solver.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "sampled_pmp/detail/overloaded.hpp"
#include "sampled_pmp/errors.hpp"

namespace sampled_pmp {

using detail::Overloaded;

void SolverConfig::validate() const {
  if (inner_step && !(*inner_step > 0.0)) throw InvalidArgument("inner step must be > 0");
  if (!(inner_tol > 0.0) || !(outer_tol > 0.0) || !(fd_relative_step > 0.0)) {
    throw InvalidArgument("solver tolerances and steps must be > 0");
  }
  if (inner_max_iter < 1 || outer_max_iter < 1 || max_halvings < 1) {
    throw InvalidArgument("solver iteration limits must be >= 1");
  }
  if (substeps < 2 || substeps % 2 != 0) throw InvalidArgument("substeps must be even");
  if (!(certificate_tol >= 0.0)) throw InvalidArgument("certificate tolerance must be >= 0");
}

// ---------------------------------------------------------------------------
// Unknowns

Vector ShootingUnknowns::pack() const {
  const Eigen::Index n = p_init.size();
  const Eigen::Index size = n + (tf ? 1 : 0) + (q_init ? q_init->size() : 0);
  Vector out(size);
  out.head(n) = p_init;
  Eigen::Index at = n;
  if (tf) out[at++] = *tf;
  if (q_init) out.segment(at, q_init->size()) = *q_init;
  return out;
}

namespace {
bool is_periodic(const ProblemDefinition& problem) {
  return std::holds_alternative<Periodic>(problem.terminal);
}

Eigen::Index unknown_count(const ProblemDefinition& problem) {
  const int n = problem.state_dim;
  return n + (problem.free_final_time() ? 1 : 0) + (is_periodic(problem) ? n : 0);
}
}  // namespace

ShootingUnknowns ShootingUnknowns::unpack(const ProblemDefinition& problem,
                                          const Vector& packed) {
  if (packed.size() != unknown_count(problem)) {
    throw InvalidArgument("shooting unknowns: expected " +
                          std::to_string(unknown_count(problem)) + " values, got " +
                          std::to_string(packed.size()));
  }
  const int n = problem.state_dim;
  ShootingUnknowns out;
  out.p_init = packed.head(n);
  Eigen::Index at = n;
  if (problem.free_final_time()) out.tf = packed[at++];
  if (is_periodic(problem)) out.q_init = packed.segment(at, n);
  return out;
}

ShootingUnknowns ShootingUnknowns::initial_for(const ProblemDefinition& problem,
                                               std::optional<Vector> p_guess) {
  ShootingUnknowns out;
  out.p_init = p_guess ? *p_guess : Vector::Zero(problem.state_dim);
  if (problem.free_final_time()) out.tf = problem.nominal_final_time();
  if (const auto* per = std::get_if<Periodic>(&problem.terminal)) out.q_init = per->q0_guess;
  return out;
}

// ---------------------------------------------------------------------------
// Inner solve

Vector solve_interval_control(const ProblemDefinition& problem, double t_k, double delta,
                              const Vector& q_k, const Vector& p_k, double p0,
                              const Vector& u_init, double step,
                              const SolverConfig& config, InnerTrace* trace) {
  if (!(step > 0.0)) throw InvalidArgument("inner step must be > 0");
  if (!problem.control_set.contains(u_init)) {
    throw InvalidArgument("solve_interval_control: initial control outside the set");
  }
  Vector u = u_init;
  double last = 0.0;
  for (int it = 0; it < config.inner_max_iter; ++it) {
    const ExtremalInterval arc =
        integrate_extremal_interval(problem, t_k, delta, q_k, p_k, p0, u, config.substeps);
    const Vector g = interval_average_gradient(problem, arc, p0, u);
    const Vector next = problem.control_set.project(u + step * g);
    last = (next - u).norm();
    if (trace) {
      trace->iterates.push_back(u);
      trace->step_norms.push_back(last);
    }
    if (last <= config.inner_tol) return u;
    u = next;
  }
  throw NonConvergence("inner control iteration did not converge", u, last);
}

namespace {

Vector initial_state(const ProblemDefinition& problem, const ShootingUnknowns& unknowns) {
  if (auto q0 = fixed_initial_state(problem.terminal)) return *q0;
  if (!unknowns.q_init) throw InvalidArgument("periodic problem needs q(0) among the unknowns");
  return *unknowns.q_init;
}

Vector first_control(const ProblemDefinition& problem, const SolverConfig& config) {
  if (config.initial_control) return problem.control_set.project(*config.initial_control);
  return problem.control_set.project(Vector::Zero(problem.control_dim));
}

SamplingGrid effective_grid(const ProblemDefinition& problem, const SamplingGrid& grid,
                            const ShootingUnknowns& unknowns) {
  if (!problem.free_final_time()) return grid;
  if (!unknowns.tf) throw InvalidArgument("free final time needs tf among the unknowns");
  return build_grid(*unknowns.tf, grid.period());
}

}  // namespace

double estimate_inner_step(const ProblemDefinition& problem, const SamplingGrid& grid,
                           const ShootingUnknowns& unknowns, const SolverConfig& config) {
  const SamplingGrid g = effective_grid(problem, grid, unknowns);
  const Vector q0 = initial_state(problem, unknowns);
  const Vector u0 = first_control(problem, config);
  const double delta = g.length(0);
  auto gbar = [&](const Vector& u) {
    const ExtremalInterval arc = integrate_extremal_interval(
        problem, 0.0, delta, q0, unknowns.p_init, -1.0, u, config.substeps);
    return interval_average_gradient(problem, arc, -1.0, u);
  };
  const Vector g0 = gbar(u0);
  const int m = problem.control_dim;
  Matrix jac(m, m);
  const double h = 1e-6 * (1.0 + u0.norm());
  for (int j = 0; j < m; ++j) {
    Vector uj = u0;
    uj[j] += h;
    jac.col(j) = (gbar(uj) - g0) / h;
  }
  const double lipschitz = Eigen::JacobiSVD<Matrix>(jac).singularValues()(0);
  return lipschitz < 1e-12 ? 1.0 : 0.5 / lipschitz;
}

Shot shoot(const ProblemDefinition& problem, const SamplingGrid& grid,
           const ShootingUnknowns& unknowns, const SolverConfig& config,
           double inner_step) {
  if (std::holds_alternative<GeneralTerminal>(problem.terminal)) {
    throw UnsupportedCase("shooting does not handle general terminal data");
  }
  if (unknowns.p_init.size() != problem.state_dim) {
    throw InvalidArgument("shooting unknowns: p(0) has wrong dimension");
  }
  const SamplingGrid g = effective_grid(problem, grid, unknowns);
  const Vector q0 = initial_state(problem, unknowns);
  constexpr double p0 = -1.0;

  ControlSequence controls;
  controls.reserve(g.size());
  Vector q = q0;
  Vector p = unknowns.p_init;
  Vector u = first_control(problem, config);
  for (int k = 0; k < g.size(); ++k) {
    try {
      u = solve_interval_control(problem, g.start(k), g.length(k), q, p, p0, u, inner_step,
                                 config);
    } catch (const NonConvergence& e) {
      throw NonConvergence("interval " + std::to_string(k) + ": " + e.what(),
                           e.best_iterate(), e.residual(), k);
    }
    const ExtremalInterval arc = integrate_extremal_interval(problem, g.start(k), g.length(k),
                                                             q, p, p0, u, config.substeps);
    q = arc.nodes.q.back();
    p = arc.p.back();
    controls.push_back(u);
  }

  Shot shot{integrate_extremal_forward(problem, g, controls, q0, unknowns.p_init, p0,
                                       config.substeps),
            Vector()};
  const Vector& q_end = shot.extremal.trajectory.final_state();
  const Vector& p_end = shot.extremal.adjoint.final();
  const int n = problem.state_dim;
  Vector r = std::visit(
      Overloaded{[&](const FixedEndpoints& c) -> Vector { return q_end - c.qf; },
                 [&](const FixedInitialFreeFinal&) -> Vector { return p_end; },
                 [&](const Periodic&) -> Vector {
                   Vector out(2 * n);
                   out << q_end - q0, p_end - unknowns.p_init;
                   return out;
                 },
                 [&](const GeneralTerminal&) -> Vector { return {}; }},
      problem.terminal);
  if (problem.free_final_time()) {
    r.conservativeResize(r.size() + 1);
    const double tf = g.final_time();
    r[r.size() - 1] = hamiltonian(problem, tf, q_end, p_end, p0, controls.back());
  }
  shot.residual = std::move(r);
  return shot;
}

Vector shooting_residual(const ProblemDefinition& problem, const SamplingGrid& grid,
                         const ShootingUnknowns& unknowns, const SolverConfig& config) {
  config.validate();
  const double step =
      config.inner_step ? *config.inner_step
                        : estimate_inner_step(problem, grid, unknowns, config);
  return shoot(problem, grid, unknowns, config, step).residual;
}

// ---------------------------------------------------------------------------
// Newton

namespace {
constexpr double kRankThreshold = 1e-8;
constexpr double kMaxStepFactor = 1.0;
}  // namespace

NewtonReport newton_solve(const std::function<Vector(const Vector&)>& residual,
                          const Vector& x0, const NewtonOptions& options) {
  NewtonReport rep;
  Vector x = x0;
  Vector r = residual(x);
  rep.evaluations = 1;
  if (r.size() != x.size()) {
    throw InvalidArgument("newton: residual dimension differs from the unknowns");
  }
  const Eigen::Index dim = x.size();
  rep.residual_history.push_back(r.norm());

  auto stagnate = [&](const std::string& why) {
    throw NonConvergence("newton: " + why, x, r.norm(), -1, rep.residual_history,
                         rep.signatures);
  };

  // Difference quotients: 0 forward, 1 backward, 2 central. At a kink of a
  // piecewise-smooth residual the one-sided quotients see different pieces.
  auto fd_jacobian = [&](int scheme = 0) {
    Matrix J(dim, dim);
    const double h = options.fd_relative_step * (1.0 + x.norm());
    for (Eigen::Index i = 0; i < dim; ++i) {
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      if (scheme == 2) {
        rep.evaluations += 2;
        try {
          J.col(i) = (residual(xp) - residual(xm)) / (2.0 * h);
          continue;
        } catch (const std::exception&) {
        }
      }
      try {
        J.col(i) = scheme == 0 ? Vector((residual(xp) - r) / h) : Vector((r - residual(xm)) / h);
      } catch (const std::exception&) {
        J.col(i) = scheme == 0 ? Vector((r - residual(xm)) / h) : Vector((residual(xp) - r) / h);
        ++rep.evaluations;
      }
      ++rep.evaluations;
    }
    return J;
  };

  Matrix J;
  bool fresh_jacobian = false;
  for (int iter = 0;; ++iter) {
    if (r.norm() <= options.tol) break;
    if (iter >= options.max_iter) stagnate("iteration limit reached");
    if (!options.use_broyden || J.size() == 0) {
      J = fd_jacobian();
      fresh_jacobian = true;
    }

    bool accepted = false;
    int scheme = 0;
    for (int attempt = 0; attempt < 4 && !accepted; ++attempt) {
      Vector step;
      if (options.levenberg_first_step && iter == 0) {
        const Matrix normal = J.transpose() * J;
        const double mu = 1e-3 * std::max(normal.diagonal().maxCoeff(), 1e-12);
        step = -(normal + mu * Matrix::Identity(dim, dim)).ldlt().solve(J.transpose() * r);
      } else {
        // Directions the difference quotients cannot resolve are dropped.
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(J.rows(), J.cols());
        cod.setThreshold(kRankThreshold);
        cod.compute(J);
        step = -cod.solve(r);
      }

      // Steps are capped so a bad linearisation cannot throw the iterate into
      // a region where every control saturates and the Jacobian vanishes.
      const double cap = kMaxStepFactor * (1.0 + x.norm());
      if (step.allFinite() && step.norm() > cap) step *= cap / step.norm();
      bool usable = step.allFinite() && step.norm() > 1e-15 * (1.0 + x.norm());
      if (usable) {
        const double f0 = r.squaredNorm();
        double lambda = 1.0;
        for (int halving = 0; halving <= options.max_halvings; ++halving, lambda *= 0.5) {
          const Vector trial = x + lambda * step;
          Vector r_trial;
          try {
            r_trial = residual(trial);
            ++rep.evaluations;
          } catch (const std::exception&) {
            ++rep.evaluations;
            continue;
          }
          if (r_trial.allFinite() && r_trial.squaredNorm() <= (1.0 - 1e-4 * lambda) * f0) {
            if (options.use_broyden) {
              const Vector dx = trial - x;
              J += ((r_trial - r) - J * dx) * dx.transpose() / dx.squaredNorm();
            }
            x = trial;
            r = std::move(r_trial);
            accepted = true;
            break;
          }
        }
      }
      if (accepted) break;
      if (!fresh_jacobian) {
        J = fd_jacobian(scheme);
        fresh_jacobian = true;
      } else if (scheme < 2) {
        J = fd_jacobian(++scheme);
      } else {
        break;
      }
    }
    if (!accepted) stagnate("no residual decrease after line search");
    fresh_jacobian = false;

    rep.iterations = iter + 1;
    if (options.describe) rep.signatures.push_back(options.describe(x));
    if (options.adjust && options.adjust(x)) {
      r = residual(x);
      ++rep.evaluations;
      J.resize(0, 0);
    }
    rep.residual_history.push_back(r.norm());
  }
  rep.solution = x;
  rep.residual = r;
  return rep;
}

std::string active_set_signature(const ControlSet& set, const ControlSequence& controls) {
  std::string sig;
  for (std::size_t k = 0; k < controls.size(); ++k) {
    const Vector& u = controls[k];
    if (k > 0 && u.size() > 1) sig += '|';
    if (set.is_box()) {
      const auto& b = set.as_box();
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double tol = 1e-12 * (1.0 + std::abs(u[i]));
        sig += u[i] <= b.lower[i] + tol ? '-' : (u[i] >= b.upper[i] - tol ? '+' : '0');
      }
    } else {
      const auto& b = set.as_ball();
      sig += (u - b.center).norm() >= b.radius - 1e-12 ? 'b' : '0';
    }
  }
  return sig;
}

SolveResult solve(const ProblemDefinition& problem, const SamplingGrid& grid,
                  const ShootingUnknowns& initial, const SolverConfig& config) {
  problem.validate();
  config.validate();
  if (std::holds_alternative<GeneralTerminal>(problem.terminal)) {
    throw UnsupportedCase("solve: general terminal data is verification-only");
  }
  const Vector x0 = initial.pack();
  if (x0.size() != unknown_count(problem)) {
    throw InvalidArgument("solve: initial unknowns do not match the problem layout");
  }

  const double step =
      config.inner_step ? *config.inner_step : estimate_inner_step(problem, grid, initial, config);

  std::string last_signature;
  auto residual = [&](const Vector& x) {
    Shot s = shoot(problem, grid, ShootingUnknowns::unpack(problem, x), config, step);
    last_signature = active_set_signature(problem.control_set, s.extremal.controls);
    return s.residual;
  };

  NewtonOptions opts;
  opts.tol = config.outer_tol;
  opts.max_iter = config.outer_max_iter;
  opts.fd_relative_step = config.fd_relative_step;
  opts.max_halvings = config.max_halvings;
  opts.use_broyden = config.use_broyden;
  opts.levenberg_first_step =
      config.levenberg_first_step.value_or(initial.p_init.isZero(0.0));
  opts.describe = [&](const Vector&) { return last_signature; };
  if (problem.free_final_time()) {
    const double T = grid.period();
    const Eigen::Index tf_at = problem.state_dim;
    // The final control index jumps when tf crosses a multiple of T; keep
    // iterates off the multiples so the difference quotients stay one-sided.
    opts.adjust = [T, tf_at](Vector& x) {
      const double r = x[tf_at] / T;
      if (std::abs(r - std::round(r)) < kIndexSnap) {
        x[tf_at] += 1e-6 * T;
        return true;
      }
      return false;
    };
  }

  NewtonReport report = newton_solve(residual, x0, opts);
  ShootingUnknowns found = ShootingUnknowns::unpack(problem, report.solution);
  Shot shot = shoot(problem, grid, found, config, step);
  Certificate cert = check_certificate(problem, shot.extremal, config.certificate_tol);
  if (!cert.pass) {
    std::string what = "converged extremal fails its certificate:";
    for (const auto& v : cert.violations) what += " [" + v + "]";
    throw InternalInconsistency(what);
  }
  return SolveResult{std::move(shot.extremal), std::move(cert), std::move(found),
                     std::move(report), step};
}

}  // namespace sampled_pmp
